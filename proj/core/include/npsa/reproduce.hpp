#pragma once

#include "npsa/experiments.hpp"

#include <string>
#include <vector>

namespace npsa {

/// One compared quantity: passes iff lo <= actual <= hi.
struct GoldenCheck {
    std::string cell;
    std::string quantity;
    double reference = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double actual = 0.0;
    bool pass = false;
};

struct ReproductionReport {
    std::string table;
    std::vector<ResultRow> rows;
    std::vector<GoldenCheck> checks;
    /// Extra mask counts for the cylinder run (negative points on the report grid).
    std::size_t mask_unconstrained = 0, mask_linear = 0, mask_nonlinear = 0;

    bool passed() const;
};

/// table1, table2, table3, cylinder
const std::vector<std::string>& reproducible_tables();

ReproductionReport reproduce(const std::string& table_id);

/// Human-readable diff report, one line per check.
std::string format_report(const ReproductionReport& report);

}  // namespace npsa
