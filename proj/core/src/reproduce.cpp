#include "npsa/reproduce.hpp"

#include "npsa/errors.hpp"
#include "npsa/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace npsa {

namespace {

GoldenCheck within(std::string cell, std::string quantity, double reference, double lo, double hi, double actual) {
    return {std::move(cell), std::move(quantity), reference, lo, hi, actual, actual >= lo && actual <= hi};
}

GoldenCheck absolute(std::string cell, std::string quantity, double reference, double tol, double actual) {
    return within(std::move(cell), std::move(quantity), reference, reference - tol, reference + tol, actual);
}

GoldenCheck factor(std::string cell, std::string quantity, double reference, double f, double actual) {
    return within(std::move(cell), std::move(quantity), reference, reference / f, reference * f, actual);
}

struct Table1Cell {
    int n;
    SolverKind solver;
    int iterations;
    double eta;
};

constexpr Table1Cell kTable1[] = {
    {6, SolverKind::greedy, 17, 1.1479},  {6, SolverKind::average, 87, 1.1483},
    {6, SolverKind::hybrid, 15, 1.1494},  {31, SolverKind::greedy, 23, 0.9859},
    {31, SolverKind::average, 220, 0.9856}, {31, SolverKind::hybrid, 22, 0.9885},
};

constexpr std::pair<int, double> kTable3[] = {{6, 8.51e-4}, {16, 7.48e-5}, {31, 3.38e-7},
                                              {51, 8.3e-6}, {76, 1.61e-6}, {151, 8.22e-8}};

ReproductionReport run_table1() {
    ReproductionReport rep{"table1", {}, {}};
    for (const Table1Cell& c : kTable1) {
        const ResultRow row = run_experiment(presets::positivity_1d(TestFunctionId::quad_u2, 0, c.n, c.solver)).row;
        const std::string cell = to_string(c.solver) + " N=" + std::to_string(c.n);
        rep.checks.push_back(absolute(cell, "eta_nc", c.eta, 0.01, row.eta_nc));
        rep.checks.push_back(factor(cell, "iterations", c.iterations, 2.0, row.iterations));
        rep.rows.push_back(row);
    }
    return rep;
}

ReproductionReport run_table2() {
    ReproductionReport rep{"table2", {}, {}};
    for (const ExperimentSpec& spec : presets::table2()) {
        const bool h0_31 = spec.space.order == 0 && spec.basis.dimension == 31;
        const bool h2 = spec.space.order == 2;
        if (!h0_31 && !h2) continue;
        const ResultRow row = run_experiment(spec).row;
        const std::string cell = "H" + std::to_string(spec.space.order) + " N=" + std::to_string(spec.basis.dimension);
        if (h2) {
            rep.checks.push_back(within(cell, "converged", 1.0, 1.0, 1.0, row.converged ? 1.0 : 0.0));
        } else {
            rep.checks.push_back(within(cell, "converged", 0.0, 0.0, 0.0, row.converged ? 1.0 : 0.0));
            rep.checks.push_back(within(cell, "|min v''|", 3.06e-2, 1e-3, 1e-1, std::abs(row.min_d2v)));
        }
        rep.rows.push_back(row);
    }
    return rep;
}

ReproductionReport run_table3() {
    ReproductionReport rep{"table3", {}, {}};
    for (const auto& [n, gap] : kTable3) {
        const ResultRow row = run_experiment(presets::positivity_1d(TestFunctionId::oscillatory, 0, n, SolverKind::greedy)).row;
        rep.checks.push_back(factor("N=" + std::to_string(n), "||v_lc - v_nc||", gap, 10.0, row.lc_nc_gap));
        rep.rows.push_back(row);
    }
    const double ratio = rep.rows.back().lc_nc_gap / rep.rows.front().lc_nc_gap;
    rep.checks.push_back(within("N=151 / N=6", "gap ratio", kTable3[5].second / kTable3[0].second, 0.0, 1e-3, ratio));
    return rep;
}

ReproductionReport run_cylinder() {
    ReproductionReport rep{"cylinder", {}, {}};
    const CylinderOutcome out = run_2d_cylinder(15);
    const ResultRow& row = out.experiment.row;
    rep.checks.push_back(within("N=15x15", "eta_lc", 0.1229, 0.11, 0.14, row.eta_lc));
    rep.checks.push_back(within("N=15x15", "eta_nc", 0.1230, 0.11, 0.14, row.eta_nc));
    rep.checks.push_back(within("N=15x15", "||v_lc - v_nc||", 0.0030, 1e-3, 1e-2, row.lc_nc_gap));
    rep.mask_unconstrained = out.unconstrained.count();
    rep.mask_linear = out.linear.count();
    rep.mask_nonlinear = out.nonlinear.count();
    rep.checks.push_back(
        within("N=15x15", "negative points of v_nc", 0.0, 0.0, 0.0, static_cast<double>(rep.mask_nonlinear)));
    rep.rows.push_back(row);
    return rep;
}

}  // namespace

bool ReproductionReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const GoldenCheck& c) { return c.pass; });
}

const std::vector<std::string>& reproducible_tables() {
    static const std::vector<std::string> ids = {"table1", "table2", "table3", "cylinder"};
    return ids;
}

ReproductionReport reproduce(const std::string& table_id) {
    if (table_id == "table1") return run_table1();
    if (table_id == "table2") return run_table2();
    if (table_id == "table3") return run_table3();
    if (table_id == "cylinder") return run_cylinder();
    throw DomainError("unknown table '" + table_id + "' (expected table1, table2, table3 or cylinder)");
}

std::string format_report(const ReproductionReport& report) {
    std::string out;
    char line[256];
    for (const GoldenCheck& c : report.checks) {
        std::snprintf(line, sizeof line, "%-4s %-8s %-14s %-26s actual=%-12.6g reference=%-10.4g range=[%.4g, %.4g]\n",
                      c.pass ? "ok" : "FAIL", report.table.c_str(), c.cell.c_str(), c.quantity.c_str(), c.actual,
                      c.reference, c.lo, c.hi);
        out += line;
    }
    std::snprintf(line, sizeof line, "%s: %zu/%zu checks within tolerance\n", report.table.c_str(),
                  static_cast<std::size_t>(std::count_if(report.checks.begin(), report.checks.end(),
                                                         [](const GoldenCheck& c) { return c.pass; })),
                  report.checks.size());
    out += line;
    return out;
}

}  // namespace npsa
