#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace npsa::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kNotConverged = 2,
    kReproductionFailed = 3,
};

struct RunOptions {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> solver;
};

int cmd_approximate(const RunOptions& opts);
int cmd_sweep(const RunOptions& opts);
int cmd_reproduce(const std::string& table_id, const std::optional<std::string>& out_dir);

}  // namespace npsa::cli
