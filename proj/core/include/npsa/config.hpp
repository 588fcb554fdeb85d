#pragma once

#include "npsa/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace npsa {

/// Contents of an experiment configuration file. The on-disk format is JSON:
///
///   {
///     "name": "u2-positivity",
///     "target": "quad_u2",                  // step_u0 ramp_u1 quad_u2 oscillatory m_shape cylinder2d
///     "space": {"order": 0, "lo": -1, "hi": 1},   // lo/hi default to the target's domain
///     "basis": {"family": "polynomial", "dimension": 6},
///     "constraints": [{"type": "positivity"}, {"type": "upper_bound", "bound": 1.0, "domain": [-1, 1]}],
///     "solver": "greedy",
///     "solver_config": {"delta": 1e-10, "max_iter": 10000, "hybrid_threshold": 1e-6,
///                       "quad_order_per_region": 32, "karcher_tol": 1e-12, "perturb_on_parallel": false,
///                       "search": {"grid_1d": 2049, "grid_2d": 129, "check_factor": 10,
///                                  "refine_tol": 1e-12, "multistarts": 8, "seed": 42}},
///     "sweep": {"dimensions": [6, 11, 16]},
///     "output": {"dir": "out", "samples": 1001}
///   }
///
/// Every section but "target" and "basis" is optional; unknown keys are rejected.
/// Constraint types: positivity, monotonicity, convexity, upper_bound, lower_bound.
/// "domain" is [lo, hi] or [x_lo, x_hi, y_lo, y_hi] and defaults to the whole domain.
struct RunConfig {
    ExperimentSpec experiment;
    std::vector<int> sweep_dimensions;
    std::string output_dir = "out";
    int sample_points = 1001;  // per axis for 2-D targets
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& cfg);

}  // namespace npsa
