#include "commands.hpp"

#include "npsa/config.hpp"
#include "npsa/errors.hpp"
#include "npsa/io.hpp"
#include "npsa/reproduce.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

namespace npsa::cli {

namespace fs = std::filesystem;

namespace {

RunConfig load(const RunOptions& opts) {
    RunConfig cfg = load_config(opts.config_path);
    if (opts.out_dir) cfg.output_dir = *opts.out_dir;
    if (opts.seed) cfg.experiment.config.search.seed = *opts.seed;
    if (opts.solver) {
        try {
            cfg.experiment.solver = solver_kind_from_string(*opts.solver);
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    return cfg;
}

void write_manifest(const RunConfig& cfg, const RunOptions& opts) {
    RunManifest m{opts.config_path, cfg.output_dir, cfg.experiment.config.search.seed, version(), utc_timestamp()};
    write_file_atomic(fs::path(cfg.output_dir) / "manifest.json", manifest_json(m) + "\n");
}

void log_row(const ResultRow& r) {
    spdlog::info("{}: N={} iterations={} converged={} eta_nc={:.6g} eta_lc={:.6g} gap={:.3e} ({:.2f}s)", r.name, r.n,
                 r.iterations, r.converged, r.eta_nc, r.eta_lc, r.lc_nc_gap, r.wall_seconds);
    if (!r.error.empty()) spdlog::error("{}: {}", r.name, r.error);
}

}  // namespace

int cmd_approximate(const RunOptions& opts) {
    const RunConfig cfg = load(opts);
    spdlog::debug("running {}", cfg.experiment.name);
    const ExperimentOutcome out = run_experiment(cfg.experiment);
    log_row(out.row);

    const fs::path dir(cfg.output_dir);
    write_file_atomic(dir / "coefficients.csv",
                      coefficients_csv(out.unconstrained, out.linear.coeffs, out.nonlinear.coeffs));
    write_file_atomic(dir / "trace.csv", trace_csv(out.nonlinear.trace));
    write_file_atomic(dir / "samples.csv", samples_csv(out.target, out.unconstrained, out.linear.coeffs,
                                                       out.nonlinear.coeffs, cfg.sample_points));
    write_file_atomic(dir / "metrics.json", row_json(out.row) + "\n");
    write_manifest(cfg, opts);

    if (!out.row.error.empty() || !out.row.converged) {
        spdlog::warn("{} did not converge within {} iterations", cfg.experiment.name, cfg.experiment.config.max_iter);
        return kNotConverged;
    }
    return kOk;
}

int cmd_sweep(const RunOptions& opts) {
    const RunConfig cfg = load(opts);
    std::vector<int> dims = cfg.sweep_dimensions;
    if (dims.empty()) dims = {cfg.experiment.basis.dimension};
    const SweepTable table = convergence_sweep(cfg.experiment, dims);
    for (const auto& r : table.rows) log_row(r);

    const fs::path dir(cfg.output_dir);
    write_file_atomic(dir / "results.csv", results_csv(table.rows));
    JsonObject summary;
    summary.add("slope_unconstrained", table.slope_unconstrained)
        .add("slope_nc", table.slope_nc)
        .add("slope_lc", table.slope_lc)
        .add("slope_ratio_nc", table.slope_nc / table.slope_unconstrained);
    write_file_atomic(dir / "slopes.json", summary.str() + "\n");
    write_manifest(cfg, opts);

    for (const auto& r : table.rows)
        if (!r.converged || !r.error.empty()) return kNotConverged;
    return kOk;
}

int cmd_reproduce(const std::string& table_id, const std::optional<std::string>& out_dir) {
    std::vector<std::string> ids;
    if (table_id == "all") ids = reproducible_tables();
    else ids = {table_id};
    for (const auto& id : ids) {
        const auto& known = reproducible_tables();
        if (std::find(known.begin(), known.end(), id) == known.end())
            throw ConfigError("unknown table '" + id + "' (expected table1, table2, table3, cylinder or all)");
    }

    bool all_passed = true;
    for (const auto& id : ids) {
        spdlog::info("reproducing {}", id);
        const ReproductionReport rep = reproduce(id);
        for (const auto& r : rep.rows) log_row(r);
        const std::string text = format_report(rep);
        std::cout << text << std::flush;
        if (out_dir) {
            write_file_atomic(fs::path(*out_dir) / (id + ".csv"), results_csv(rep.rows));
            write_file_atomic(fs::path(*out_dir) / (id + "_report.txt"), text);
        }
        all_passed = all_passed && rep.passed();
    }
    return all_passed ? kOk : kReproductionFailed;
}

}  // namespace npsa::cli
