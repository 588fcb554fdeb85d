#include "npsa/io.hpp"

#include "npsa/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <system_error>

#ifndef NPSA_VERSION
#define NPSA_VERSION "0.0.0"
#endif

namespace npsa {

const char* version() { return NPSA_VERSION; }

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename " + tmp.string() + ": " + ec.message());
    }
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw Error("CsvTable: row width differs from the header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

std::string coefficients_csv(const CoefVec& unconstrained, const CoefVec& linear, const CoefVec& nonlinear) {
    CsvTable t({"index", "unconstrained", "linear", "nonlinear"});
    auto at = [](const CoefVec& c, Eigen::Index i) {
        return i < c.values.size() ? format_double(c.values[i]) : std::string("nan");
    };
    for (Eigen::Index i = 0; i < unconstrained.values.size(); ++i)
        t.add_row({std::to_string(i), at(unconstrained, i), at(linear, i), at(nonlinear, i)});
    return t.str();
}

std::string trace_csv(const IterationTrace& trace) {
    CsvTable t({"iteration", "worst_sdist", "step_dist", "norm"});
    for (const auto& r : trace)
        t.add_row({std::to_string(r.iteration), format_double(r.worst_sdist), format_double(r.step_dist),
                   format_double(r.norm)});
    return t.str();
}

std::string samples_csv(const Target& target, const CoefVec& v, const CoefVec& v_lc, const CoefVec& v_nc,
                        int points_per_axis) {
    if (points_per_axis < 2) throw Error("samples_csv: need at least two points");
    const HilbertSpec& space = v.basis->space();
    auto value = [](const CoefVec& c, const Point& p) {
        return c.basis ? format_double(synthesize(c, p)) : std::string("nan");
    };
    auto coord = [&](int i) { return space.lo + (space.hi - space.lo) * i / (points_per_axis - 1); };
    if (v.basis->dims() == 1) {
        CsvTable t({"x", "u", "v", "v_lc", "v_nc"});
        for (int i = 0; i < points_per_axis; ++i) {
            const Point p{coord(i), 0.0};
            t.add_row({format_double(p.x), format_double(target.value(p, 0)), value(v, p), value(v_lc, p),
                       value(v_nc, p)});
        }
        return t.str();
    }
    CsvTable t({"x", "y", "u", "v", "v_lc", "v_nc"});
    for (int j = 0; j < points_per_axis; ++j)
        for (int i = 0; i < points_per_axis; ++i) {
            const Point p{coord(i), coord(j)};
            t.add_row({format_double(p.x), format_double(p.y), format_double(target.value(p, 0)), value(v, p),
                       value(v_lc, p), value(v_nc, p)});
        }
    return t.str();
}

const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> cols = {
        "name",        "N",       "solver",         "iterations", "converged", "eta_nc",        "eta_lc",
        "lc_nc_gap",   "min_v",   "min_dv",         "min_d2v",    "err_v",     "err_nc",        "err_lc",
        "norm_deviation", "energy_nc", "energy_lc", "lc_iterations", "lc_converged", "error"};
    return cols;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
    CsvTable t(result_columns());
    for (const auto& r : rows) {
        std::string err = r.error;
        for (char& c : err)
            if (c == ',' || c == '\n' || c == '"') c = ' ';
        t.add_row({r.name, std::to_string(r.n), to_string(r.solver), std::to_string(r.iterations),
                   r.converged ? "1" : "0", format_double(r.eta_nc), format_double(r.eta_lc),
                   format_double(r.lc_nc_gap), format_double(r.min_v), format_double(r.min_dv),
                   format_double(r.min_d2v), format_double(r.err_unconstrained), format_double(r.err_nc),
                   format_double(r.err_lc), format_double(r.norm_deviation), format_double(r.energy_nc),
                   format_double(r.energy_lc), std::to_string(r.lc_iterations), r.lc_converged ? "1" : "0", err});
    }
    return t.str();
}

JsonObject& JsonObject::add(const std::string& key, double value) {
    fields_.emplace_back(key, std::isfinite(value) ? format_double(value) : "null");
    return *this;
}

JsonObject& JsonObject::add(const std::string& key, int value) {
    fields_.emplace_back(key, std::to_string(value));
    return *this;
}

JsonObject& JsonObject::add(const std::string& key, std::uint64_t value) {
    fields_.emplace_back(key, std::to_string(value));
    return *this;
}

JsonObject& JsonObject::add(const std::string& key, bool value) {
    fields_.emplace_back(key, value ? "true" : "false");
    return *this;
}

JsonObject& JsonObject::add(const std::string& key, const std::string& value) {
    fields_.emplace_back(key, nlohmann::json(value).dump());
    return *this;
}

JsonObject& JsonObject::add_raw(const std::string& key, std::string json) {
    fields_.emplace_back(key, std::move(json));
    return *this;
}

std::string JsonObject::str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
        out += i ? ",\n  " : "\n  ";
        out += nlohmann::json(fields_[i].first).dump() + ": " + fields_[i].second;
    }
    out += fields_.empty() ? "}" : "\n}";
    return out;
}

std::string row_json(const ResultRow& r) {
    JsonObject o;
    o.add("name", r.name)
        .add("N", r.n)
        .add("solver", to_string(r.solver))
        .add("iterations", r.iterations)
        .add("converged", r.converged)
        .add("eta_nc", r.eta_nc)
        .add("eta_lc", r.eta_lc)
        .add("lc_nc_gap", r.lc_nc_gap)
        .add("min_v", r.min_v)
        .add("min_dv", r.min_dv)
        .add("min_d2v", r.min_d2v)
        .add("err_v", r.err_unconstrained)
        .add("err_nc", r.err_nc)
        .add("err_lc", r.err_lc)
        .add("norm_deviation", r.norm_deviation)
        .add("energy_nc", r.energy_nc)
        .add("energy_lc", r.energy_lc)
        .add("lc_iterations", r.lc_iterations)
        .add("lc_converged", r.lc_converged)
        .add("wall_seconds", r.wall_seconds)
        .add("error", r.error);
    return o.str();
}

std::string manifest_json(const RunManifest& m) {
    JsonObject o;
    o.add("config_path", m.config_path)
        .add("output_dir", m.output_dir)
        .add("seed", m.seed)
        .add("tool_version", m.tool_version)
        .add("timestamp", m.timestamp);
    return o.str();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace npsa
