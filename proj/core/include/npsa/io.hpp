#pragma once

#include "npsa/experiments.hpp"
#include "npsa/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace npsa {

const char* version();

/// "%.17g"; non-finite values print as nan, inf and -inf.
std::string format_double(double value);

/// Writes through a temporary file in the same directory, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Comma-separated table with a header row and LF line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Fixed column orders:
//   coefficients: index,unconstrained,linear,nonlinear
//   trace:        iteration,worst_sdist,step_dist,norm
//   samples (1-D): x,u,v,v_lc,v_nc      samples (2-D): x,y,u,v,v_lc,v_nc
//   results:      see result_columns()
std::string coefficients_csv(const CoefVec& unconstrained, const CoefVec& linear, const CoefVec& nonlinear);
std::string trace_csv(const IterationTrace& trace);
std::string samples_csv(const Target& target, const CoefVec& v, const CoefVec& v_lc, const CoefVec& v_nc,
                        int points_per_axis);
const std::vector<std::string>& result_columns();
std::string results_csv(const std::vector<ResultRow>& rows);

/// Minimal JSON object writer; doubles use format_double, non-finite ones become null.
class JsonObject {
public:
    JsonObject& add(const std::string& key, double value);
    JsonObject& add(const std::string& key, int value);
    JsonObject& add(const std::string& key, std::uint64_t value);
    JsonObject& add(const std::string& key, bool value);
    JsonObject& add(const std::string& key, const std::string& value);
    JsonObject& add(const std::string& key, const char* value) { return add(key, std::string(value)); }
    JsonObject& add_raw(const std::string& key, std::string json);
    std::string str() const;

private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

std::string row_json(const ResultRow& row);

struct RunManifest {
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::string tool_version;
    std::string timestamp;  // UTC, ISO 8601
};

std::string manifest_json(const RunManifest& m);
std::string utc_timestamp();

}  // namespace npsa
