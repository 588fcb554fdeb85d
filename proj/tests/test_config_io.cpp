#include "npsa/config.hpp"
#include "npsa/errors.hpp"
#include "npsa/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace npsa;

namespace {

std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string header_of(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const RunConfig c = parse_config(R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}})");
    CHECK(c.experiment.target == TestFunctionId::quad_u2);
    CHECK(c.experiment.basis.dimension == 6);
    CHECK(c.experiment.space.lo == -1.0);
    CHECK(c.experiment.space.hi == 1.0);
    CHECK(c.experiment.solver == SolverKind::greedy);
    CHECK(c.experiment.config.max_iter == 10000);
    CHECK(c.output_dir == "out");
    CHECK(c.sample_points == 1001);
}

TEST_CASE("m_shape space defaults to its own interval") {
    const RunConfig c = parse_config(R"({"target": "m_shape", "basis": {"family": "cosine", "dimension": 16}})");
    CHECK(c.experiment.space.lo == 0.0);
    CHECK(c.experiment.space.hi == doctest::Approx(3.141592653589793));
}

TEST_CASE("config round trip") {
    const RunConfig c = parse_config(R"({
        "name": "rt",
        "target": "step_u0",
        "space": {"order": 0},
        "basis": {"family": "polynomial", "dimension": 31},
        "constraints": [{"type": "positivity"}, {"type": "upper_bound", "bound": 1.0, "domain": [-0.5, 1]}],
        "solver": "hybrid",
        "solver_config": {"delta": 1e-9, "max_iter": 77, "search": {"grid_1d": 513, "seed": 7}},
        "sweep": {"dimensions": [6, 11]},
        "output": {"dir": "somewhere", "samples": 33}
    })");
    const std::string once = dump_config(c);
    const RunConfig d = parse_config(once);
    CHECK(dump_config(d) == once);
    CHECK(d.experiment.name == "rt");
    CHECK(d.experiment.solver == SolverKind::hybrid);
    REQUIRE(d.experiment.families.size() == 2);
    CHECK(d.experiment.families[1].sense == BoundSense::upper);
    CHECK(d.experiment.families[1].bound == 1.0);
    CHECK(d.experiment.families[1].domain.x_lo == -0.5);
    CHECK(d.experiment.config.delta == 1e-9);
    CHECK(d.experiment.config.max_iter == 77);
    CHECK(d.experiment.config.search.grid_1d == 513);
    CHECK(d.experiment.config.search.seed == 7);
    CHECK(d.sweep_dimensions == std::vector<int>{6, 11});
    CHECK(d.output_dir == "somewhere");
    CHECK(d.sample_points == 33);
}

TEST_CASE("bad configs are rejected") {
    const char* bad[] = {
        "not json",
        R"({"basis": {"family": "polynomial", "dimension": 6}})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}, "colour": 1})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6, "extra": 0}})",
        R"({"target": "sawtooth", "basis": {"family": "polynomial", "dimension": 6}})",
        R"({"target": "quad_u2", "basis": {"family": "wavelet", "dimension": 6}})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 0}})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}, "solver": "newton"})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}, "constraints": [{"type": "sparsity"}]})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}, "constraints": [{"type": "positivity", "bound": 2}]})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}, "constraints": [{"type": "positivity", "domain": [0]}]})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}, "solver_config": {"delta": -1}})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}, "output": {"samples": 1}})",
        R"({"target": "quad_u2", "basis": {"family": "polynomial", "dimension": 6}, "space": {"lo": 0, "hi": 3}})",
        R"({"target": "step_u0", "space": {"order": 2}, "basis": {"family": "polynomial", "dimension": 6}})",
    };
    for (const char* text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("double formatting") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv layout") {
    CsvTable t({"a", "b"});
    t.add_row({"1", "2"});
    t.add_row({"3", "4"});
    CHECK(t.str() == "a,b\n1,2\n3,4\n");
    CHECK(t.rows() == 2);
    CHECK_THROWS(t.add_row({"5"}));

    IterationTrace trace = {{1, -0.5, 0.25, 1.0}};
    CHECK(trace_csv(trace) == "iteration,worst_sdist,step_dist,norm\n1,-0.5,0.25,1\n");
    CHECK(header_of(trace_csv({})) == "iteration,worst_sdist,step_dist,norm");

    ResultRow row;
    row.name = "x";
    const std::string res = results_csv({row});
    std::string joined;
    for (const auto& c : result_columns()) joined += (joined.empty() ? "" : ",") + c;
    CHECK(header_of(res) == joined);
}

TEST_CASE("json writer") {
    JsonObject j;
    j.add("a", 1.5).add("b", std::numeric_limits<double>::infinity()).add("c", true).add("d", "q\"uote").add("e", 3);
    const nlohmann::json parsed = nlohmann::json::parse(j.str());
    CHECK(parsed.at("a").get<double>() == 1.5);
    CHECK(parsed.at("b").is_null());
    CHECK(parsed.at("c").get<bool>());
    CHECK(parsed.at("d").get<std::string>() == "q\"uote");
    CHECK(parsed.at("e").get<int>() == 3);
}

TEST_CASE("atomic file write") {
    const auto dir = std::filesystem::temp_directory_path() / "npsa_io_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    CHECK(read_all(path) == "second");
    int files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    std::filesystem::remove_all(dir);
}
