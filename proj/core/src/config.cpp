#include "npsa/config.hpp"

#include "npsa/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace npsa {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("'") + key + "': " + e.what());
    }
}

Domain parse_domain(const json& j, const Domain& whole) {
    std::vector<double> v;
    try {
        v = j.get<std::vector<double>>();
    } catch (const json::exception&) {
        throw ConfigError("constraint domain must be an array of numbers");
    }
    if (whole.dims == 1 && v.size() == 2) return Domain::interval(v[0], v[1]);
    if (whole.dims == 2 && v.size() == 4) return Domain::rectangle(v[0], v[1], v[2], v[3]);
    throw ConfigError("constraint domain has the wrong number of entries");
}

ConstraintFamily parse_family(const json& j, const Domain& whole) {
    check_keys(j, "constraint", {"type", "bound", "domain"});
    std::string type;
    read(j, "type", type);
    double bound = 0.0;
    read(j, "bound", bound);
    const Domain d = j.contains("domain") ? parse_domain(j.at("domain"), whole) : whole;
    ConstraintFamily fam;
    if (type == "positivity") fam = ConstraintFamily::positivity(d);
    else if (type == "monotonicity") fam = ConstraintFamily::monotonicity(d);
    else if (type == "convexity") fam = ConstraintFamily::convexity(d);
    else if (type == "upper_bound") fam = ConstraintFamily::upper_bound(d, bound);
    else if (type == "lower_bound") fam = {0, BoundSense::lower, bound, d, "lower_bound"};
    else throw ConfigError("unknown constraint type '" + type + "'");
    if (j.contains("bound") && (type == "positivity" || type == "monotonicity" || type == "convexity"))
        throw ConfigError("constraint type '" + type + "' takes no bound");
    return fam;
}

json family_json(const ConstraintFamily& fam) {
    json j;
    if (fam.sense == BoundSense::lower && fam.bound == 0.0) {
        static const char* names[] = {"positivity", "monotonicity", "convexity"};
        j["type"] = names[fam.deriv_order];
    } else if (fam.deriv_order == 0) {
        j["type"] = fam.sense == BoundSense::upper ? "upper_bound" : "lower_bound";
        j["bound"] = fam.bound;
    } else {
        throw ConfigError("constraint family '" + fam.label + "' has no configuration form");
    }
    if (fam.domain.dims == 1) j["domain"] = {fam.domain.x_lo, fam.domain.x_hi};
    else j["domain"] = {fam.domain.x_lo, fam.domain.x_hi, fam.domain.y_lo, fam.domain.y_hi};
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"name", "target", "space", "basis", "constraints", "solver", "solver_config", "sweep", "output"});
    if (!root.contains("target") || !root.contains("basis")) throw ConfigError("config needs 'target' and 'basis'");

    RunConfig cfg;
    ExperimentSpec& spec = cfg.experiment;
    std::string target;
    read(root, "target", target);
    try {
        spec.target = test_function_from_string(target);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    spec.space = natural_interval(spec.target);
    if (root.contains("space")) {
        const json& s = root.at("space");
        check_keys(s, "space", {"order", "lo", "hi"});
        read(s, "order", spec.space.order);
        read(s, "lo", spec.space.lo);
        read(s, "hi", spec.space.hi);
    }

    const json& b = root.at("basis");
    check_keys(b, "basis", {"family", "dimension"});
    std::string family = spec.target == TestFunctionId::cylinder2d ? "tensor_polynomial_2d" : "polynomial";
    read(b, "family", family);
    read(b, "dimension", spec.basis.dimension);
    try {
        spec.basis.family = basis_family_from_string(family);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    const Domain whole = spec.target == TestFunctionId::cylinder2d
                             ? Domain::rectangle(spec.space.lo, spec.space.hi, spec.space.lo, spec.space.hi)
                             : Domain::interval(spec.space.lo, spec.space.hi);
    if (root.contains("constraints")) {
        if (!root.at("constraints").is_array()) throw ConfigError("'constraints' must be an array");
        for (const json& f : root.at("constraints")) spec.families.push_back(parse_family(f, whole));
    } else {
        spec.families = {ConstraintFamily::positivity(whole)};
    }

    std::string solver = "greedy";
    read(root, "solver", solver);
    try {
        spec.solver = solver_kind_from_string(solver);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    if (root.contains("solver_config")) {
        const json& s = root.at("solver_config");
        check_keys(s, "solver_config",
                   {"delta", "max_iter", "hybrid_threshold", "quad_order_per_region", "karcher_tol",
                    "perturb_on_parallel", "search"});
        SolverConfig& c = spec.config;
        read(s, "delta", c.delta);
        read(s, "max_iter", c.max_iter);
        read(s, "hybrid_threshold", c.hybrid_threshold);
        read(s, "quad_order_per_region", c.quad_order_per_region);
        read(s, "karcher_tol", c.karcher_tol);
        read(s, "perturb_on_parallel", c.perturb_on_parallel);
        if (s.contains("search")) {
            const json& g = s.at("search");
            check_keys(g, "search", {"grid_1d", "grid_2d", "check_factor", "refine_tol", "multistarts", "seed"});
            read(g, "grid_1d", c.search.grid_1d);
            read(g, "grid_2d", c.search.grid_2d);
            read(g, "check_factor", c.search.check_factor);
            read(g, "refine_tol", c.search.refine_tol);
            read(g, "multistarts", c.search.multistarts);
            read(g, "seed", c.search.seed);
        }
    }
    if (root.contains("sweep")) {
        check_keys(root.at("sweep"), "sweep", {"dimensions"});
        read(root.at("sweep"), "dimensions", cfg.sweep_dimensions);
    }
    if (root.contains("output")) {
        check_keys(root.at("output"), "output", {"dir", "samples"});
        read(root.at("output"), "dir", cfg.output_dir);
        read(root.at("output"), "samples", cfg.sample_points);
    }
    read(root, "name", spec.name);
    if (spec.name.empty())
        spec.name = to_string(spec.target) + "-H" + std::to_string(spec.space.order) + "-N" +
                    std::to_string(spec.basis.dimension) + "-" + to_string(spec.solver);

    if (cfg.sample_points < 2) throw ConfigError("output.samples must be at least 2");
    try {
        spec.validate();
        if (spec.basis.dimension < 1) throw DomainError("basis dimension must be positive");
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const RunConfig& cfg) {
    const ExperimentSpec& spec = cfg.experiment;
    const SolverConfig& c = spec.config;
    json root;
    root["name"] = spec.name;
    root["target"] = to_string(spec.target);
    root["space"] = {{"order", spec.space.order}, {"lo", spec.space.lo}, {"hi", spec.space.hi}};
    root["basis"] = {{"family", to_string(spec.basis.family)}, {"dimension", spec.basis.dimension}};
    root["constraints"] = json::array();
    for (const auto& f : spec.families) root["constraints"].push_back(family_json(f));
    root["solver"] = to_string(spec.solver);
    root["solver_config"] = {{"delta", c.delta},
                             {"max_iter", c.max_iter},
                             {"hybrid_threshold", c.hybrid_threshold},
                             {"quad_order_per_region", c.quad_order_per_region},
                             {"karcher_tol", c.karcher_tol},
                             {"perturb_on_parallel", c.perturb_on_parallel},
                             {"search",
                              {{"grid_1d", c.search.grid_1d},
                               {"grid_2d", c.search.grid_2d},
                               {"check_factor", c.search.check_factor},
                               {"refine_tol", c.search.refine_tol},
                               {"multistarts", c.search.multistarts},
                               {"seed", c.search.seed}}}};
    if (!cfg.sweep_dimensions.empty()) root["sweep"] = {{"dimensions", cfg.sweep_dimensions}};
    root["output"] = {{"dir", cfg.output_dir}, {"samples", cfg.sample_points}};
    return root.dump(2) + "\n";
}

}  // namespace npsa
