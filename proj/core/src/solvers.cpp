#include "npsa/solvers.hpp"

#include "npsa/errors.hpp"
#include "npsa/sphere_geom.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>

namespace npsa {

void SolverConfig::validate() const {
    if (!(delta >= 0.0)) throw DomainError("SolverConfig: delta must be nonnegative");
    if (max_iter < 1) throw DomainError("SolverConfig: max_iter must be at least 1");
    if (quad_order_per_region < 1) throw DomainError("SolverConfig: quad_order_per_region must be positive");
    if (!(hybrid_threshold >= 0.0)) throw DomainError("SolverConfig: hybrid_threshold must be nonnegative");
    if (!(karcher_tol > 0.0)) throw DomainError("SolverConfig: karcher_tol must be positive");
}

namespace {

// What the iteration needs from a constraint description: the most violated
// constraint, its representor, and every violated constraint with a weight.
class Problem {
public:
    virtual ~Problem() = default;
    virtual std::optional<ViolationRecord> find_violation(const Eigen::VectorXd& p, double delta) const = 0;
    virtual RieszVector riesz(const ViolationRecord& rec) const = 0;
    using NodeFn = std::function<void(const RieszVector&, double weight)>;
    virtual void violated_nodes(const Eigen::VectorXd& p, const ViolationRecord& rec, int quad_order,
                                const NodeFn& emit) const = 0;
};

class FamilyProblem final : public Problem {
public:
    explicit FamilyProblem(const ConstraintSet& cs) : cs_(cs) {}

    // The dense check grid backs up the search grid for violations that fall
    // between its points.
    std::optional<ViolationRecord> find_violation(const Eigen::VectorXd& p, double delta) const override {
        if (auto rec = cs_.most_violated(p, delta)) return rec;
        const ViolationRecord dense = cs_.dense_worst(p);
        if (dense.family >= 0 && dense.signed_distance < -delta) return dense;
        return std::nullopt;
    }

    RieszVector riesz(const ViolationRecord& rec) const override { return cs_.riesz(rec.family, rec.param); }

    void violated_nodes(const Eigen::VectorXd& p, const ViolationRecord& rec, int quad_order,
                        const NodeFn& emit) const override {
        for (int k = 0; k < static_cast<int>(cs_.families().size()); ++k) {
            if (cs_.basis().dims() == 1) {
                const auto hint = k == rec.family ? std::optional<double>(rec.param.x) : std::nullopt;
                for (const Interval& iv : cs_.violated_regions(p, k, hint)) {
                    if (!(iv.hi > iv.lo)) continue;
                    const QuadratureRule rule = gauss_legendre(quad_order, iv.lo, iv.hi);
                    for (std::size_t q = 0; q < rule.size(); ++q)
                        emit(cs_.riesz(k, Point{rule.nodes[q], 0.0}), rule.weights[q]);
                }
            } else {
                for (const WeightedNode& node : cs_.violated_cells(p, k)) emit(cs_.riesz(k, node.param), node.weight);
            }
        }
    }

private:
    const ConstraintSet& cs_;
};

// Each half-space is one node of unit weight; ties go to the lowest index.
class ListProblem final : public Problem {
public:
    explicit ListProblem(const std::vector<RieszVector>& list) : list_(list) {}

    std::optional<ViolationRecord> find_violation(const Eigen::VectorXd& p, double delta) const override {
        std::optional<ViolationRecord> best;
        for (std::size_t i = 0; i < list_.size(); ++i) {
            const double d = sdist(p, list_[i]);
            if (d < -delta && (!best || d < best->signed_distance))
                best = ViolationRecord{static_cast<int>(i), list_[i].param, d};
        }
        return best;
    }

    RieszVector riesz(const ViolationRecord& rec) const override { return list_.at(rec.family); }

    void violated_nodes(const Eigen::VectorXd& p, const ViolationRecord&, int, const NodeFn& emit) const override {
        for (const RieszVector& rv : list_)
            if (sdist(p, rv) < 0.0) emit(rv, 1.0);
    }

private:
    const std::vector<RieszVector>& list_;
};

// Proposes the next iterate from the current one and the most violated record.
using StepFn = std::function<Eigen::VectorXd(const SpherePoint&, const ViolationRecord&)>;

SolveResult iterate(const Eigen::VectorXd& p0, const Problem& problem, const SolverConfig& cfg, bool spherical,
                    const StepFn& step) {
    cfg.validate();
    if (!(p0.norm() > 0.0)) throw DomainError("solver: initial coefficients must be nonzero");

    const double r0 = p0.norm();
    Eigen::VectorXd p = p0;
    SolveResult res;
    std::mt19937_64 rng(cfg.search.seed);
    for (int j = 0;; ++j) {
        const auto rec = problem.find_violation(p, cfg.delta);
        if (!rec) {
            res.converged = true;
            break;
        }
        if (j == cfg.max_iter) {
            res.message = "iteration limit reached";
            break;
        }
        const SpherePoint current = SpherePoint::on_own_sphere(p);
        Eigen::VectorXd next;
        try {
            next = step(current, *rec);
        } catch (const GeometryError&) {
            if (!cfg.perturb_on_parallel) throw;
            std::normal_distribution<double> gauss;
            Eigen::VectorXd nudge(p.size());
            for (auto& c : nudge) c = gauss(rng);
            nudge -= nudge.dot(current.unit()) * current.unit();
            next = step(SpherePoint(p + 1e-10 * r0 * nudge.normalized(), r0), *rec);
        }
        const double dist = spherical ? r0 * angle_between(p, next) : (next - p).norm();
        p = next;
        const double norm = p.norm();
        if (spherical) res.max_norm_deviation = std::max(res.max_norm_deviation, std::abs(norm - r0) / r0);
        res.trace.push_back({j + 1, rec->signed_distance, dist, norm});
        res.iterations = j + 1;
    }
    res.coeffs.values = p;
    return res;
}

Eigen::VectorXd greedy_candidate(const Problem& problem, const SpherePoint& p, const ViolationRecord& rec) {
    return spherical_projection(p, problem.riesz(rec)).coords();
}

// Karcher mean of the projections onto all violated constraints, weighted by
// quadrature weight times squared distance. Falls back to the greedy candidate
// when no violated node is found.
Eigen::VectorXd average_candidate(const Problem& problem, const SpherePoint& p, const ViolationRecord& rec,
                                  const SolverConfig& cfg) {
    std::vector<SpherePoint> projections;
    std::vector<double> quad_weights, dists;
    problem.violated_nodes(p.coords(), rec, cfg.quad_order_per_region, [&](const RieszVector& rv, double w) {
        if (!(sdist(p.coords(), rv) < 0.0)) return;
        SpherePoint c = spherical_projection(p, rv);
        dists.push_back(intrinsic_distance(p, c));
        quad_weights.push_back(w);
        projections.push_back(std::move(c));
    });
    if (projections.empty()) return greedy_candidate(problem, p, rec);

    std::vector<double> weights(projections.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] = quad_weights[i] * dists[i] * dists[i];
    if (!(total > 0.0) || *std::max_element(dists.begin(), dists.end()) < 1e-15) std::fill(weights.begin(), weights.end(), 1.0);

    KarcherOptions opts;
    opts.tol = cfg.karcher_tol;
    opts.hemisphere_normal = p.coords();
    return karcher_mean(projections, weights, opts).point.coords();
}

SolveResult greedy(const Eigen::VectorXd& p0, const Problem& problem, const SolverConfig& cfg) {
    return iterate(p0, problem, cfg, true,
                   [&](const SpherePoint& p, const ViolationRecord& rec) { return greedy_candidate(problem, p, rec); });
}

SolveResult average(const Eigen::VectorXd& p0, const Problem& problem, const SolverConfig& cfg) {
    return iterate(p0, problem, cfg, true, [&](const SpherePoint& p, const ViolationRecord& rec) {
        return average_candidate(problem, p, rec, cfg);
    });
}

SolveResult hybrid(const Eigen::VectorXd& p0, const Problem& problem, const SolverConfig& cfg) {
    return iterate(p0, problem, cfg, true, [&](const SpherePoint& p, const ViolationRecord& rec) -> Eigen::VectorXd {
        const SpherePoint candidate(greedy_candidate(problem, p, rec), p.radius());
        const double step = intrinsic_distance(p, candidate);
        if (step / p.radius() < cfg.hybrid_threshold) return candidate.coords();
        const SpherePoint averaged(average_candidate(problem, p, rec, cfg), p.radius());
        const Eigen::VectorXd dir = log_map(p, averaged).direction;
        const double nd = dir.norm();
        if (!(nd > 0.0)) return candidate.coords();
        return exp_map(p, Eigen::VectorXd(dir * (step / nd))).coords();
    });
}

SolveResult linear_only(const Eigen::VectorXd& p0, const Problem& problem, const SolverConfig& cfg) {
    return iterate(p0, problem, cfg, false, [&](const SpherePoint& p, const ViolationRecord& rec) -> Eigen::VectorXd {
        const RieszVector rv = problem.riesz(rec);
        const double excess = rv.ell.dot(p.coords()) - rv.offset;
        return p.coords() - std::max(0.0, excess) * rv.ell;
    });
}

using Method = SolveResult (*)(const Eigen::VectorXd&, const Problem&, const SolverConfig&);

SolveResult run_on_set(Method method, const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg) {
    if (!p_hat.basis || *p_hat.basis != cs.basis())
        throw DomainError("solver: coefficient basis differs from the constraint basis");
    SolveResult res = method(p_hat.values, FamilyProblem(cs), cfg);
    res.coeffs.basis = p_hat.basis;
    return res;
}

SolveResult run_on_list(Method method, const Eigen::VectorXd& p, const std::vector<RieszVector>& list,
                        const SolverConfig& cfg) {
    for (const RieszVector& rv : list)
        if (rv.ell.size() != p.size()) throw DomainError("solver: half-space dimension differs from the point");
    return method(p, ListProblem(list), cfg);
}

}  // namespace

SolveResult solve_greedy(const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg) {
    return run_on_set(greedy, p_hat, cs, cfg);
}
SolveResult solve_average(const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg) {
    return run_on_set(average, p_hat, cs, cfg);
}
SolveResult solve_hybrid(const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg) {
    return run_on_set(hybrid, p_hat, cs, cfg);
}
SolveResult solve_linear_only(const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg) {
    return run_on_set(linear_only, p_hat, cs, cfg);
}

SolveResult solve_greedy(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams, const SolverConfig& cfg) {
    return solve_greedy(p_hat, ConstraintSet(p_hat.basis, fams, cfg.search), cfg);
}
SolveResult solve_average(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams, const SolverConfig& cfg) {
    return solve_average(p_hat, ConstraintSet(p_hat.basis, fams, cfg.search), cfg);
}
SolveResult solve_hybrid(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams, const SolverConfig& cfg) {
    return solve_hybrid(p_hat, ConstraintSet(p_hat.basis, fams, cfg.search), cfg);
}
SolveResult solve_linear_only(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams,
                              const SolverConfig& cfg) {
    return solve_linear_only(p_hat, ConstraintSet(p_hat.basis, fams, cfg.search), cfg);
}

SolveResult solve_greedy(const Eigen::VectorXd& p, const std::vector<RieszVector>& halfspaces, const SolverConfig& cfg) {
    return run_on_list(greedy, p, halfspaces, cfg);
}
SolveResult solve_average(const Eigen::VectorXd& p, const std::vector<RieszVector>& halfspaces, const SolverConfig& cfg) {
    return run_on_list(average, p, halfspaces, cfg);
}
SolveResult solve_hybrid(const Eigen::VectorXd& p, const std::vector<RieszVector>& halfspaces, const SolverConfig& cfg) {
    return run_on_list(hybrid, p, halfspaces, cfg);
}
SolveResult solve_linear_only(const Eigen::VectorXd& p, const std::vector<RieszVector>& halfspaces,
                              const SolverConfig& cfg) {
    return run_on_list(linear_only, p, halfspaces, cfg);
}

EtaResult compute_eta(const CoefVec& v_star, const CoefVec& v_unconstrained, const Target& target,
                      const CompositeOptions& opts) {
    EtaResult out;
    if (!v_star.basis || !v_unconstrained.basis || *v_star.basis != *v_unconstrained.basis)
        throw DomainError("compute_eta: coefficients live in different bases");
    out.numerator = (v_star.values - v_unconstrained.values).norm();
    out.denominator = distance_to_target(v_unconstrained, target, opts);
    if (!(out.denominator > 1e-14 * std::max(1.0, v_unconstrained.norm()))) {
        out.degenerate = true;
        out.eta = std::numeric_limits<double>::infinity();
        return out;
    }
    out.eta = out.numerator / out.denominator;
    return out;
}

}  // namespace npsa
