#pragma once

#include "npsa/constraints.hpp"
#include "npsa/hilbert_basis.hpp"

#include <limits>
#include <string>
#include <vector>

namespace npsa {

struct SolverConfig {
    double delta = 1e-10;            // feasibility tolerance on sdist
    int max_iter = 10000;
    double hybrid_threshold = 1e-6;  // on d(p, greedy candidate) / r
    int quad_order_per_region = 32;  // Gauss-Legendre nodes per violated interval
    SearchConfig search;
    double karcher_tol = 1e-12;
    /// Retry a parallel-representor failure once after a 1e-10 random tangential nudge.
    bool perturb_on_parallel = false;

    void validate() const;
};

struct TraceRow {
    int iteration = 0;
    double worst_sdist = 0.0;  // before the step
    double step_dist = 0.0;    // intrinsic (or Euclidean, for the linear baseline) step length
    double norm = 0.0;         // after the step
};

using IterationTrace = std::vector<TraceRow>;

struct SolveResult {
    CoefVec coeffs;
    int iterations = 0;
    bool converged = false;
    IterationTrace trace;
    double eta = std::numeric_limits<double>::quiet_NaN();
    std::string message;
    /// max_j | ||p^j|| - ||p^0|| | / ||p^0||
    double max_norm_deviation = 0.0;
};

/// Greedy spherical projection onto the most violated constraint.
SolveResult solve_greedy(const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg = {});
/// Weighted Karcher mean of the projections onto every violated constraint.
SolveResult solve_average(const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg = {});
/// Greedy step length along the averaged direction.
SolveResult solve_hybrid(const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg = {});
/// Greedy Euclidean half-space projections; does not preserve the norm.
SolveResult solve_linear_only(const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg = {});

SolveResult solve_greedy(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams, const SolverConfig& cfg = {});
SolveResult solve_average(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams, const SolverConfig& cfg = {});
SolveResult solve_hybrid(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams, const SolverConfig& cfg = {});
SolveResult solve_linear_only(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams,
                              const SolverConfig& cfg = {});

// Fixed finite sets of half-spaces {x : <ell, x> <= offset} given directly in
// coefficient space. coeffs.basis of the result is null.
SolveResult solve_greedy(const Eigen::VectorXd& p, const std::vector<RieszVector>& halfspaces,
                         const SolverConfig& cfg = {});
SolveResult solve_average(const Eigen::VectorXd& p, const std::vector<RieszVector>& halfspaces,
                          const SolverConfig& cfg = {});
SolveResult solve_hybrid(const Eigen::VectorXd& p, const std::vector<RieszVector>& halfspaces,
                         const SolverConfig& cfg = {});
SolveResult solve_linear_only(const Eigen::VectorXd& p, const std::vector<RieszVector>& halfspaces,
                              const SolverConfig& cfg = {});

struct EtaResult {
    double eta = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    bool degenerate = false;  // u lies in V; eta is +inf
};

/// ||v - v*||_H / ||v - u||_H.
EtaResult compute_eta(const CoefVec& v_star, const CoefVec& v_unconstrained, const Target& target,
                      const CompositeOptions& opts = {});

}  // namespace npsa
