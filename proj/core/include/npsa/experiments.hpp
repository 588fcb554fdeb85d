#pragma once

#include "npsa/constraints.hpp"
#include "npsa/hilbert_basis.hpp"
#include "npsa/solvers.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace npsa {

enum class TestFunctionId { step_u0, ramp_u1, quad_u2, oscillatory, m_shape, cylinder2d };

std::string to_string(TestFunctionId id);
TestFunctionId test_function_from_string(const std::string& name);

/// Natural domain of a test function (the cylinder uses it on both axes).
HilbertSpec natural_interval(TestFunctionId id);

/// Closed-form value (deriv = 0) or x-derivative of a test function.
double eval_test_function(TestFunctionId id, const Point& p, int deriv = 0);

Target make_target(TestFunctionId id);

enum class SolverKind { greedy, average, hybrid };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

SolveResult run_solver(SolverKind kind, const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg);

struct ExperimentSpec {
    std::string name;
    TestFunctionId target = TestFunctionId::quad_u2;
    HilbertSpec space;
    BasisSpec basis;
    std::vector<ConstraintFamily> families;
    SolverKind solver = SolverKind::greedy;
    SolverConfig config;

    void validate() const;
};

struct ResultRow {
    std::string name;
    int n = 0;  // total dimension of V
    SolverKind solver = SolverKind::greedy;
    int iterations = 0;
    bool converged = false;
    double eta_nc = 0.0;
    double eta_lc = 0.0;
    double lc_nc_gap = 0.0;  // ||v_LC - v_NC||_H
    double min_v = 0.0;      // minima of v_NC and its derivatives over the report grid
    double min_dv = 0.0;
    double min_d2v = 0.0;
    double err_unconstrained = 0.0;  // ||v - u||_H
    double err_nc = 0.0;
    double err_lc = 0.0;
    double norm_deviation = 0.0;  // over every norm-preserving iterate, relative
    double energy_nc = 0.0;       // sum |v_NC,n|^2 / sum |p_n|^2
    double energy_lc = 0.0;
    int lc_iterations = 0;
    bool lc_converged = false;
    double wall_seconds = 0.0;
    std::string error;  // empty unless a solver threw
};

struct ExperimentOutcome {
    ResultRow row;
    Target target;
    CoefVec unconstrained;
    SolveResult linear;
    SolveResult nonlinear;
};

inline constexpr int kReportGrid1d = 10000;
inline constexpr int kReportGrid2d = 256;

/// Unconstrained projection, the linear baseline and the selected solver, with
/// all row metrics. Solver exceptions are recorded in row.error.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

struct SweepTable {
    std::vector<ResultRow> rows;
    /// Least-squares slopes of log(error) against log(N).
    double slope_unconstrained = 0.0;
    double slope_nc = 0.0;
    double slope_lc = 0.0;
};

/// One experiment per dimension in `dims` (the template's basis dimension is replaced).
SweepTable convergence_sweep(const ExperimentSpec& templ, const std::vector<int>& dims);

double loglog_slope(const std::vector<double>& n, const std::vector<double>& err);

/// Boolean grid (x fastest) of points where lambda(y) v(y) < threshold, with
/// lambda(y) = 1 / ||(v_1(y), ..., v_N(y))||: the positivity signed distance the
/// solvers test against -delta.
struct Mask {
    int size = 0;
    std::vector<std::uint8_t> negative;

    std::size_t count() const;
};

Mask negative_mask(const CoefVec& v, int grid, double threshold);

struct CylinderOutcome {
    ExperimentOutcome experiment;
    Mask unconstrained, linear, nonlinear;
};

CylinderOutcome run_2d_cylinder(int n_per_axis = 15, const SolverConfig& cfg = {});

namespace presets {

ExperimentSpec positivity_1d(TestFunctionId target, int order, int n, SolverKind solver);
std::vector<ExperimentSpec> table1();
/// (H^0, H^1, H^2) x (N = 6, 31) with positivity, monotonicity and convexity, average solver.
std::vector<ExperimentSpec> table2();
std::vector<ExperimentSpec> table3();
ExperimentSpec cylinder(int n_per_axis = 15);
ExperimentSpec convergence_u2();
std::vector<int> convergence_dims();
std::vector<ExperimentSpec> m_shape();

}  // namespace presets

}  // namespace npsa
