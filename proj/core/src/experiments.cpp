#include "npsa/experiments.hpp"

#include "npsa/errors.hpp"
#include "npsa/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace npsa {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct NamedFunction {
    TestFunctionId id;
    const char* name;
};

constexpr NamedFunction kFunctionNames[] = {
    {TestFunctionId::step_u0, "step_u0"},         {TestFunctionId::ramp_u1, "ramp_u1"},
    {TestFunctionId::quad_u2, "quad_u2"},         {TestFunctionId::oscillatory, "oscillatory"},
    {TestFunctionId::m_shape, "m_shape"},         {TestFunctionId::cylinder2d, "cylinder2d"},
};

int max_derivative(TestFunctionId id) {
    switch (id) {
    case TestFunctionId::step_u0:
    case TestFunctionId::cylinder2d: return 0;
    case TestFunctionId::ramp_u1:
    case TestFunctionId::m_shape: return 1;
    case TestFunctionId::quad_u2:
    case TestFunctionId::oscillatory: return 2;
    }
    return 0;
}

double oscillatory(double x, int deriv) {
    const double s = 0.01 + x * x;
    const double g = 1.0 / s;
    if (deriv == 0) return x * x * std::sin(g) * std::sin(g);
    const double g1 = -2.0 * x / (s * s);
    const double sin2g = std::sin(2.0 * g);
    if (deriv == 1) return 2.0 * x * std::sin(g) * std::sin(g) + x * x * sin2g * g1;
    const double g2 = -2.0 / (s * s) + 8.0 * x * x / (s * s * s);
    return 2.0 * std::sin(g) * std::sin(g) + 4.0 * x * sin2g * g1 +
           x * x * (2.0 * std::cos(2.0 * g) * g1 * g1 + sin2g * g2);
}

// -(x - a)(x - b) and its derivative on [a, b), zero elsewhere.
double bump(double x, double a, double b, int deriv) {
    if (x < a || x >= b) return 0.0;
    return deriv == 0 ? -(x - a) * (x - b) : -(2.0 * x - a - b);
}

// Galerkin moments of the disk indicator against the tensor basis. The inner
// y-integral is exact Gauss; the outer one substitutes x = 0.5 - 0.5 cos(theta)
// to remove the square-root endpoint singularity.
Eigen::VectorXd cylinder_moments(const OrthoBasis& basis) {
    if (basis.dims() != 2) throw DomainError("cylinder moments need a tensor basis");
    const OrthoBasis& axis = basis.axis();
    const int n = basis.per_axis();
    const QuadratureRule& inner = gauss_legendre(n + 1);
    const QuadratureRule outer = gauss_legendre(8 * n + 64, 0.0, kPi);
    Eigen::VectorXd phi_x(n), phi_y(n), column(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);  // m(a, b) -> index a + n b
    for (std::size_t q = 0; q < outer.size(); ++q) {
        const double theta = outer.nodes[q];
        const double x = 0.5 - 0.5 * std::cos(theta);
        const double h = 0.5 * std::sin(theta);
        axis.eval_axis(x, 0, phi_x);
        column.setZero();
        for (std::size_t i = 0; i < inner.size(); ++i) {
            axis.eval_axis(0.5 + h * inner.nodes[i], 0, phi_y);
            column += (h * inner.weights[i]) * phi_y;
        }
        m.noalias() += (outer.weights[q] * 0.5 * std::sin(theta)) * phi_x * column.transpose();
    }
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

std::string to_string(TestFunctionId id) {
    for (const auto& f : kFunctionNames)
        if (f.id == id) return f.name;
    throw DomainError("unknown test function id");
}

TestFunctionId test_function_from_string(const std::string& name) {
    for (const auto& f : kFunctionNames)
        if (name == f.name) return f.id;
    throw DomainError("unknown test function '" + name + "'");
}

HilbertSpec natural_interval(TestFunctionId id) {
    if (id == TestFunctionId::m_shape) return {0.0, kPi, 0};
    return {-1.0, 1.0, 0};
}

double eval_test_function(TestFunctionId id, const Point& p, int deriv) {
    const HilbertSpec dom = natural_interval(id);
    const double slack = 1e-12 * (dom.hi - dom.lo);
    auto inside = [&](double t) { return t >= dom.lo - slack && t <= dom.hi + slack; };
    if (!inside(p.x) || (id == TestFunctionId::cylinder2d && !inside(p.y)))
        throw DomainError("eval_test_function: point outside the domain of " + to_string(id));
    if (deriv < 0 || deriv > max_derivative(id))
        throw DomainError("eval_test_function: derivative order unavailable for " + to_string(id));
    const double x = p.x;
    switch (id) {
    case TestFunctionId::step_u0: return x > 0.0 ? 1.0 : 0.0;
    case TestFunctionId::ramp_u1: return x > 0.0 ? (deriv == 0 ? x : 1.0) : 0.0;
    case TestFunctionId::quad_u2:
        if (x < 0.0) return 0.0;
        return deriv == 0 ? x * x : deriv == 1 ? 2.0 * x : (x > 0.0 ? 2.0 : 0.0);
    case TestFunctionId::oscillatory: return oscillatory(x, deriv);
    case TestFunctionId::m_shape: return bump(x, kPi / 8, kPi / 2, deriv) + bump(x, kPi / 2, 7 * kPi / 8, deriv);
    case TestFunctionId::cylinder2d: return std::hypot(x - 0.5, p.y - 0.5) < 0.5 ? 1.0 : 0.0;
    }
    return 0.0;
}

Target make_target(TestFunctionId id) {
    Target t;
    t.name = to_string(id);
    t.dims = id == TestFunctionId::cylinder2d ? 2 : 1;
    t.max_deriv = max_derivative(id);
    t.value = [id](const Point& p, int j) { return eval_test_function(id, p, j); };
    switch (id) {
    case TestFunctionId::step_u0:
    case TestFunctionId::ramp_u1:
    case TestFunctionId::quad_u2: t.breakpoints = {0.0}; break;
    case TestFunctionId::m_shape: t.breakpoints = {kPi / 8, kPi / 2, 7 * kPi / 8}; break;
    case TestFunctionId::cylinder2d:
        t.moments = cylinder_moments;
        t.norm_squared = kPi / 4;
        break;
    case TestFunctionId::oscillatory: break;
    }
    return t;
}

std::string to_string(SolverKind kind) {
    switch (kind) {
    case SolverKind::greedy: return "greedy";
    case SolverKind::average: return "average";
    case SolverKind::hybrid: return "hybrid";
    }
    return "?";
}

SolverKind solver_kind_from_string(const std::string& name) {
    if (name == "greedy") return SolverKind::greedy;
    if (name == "average") return SolverKind::average;
    if (name == "hybrid") return SolverKind::hybrid;
    throw DomainError("unknown solver '" + name + "' (expected greedy, average or hybrid)");
}

SolveResult run_solver(SolverKind kind, const CoefVec& p_hat, const ConstraintSet& cs, const SolverConfig& cfg) {
    switch (kind) {
    case SolverKind::greedy: return solve_greedy(p_hat, cs, cfg);
    case SolverKind::average: return solve_average(p_hat, cs, cfg);
    case SolverKind::hybrid: return solve_hybrid(p_hat, cs, cfg);
    }
    throw DomainError("unknown solver kind");
}

void ExperimentSpec::validate() const {
    space.validate();
    config.validate();
    const HilbertSpec dom = natural_interval(target);
    if (std::abs(dom.lo - space.lo) > 1e-12 || std::abs(dom.hi - space.hi) > 1e-12)
        throw DomainError("experiment '" + name + "': space interval differs from the domain of " + to_string(target));
    const bool two_d = target == TestFunctionId::cylinder2d;
    if (two_d != (basis.family == BasisFamily::tensor_polynomial_2d))
        throw DomainError("experiment '" + name + "': 2-D targets need the tensor basis and vice versa");
    if (space.order > max_derivative(target) && target != TestFunctionId::cylinder2d)
        throw DomainError("experiment '" + name + "': target is not smooth enough for H^" + std::to_string(space.order));
    for (const auto& fam : families) {
        fam.validate();
        if (fam.domain.dims != (two_d ? 2 : 1)) throw DomainError("experiment '" + name + "': family dimension mismatch");
    }
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    ExperimentOutcome out;
    ResultRow& row = out.row;
    row.name = spec.name;
    row.solver = spec.solver;
    out.target = make_target(spec.target);

    const BasisPtr basis = build_orthonormal_basis(spec.space, spec.basis);
    row.n = basis->size();
    out.unconstrained = unconstrained_solve(out.target, basis);
    const ConstraintSet cs(basis, spec.families, spec.config.search);
    const double energy0 = out.unconstrained.values.squaredNorm();
    row.err_unconstrained = distance_to_target(out.unconstrained, out.target);

    try {
        out.linear = solve_linear_only(out.unconstrained, cs, spec.config);
        row.lc_iterations = out.linear.iterations;
        row.lc_converged = out.linear.converged;
        row.energy_lc = out.linear.coeffs.values.squaredNorm() / energy0;
        row.err_lc = distance_to_target(out.linear.coeffs, out.target);
    } catch (const Error& e) {
        row.error = std::string("linear baseline: ") + e.what();
    }
    try {
        out.nonlinear = run_solver(spec.solver, out.unconstrained, cs, spec.config);
        row.iterations = out.nonlinear.iterations;
        row.converged = out.nonlinear.converged;
        row.norm_deviation = out.nonlinear.max_norm_deviation;
        row.energy_nc = out.nonlinear.coeffs.values.squaredNorm() / energy0;
        row.err_nc = distance_to_target(out.nonlinear.coeffs, out.target);
    } catch (const Error& e) {
        row.error += (row.error.empty() ? "" : "; ") + to_string(spec.solver) + ": " + e.what();
    }

    const bool have_lc = out.linear.coeffs.basis != nullptr;
    const bool have_nc = out.nonlinear.coeffs.basis != nullptr;
    const double denom = row.err_unconstrained;
    auto eta_of = [&](const SolveResult& r) {
        if (!(denom > 1e-14 * std::max(1.0, out.unconstrained.norm()))) return std::numeric_limits<double>::infinity();
        return (r.coeffs.values - out.unconstrained.values).norm() / denom;
    };
    if (have_nc) out.nonlinear.eta = row.eta_nc = eta_of(out.nonlinear);
    else row.eta_nc = row.err_nc = kNaN;
    if (have_lc) out.linear.eta = row.eta_lc = eta_of(out.linear);
    else row.eta_lc = row.err_lc = kNaN;
    row.lc_nc_gap = have_lc && have_nc ? (out.linear.coeffs.values - out.nonlinear.coeffs.values).norm() : kNaN;

    row.min_v = row.min_dv = row.min_d2v = kNaN;
    if (have_nc) {
        if (basis->dims() == 1) {
            row.min_v = ConstraintSet::min_value(out.nonlinear.coeffs, 0, kReportGrid1d);
            row.min_dv = ConstraintSet::min_value(out.nonlinear.coeffs, 1, kReportGrid1d);
            row.min_d2v = ConstraintSet::min_value(out.nonlinear.coeffs, 2, kReportGrid1d);
        } else {
            row.min_v = ConstraintSet::min_value(out.nonlinear.coeffs, 0, kReportGrid2d);
        }
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

double loglog_slope(const std::vector<double>& n, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < n.size() && i < err.size(); ++i) {
        if (!(n[i] > 0.0) || !(err[i] > 0.0) || !std::isfinite(err[i])) continue;
        const double x = std::log(n[i]), y = std::log(err[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++m;
    }
    const double det = m * sxx - sx * sx;
    if (m < 2 || det <= 0.0) return kNaN;
    return (m * sxy - sx * sy) / det;
}

SweepTable convergence_sweep(const ExperimentSpec& templ, const std::vector<int>& dims) {
    if (!std::is_sorted(dims.begin(), dims.end())) throw DomainError("convergence_sweep: dimensions must be ascending");
    SweepTable table;
    std::vector<double> ns, eu, enc, elc;
    for (int n : dims) {
        ExperimentSpec spec = templ;
        spec.basis.dimension = n;
        spec.name = templ.name + "-N" + std::to_string(n);
        ResultRow row = run_experiment(spec).row;
        ns.push_back(row.n);
        eu.push_back(row.err_unconstrained);
        enc.push_back(row.err_nc);
        elc.push_back(row.err_lc);
        table.rows.push_back(std::move(row));
    }
    table.slope_unconstrained = loglog_slope(ns, eu);
    table.slope_nc = loglog_slope(ns, enc);
    table.slope_lc = loglog_slope(ns, elc);
    return table;
}

std::size_t Mask::count() const { return static_cast<std::size_t>(std::count(negative.begin(), negative.end(), 1)); }

Mask negative_mask(const CoefVec& v, int grid, double threshold) {
    const OrthoBasis& basis = *v.basis;
    if (basis.dims() != 2) throw DomainError("negative_mask: 2-D bases only");
    if (grid < 2) throw DomainError("negative_mask: grid needs at least 2 points");
    std::vector<double> xs(grid);
    for (int i = 0; i < grid; ++i) xs[i] = basis.space().lo + (basis.space().hi - basis.space().lo) * i / (grid - 1);
    const Eigen::MatrixXd phi = basis.eval_axis_grid(xs, 0);
    const int n = basis.per_axis();
    const Eigen::Map<const Eigen::MatrixXd> coef(v.values.data(), n, n);
    const Eigen::MatrixXd values = phi * coef * phi.transpose();  // values(i, j) at (xs[i], xs[j])
    // Tensor kernel diagonal: sum_ab phi_a(x)^2 phi_b(y)^2 factorizes.
    const Eigen::VectorXd k = phi.rowwise().norm();
    Mask mask{grid, std::vector<std::uint8_t>(static_cast<std::size_t>(grid) * grid, 0)};
    for (int j = 0; j < grid; ++j)
        for (int i = 0; i < grid; ++i)
            mask.negative[i + static_cast<std::size_t>(grid) * j] = values(i, j) / (k[i] * k[j]) < threshold;
    return mask;
}

CylinderOutcome run_2d_cylinder(int n_per_axis, const SolverConfig& cfg) {
    ExperimentSpec spec = presets::cylinder(n_per_axis);
    spec.config = cfg;
    CylinderOutcome out{run_experiment(spec), {}, {}, {}};
    const double threshold = -cfg.delta;
    const auto& e = out.experiment;
    out.unconstrained = negative_mask(e.unconstrained, kReportGrid2d, threshold);
    if (e.linear.coeffs.basis) out.linear = negative_mask(e.linear.coeffs, kReportGrid2d, threshold);
    if (e.nonlinear.coeffs.basis) out.nonlinear = negative_mask(e.nonlinear.coeffs, kReportGrid2d, threshold);
    return out;
}

namespace presets {

ExperimentSpec positivity_1d(TestFunctionId target, int order, int n, SolverKind solver) {
    ExperimentSpec spec;
    spec.target = target;
    spec.space = natural_interval(target);
    spec.space.order = order;
    spec.basis = {target == TestFunctionId::m_shape ? BasisFamily::cosine : BasisFamily::polynomial, n};
    spec.families = {ConstraintFamily::positivity(Domain::interval(spec.space.lo, spec.space.hi))};
    spec.solver = solver;
    spec.name = to_string(target) + "-H" + std::to_string(order) + "-N" + std::to_string(n) + "-" + to_string(solver);
    return spec;
}

std::vector<ExperimentSpec> table1() {
    std::vector<ExperimentSpec> specs;
    for (int n : {6, 31})
        for (SolverKind s : {SolverKind::greedy, SolverKind::average, SolverKind::hybrid})
            specs.push_back(positivity_1d(TestFunctionId::quad_u2, 0, n, s));
    return specs;
}

std::vector<ExperimentSpec> table2() {
    std::vector<ExperimentSpec> specs;
    const Domain d = Domain::interval(-1.0, 1.0);
    for (int order : {0, 1, 2})
        for (int n : {6, 31}) {
            ExperimentSpec spec = positivity_1d(TestFunctionId::quad_u2, order, n, SolverKind::average);
            spec.families = {ConstraintFamily::positivity(d), ConstraintFamily::monotonicity(d),
                             ConstraintFamily::convexity(d)};
            spec.name = "quad_u2-U012-H" + std::to_string(order) + "-N" + std::to_string(n) + "-average";
            specs.push_back(std::move(spec));
        }
    return specs;
}

std::vector<ExperimentSpec> table3() {
    std::vector<ExperimentSpec> specs;
    for (int n : {6, 16, 31, 51, 76, 151})
        specs.push_back(positivity_1d(TestFunctionId::oscillatory, 0, n, SolverKind::greedy));
    return specs;
}

ExperimentSpec cylinder(int n_per_axis) {
    ExperimentSpec spec;
    spec.name = "cylinder2d-H0-N" + std::to_string(n_per_axis) + "-greedy";
    spec.target = TestFunctionId::cylinder2d;
    spec.space = {-1.0, 1.0, 0};
    spec.basis = {BasisFamily::tensor_polynomial_2d, n_per_axis};
    spec.families = {ConstraintFamily::positivity(Domain::rectangle(-1.0, 1.0, -1.0, 1.0))};
    spec.solver = SolverKind::greedy;
    return spec;
}

ExperimentSpec convergence_u2() {
    ExperimentSpec spec = positivity_1d(TestFunctionId::quad_u2, 0, 6, SolverKind::greedy);
    spec.name = "quad_u2-H0-greedy";
    return spec;
}

std::vector<int> convergence_dims() { return {6, 11, 16, 21, 26, 31}; }

std::vector<ExperimentSpec> m_shape() {
    std::vector<ExperimentSpec> specs;
    for (int n : {6, 16, 31}) specs.push_back(positivity_1d(TestFunctionId::m_shape, 0, n, SolverKind::greedy));
    return specs;
}

}  // namespace presets

}  // namespace npsa
