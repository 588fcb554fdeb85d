#include "npsa/quadrature.hpp"

#include "npsa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <utility>

namespace npsa {

namespace {

// Returns (P_n(x), P'_n(x)) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    // n >= 1 here; p0 holds P_{n-1}.
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

QuadratureRule compute_gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [pn, dpn] = legendre_with_derivative(n, x);
            const double dx = pn / dpn;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dpn = legendre_with_derivative(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dpn * dpn);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: need at least one node");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(compute_gauss_legendre(n));
    return *slot;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    QuadratureRule rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

namespace {

Eigen::VectorXd composite_pass(const VectorIntegrand& f, Eigen::Index dim, std::span<const double> edges,
                               int panels_per_piece, const QuadratureRule& ref) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd value(dim);
    for (std::size_t piece = 0; piece + 1 < edges.size(); ++piece) {
        const double lo = edges[piece], hi = edges[piece + 1];
        const double h = (hi - lo) / panels_per_piece;
        for (int p = 0; p < panels_per_piece; ++p) {
            const double a = lo + p * h;
            const double mid = a + 0.5 * h, half = 0.5 * h;
            for (std::size_t q = 0; q < ref.size(); ++q) {
                value.setZero();
                f(mid + half * ref.nodes[q], value);
                total.noalias() += (half * ref.weights[q]) * value;
            }
        }
    }
    return total;
}

}  // namespace

IntegrationResult integrate_composite(const VectorIntegrand& f, Eigen::Index dimension, double a, double b,
                                      std::span<const double> breakpoints, const CompositeOptions& opts) {
    if (!(a < b)) throw DomainError("integrate_composite: need a < b");
    std::vector<double> edges{a};
    std::vector<double> inner(breakpoints.begin(), breakpoints.end());
    std::sort(inner.begin(), inner.end());
    for (double x : inner)
        if (x > edges.back() && x < b) edges.push_back(x);
    edges.push_back(b);

    const QuadratureRule& ref = gauss_legendre(opts.order);
    const int pieces = static_cast<int>(edges.size()) - 1;
    int per_piece = std::max(1, opts.initial_panels / pieces);
    Eigen::VectorXd previous = composite_pass(f, dimension, edges, per_piece, ref);
    double diff = 0.0;
    for (int level = 0; level < opts.max_doublings; ++level) {
        per_piece *= 2;
        Eigen::VectorXd current = composite_pass(f, dimension, edges, per_piece, ref);
        diff = (current - previous).lpNorm<Eigen::Infinity>();
        const double scale = std::max(1.0, current.lpNorm<Eigen::Infinity>());
        if (diff <= opts.tolerance * scale) return {std::move(current), diff, per_piece * pieces};
        previous = std::move(current);
    }
    std::ostringstream msg;
    msg << "integrate_composite: no convergence after " << per_piece * pieces << " panels (last change " << diff
        << ")";
    throw QuadratureError(msg.str(), diff);
}

double integrate_composite(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, const CompositeOptions& opts) {
    VectorIntegrand wrapped = [&f](double x, Eigen::Ref<Eigen::VectorXd> out) { out[0] = f(x); };
    return integrate_composite(wrapped, 1, a, b, breakpoints, opts).value[0];
}

}  // namespace npsa
