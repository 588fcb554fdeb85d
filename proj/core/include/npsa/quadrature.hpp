#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

namespace npsa {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are cached; the returned
/// reference stays valid for the lifetime of the process.
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Legendre rule affinely mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

struct CompositeOptions {
    int initial_panels = 64;
    int order = 20;            // nodes per panel
    double tolerance = 1e-10;  // successive estimates must agree to this (relative to max(1, |I|))
    int max_doublings = 9;
};

struct IntegrationResult {
    Eigen::VectorXd value;
    double error_estimate = 0.0;
    int panels = 0;
};

/// Vector-valued integrand: writes f(x) into `out` (pre-sized to the result dimension).
using VectorIntegrand = std::function<void(double x, Eigen::Ref<Eigen::VectorXd> out)>;

/// Composite Gauss-Legendre integration of a vector-valued function over [a, b],
/// splitting at `breakpoints` (kinks or jumps of the integrand). The panel count is
/// doubled until two successive estimates agree within `opts.tolerance`.
/// Throws QuadratureError carrying the last difference when that never happens.
IntegrationResult integrate_composite(const VectorIntegrand& f, Eigen::Index dimension, double a, double b,
                                      std::span<const double> breakpoints = {},
                                      const CompositeOptions& opts = {});

/// Scalar convenience wrapper around integrate_composite.
double integrate_composite(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints = {}, const CompositeOptions& opts = {});

}  // namespace npsa
