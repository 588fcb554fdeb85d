#pragma once

#include "npsa/constraints.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace npsa {

/// A point on the origin-centred sphere of radius r in R^N. The coordinates are
/// rescaled to norm r on construction.
class SpherePoint {
public:
    SpherePoint(const Eigen::VectorXd& coords, double radius);
    /// Point with radius equal to the norm of `coords`.
    static SpherePoint on_own_sphere(const Eigen::VectorXd& coords);

    const Eigen::VectorXd& coords() const { return coords_; }
    double radius() const { return radius_; }
    Eigen::Index dim() const { return coords_.size(); }
    Eigen::VectorXd unit() const { return coords_ / radius_; }

private:
    Eigen::VectorXd coords_;
    double radius_;
};

/// Element of the tangent space at `base`: <direction, base> = 0.
struct TangentVector {
    SpherePoint base;
    Eigen::VectorXd direction;

    double norm() const { return direction.norm(); }
};

/// Angle between two nonzero vectors, accurate for nearly (anti)parallel inputs.
double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Great-circle distance r * angle(u, w).
double intrinsic_distance(const SpherePoint& u, const SpherePoint& w);

/// Point at arc length t from u along the geodesic towards w, 0 <= t <= d(u, w).
SpherePoint geodesic_point(const SpherePoint& u, const SpherePoint& w, double t);

SpherePoint exp_map(const SpherePoint& base, const TangentVector& v);
/// Exponential map with a raw tangent direction.
SpherePoint exp_map(const SpherePoint& base, const Eigen::VectorXd& v);

TangentVector log_map(const SpherePoint& base, const SpherePoint& target);

/// Nearest point (intrinsic distance) of the sphere-hemisphere {<ell, x> <= 0}.
SpherePoint hemisphere_projection(const SpherePoint& p, const RieszVector& rv);

/// Nearest point of the sphere inside the affine half-space {<ell, x> <= <ell, r0>}.
SpherePoint affine_hemisphere_projection(const SpherePoint& p, const RieszVector& rv, const Eigen::VectorXd& r0);

/// hemisphere_projection or affine_hemisphere_projection, depending on rv.
SpherePoint spherical_projection(const SpherePoint& p, const RieszVector& rv);

struct KarcherOptions {
    double tol = 1e-12;  // relative to the radius
    int max_iter = 500;
    /// Normal of an open hemisphere containing every point. Defaults to the
    /// weighted extrinsic mean direction.
    std::optional<Eigen::VectorXd> hemisphere_normal;
};

struct KarcherResult {
    SpherePoint point;
    int iterations = 0;
    double residual = 0.0;  // || sum w_i log_q(p_i) ||
};

/// Weighted Riemannian centre of mass by the fixed-point iteration
/// q <- exp_q(sum w_i log_q(p_i)). Weights are normalized to sum to one.
KarcherResult karcher_mean(const std::vector<SpherePoint>& points, const std::vector<double>& weights,
                           const KarcherOptions& opts = {});

/// 0.5 * sum w_i d(q, p_i)^2
double karcher_objective(const SpherePoint& q, const std::vector<SpherePoint>& points,
                         const std::vector<double>& weights);

}  // namespace npsa
