#include "npsa/sphere_geom.hpp"

#include "npsa/errors.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace npsa {

namespace {

constexpr double kParallelTol = 1e-13;

void require_same_sphere(const SpherePoint& u, const SpherePoint& w) {
    if (u.dim() != w.dim()) throw GeometryError("sphere points of different dimension");
    if (std::abs(u.radius() - w.radius()) > 1e-10 * std::max(u.radius(), w.radius()))
        throw GeometryError("sphere points of different radius");
}

}  // namespace

SpherePoint::SpherePoint(const Eigen::VectorXd& coords, double radius) : radius_(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw GeometryError("SpherePoint: radius must be positive");
    const double n = coords.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw GeometryError("SpherePoint: coordinates must be nonzero and finite");
    coords_ = coords * (radius / n);
}

SpherePoint SpherePoint::on_own_sphere(const Eigen::VectorXd& coords) { return SpherePoint(coords, coords.norm()); }

double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ua = a.normalized(), ub = b.normalized();
    return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

double intrinsic_distance(const SpherePoint& u, const SpherePoint& w) {
    require_same_sphere(u, w);
    return u.radius() * angle_between(u.coords(), w.coords());
}

SpherePoint geodesic_point(const SpherePoint& u, const SpherePoint& w, double t) {
    const double r = u.radius();
    const double d = intrinsic_distance(u, w);
    if (d <= 1e-15 * r) throw GeometryError("geodesic_point: identical endpoints");
    if (std::numbers::pi * r - d <= 1e-12 * r) throw GeometryError("geodesic_point: antipodal endpoints");
    if (t < -1e-12 * r || t > d * (1.0 + 1e-12)) throw GeometryError("geodesic_point: arc length outside [0, d]");
    if (t <= 0.0) return u;
    if (t >= d) return w;
    const double theta = d / r, s = t / r;
    const Eigen::VectorXd x = (std::sin(theta - s) * u.unit() + std::sin(s) * w.unit()) / std::sin(theta);
    return SpherePoint(x, r);
}

SpherePoint exp_map(const SpherePoint& base, const Eigen::VectorXd& v) {
    if (v.size() != base.dim()) throw GeometryError("exp_map: dimension mismatch");
    const double nv = v.norm();
    if (nv == 0.0) return base;
    const double r = base.radius();
    return SpherePoint(base.coords() * std::cos(nv / r) + v * (r * std::sin(nv / r) / nv), r);
}

SpherePoint exp_map(const SpherePoint& base, const TangentVector& v) { return exp_map(base, v.direction); }

TangentVector log_map(const SpherePoint& base, const SpherePoint& target) {
    require_same_sphere(base, target);
    const double r = base.radius();
    const Eigen::VectorXd u = base.unit(), w = target.unit();
    const double theta = angle_between(u, w);
    if (std::numbers::pi - theta <= 1e-12) throw GeometryError("log_map: antipodal points");
    Eigen::VectorXd perp = w - w.dot(u) * u;
    const double np = perp.norm();
    if (theta == 0.0 || np == 0.0) return {base, Eigen::VectorXd::Zero(u.size())};
    return {base, perp * (r * theta / np)};
}

SpherePoint hemisphere_projection(const SpherePoint& p, const RieszVector& rv) {
    if (rv.ell.size() != p.dim()) throw GeometryError("hemisphere_projection: dimension mismatch");
    const double c = rv.ell.dot(p.coords());
    if (c <= 0.0) return p;
    const Eigen::VectorXd proj = p.coords() - c * rv.ell;
    if (proj.norm() < kParallelTol * p.radius())
        throw GeometryError("hemisphere_projection: constraint representor is parallel to the point");
    return SpherePoint(proj, p.radius());
}

SpherePoint affine_hemisphere_projection(const SpherePoint& p, const RieszVector& rv, const Eigen::VectorXd& r0) {
    if (rv.ell.size() != p.dim() || r0.size() != p.dim())
        throw GeometryError("affine_hemisphere_projection: dimension mismatch");
    const double level = rv.ell.dot(r0);
    const double c = rv.ell.dot(p.coords());
    if (c <= level) return p;
    const Eigen::VectorXd foot = level * rv.ell;  // point of the plane nearest the origin
    const double r = p.radius();
    const double h2 = r * r - foot.squaredNorm();
    if (!(h2 > 0.0)) throw GeometryError("affine_hemisphere_projection: sphere does not reach the plane");
    const Eigen::VectorXd along = p.coords() - c * rv.ell + level * rv.ell - foot;  // P_H p - foot
    const double na = along.norm();
    if (na < kParallelTol * r) throw GeometryError("affine_hemisphere_projection: degenerate in-plane direction");
    return SpherePoint(foot + along * (std::sqrt(h2) / na), r);
}

SpherePoint spherical_projection(const SpherePoint& p, const RieszVector& rv) {
    return rv.affine() ? affine_hemisphere_projection(p, rv, rv.vertex()) : hemisphere_projection(p, rv);
}

double karcher_objective(const SpherePoint& q, const std::vector<SpherePoint>& points,
                         const std::vector<double>& weights) {
    double f = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = intrinsic_distance(q, points[i]);
        f += 0.5 * weights[i] * d * d;
    }
    return f;
}

KarcherResult karcher_mean(const std::vector<SpherePoint>& points, const std::vector<double>& weights,
                           const KarcherOptions& opts) {
    if (points.empty()) throw GeometryError("karcher_mean: no points");
    if (points.size() != weights.size()) throw GeometryError("karcher_mean: weight count mismatch");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw GeometryError("karcher_mean: weights must be nonnegative");
    if (!(total > 0.0)) throw GeometryError("karcher_mean: weights sum to zero");
    for (const auto& p : points) require_same_sphere(points.front(), p);
    const double r = points.front().radius();

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(points.front().dim());
    for (std::size_t i = 0; i < points.size(); ++i) mean += (weights[i] / total) * points[i].coords();
    const Eigen::VectorXd normal = opts.hemisphere_normal ? *opts.hemisphere_normal : mean;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (weights[i] > 0.0 && !(normal.dot(points[i].coords()) > 0.0))
            throw GeometryError("karcher_mean: points are not contained in one open hemisphere");

    SpherePoint q = mean.norm() > 0.0 ? SpherePoint(mean, r) : points.front();
    Eigen::VectorXd step(q.dim());
    for (int it = 0; it <= opts.max_iter; ++it) {
        step.setZero();
        for (std::size_t i = 0; i < points.size(); ++i)
            if (weights[i] > 0.0) step += (weights[i] / total) * log_map(q, points[i]).direction;
        const double residual = step.norm();
        if (residual <= opts.tol * r) return {q, it, residual};
        if (it == opts.max_iter) break;
        q = exp_map(q, step);
    }
    throw ConvergenceError("karcher_mean: no convergence within the iteration limit");
}

}  // namespace npsa
