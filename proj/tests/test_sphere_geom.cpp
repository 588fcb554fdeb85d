#include "npsa/errors.hpp"
#include "npsa/sphere_geom.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace npsa;

namespace {

constexpr double kPi = std::numbers::pi;

RieszVector normal(const Eigen::VectorXd& ell, double offset = 0.0) {
    RieszVector rv;
    rv.ell = ell.normalized();
    rv.lambda = 1.0;
    rv.offset = offset;
    return rv;
}

SpherePoint pt(double x, double y, double r = 1.0) { return SpherePoint(Eigen::Vector2d(x, y), r); }

// Weighted sum of squared arc lengths from the unit-circle point at angle t.
double circle_objective(double t, const std::vector<double>& angles, const std::vector<double>& w) {
    double f = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double d = std::acos(std::clamp(std::cos(t - angles[i]), -1.0, 1.0));
        f += w[i] * d * d;
    }
    return f;
}

}  // namespace

TEST_CASE("intrinsic distance") {
    CHECK(intrinsic_distance(pt(1, 0), pt(0, 1)) == doctest::Approx(kPi / 2));
    CHECK(intrinsic_distance(pt(1, 0), pt(1, 0)) == 0.0);
    CHECK(intrinsic_distance(pt(2, 0, 2), pt(0, 2, 2)) == doctest::Approx(kPi));
    CHECK_THROWS_AS(intrinsic_distance(pt(1, 0, 1), pt(1, 0, 2)), GeometryError);

    SUBCASE("nearly parallel inputs stay finite") {
        const Eigen::Vector3d a(1.0, 0.0, 0.0);
        for (double e : {1e-9, 1e-12, 1e-15}) {
            const Eigen::Vector3d b(1.0, e, 0.0);
            CHECK(std::isfinite(angle_between(a, b)));
            CHECK(angle_between(a, b) == doctest::Approx(e).epsilon(1e-6));
            CHECK(std::isfinite(angle_between(a, -b)));
        }
    }
    SUBCASE("symmetry and triangle inequality") {
        std::mt19937_64 rng(1);
        for (int i = 0; i < 1000; ++i) {
            const double r = 0.5 + i % 4;
            const SpherePoint a(oracle::random_unit(rng, 5), r), b(oracle::random_unit(rng, 5), r),
                c(oracle::random_unit(rng, 5), r);
            CHECK(intrinsic_distance(a, b) == doctest::Approx(intrinsic_distance(b, a)).epsilon(1e-14));
            CHECK(intrinsic_distance(a, c) <= intrinsic_distance(a, b) + intrinsic_distance(b, c) + 1e-9);
        }
    }
}

TEST_CASE("geodesic segments") {
    const SpherePoint u = pt(1, 0), w = pt(0, 1);
    CHECK(geodesic_point(u, w, 0.0).coords() == u.coords());
    CHECK(geodesic_point(u, w, kPi / 2).coords() == w.coords());
    const SpherePoint m = geodesic_point(u, w, kPi / 4);
    CHECK(m.coords()[0] == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(m.coords()[1] == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK_THROWS_AS(geodesic_point(u, u, 0.0), GeometryError);
    CHECK_THROWS_AS(geodesic_point(u, pt(-1, 0), 0.1), GeometryError);
    CHECK_THROWS_AS(geodesic_point(u, w, 2.0), GeometryError);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double r = 0.3 + 2.0 * unif(rng);
        const SpherePoint a(oracle::random_unit(rng, 4), r), b(oracle::random_unit(rng, 4), r);
        const double d = intrinsic_distance(a, b);
        const double t = unif(rng) * d;
        const SpherePoint g = geodesic_point(a, b, t);
        CHECK(std::abs(g.coords().norm() - r) <= 1e-12 * r);
        CHECK(intrinsic_distance(a, g) == doctest::Approx(t).epsilon(1e-9));
    }

    SUBCASE("unit speed") {
        const SpherePoint a(Eigen::Vector3d(1, 2, 3), 1.0), b(Eigen::Vector3d(-2, 1, 0.5), 1.0);
        const double h = 1e-6;
        for (double t : {0.1, 0.5, 1.0}) {
            const double speed = (geodesic_point(a, b, t + h).coords() - geodesic_point(a, b, t - h).coords()).norm() / (2 * h);
            CHECK(speed == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("exponential and logarithm maps") {
    CHECK(exp_map(pt(1, 0), Eigen::Vector2d(0, 0)).coords() == pt(1, 0).coords());
    const SpherePoint e = exp_map(pt(1, 0), Eigen::Vector2d(0, kPi / 2));
    CHECK(std::abs(e.coords()[0]) < 1e-15);
    CHECK(e.coords()[1] == doctest::Approx(1.0));

    const TangentVector l = log_map(pt(1, 0), pt(0, 1));
    CHECK(l.norm() == doctest::Approx(kPi / 2));
    CHECK(std::abs(l.direction[0]) < 1e-15);
    CHECK(log_map(pt(1, 0), pt(1, 0)).norm() == 0.0);
    CHECK_THROWS_AS(log_map(pt(1, 0), pt(-1, 0)), GeometryError);

    std::mt19937_64 rng(4);
    for (int i = 0; i < 1000; ++i) {
        const double r = 0.5 + i % 3;
        const SpherePoint a(oracle::random_unit(rng, 6), r), b(oracle::random_unit(rng, 6), r);
        const TangentVector v = log_map(a, b);
        CHECK(std::abs(v.direction.dot(a.coords())) <= 1e-10 * r * std::max(1.0, v.norm()));
        CHECK((exp_map(a, v).coords() - b.coords()).norm() <= 1e-10 * r);
    }
}

TEST_CASE("hemisphere projection") {
    CHECK(hemisphere_projection(pt(0, 1), normal(Eigen::Vector2d(-1, 0))).coords() == pt(0, 1).coords());
    const SpherePoint q = hemisphere_projection(pt(1, 0), normal(Eigen::Vector2d(1, -1)));
    CHECK(q.coords()[0] == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(q.coords()[1] == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK_THROWS_AS(hemisphere_projection(pt(1, 0), normal(Eigen::Vector2d(1, 0))), GeometryError);

    SUBCASE("boundary and hemisphere of the output") {
        std::mt19937_64 rng(6);
        for (int i = 0; i < 200; ++i) {
            const SpherePoint p(oracle::random_unit(rng, 7), 2.0);
            const RieszVector rv = normal(oracle::random_unit(rng, 7));
            const SpherePoint out = hemisphere_projection(p, rv);
            CHECK(rv.ell.dot(out.coords()) <= 1e-12);
            if (rv.ell.dot(p.coords()) > 0) CHECK(std::abs(rv.ell.dot(out.coords())) <= 1e-12);
            CHECK(p.coords().dot(out.coords()) >= 0.0);
        }
    }
    SUBCASE("agrees with the normalized Euclidean projection onto the half-space") {
        std::mt19937_64 rng(8);
        for (int i = 0; i < 200; ++i) {
            const Eigen::VectorXd p = 3.0 * oracle::random_unit(rng, 5);
            const RieszVector rv = normal(oracle::random_unit(rng, 5));
            const Eigen::VectorXd e = p - std::max(0.0, rv.ell.dot(p)) * rv.ell;
            const Eigen::VectorXd out = hemisphere_projection(SpherePoint(p, 3.0), rv).coords();
            CHECK((out - 3.0 * e.normalized()).norm() <= 1e-10);
        }
    }
}

TEST_CASE("affine hemisphere projection") {
    const RieszVector plane = normal(Eigen::Vector2d(1, 0), 1.0);
    const Eigen::Vector2d r0(1, 0);
    const SpherePoint p(Eigen::Vector2d(1.2, 0.6), std::sqrt(1.8));
    const SpherePoint out = affine_hemisphere_projection(p, plane, r0);
    CHECK(out.coords()[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.coords()[1] == doctest::Approx(0.89443).epsilon(1e-5));
    CHECK(out.coords().squaredNorm() == doctest::Approx(1.8));
    CHECK(spherical_projection(p, plane).coords() == out.coords());

    const SpherePoint on(Eigen::Vector2d(1.0, std::sqrt(0.8)), std::sqrt(1.8));
    CHECK((affine_hemisphere_projection(on, plane, r0).coords() - on.coords()).norm() < 1e-14);
    CHECK_THROWS_AS(affine_hemisphere_projection(SpherePoint(Eigen::Vector2d(0.5, 0), 0.5), plane, -r0), GeometryError);
}

TEST_CASE("Karcher mean") {
    const std::vector<SpherePoint> two = {pt(1, 0), pt(0, 1)};
    SUBCASE("midpoint of a quarter circle") {
        const KarcherResult k = karcher_mean(two, {0.5, 0.5});
        const double theta = oracle::grid_argmin(
            [](double t) { return circle_objective(t, {0.0, kPi / 2}, {0.5, 0.5}); }, 0.0, kPi / 2, 1570797);
        CHECK(std::atan2(k.point.coords()[1], k.point.coords()[0]) == doctest::Approx(theta).epsilon(1e-6));
        CHECK(k.point.coords()[0] == doctest::Approx(1 / std::sqrt(2.0)));
    }
    CHECK((karcher_mean({pt(0.6, 0.8)}, {1.0}).point.coords() - pt(0.6, 0.8).coords()).norm() < 1e-15);
    CHECK((karcher_mean(two, {1.0, 0.0}).point.coords() - two[0].coords()).norm() < 1e-12);
    CHECK_THROWS_AS(karcher_mean({pt(1, 0), pt(-1, 0)}, {0.5, 0.5}), GeometryError);

    SUBCASE("unequal weights on the circle match a grid minimizer") {
        const std::vector<SpherePoint> pts = {pt(1, 0), pt(std::cos(1.0), std::sin(1.0)), pt(std::cos(-0.4), std::sin(-0.4))};
        const std::vector<double> w = {0.2, 0.5, 0.3};
        const KarcherResult k = karcher_mean(pts, w);
        const double theta = oracle::grid_argmin(
            [&](double t) { return circle_objective(t, {0.0, 1.0, -0.4}, w); }, -0.5, 1.1, 1600001);
        CHECK(std::atan2(k.point.coords()[1], k.point.coords()[0]) == doctest::Approx(theta).epsilon(1e-5));
    }
    SUBCASE("residual and objective bound") {
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 6;
            const double r = 0.5 + 2.0 * u(rng);
            const Eigen::VectorXd c = oracle::random_unit(rng, n);
            std::vector<SpherePoint> pts;
            std::vector<double> w;
            while (pts.size() < 10) {
                const Eigen::VectorXd x = oracle::random_unit(rng, n);
                if (x.dot(c) > 0.05) {
                    pts.emplace_back(x, r);
                    w.push_back(u(rng));
                }
            }
            const KarcherResult k = karcher_mean(pts, w, {.hemisphere_normal = c});
            CHECK(k.residual <= 1e-12 * r);
            const double f = karcher_objective(k.point, pts, w);
            for (const SpherePoint& p : pts) CHECK(f <= karcher_objective(p, pts, w) + 1e-14);
        }
    }
}

TEST_CASE("sphere points are renormalized") {
    const SpherePoint p(Eigen::Vector3d(3, 0, 4), 2.0);
    CHECK(p.coords().norm() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(SpherePoint::on_own_sphere(Eigen::Vector3d(3, 0, 4)).radius() == 5.0);
    CHECK_THROWS_AS(SpherePoint(Eigen::Vector2d(0, 0), 1.0), GeometryError);
}
