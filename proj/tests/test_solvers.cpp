#include "npsa/errors.hpp"
#include "npsa/experiments.hpp"
#include "npsa/solvers.hpp"
#include "npsa/sphere_geom.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace npsa;

namespace {

constexpr double kPi = std::numbers::pi;
const Domain kUnit = Domain::interval(-1.0, 1.0);

RieszVector halfspace(const Eigen::VectorXd& ell, double offset = 0.0) {
    RieszVector rv;
    rv.ell = ell.normalized();
    rv.lambda = 1.0;
    rv.offset = offset;
    return rv;
}

// Chord form of the arc length; acos loses half the digits near zero.
double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return 2.0 * std::asin(std::min(1.0, 0.5 * (a.normalized() - b.normalized()).norm()));
}

struct Table1Instance {
    CoefVec p;
    std::unique_ptr<ConstraintSet> cs;
};

Table1Instance table1_instance(int n) {
    const auto b = build_orthonormal_basis({-1.0, 1.0, 0}, {BasisFamily::polynomial, n});
    Table1Instance t{unconstrained_solve(make_target(TestFunctionId::quad_u2), b), nullptr};
    t.cs = std::make_unique<ConstraintSet>(b, std::vector<ConstraintFamily>{ConstraintFamily::positivity(kUnit)});
    return t;
}

}  // namespace

TEST_CASE("a feasible start is returned unchanged") {
    const auto b = build_orthonormal_basis({-1.0, 1.0, 0}, {BasisFamily::polynomial, 4});
    const CoefVec p(b, Eigen::Vector4d(1.0, 0.1, 0.05, 0.0));
    using FamilySolver = SolveResult (*)(const CoefVec&, const std::vector<ConstraintFamily>&, const SolverConfig&);
    for (FamilySolver solve : std::initializer_list<FamilySolver>{&solve_greedy, &solve_average, &solve_hybrid, &solve_linear_only}) {
        const SolveResult r = (*solve)(p, std::vector<ConstraintFamily>{ConstraintFamily::positivity(kUnit)}, SolverConfig{});
        CHECK(r.converged);
        CHECK(r.iterations == 0);
        CHECK(r.trace.empty());
        CHECK(r.coeffs.values == p.values);
    }
}

TEST_CASE("single fixed half-space in the plane") {
    const std::vector<RieszVector> h = {halfspace(Eigen::Vector2d(1.0, -1.0))};
    const Eigen::Vector2d p(1.0, 0.0);
    SUBCASE("greedy takes one step onto the boundary") {
        const SolveResult r = solve_greedy(p, h);
        CHECK(r.converged);
        CHECK(r.iterations == 1);
        const Eigen::Vector2d o = oracle::circle_search(p, [&](const Eigen::Vector2d& x) { return h[0].ell.dot(x) <= 0.0; }, 1e-5);
        CHECK(angle(r.coeffs.values, o) <= 1e-5);
        CHECK(r.coeffs.values[0] == doctest::Approx(1 / std::sqrt(2.0)));
        CHECK(r.coeffs.values[1] == doctest::Approx(1 / std::sqrt(2.0)));
    }
    SUBCASE("average and hybrid coincide with greedy") {
        const SolveResult g = solve_greedy(p, h), a = solve_average(p, h), y = solve_hybrid(p, h);
        CHECK((a.coeffs.values - g.coeffs.values).norm() < 1e-12);
        CHECK((y.coeffs.values - g.coeffs.values).norm() < 1e-12);
        CHECK(y.trace[0].step_dist == doctest::Approx(g.trace[0].step_dist));
    }
    SUBCASE("linear baseline is dissipative") {
        const SolveResult l = solve_linear_only(p, h);
        CHECK(l.coeffs.values[0] == doctest::Approx(0.5));
        CHECK(l.coeffs.values[1] == doctest::Approx(0.5));
        CHECK(l.coeffs.values.norm() == doctest::Approx(1 / std::sqrt(2.0)));
    }
}

TEST_CASE("greedy moves monotonically towards the exact answer on small instances") {
    // Hemisphere projections are nonexpansive towards feasible points within a quarter
    // circle, so the check covers starts whose exact projection is nearer than pi/2.
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<RieszVector> h;
        std::vector<Eigen::Vector3d> normals;
        // Cones around a common interior direction are convex and nonempty.
        const Eigen::Vector3d c = oracle::random_unit(rng, 3);
        for (int i = 0; i < 3; ++i) {
            Eigen::Vector3d n = oracle::random_unit(rng, 3);
            if (n.dot(c) > -0.2) n -= (n.dot(c) + 0.2) * c;
            h.push_back(halfspace(n));
            normals.push_back(h.back().ell);
        }
        const Eigen::Vector3d p = oracle::random_unit(rng, 3);
        const Eigen::Vector3d exact = oracle::cone_projection_s2(p, normals);
        const SolveResult r = solve_greedy(p, h);
        // Zig-zagging into a narrow corner can exhaust the iteration budget; the
        // replay below still applies to the iterates produced.
        if (r.converged) {
            for (const auto& n : normals) CHECK(n.dot(r.coeffs.values) <= 1e-9);
            // The exact projection is never beaten.
            CHECK(angle(p, r.coeffs.values) >= angle(p, exact) - 1e-9);
        }
        if (angle(p, exact) >= kPi / 2) continue;
        ++checked;
        // Replay the iterates: the distance to the exact solution never grows.
        Eigen::VectorXd x = p;
        double prev = angle(x, exact);
        for (std::size_t step = 0; step < r.trace.size(); ++step) {
            std::optional<RieszVector> worst;
            double w = 0.0;
            for (const RieszVector& rv : h)
                if (sdist(x, rv) < w) w = sdist(x, rv), worst = rv;
            REQUIRE(worst);
            x = hemisphere_projection(SpherePoint(x, 1.0), *worst).coords();
            const double d = angle(x, exact);
            CHECK(d <= prev + 1e-9);
            prev = d;
        }
        CHECK((x - r.coeffs.values).norm() <= 1e-12);
    }
    CHECK(checked >= 100);
}

TEST_CASE("nearest, most aligned and smallest-distance selections agree") {
    // On a discretized feasible set the argmin of ||v - p||, the argmax of <v, p> and
    // the argmin of the arc length pick the same point.
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 2;
        const Eigen::VectorXd p = oracle::random_unit(rng, n);
        std::vector<Eigen::VectorXd> pts;
        for (int i = 0; i < 500; ++i) {
            const Eigen::VectorXd x = oracle::random_unit(rng, n);
            if (x[0] >= 0.1) pts.push_back(x);
        }
        std::size_t a = 0, b = 0, c = 0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if ((pts[i] - p).squaredNorm() < (pts[a] - p).squaredNorm()) a = i;
            if (pts[i].dot(p) > pts[b].dot(p)) b = i;
            if (angle(pts[i], p) < angle(pts[c], p)) c = i;
        }
        CHECK(a == b);
        CHECK(b == c);
    }
}

TEST_CASE("greedy step lands on the projected constraint") {
    auto t = table1_instance(12);
    const SolveResult r = solve_greedy(t.p, *t.cs);
    REQUIRE(r.converged);
    // Replaying the first step must leave the chosen constraint active.
    const ViolationRecord w = t.cs->worst(t.p.values);
    const RieszVector rv = t.cs->riesz(w.family, w.param);
    const SpherePoint next = hemisphere_projection(SpherePoint::on_own_sphere(t.p.values), rv);
    CHECK(sdist(next.coords(), rv) >= -1e-12);
    CHECK(r.trace[0].worst_sdist == doctest::Approx(w.signed_distance));
}

TEST_CASE("solvers preserve the norm and agree on positivity instances") {
    for (int n : {6, 31}) {
        auto t = table1_instance(n);
        const SolveResult g = solve_greedy(t.p, *t.cs), a = solve_average(t.p, *t.cs), h = solve_hybrid(t.p, *t.cs);
        for (const SolveResult* r : {&g, &a, &h}) {
            CHECK(r->converged);
            CHECK(r->max_norm_deviation <= 1e-12);
            for (const TraceRow& row : r->trace) CHECK(std::abs(row.norm - t.p.norm()) <= 1e-12 * t.p.norm());
            CHECK(t.cs->is_feasible(r->coeffs.values, SolverConfig{}.delta));
        }
        CHECK((g.coeffs.values - a.coeffs.values).norm() <= 5e-3);
        CHECK((g.coeffs.values - h.coeffs.values).norm() <= 5e-3);
        CHECK((a.coeffs.values - h.coeffs.values).norm() <= 5e-3);
        const SolveResult l = solve_linear_only(t.p, *t.cs);
        CHECK(l.coeffs.values.norm() <= t.p.norm());
    }
}

TEST_CASE("error measure") {
    auto t = table1_instance(6);
    const Target u = make_target(TestFunctionId::quad_u2);
    CHECK(compute_eta(t.p, t.p, u).eta == 0.0);
    const SolveResult g = solve_greedy(t.p, *t.cs);
    const EtaResult e = compute_eta(g.coeffs, t.p, u);
    // Pythagorean identity: v - u is orthogonal to V.
    CHECK(distance_to_target(g.coeffs, u) == doctest::Approx(std::sqrt(1.0 + e.eta * e.eta) * e.denominator).epsilon(1e-8));

    const auto b = build_orthonormal_basis({-1.0, 1.0, 0}, {BasisFamily::polynomial, 3});
    const Target in_v{"x2", 1, [](const Point& q, int) { return q.x * q.x; }, 0, {}, {}, {}};
    const CoefVec pv = unconstrained_solve(in_v, b);
    const EtaResult d = compute_eta(pv, pv, in_v);
    CHECK(d.degenerate);
    CHECK(std::isinf(d.eta));
}

TEST_CASE("parallel representors abort unless a retry is allowed") {
    const std::vector<RieszVector> h = {halfspace(Eigen::Vector2d(1.0, 0.0))};
    const Eigen::Vector2d p(1.0, 0.0);
    CHECK_THROWS_AS(solve_greedy(p, h), GeometryError);
    SolverConfig cfg;
    cfg.perturb_on_parallel = true;
    const SolveResult r = solve_greedy(p, h, cfg);
    CHECK(r.converged);
    CHECK(std::abs(r.coeffs.values[0]) <= 1e-9);
}

TEST_CASE("invalid solver input") {
    auto t = table1_instance(6);
    CHECK_THROWS_AS(solve_greedy(CoefVec(t.p.basis, Eigen::VectorXd::Zero(6)), *t.cs), DomainError);
    SolverConfig bad;
    bad.max_iter = 0;
    CHECK_THROWS_AS(solve_greedy(t.p, *t.cs, bad), DomainError);
    const auto other = build_orthonormal_basis({-1.0, 1.0, 1}, {BasisFamily::polynomial, 6});
    CHECK_THROWS_AS(solve_greedy(CoefVec(other, t.p.values), *t.cs), DomainError);
}

TEST_CASE("iteration cap is reported") {
    auto t = table1_instance(31);
    SolverConfig cfg;
    cfg.max_iter = 3;
    const SolveResult r = solve_greedy(t.p, *t.cs, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.trace.size() == 3);
    CHECK_FALSE(r.message.empty());
}

TEST_CASE("affine upper bound") {
    const auto b = build_orthonormal_basis({-1.0, 1.0, 0}, {BasisFamily::polynomial, 8});
    const Target u = make_target(TestFunctionId::step_u0);
    const CoefVec p = unconstrained_solve(u, b);
    const std::vector<ConstraintFamily> fams = {ConstraintFamily::positivity(kUnit), ConstraintFamily::upper_bound(kUnit, 1.0)};
    const ConstraintSet cs(b, fams);
    for (auto* solve : {static_cast<SolveResult (*)(const CoefVec&, const ConstraintSet&, const SolverConfig&)>(&solve_greedy),
                        static_cast<SolveResult (*)(const CoefVec&, const ConstraintSet&, const SolverConfig&)>(&solve_hybrid)}) {
        const SolveResult r = (*solve)(p, cs, SolverConfig{});
        CHECK(r.converged);
        CHECK(r.max_norm_deviation <= 1e-12);
        CHECK(ConstraintSet::min_value(r.coeffs, 0, 4001) >= -1e-8);
        double hi = -1e300;
        for (int i = 0; i <= 4000; ++i) hi = std::max(hi, synthesize(r.coeffs, {-1.0 + i / 2000.0, 0.0}));
        CHECK(hi <= 1.0 + 1e-8);
    }
}

TEST_CASE("alternative formulations that are not posed") {
    SUBCASE("least squares over an arc has two minimizers") {
        // Squared residual over the arc 0.01 <= t <= pi - 0.01 of an ellipse-weighted fit.
        auto cost = [](double t) {
            const double y = std::sin(t) - 0.5;
            return 0.4 * std::cos(t) * std::cos(t) + y * y;
        };
        auto closed = [](double t) { return 0.6 * std::sin(t) * std::sin(t) - std::sin(t) + 0.65; };
        for (double t : {0.01, 0.5, 1.2, 2.9}) CHECK(cost(t) == doctest::Approx(closed(t)).epsilon(1e-12));
        const double t1 = oracle::grid_argmin(cost, 0.01, kPi / 2, 2000000);
        const double t2 = oracle::grid_argmin(cost, kPi / 2, kPi - 0.01, 2000000);
        CHECK(t1 == doctest::Approx(std::asin(5.0 / 6.0)).epsilon(1e-5));
        CHECK(t2 == doctest::Approx(kPi - std::asin(5.0 / 6.0)).epsilon(1e-5));
        CHECK(cost(t1) == doctest::Approx(cost(t2)).epsilon(1e-12));
        // The spherical formulation of the same data is unique: the nearest arc point to b.
        const std::vector<RieszVector> h = {halfspace(Eigen::Vector2d(0.0, -1.0))};
        const SolveResult r = solve_greedy(Eigen::Vector2d(0.0, 0.5), h);
        CHECK(r.iterations == 0);
    }
    SUBCASE("two affine cuts leave two disjoint arcs") {
        // y <= 4x + 2 and y <= -4x + 2 on the unit circle.
        const std::vector<RieszVector> h = {halfspace(Eigen::Vector2d(-4.0, 1.0), 2.0 / std::sqrt(17.0)),
                                            halfspace(Eigen::Vector2d(4.0, 1.0), 2.0 / std::sqrt(17.0))};
        auto feasible = [&](const Eigen::Vector2d& x) { return x[1] <= 4 * x[0] + 2 && x[1] <= -4 * x[0] + 2; };
        int components = 0;
        bool prev = feasible(Eigen::Vector2d(1.0, 0.0));
        for (int i = 1; i <= 100000; ++i) {
            const double t = 2 * kPi * i / 100000;
            const bool f = feasible(Eigen::Vector2d(std::cos(t), std::sin(t)));
            if (f && !prev) ++components;
            prev = f;
        }
        CHECK(components == 2);
        // The left cut-off arc runs between the two roots of 17x^2 + 16x + 3 = 0 on the
        // line y = 4x + 2; its midpoint is equidistant from both feasible arcs.
        const double disc = std::sqrt(16.0 * 16.0 - 4.0 * 17.0 * 3.0);
        const Eigen::Vector2d e1((-16.0 + disc) / 34.0, 4.0 * (-16.0 + disc) / 34.0 + 2.0);
        const Eigen::Vector2d e2((-16.0 - disc) / 34.0, 4.0 * (-16.0 - disc) / 34.0 + 2.0);
        CHECK(e1.norm() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(e2.norm() == doctest::Approx(1.0).epsilon(1e-14));
        const Eigen::Vector2d mid = (e1 + e2).normalized();
        CHECK_FALSE(feasible(mid));
        CHECK(angle(mid, e1) == doctest::Approx(angle(mid, e2)).epsilon(1e-14));
        // Both endpoints are nearest feasible points: the grid search reaches the common
        // distance, and feasible points sit just inside each end.
        const Eigen::Vector2d a = oracle::circle_search(mid, feasible, 1e-5);
        CHECK(angle(mid, a) == doctest::Approx(angle(mid, e1)).epsilon(1e-4));
        const Eigen::Rotation2Dd nudge(1e-6);
        CHECK(feasible(nudge.inverse() * e1));
        CHECK(feasible(nudge * e2));
        // Constraints like these carry an offset; the library routes them to the
        // affine projection, never to the homogeneous one.
        CHECK(h[0].affine());
        CHECK(h[1].affine());
    }
}
