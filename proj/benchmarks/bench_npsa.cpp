#include "npsa/constraints.hpp"
#include "npsa/experiments.hpp"
#include "npsa/hilbert_basis.hpp"
#include "npsa/solvers.hpp"
#include "npsa/sphere_geom.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace npsa;

namespace {

void BM_BuildPolynomialBasis(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int q = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(build_orthonormal_basis({-1.0, 1.0, q}, {BasisFamily::polynomial, n}));
}
BENCHMARK(BM_BuildPolynomialBasis)->Args({6, 0})->Args({31, 0})->Args({31, 2})->Args({151, 0});

void BM_MostViolated(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto b = build_orthonormal_basis({-1.0, 1.0, 0}, {BasisFamily::polynomial, n});
    const ConstraintSet cs(b, {ConstraintFamily::positivity(Domain::interval(-1.0, 1.0))});
    const CoefVec p = unconstrained_solve(make_target(TestFunctionId::quad_u2), b);
    for (auto _ : state) benchmark::DoNotOptimize(cs.most_violated(p.values, 1e-10));
}
BENCHMARK(BM_MostViolated)->Arg(6)->Arg(31)->Arg(151);

void BM_Solve(benchmark::State& state) {
    const auto kind = static_cast<SolverKind>(state.range(0));
    const int n = static_cast<int>(state.range(1));
    const ExperimentSpec spec = presets::positivity_1d(TestFunctionId::quad_u2, 0, n, kind);
    const auto b = build_orthonormal_basis(spec.space, spec.basis);
    const ConstraintSet cs(b, spec.families, spec.config.search);
    const CoefVec p = unconstrained_solve(make_target(spec.target), b);
    for (auto _ : state) benchmark::DoNotOptimize(run_solver(kind, p, cs, spec.config));
    state.SetLabel(to_string(kind));
}
BENCHMARK(BM_Solve)
    ->Args({static_cast<int>(SolverKind::greedy), 6})
    ->Args({static_cast<int>(SolverKind::greedy), 31})
    ->Args({static_cast<int>(SolverKind::average), 6})
    ->Args({static_cast<int>(SolverKind::hybrid), 31})
    ->Unit(benchmark::kMillisecond);

void BM_KarcherMean(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int m = static_cast<int>(state.range(1));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::VectorXd c = Eigen::VectorXd::Unit(n, 0);
    std::vector<SpherePoint> pts;
    std::vector<double> w(m, 1.0);
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd x(n);
        for (auto& v : x) v = 0.5 / std::sqrt(n) * g(rng);
        x += c;
        pts.emplace_back(x, 1.0);
    }
    for (auto _ : state) benchmark::DoNotOptimize(karcher_mean(pts, w));
}
BENCHMARK(BM_KarcherMean)->Args({6, 32})->Args({31, 128})->Args({151, 512});

}  // namespace

BENCHMARK_MAIN();
