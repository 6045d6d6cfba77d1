#include <benchmark/benchmark.h>

#include <random>

#include "mlsg/estimators.hpp"
#include "mlsg/mesh_fem.hpp"
#include "mlsg/sparse_grid.hpp"

using namespace mlsg;

namespace {

ParameterVector random_parameters(std::mt19937_64& rng, int dim)
{
    std::uniform_real_distribution<double> u(-1.7320508075688772, 1.7320508075688772);
    std::vector<double> y(static_cast<std::size_t>(dim));
    for (double& v : y)
        v = u(rng);
    return ParameterVector(y);
}

void BM_Solve1D(benchmark::State& state)
{
    const LevelHierarchy problem(DiscretizationConfig{}, FieldConfig{});
    const int level = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(problem.solve(level, random_parameters(rng, 5)));
    state.counters["dofs"] = problem.dof_count(level);
}
BENCHMARK(BM_Solve1D)->DenseRange(0, 4);

void BM_Solve2D(benchmark::State& state)
{
    DiscretizationConfig disc;
    disc.dim = 2;
    disc.h0 = 0.25;
    disc.refinement = 2;
    const LevelHierarchy problem(disc, FieldConfig{});
    const int level = static_cast<int>(state.range(0));
    std::mt19937_64 rng(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(problem.solve(level, random_parameters(rng, 5)));
    state.counters["dofs"] = problem.dof_count(level);
}
BENCHMARK(BM_Solve2D)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_BuildGrid(benchmark::State& state)
{
    const int nu = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(build_grid(5, nu));
    state.counters["points"] = grid_size(5, nu);
}
BENCHMARK(BM_BuildGrid)->DenseRange(1, 5);

void BM_Interpolate(benchmark::State& state)
{
    const SmolyakGrid grid = build_grid(5, static_cast<int>(state.range(0)));
    PointValues<double> values;
    for (int k = 0; k < grid.size(); ++k) {
        const auto t = grid.coordinates(k);
        values[grid.points()[static_cast<std::size_t>(k)]] = std::exp(0.3 * t[0] - t[1]);
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> t(5);
    for (auto _ : state) {
        for (double& v : t)
            v = u(rng);
        benchmark::DoNotOptimize(interpolate(grid, values, std::span<const double>(t)));
    }
}
BENCHMARK(BM_Interpolate)->DenseRange(1, 4);

void BM_MonteCarloExtend(benchmark::State& state)
{
    const LevelHierarchy problem(DiscretizationConfig{}, FieldConfig{});
    SolutionCache cache;
    SamplingContext ctx{&problem, &cache, static_cast<int>(state.range(0)), 1};
    for (auto _ : state) {
        MonteCarloTerm term(1, TermKind::Correction);
        term.extend(ctx, 256);
        benchmark::DoNotOptimize(term.estimate());
    }
}
BENCHMARK(BM_MonteCarloExtend)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
