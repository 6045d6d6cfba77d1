#include <atomic>
#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "mlsg/estimators.hpp"
#include "oracles.hpp"

using namespace mlsg;

namespace {

struct Bench {
    LevelHierarchy problem;
    SolutionCache cache;
    SamplingContext ctx;

    Bench(DiscretizationConfig disc, FieldConfig field, int workers = 1, std::uint64_t seed = 1)
        : problem(disc, field)
    {
        ctx.hierarchy = &problem;
        ctx.cache = &cache;
        ctx.workers = workers;
        ctx.seed = seed;
    }
};

DiscretizationConfig example_disc()
{
    return DiscretizationConfig{};
}

FieldConfig frozen_field()
{
    FieldConfig f;
    f.amplitude = 0.0;
    return f;
}

DiscretizationConfig tiny_disc()
{
    DiscretizationConfig d;
    d.h0 = 0.25;
    d.refinement = 2;
    return d;
}

FieldConfig tiny_field()
{
    FieldConfig f;
    f.dimension = 2;
    return f;
}

} // namespace

TEST(ParallelFor, RunsEveryTaskAndRethrows)
{
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](int k) { hits[static_cast<std::size_t>(k)]++; });
    for (auto& h : hits)
        EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(10, 3,
                              [](int k) {
                                  if (k == 7)
                                      throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(MonteCarlo, FrozenFieldEqualsSingleSolve)
{
    Bench s(example_disc(), frozen_field());
    const GridFunction u = s.problem.solve(0, ParameterVector::zeros(5));
    for (long m : {1L, 7L, 40L}) {
        const Estimate e = mc_estimate(s.ctx, 0, m);
        EXPECT_LT((e.value.coefficients() - u.coefficients()).lpNorm<Eigen::Infinity>(), 1e-15);
        EXPECT_EQ(e.samples, m);
        EXPECT_LT(e.sample_std, 1e-14);
    }
}

TEST(MonteCarlo, SameSeedBitIdenticalAcrossWorkers)
{
    Bench a(example_disc(), FieldConfig{}, 1, 17);
    Bench b(example_disc(), FieldConfig{}, 4, 17);
    Bench c(example_disc(), FieldConfig{}, 1, 18);
    const Estimate ea = mc_estimate(a.ctx, 1, 300);
    const Estimate eb = mc_estimate(b.ctx, 1, 300);
    const Estimate ec = mc_estimate(c.ctx, 1, 300);
    EXPECT_TRUE(ea.value.coefficients() == eb.value.coefficients());
    EXPECT_EQ(ea.sample_std, eb.sample_std);
    EXPECT_FALSE(ea.value.coefficients() == ec.value.coefficients());
}

TEST(MonteCarlo, StreamingExtensionMatchesOneShot)
{
    Bench s(example_disc(), FieldConfig{}, 2, 5);
    MonteCarloTerm term(1, TermKind::Correction);
    term.extend(s.ctx, 100);
    term.extend(s.ctx, 700);
    MonteCarloTerm once(1, TermKind::Correction);
    once.extend(s.ctx, 700);
    EXPECT_LT((term.estimate().value.coefficients() - once.estimate().value.coefficients()).norm(), 1e-15);
    EXPECT_NEAR(term.estimate().sample_std, once.estimate().sample_std, 1e-14);
    ASSERT_TRUE(term.estimate().variance.has_value());
}

TEST(MonteCarlo, StreamTagsDistinct)
{
    std::set<std::uint64_t> tags;
    for (int l = 0; l < 8; ++l) {
        tags.insert(stream_tag(l, TermKind::Solution));
        tags.insert(stream_tag(l, TermKind::Correction));
    }
    EXPECT_EQ(tags.size(), 16u);
}

TEST(Collocation, FrozenFieldEqualsDeterministicSolve)
{
    Bench s(example_disc(), frozen_field());
    const GridFunction u = s.problem.solve(1, ParameterVector::zeros(5));
    for (int nu = 0; nu <= 3; ++nu) {
        const Estimate e = sc_estimate(s.ctx, 1, nu);
        EXPECT_LT((e.value.coefficients() - u.coefficients()).lpNorm<Eigen::Infinity>(), 1e-14);
        if (nu >= 1)
            EXPECT_LT(sampling_error_estimate(s.ctx, 1, TermKind::Solution, nu), 1e-14);
    }
}

TEST(Collocation, ColdCacheSolvesEachPointOnce)
{
    Bench s(example_disc(), FieldConfig{}, 3);
    const Estimate e = sc_estimate(s.ctx, 0, 2);
    EXPECT_EQ(s.problem.solve_count(0), 61);
    EXPECT_EQ(e.new_solves, 61);
    // the nested coarser grid is served from the cache
    const Estimate again = sc_estimate(s.ctx, 0, 1);
    EXPECT_EQ(again.new_solves, 0);
    EXPECT_EQ(s.problem.solve_count(0), 61);
}

TEST(Collocation, SamplingErrorDecreasesWithLevel)
{
    Bench s(example_disc(), FieldConfig{}, 4);
    double previous = INFINITY;
    for (int nu = 1; nu <= 4; ++nu) {
        const double e = sampling_error_estimate(s.ctx, 0, TermKind::Solution, nu);
        const double direct = norm(sc_estimate(s.ctx, 0, nu).value - sc_estimate(s.ctx, 0, nu - 1).value);
        EXPECT_DOUBLE_EQ(e, direct);
        EXPECT_LT(e, previous);
        previous = e;
    }
    EXPECT_THROW(sampling_error_estimate(s.ctx, 0, TermKind::Solution, 0), InvalidArgument);
}

TEST(Correction, ZeroWhenLevelsCoincideAndDecays)
{
    Bench s(example_disc(), FieldConfig{});
    const ParameterVector y({0.7, -1.1, 0.4, 1.6, -0.2});
    std::vector<double> h, n;
    for (int l = 1; l <= 4; ++l) {
        const GridFunction d = correction_sample(s.problem, l, y);
        const GridFunction fine = s.problem.solve(l, y);
        const GridFunction coarse = prolongate(s.problem.solve(l - 1, y), s.problem.space(l));
        EXPECT_LE(norm(d), norm(fine) + norm(coarse) + 1e-15);
        h.push_back(s.problem.h(l));
        n.push_back(norm(d));
    }
    EXPECT_GT(oracle::loglog_slope(h, n), 0.0);
    // the same solution on both sides of the difference
    const GridFunction u = s.problem.solve(2, y);
    EXPECT_EQ(norm(u - prolongate(u, s.problem.space(2))), 0.0);
}

TEST(MultilevelEstimate, LevelZeroEqualsSingleLevel)
{
    Bench s(example_disc(), FieldConfig{}, 2, 9);
    LevelPlan sc_plan{Sampler::Collocation, {61}, {2}};
    EXPECT_TRUE(ml_estimate(s.ctx, sc_plan).value.coefficients() == sc_estimate(s.ctx, 0, 2).value.coefficients());
    LevelPlan mc_plan{Sampler::MonteCarlo, {50}, {0}};
    EXPECT_TRUE(ml_estimate(s.ctx, mc_plan).value.coefficients() == mc_estimate(s.ctx, 0, 50).value.coefficients());
}

TEST(MultilevelEstimate, TelescopesToFinestSingleLevel)
{
    Bench s(tiny_disc(), tiny_field(), 4);
    const int nu = 8;
    const long size = grid_size(2, nu);
    LevelPlan plan{Sampler::Collocation, {size, size, size}, {nu, nu, nu}};
    const Estimate ml = ml_estimate(s.ctx, plan);
    const Estimate sl = sc_estimate(s.ctx, 2, nu);
    EXPECT_LT(norm(ml.value - sl.value), 1e-6);
}

TEST(MultilevelEstimate, RejectsSizeGridMismatch)
{
    Bench s(example_disc(), FieldConfig{});
    LevelPlan plan{Sampler::Collocation, {60}, {2}};
    EXPECT_THROW(ml_estimate(s.ctx, plan), InvalidArgument);
}

TEST(MultilevelEstimate, NestedReuseSavesSolves)
{
    Bench s(example_disc(), FieldConfig{});
    LevelPlan plan{Sampler::Collocation, {241, 61, 11}, {3, 2, 1}};
    ml_estimate(s.ctx, plan);
    EXPECT_LT(s.problem.total_solve_count(), 241 + 2 * 61 + 2 * 11);
}

TEST(SpatialErrorEstimate, GeometricTail)
{
    EXPECT_NEAR(spatial_error_estimate(3e-3, 2.0, 2.0), 1e-3, 1e-18);
    EXPECT_EQ(spatial_error_estimate(0.0, 2.0, 4.0), 0.0);
    EXPECT_THROW(spatial_error_estimate(1e-3, 2.0, 1.0), InvalidArgument);
    EXPECT_THROW(spatial_error_estimate(1e-3, 0.0, 2.0), InvalidArgument);
}
