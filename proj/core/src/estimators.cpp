#include "mlsg/estimators.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mlsg/errors.hpp"

namespace mlsg {

void parallel_for(int count, int workers, const std::function<void(int)>& fn)
{
    if (count <= 0)
        return;
    const int threads = std::max(1, std::min(workers, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads - 1));
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(body);
    body();
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

GridFunction correction_sample(const LevelHierarchy& hierarchy, int level, const ParameterVector& y)
{
    if (level < 1)
        throw InvalidArgument("correction terms exist for levels >= 1");
    GridFunction fine = hierarchy.solve(level, y);
    const GridFunction coarse = hierarchy.solve(level - 1, y);
    fine -= prolongate(coarse, fine.space_ptr());
    return fine;
}

namespace {

void require_context(const SamplingContext& ctx, bool need_cache)
{
    if (!ctx.hierarchy)
        throw InvalidArgument("sampling context has no problem hierarchy");
    if (need_cache && !ctx.cache)
        throw InvalidArgument("collocation sampling needs a solution cache");
}

} // namespace

PointValues<GridFunction> collocation_values(const SamplingContext& ctx, int level, TermKind kind,
                                             const SmolyakGrid& grid)
{
    require_context(ctx, true);
    if (kind == TermKind::Correction && level < 1)
        throw InvalidArgument("correction terms exist for levels >= 1");
    const LevelHierarchy& problem = ctx.problem();
    if (grid.dimension() != problem.field().dimension)
        throw InvalidArgument("grid dimension does not match the stochastic dimension");

    // collect missing solves in a fixed order, solve them concurrently,
    // then insert in the same order
    struct Job {
        int level;
        int point;
    };
    std::vector<Job> jobs;
    std::vector<int> solve_levels{level};
    if (kind == TermKind::Correction)
        solve_levels.push_back(level - 1);
    for (int lev : solve_levels)
        for (int k = 0; k < grid.size(); ++k)
            if (!ctx.cache->find(lev, grid.points()[static_cast<std::size_t>(k)]))
                jobs.push_back({lev, k});

    std::vector<std::shared_ptr<const GridFunction>> results(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), ctx.workers, [&](int j) {
        const Job& job = jobs[static_cast<std::size_t>(j)];
        const ParameterVector y = map_point(grid.coordinates(job.point));
        results[static_cast<std::size_t>(j)] = std::make_shared<const GridFunction>(problem.solve(job.level, y));
    });
    for (std::size_t j = 0; j < jobs.size(); ++j)
        ctx.cache->insert(jobs[j].level, grid.points()[static_cast<std::size_t>(jobs[j].point)], results[j]);

    PointValues<GridFunction> values;
    const auto fine_space = problem.space(level);
    for (const PointId& id : grid.points()) {
        GridFunction v = *ctx.cache->find(level, id);
        if (kind == TermKind::Correction)
            v -= prolongate(*ctx.cache->find(level - 1, id), fine_space);
        values.emplace_hint(values.end(), id, std::move(v));
    }
    return values;
}

Estimate sc_term_estimate(const SamplingContext& ctx, int level, TermKind kind, int nu)
{
    require_context(ctx, true);
    const long before = ctx.problem().total_solve_count();
    const SmolyakGrid grid = build_grid(ctx.problem().field().dimension, nu);
    const auto values = collocation_values(ctx, level, kind, grid);
    Estimate est;
    est.value = integrate(grid, values);
    est.level = level;
    est.samples = grid.size();
    est.new_solves = ctx.problem().total_solve_count() - before;
    return est;
}

Estimate sc_estimate(const SamplingContext& ctx, int level, int nu)
{
    return sc_term_estimate(ctx, level, TermKind::Solution, nu);
}

double sampling_error_estimate(const SamplingContext& ctx, int level, TermKind kind, int nu)
{
    if (nu < 1)
        throw InvalidArgument("successive-difference error needs nu >= 1");
    const Estimate fine = sc_term_estimate(ctx, level, kind, nu);
    const Estimate coarse = sc_term_estimate(ctx, level, kind, nu - 1);
    return norm(fine.value - coarse.value);
}

std::uint64_t stream_tag(int level, TermKind kind)
{
    return 2u * static_cast<std::uint64_t>(level) + (kind == TermKind::Correction ? 1u : 0u);
}

MonteCarloTerm::MonteCarloTerm(int level, TermKind kind) : level_(level), kind_(kind)
{
    if (level < 0)
        throw InvalidArgument("level must be non-negative");
    if (kind == TermKind::Correction && level < 1)
        throw InvalidArgument("correction terms exist for levels >= 1");
}

void MonteCarloTerm::extend(const SamplingContext& ctx, long target)
{
    require_context(ctx, false);
    const LevelHierarchy& problem = ctx.problem();
    const int dim = problem.field().dimension;
    const std::uint64_t tag = stream_tag(level_, kind_);
    constexpr long kBatch = 512;
    if (sum_.empty()) {
        sum_ = GridFunction(problem.space(level_));
        welford_mean_ = Eigen::VectorXd::Zero(sum_.coefficients().size());
        welford_m2_ = Eigen::VectorXd::Zero(sum_.coefficients().size());
    }
    while (count_ < target) {
        const long first = count_;
        const int batch = static_cast<int>(std::min(kBatch, target - count_));
        std::vector<GridFunction> samples(static_cast<std::size_t>(batch));
        parallel_for(batch, ctx.workers, [&](int j) {
            RandomStream stream = RandomStream::for_task(ctx.seed, tag, static_cast<std::uint64_t>(first + j));
            const ParameterVector y = draw_parameters(stream, dim);
            samples[static_cast<std::size_t>(j)] =
                kind_ == TermKind::Solution ? problem.solve(level_, y) : correction_sample(problem, level_, y);
        });
        for (const GridFunction& v : samples) {
            ++count_;
            sum_ += v;
            const Eigen::VectorXd delta = v.coefficients() - welford_mean_;
            const GridFunction before(v.space_ptr(), delta);
            welford_mean_ += delta / static_cast<double>(count_);
            const GridFunction after(v.space_ptr(), v.coefficients() - welford_mean_);
            welford_m2_ += delta.cwiseProduct(after.coefficients());
            // Welford update in the L2 inner product, <a, b> = (|a+b|^2 - |a-b|^2) / 4
            const double plus = norm(before + after);
            const double minus = norm(before - after);
            spread_l2_ += 0.25 * (plus * plus - minus * minus);
        }
    }
}

Estimate MonteCarloTerm::estimate() const
{
    if (count_ < 1)
        throw PreconditionViolated("Monte Carlo term has no samples");
    Estimate est;
    est.level = level_;
    est.samples = count_;
    est.value = (1.0 / static_cast<double>(count_)) * sum_;
    if (count_ > 1) {
        est.sample_std = std::sqrt(std::max(0.0, spread_l2_) / static_cast<double>(count_ - 1));
        est.variance = GridFunction(sum_.space_ptr(), welford_m2_ / static_cast<double>(count_ - 1));
    } else {
        est.variance = GridFunction(sum_.space_ptr());
    }
    return est;
}

Estimate mc_estimate(const SamplingContext& ctx, int level, long samples)
{
    if (samples < 1)
        throw InvalidArgument("Monte Carlo needs at least one sample");
    require_context(ctx, false);
    const long before = ctx.problem().total_solve_count();
    MonteCarloTerm term(level, TermKind::Solution);
    term.extend(ctx, samples);
    Estimate est = term.estimate();
    est.new_solves = ctx.problem().total_solve_count() - before;
    return est;
}

GridFunction sum_prolonged(const std::vector<GridFunction>& terms)
{
    if (terms.empty())
        throw InvalidArgument("nothing to sum");
    const auto fine = terms.back().space_ptr();
    GridFunction total(fine);
    for (const GridFunction& t : terms)
        total += prolongate(t, fine);
    return total;
}

Estimate ml_estimate(const SamplingContext& ctx, const LevelPlan& plan)
{
    require_context(ctx, plan.sampler == Sampler::Collocation);
    if (plan.sizes.empty())
        throw InvalidArgument("level plan is empty");
    const long before = ctx.problem().total_solve_count();
    std::vector<GridFunction> terms;
    Estimate est;
    for (int l = 0; l <= plan.finest_level(); ++l) {
        const TermKind kind = l == 0 ? TermKind::Solution : TermKind::Correction;
        const long size = plan.sizes[static_cast<std::size_t>(l)];
        if (plan.sampler == Sampler::Collocation) {
            if (plan.nu.size() != plan.sizes.size())
                throw InvalidArgument("collocation plan needs one quadrature level per level");
            const int nu = plan.nu[static_cast<std::size_t>(l)];
            if (grid_size(ctx.problem().field().dimension, nu) != size)
                throw InvalidArgument("plan size " + std::to_string(size) + " at level " + std::to_string(l) +
                                      " is not the size of the level-" + std::to_string(nu) + " grid");
            terms.push_back(sc_term_estimate(ctx, l, kind, nu).value);
        } else {
            MonteCarloTerm term(l, kind);
            term.extend(ctx, size);
            terms.push_back(term.estimate().value);
        }
        est.samples += size;
    }
    est.value = sum_prolonged(terms);
    est.level = plan.finest_level();
    est.new_solves = ctx.problem().total_solve_count() - before;
    return est;
}

double spatial_error_estimate(double correction_mean_norm, double alpha, double refinement)
{
    if (!(refinement > 1.0))
        throw InvalidArgument("refinement factor must exceed 1");
    if (!(alpha > 0.0))
        throw InvalidArgument("spatial rate must be positive");
    if (correction_mean_norm < 0.0)
        throw InvalidArgument("norm must be non-negative");
    return correction_mean_norm / (std::pow(refinement, alpha) - 1.0);
}

} // namespace mlsg
