#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mlsg/mesh_fem.hpp"
#include "mlsg/sparse_grid.hpp"

namespace mlsg {

enum class Sampler { MonteCarlo, Collocation };

/// Runs fn(0) .. fn(count-1) on up to `workers` threads. The first exception
/// thrown by any task is rethrown after all threads have joined.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

/// Shared state for sampling: the problem hierarchy, the solve cache used by
/// collocation, the worker count and the base seed used by Monte Carlo.
struct SamplingContext {
    const LevelHierarchy* hierarchy = nullptr;
    SolutionCache* cache = nullptr;
    int workers = 1;
    std::uint64_t seed = 0;

    const LevelHierarchy& problem() const { return *hierarchy; }
};

/// Integrand of one term of the multilevel sum: the solution u_l itself or the
/// correction u_l - P u_{l-1}.
enum class TermKind { Solution, Correction };

/// u_l(y) - prolongate(u_{l-1}(y)) on mesh l, without caching.
GridFunction correction_sample(const LevelHierarchy& hierarchy, int level, const ParameterVector& y);

struct Estimate {
    GridFunction value;
    int level = 0;
    long samples = 0;
    long new_solves = 0;
    /// Pointwise sample variance of the integrand at the DOFs (Monte Carlo only).
    std::optional<GridFunction> variance;
    /// sqrt(E||v - E v||^2) estimated from the samples (Monte Carlo only).
    double sample_std = 0.0;
};

/// Integrand values at every point of a collocation grid. Missing solves are
/// computed in parallel and inserted into the cache in point order.
PointValues<GridFunction> collocation_values(const SamplingContext& ctx, int level, TermKind kind,
                                             const SmolyakGrid& grid);

/// Collocation estimate of E[v] for the term integrand v on the level-nu grid.
Estimate sc_term_estimate(const SamplingContext& ctx, int level, TermKind kind, int nu);

/// Single-level collocation estimate of E[u_l].
Estimate sc_estimate(const SamplingContext& ctx, int level, int nu);

/// ||I_nu v - I_{nu-1} v|| in spatial L2 for the term integrand v.
double sampling_error_estimate(const SamplingContext& ctx, int level, TermKind kind, int nu);

/// Streaming Monte Carlo sampler for one term. Sample k uses the parameter
/// stream derived from (seed, stream tag, k), so the first M samples are the
/// same however the sampler is extended.
class MonteCarloTerm {
public:
    MonteCarloTerm(int level, TermKind kind);

    int level() const { return level_; }
    TermKind kind() const { return kind_; }
    long count() const { return count_; }

    /// Draws samples count() .. target-1.
    void extend(const SamplingContext& ctx, long target);

    Estimate estimate() const;

private:
    int level_;
    TermKind kind_;
    long count_ = 0;
    GridFunction sum_;
    double spread_l2_ = 0.0; // sum of squared L2 deviations from the mean
    Eigen::VectorXd welford_mean_;
    Eigen::VectorXd welford_m2_;
};

/// Stream tag of a term; distinct for every (level, kind) pair so terms draw
/// independent parameters.
std::uint64_t stream_tag(int level, TermKind kind);

/// Single-level Monte Carlo estimate of E[u_l] from M samples.
Estimate mc_estimate(const SamplingContext& ctx, int level, long samples);

/// Per-level sample sizes of a multilevel estimator. For collocation,
/// sizes[l] must equal the size of the level-nu[l] grid.
struct LevelPlan {
    Sampler sampler = Sampler::Collocation;
    std::vector<long> sizes;
    std::vector<int> nu;

    int finest_level() const { return static_cast<int>(sizes.size()) - 1; }
};

/// Sum of term means, each prolonged to the space of the finest term.
GridFunction sum_prolonged(const std::vector<GridFunction>& terms);

/// Multilevel estimate: level-0 solution term plus corrections 1..L, each
/// sampled with its own size, summed on mesh L.
Estimate ml_estimate(const SamplingContext& ctx, const LevelPlan& plan);

/// Geometric-tail extrapolation ||E[Delta u_L]|| / (s^alpha - 1).
double spatial_error_estimate(double correction_mean_norm, double alpha, double refinement);

} // namespace mlsg
