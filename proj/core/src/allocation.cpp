#include "mlsg/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mlsg/errors.hpp"

namespace mlsg {

namespace {

void check_tolerance(double eps)
{
    if (!(eps > 0.0 && eps < 1.0))
        throw InvalidArgument("tolerance must lie in (0, 1), got " + std::to_string(eps));
}

/// sum_l (C_l^mu2 phi_l)^(1/(mu2+1))
double aggregate(const ErrorModel& model)
{
    double s = 0.0;
    for (int l = 0; l < model.levels(); ++l) {
        const auto i = static_cast<std::size_t>(l);
        s += std::pow(std::pow(model.cost[i], model.mu2) * model.phi[i], 1.0 / (model.mu2 + 1.0));
    }
    return s;
}

double level_error(double phi, double size, double mu1, double mu2)
{
    const double log_term = mu1 == 0.0 ? 1.0 : std::pow(std::log(size), mu1);
    return phi * log_term * std::pow(size, -mu2);
}

} // namespace

void ErrorModel::validate() const
{
    if (!(mu1 >= 0.0))
        throw InvalidArgument("mu1 must be non-negative");
    if (!(mu2 > 0.0))
        throw InvalidArgument("mu2 must be positive");
    if (phi.empty() || phi.size() != cost.size())
        throw InvalidArgument("error model needs matching, non-empty phi and cost vectors");
    for (std::size_t l = 0; l < phi.size(); ++l) {
        if (!(phi[l] > 0.0) || !std::isfinite(phi[l]))
            throw InvalidArgument("phi must be positive and finite at level " + std::to_string(l));
        if (!(cost[l] > 0.0) || !std::isfinite(cost[l]))
            throw InvalidArgument("cost must be positive and finite at level " + std::to_string(l));
    }
}

std::vector<double> optimal_sizes_algebraic(double eps, const ErrorModel& model)
{
    check_tolerance(eps);
    model.validate();
    if (model.mu1 != 0.0)
        throw InvalidArgument("algebraic sizes require mu1 = 0");
    const double mu2 = model.mu2;
    const double scale = std::pow(2.0 / eps, 1.0 / mu2) * std::pow(aggregate(model), 1.0 / mu2);
    std::vector<double> sizes;
    for (int l = 0; l < model.levels(); ++l) {
        const auto i = static_cast<std::size_t>(l);
        sizes.push_back(scale * std::pow(model.phi[i] / model.cost[i], 1.0 / (mu2 + 1.0)));
    }
    return sizes;
}

double predicted_cost_algebraic(double eps, const ErrorModel& model)
{
    check_tolerance(eps);
    model.validate();
    if (model.mu1 != 0.0)
        throw InvalidArgument("algebraic cost requires mu1 = 0");
    const double mu2 = model.mu2;
    return std::pow(2.0 / eps, 1.0 / mu2) * std::pow(aggregate(model), (mu2 + 1.0) / mu2);
}

double ceiling_scale_k1(double mu1, double mu2, double mu1t, double mu2t)
{
    return std::pow(1.0 + (1.0 / mu2t + mu1t / mu2), -mu1 * mu2t / mu2);
}

long ceiling_sample_size(double eps, double mu1, double mu2, double mu1t, double mu2t, bool apply_k1)
{
    check_tolerance(eps);
    if (!(mu2 > 0.0) || !(mu2t > 0.0))
        throw InvalidArgument("mu2 and mu2~ must be positive");
    if (!(mu1 >= 0.0) || !(mu1t >= 0.0))
        throw InvalidArgument("mu1 and mu1~ must be non-negative");
    if (mu1t > 0.0 && mu1 > mu1t)
        throw InvalidArgument("mu1 must not exceed mu1~");
    const double e = apply_k1 ? ceiling_scale_k1(mu1, mu2, mu1t, mu2t) * eps : eps;
    const double m = std::pow(e, -1.0 / mu2t) * std::pow(std::log(1.0 / e), mu1t / mu2);
    if (!std::isfinite(m) || m > 1e18)
        throw InvalidArgument("sample size overflows for eps = " + std::to_string(eps));
    return std::max(1L, static_cast<long>(std::ceil(m)));
}

std::vector<long> optimal_sizes_log(double eps, const ErrorModel& model)
{
    check_tolerance(eps);
    model.validate();
    if (!(model.mu1 > 0.0))
        throw InvalidArgument("log-model sizes require mu1 > 0");
    if (eps / 2.0 > model.phi[0])
        throw PreconditionViolated("tolerance too coarse: eps/2 = " + std::to_string(eps / 2.0) +
                                   " exceeds the level-0 error constant " + std::to_string(model.phi[0]));
    const double mu1 = model.mu1;
    const double mu2 = model.mu2;
    const double lambda = std::pow(2.0 / eps * aggregate(model), (mu2 + 1.0) / mu2);
    std::vector<long> sizes;
    for (int l = 0; l < model.levels(); ++l) {
        const auto i = static_cast<std::size_t>(l);
        const double e = model.cost[i] / (lambda * model.phi[i]);
        long m = 2;
        if (e < 1.0)
            m = std::max(2L, ceiling_sample_size(e, mu1, mu2, mu1, mu2 + 1.0, true));
        sizes.push_back(m);
    }
    // the sample-size bound makes this loop a no-op; kept as a guard against rounding
    for (int guard = 0; guard < 200 && constraint_residual(sizes, model, eps) > 0.0; ++guard)
        for (long& m : sizes)
            m = static_cast<long>(std::ceil(1.1 * static_cast<double>(m)));
    return sizes;
}

double constraint_residual(const std::vector<double>& sizes, const ErrorModel& model, double eps)
{
    if (static_cast<int>(sizes.size()) != model.levels())
        throw InvalidArgument("one size per level expected");
    double total = 0.0;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        // the continuous optimum may sit below one sample on cheap, quiet levels
        if (model.mu1 > 0.0 ? !(sizes[l] >= 1.0) : !(sizes[l] > 0.0))
            throw InvalidArgument(model.mu1 > 0.0 ? "sample sizes must be >= 1" : "sample sizes must be > 0");
        total += level_error(model.phi[l], sizes[l], model.mu1, model.mu2);
    }
    return total - eps / 2.0;
}

double constraint_residual(const std::vector<long>& sizes, const ErrorModel& model, double eps)
{
    std::vector<double> real(sizes.begin(), sizes.end());
    return constraint_residual(real, model, eps);
}

BinnedSizes bin_sizes(const std::vector<double>& sizes, const std::vector<long>& admissible,
                      const ErrorModel& model, double eps)
{
    model.validate();
    if (static_cast<int>(sizes.size()) != model.levels())
        throw InvalidArgument("one size per level expected");
    std::vector<long> values;
    std::vector<int> positions;
    for (std::size_t k = 0; k < admissible.size(); ++k) {
        if (k > 0 && admissible[k] <= admissible[k - 1])
            throw InvalidArgument("admissible sizes must be strictly increasing");
        if (admissible[k] < 1)
            throw InvalidArgument("admissible sizes must be >= 1");
        if (model.mu1 > 0.0 && admissible[k] == 1)
            continue;
        values.push_back(admissible[k]);
        positions.push_back(static_cast<int>(k));
    }
    if (values.empty())
        throw InvalidArgument("no admissible sizes");

    const int levels = model.levels();
    const int last = static_cast<int>(values.size()) - 1;
    std::vector<int> lo(static_cast<std::size_t>(levels));
    std::vector<int> hi(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) {
        const double m = sizes[static_cast<std::size_t>(l)];
        const auto up = std::lower_bound(values.begin(), values.end(), m,
                                         [](long a, double b) { return static_cast<double>(a) < b; });
        int h = static_cast<int>(up - values.begin());
        if (h > last)
            h = last; // beyond the list; the step-up fallback reports exhaustion
        int d = h;
        if (static_cast<double>(values[static_cast<std::size_t>(h)]) > m && h > 0)
            d = h - 1;
        lo[static_cast<std::size_t>(l)] = d;
        hi[static_cast<std::size_t>(l)] = h;
    }

    auto cost_of = [&](int l) { return model.cost[static_cast<std::size_t>(l)]; };
    auto value = [&](int pos) { return values[static_cast<std::size_t>(pos)]; };
    std::vector<long> choice(static_cast<std::size_t>(levels));
    auto finish = [&](const std::vector<int>& pick) {
        BinnedSizes out;
        for (int l = 0; l < levels; ++l) {
            const int p = pick[static_cast<std::size_t>(l)];
            out.sizes.push_back(value(p));
            out.index.push_back(positions[static_cast<std::size_t>(p)]);
        }
        out.residual = constraint_residual(out.sizes, model, eps);
        return out;
    };

    while (true) {
        std::vector<int> pick = lo;
        std::vector<int> order(static_cast<std::size_t>(levels));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const auto ia = static_cast<std::size_t>(a);
            const auto ib = static_cast<std::size_t>(b);
            const double ca = static_cast<double>(value(hi[ia]) - value(lo[ia])) * cost_of(a);
            const double cb = static_cast<double>(value(hi[ib]) - value(lo[ib])) * cost_of(b);
            return ca < cb;
        });
        auto feasible = [&] {
            for (int l = 0; l < levels; ++l)
                choice[static_cast<std::size_t>(l)] = value(pick[static_cast<std::size_t>(l)]);
            return constraint_residual(choice, model, eps) <= 0.0;
        };
        if (feasible())
            return finish(pick);
        for (int l : order) {
            pick[static_cast<std::size_t>(l)] = hi[static_cast<std::size_t>(l)];
            if (feasible())
                return finish(pick);
        }
        // every level rounded up and still infeasible: step the level with
        // the cheapest further upgrade one admissible size higher
        int best = -1;
        double best_cost = 0.0;
        for (int l = 0; l < levels; ++l) {
            const int h = hi[static_cast<std::size_t>(l)];
            if (h >= last)
                continue;
            const double c = static_cast<double>(value(h + 1) - value(h)) * cost_of(l);
            if (best < 0 || c < best_cost) {
                best = l;
                best_cost = c;
            }
        }
        if (best < 0)
            throw InvalidArgument("admissible sizes exhausted before the error bound was met");
        lo[static_cast<std::size_t>(best)] = hi[static_cast<std::size_t>(best)];
        hi[static_cast<std::size_t>(best)] += 1;
    }
}

} // namespace mlsg
