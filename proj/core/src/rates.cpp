#include "mlsg/rates.hpp"

#include <cmath>
#include <string>

#include "mlsg/errors.hpp"

namespace mlsg {

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs)
{
    if (pairs.size() < 2)
        throw InvalidArgument("rate fit needs at least two points");
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& [x, v] : pairs) {
        if (!(x > 0.0) || !(v > 0.0) || !std::isfinite(x) || !std::isfinite(v))
            throw InvalidArgument("rate fit needs positive finite data");
        sx += std::log(x);
        sy += std::log(v);
    }
    const double n = static_cast<double>(pairs.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, v] : pairs) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(v) - my);
    }
    if (sxx == 0.0)
        throw InvalidArgument("rate fit needs at least two distinct scales");
    RateFit fit;
    fit.rate = sxy / sxx;
    fit.constant = std::exp(my - fit.rate * mx);
    return fit;
}

double mu1_for_model(Mu1Model model, int stochastic_dim, int order)
{
    if (stochastic_dim < 1)
        throw InvalidArgument("stochastic dimension must be >= 1");
    if (model == Mu1Model::Analytic)
        return 0.0;
    if (order < 0)
        throw InvalidArgument("regularity order must be >= 0");
    return static_cast<double>((order + 2) * (stochastic_dim - 1) + 1);
}

double phi_from_error(double error, double size, double mu1, double mu2)
{
    if (!(size >= 1.0))
        throw InvalidArgument("sample size must be >= 1");
    if (mu1 > 0.0 && size <= 1.0)
        throw InvalidArgument("log error model is undefined at M = 1");
    const double log_term = mu1 == 0.0 ? 1.0 : std::pow(std::log(size), mu1);
    return std::max(kPhiFloor, error * std::pow(size, mu2) / log_term);
}

double RateParameters::phi_extrapolated(double h) const
{
    return std::max(kPhiFloor, c4 * std::pow(h, beta));
}

RateParameters pilot_diagnostics(const std::vector<LevelPilot>& pilots, double mu1, const RateDefaults& defaults)
{
    if (pilots.empty() || pilots.front().level != 0)
        throw PreconditionViolated("rate estimation needs a level-0 pilot");
    for (std::size_t k = 0; k < pilots.size(); ++k)
        if (pilots[k].level != static_cast<int>(k))
            throw PreconditionViolated("pilots must cover levels 0, 1, ... in order");
    const LevelPilot& base = pilots.front();

    RateParameters rates;
    rates.mu1 = mu1;

    if (defaults.fixed_mu2 > 0.0) {
        rates.mu2 = defaults.fixed_mu2;
        if (base.sampling.empty())
            throw PreconditionViolated("level-0 pilot has no sampling data");
    } else {
        if (base.sampling.size() < 2)
            throw PreconditionViolated("level-0 pilot needs at least two sample sizes");
        std::vector<std::pair<double, double>> usable;
        double largest = 0.0;
        for (const auto& [m, e] : base.sampling)
            largest = std::max(largest, e);
        // errors at roundoff level carry no rate information
        for (const auto& [m, e] : base.sampling)
            if (e > 1e-13 * std::max(1.0, largest) && e > 1e-300)
                usable.emplace_back(m, e);
        if (usable.size() >= 2 && largest > 1e-14) {
            const double fitted = -fit_rate(usable).rate;
            if (std::isfinite(fitted) && fitted > 0.0) {
                rates.mu2 = fitted;
            } else {
                rates.mu2 = defaults.mu2;
                rates.degenerate = true;
            }
        } else {
            rates.mu2 = defaults.mu2;
            rates.degenerate = true;
        }
    }

    for (const LevelPilot& p : pilots) {
        if (p.sampling.empty())
            throw PreconditionViolated("level " + std::to_string(p.level) + " pilot has no sampling data");
        const auto& [m, e] = p.sampling.back();
        rates.phi.push_back(phi_from_error(e, m, mu1, rates.mu2));
    }

    // spatial rate from the correction means, phi decay from the correction levels
    std::vector<std::pair<double, double>> corr;
    std::vector<std::pair<double, double>> phis;
    for (std::size_t k = 1; k < pilots.size(); ++k) {
        if (pilots[k].correction_norm > 0.0)
            corr.emplace_back(pilots[k].h, pilots[k].correction_norm);
        if (rates.phi[k] > kPhiFloor)
            phis.emplace_back(pilots[k].h, rates.phi[k]);
    }
    rates.alpha = defaults.alpha;
    if (corr.size() >= 2) {
        const double fitted = fit_rate(corr).rate;
        if (std::isfinite(fitted) && fitted > 0.0)
            rates.alpha = fitted;
    }
    rates.beta = defaults.alpha;
    if (phis.size() >= 2) {
        const RateFit fit = fit_rate(phis);
        if (std::isfinite(fit.rate) && fit.rate > 0.0) {
            rates.beta = fit.rate;
            rates.c4 = fit.constant;
        }
    }
    if (rates.c4 == 0.0) {
        const std::size_t anchor = pilots.size() > 1 ? pilots.size() - 1 : 0;
        rates.c4 = rates.phi[anchor] / std::pow(pilots[anchor].h, rates.beta);
    }

    std::vector<std::pair<double, double>> costs;
    for (const LevelPilot& p : pilots)
        if (p.cost > 0.0)
            costs.emplace_back(p.h, p.cost);
    rates.gamma = 0.0;
    if (costs.size() >= 2)
        rates.gamma = -fit_rate(costs).rate;
    return rates;
}

} // namespace mlsg
