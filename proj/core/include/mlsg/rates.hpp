#pragma once

#include <utility>
#include <vector>

namespace mlsg {

struct RateFit {
    double rate = 0.0;
    double constant = 0.0;
};

/// Least-squares fit of log v = log c + rate * log x, i.e. v = c x^rate.
/// Decaying quantities therefore come out with a negative rate.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

/// log exponent of the sampling-error model: 0 for analytic dependence on
/// the parameters, (k + 2)(N - 1) + 1 for the mixed-regularity bound of
/// order k.
enum class Mu1Model { Analytic, Mixed };
double mu1_for_model(Mu1Model model, int stochastic_dim, int order);

/// phi solving e = phi log(M)^mu1 M^-mu2 at one observation.
double phi_from_error(double error, double size, double mu1, double mu2);

/// What the pilot runs observed on one level.
struct LevelPilot {
    int level = 0;
    double h = 0.0;
    /// (sample size M, sampling-error estimate at M) pairs.
    std::vector<std::pair<double, double>> sampling;
    /// ||E[Delta u_l]|| estimate; unused on level 0.
    double correction_norm = 0.0;
    /// Cost of one solve on this level.
    double cost = 0.0;
};

struct RateDefaults {
    double alpha = 2.0; // r + 1
    double mu2 = 1.0;
    /// Fixed mu2 for Monte Carlo; fitting is skipped when positive.
    double fixed_mu2 = 0.0;
};

struct RateParameters {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    /// phi_l of every visited level.
    std::vector<double> phi;
    /// phi_l ~ c4 h_l^beta for levels not yet visited.
    double c4 = 0.0;
    /// Sampling errors were all (numerically) zero; mu2 is the default.
    bool degenerate = false;

    double phi_extrapolated(double h) const;
};

/// Smallest phi handed to the allocation, so that an exactly
/// y-independent level still yields a valid error model.
inline constexpr double kPhiFloor = 1e-300;

/// Fits mu2 on level 0, phi_l on every level, and alpha, beta, gamma against
/// h where at least two levels are available (defaults otherwise).
/// Throws PreconditionViolated without a level-0 pilot of two sizes.
RateParameters pilot_diagnostics(const std::vector<LevelPilot>& pilots, double mu1, const RateDefaults& defaults);

} // namespace mlsg
