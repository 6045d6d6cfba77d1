#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mlsg/errors.hpp"
#include "mlsg/estimators.hpp"
#include "mlsg/rates.hpp"

using namespace mlsg;

TEST(FitRate, ExactPowerLaw)
{
    std::vector<std::pair<double, double>> pairs;
    for (double x : {0.5, 1.0, 2.0, 4.0, 8.0})
        pairs.emplace_back(x, 3.0 * x * x);
    const RateFit fit = fit_rate(pairs);
    EXPECT_NEAR(fit.rate, 2.0, 1e-10);
    EXPECT_NEAR(fit.constant, 3.0, 1e-10);
}

TEST(FitRate, TwoPointsGiveExactSlope)
{
    const RateFit fit = fit_rate({{2.0, 5.0}, {6.0, 0.7}});
    EXPECT_NEAR(fit.rate, std::log(0.7 / 5.0) / std::log(3.0), 1e-14);
}

TEST(FitRate, NoisyData)
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<double, double>> pairs;
        for (int k = 0; k < 6; ++k) {
            const double x = std::pow(2.0, -k);
            pairs.emplace_back(x, 0.7 * std::pow(x, 1.5) * (1.0 + noise(rng)));
        }
        EXPECT_NEAR(fit_rate(pairs).rate, 1.5, 0.15);
    }
}

TEST(FitRate, RejectsBadInput)
{
    EXPECT_THROW(fit_rate({{1.0, 1.0}}), InvalidArgument);
    EXPECT_THROW(fit_rate({{1.0, 1.0}, {1.0, 2.0}}), InvalidArgument);
    EXPECT_THROW(fit_rate({{1.0, 1.0}, {2.0, -1.0}}), InvalidArgument);
}

TEST(Mu1Model, Values)
{
    EXPECT_EQ(mu1_for_model(Mu1Model::Analytic, 5, 3), 0.0);
    EXPECT_EQ(mu1_for_model(Mu1Model::Mixed, 5, 1), 13.0);
    EXPECT_EQ(mu1_for_model(Mu1Model::Mixed, 2, 0), 3.0);
}

TEST(PhiFromError, InvertsTheModel)
{
    const double phi = phi_from_error(1e-3, 61.0, 0.0, 1.3);
    EXPECT_NEAR(phi * std::pow(61.0, -1.3), 1e-3, 1e-17);
    const double phi_log = phi_from_error(1e-3, 61.0, 2.0, 1.0);
    EXPECT_NEAR(phi_log * std::pow(std::log(61.0), 2.0) / 61.0, 1e-3, 1e-17);
}

namespace {

LevelPilot synthetic_pilot(int level, double h, double phi, double mu2, double corr, double cost)
{
    LevelPilot p;
    p.level = level;
    p.h = h;
    for (double m : {11.0, 61.0, 241.0})
        p.sampling.emplace_back(m, phi * std::pow(m, -mu2));
    p.correction_norm = corr;
    p.cost = cost;
    return p;
}

} // namespace

TEST(PilotDiagnostics, RecoversSyntheticRates)
{
    std::vector<LevelPilot> pilots;
    for (int l = 0; l < 4; ++l) {
        const double h = 0.125 * std::pow(0.25, l);
        pilots.push_back(synthetic_pilot(l, h, 0.5 * std::pow(h, 1.5), 1.2, l == 0 ? 0.0 : 2.0 * h * h, 1.0 / h));
    }
    RateDefaults defaults;
    const RateParameters r = pilot_diagnostics(pilots, 0.0, defaults);
    EXPECT_NEAR(r.mu2, 1.2, 1e-10);
    EXPECT_NEAR(r.alpha, 2.0, 1e-10);
    EXPECT_NEAR(r.beta, 1.5, 1e-10);
    EXPECT_NEAR(r.gamma, 1.0, 1e-10);
    EXPECT_NEAR(r.c4, 0.5, 1e-9);
    ASSERT_EQ(r.phi.size(), 4u);
    EXPECT_NEAR(r.phi_extrapolated(pilots[2].h), r.phi[2], 1e-9 * r.phi[2]);
    EXPECT_FALSE(r.degenerate);
}

TEST(PilotDiagnostics, DefaultsWithoutEnoughLevels)
{
    std::vector<LevelPilot> pilots{synthetic_pilot(0, 0.125, 0.1, 1.0, 0.0, 7.0)};
    RateDefaults defaults;
    defaults.alpha = 3.0;
    const RateParameters r = pilot_diagnostics(pilots, 0.0, defaults);
    EXPECT_EQ(r.alpha, 3.0);
    EXPECT_EQ(r.beta, 3.0);
}

TEST(PilotDiagnostics, ZeroErrorsAreDegenerate)
{
    LevelPilot p;
    p.level = 0;
    p.h = 0.125;
    p.sampling = {{11.0, 0.0}, {61.0, 0.0}};
    p.cost = 7.0;
    const RateParameters r = pilot_diagnostics({p}, 0.0, RateDefaults{});
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.mu2, RateDefaults{}.mu2);
    EXPECT_LE(r.phi[0], kPhiFloor);
}

TEST(PilotDiagnostics, PreconditionsChecked)
{
    EXPECT_THROW(pilot_diagnostics({}, 0.0, RateDefaults{}), PreconditionViolated);
    LevelPilot p = synthetic_pilot(1, 0.1, 1.0, 1.0, 0.1, 1.0);
    EXPECT_THROW(pilot_diagnostics({p}, 0.0, RateDefaults{}), PreconditionViolated);
    LevelPilot single = synthetic_pilot(0, 0.1, 1.0, 1.0, 0.0, 1.0);
    single.sampling.resize(1);
    EXPECT_THROW(pilot_diagnostics({single}, 0.0, RateDefaults{}), PreconditionViolated);
}

// Rates measured on the default 1D problem with collocation pilots.
class ExampleProblemRates : public ::testing::Test {
protected:
    static RateParameters measure(int correction_nu)
    {
        LevelHierarchy problem(DiscretizationConfig{}, FieldConfig{});
        SolutionCache cache;
        SamplingContext ctx{&problem, &cache, 4, 1};
        std::vector<LevelPilot> pilots;
        LevelPilot base;
        base.level = 0;
        base.h = problem.h(0);
        base.cost = problem.model_cost(0);
        for (int nu = 1; nu <= 3; ++nu)
            base.sampling.emplace_back(grid_size(5, nu), sampling_error_estimate(ctx, 0, TermKind::Solution, nu));
        pilots.push_back(base);
        for (int l = 1; l <= 3; ++l) {
            LevelPilot p;
            p.level = l;
            p.h = problem.h(l);
            p.cost = problem.model_cost(l);
            p.sampling.emplace_back(grid_size(5, correction_nu),
                                    sampling_error_estimate(ctx, l, TermKind::Correction, correction_nu));
            p.correction_norm = norm(sc_term_estimate(ctx, l, TermKind::Correction, correction_nu).value);
            pilots.push_back(p);
        }
        return pilot_diagnostics(pilots, 0.0, RateDefaults{});
    }
};

TEST_F(ExampleProblemRates, SpatialCostAndSamplingRates)
{
    const RateParameters r = measure(2);
    EXPECT_GT(r.mu2, 0.5);
    EXPECT_GE(r.alpha, 1.6);
    EXPECT_LE(r.alpha, 2.4);
    EXPECT_GE(r.gamma, 0.8);
    EXPECT_LE(r.gamma, 1.3);
    for (std::size_t l = 1; l < r.phi.size(); ++l)
        EXPECT_LT(r.phi[l], r.phi[l - 1]) << "level " << l;
}

TEST_F(ExampleProblemRates, Deterministic)
{
    const RateParameters a = measure(1);
    const RateParameters b = measure(1);
    EXPECT_EQ(a.mu2, b.mu2);
    EXPECT_EQ(a.phi, b.phi);
    EXPECT_EQ(a.alpha, b.alpha);
}
