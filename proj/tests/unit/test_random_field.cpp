#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mlsg/errors.hpp"
#include "mlsg/random_field.hpp"

using namespace mlsg;

namespace {

FieldConfig example_field()
{
    FieldConfig cfg;
    cfg.correlation_length = 0.25;
    cfg.dimension = 5;
    return cfg;
}

ParameterVector unit_vector(int dim, int n, double value)
{
    std::vector<double> y(static_cast<std::size_t>(dim), 0.0);
    y[static_cast<std::size_t>(n)] = value;
    return ParameterVector(y);
}

} // namespace

TEST(RandomField, LogFieldAtZeroParameterIsMeanOffset)
{
    const FieldConfig cfg = example_field();
    for (double x : {0.0, 0.3, 0.77, 1.0})
        EXPECT_DOUBLE_EQ(eval_log_field(cfg, x, ParameterVector::zeros(5)), 1.0);
}

TEST(RandomField, SecondBasisFunctionAtOneEighth)
{
    const FieldConfig cfg = example_field();
    const double expected =
        std::sqrt(std::sqrt(std::numbers::pi) * 0.25) * std::exp(-std::pow(std::numbers::pi * 0.25, 2) / 8.0);
    EXPECT_NEAR(field_basis(cfg, 2, 1.0 / 8.0), expected, 1e-15);
    EXPECT_NEAR(field_basis(cfg, 2, 1.0 / 8.0), 0.6163, 5e-5);
}

TEST(RandomField, FirstParameterShiftsWholeField)
{
    const FieldConfig cfg = example_field();
    const auto y = unit_vector(5, 0, 1.0);
    EXPECT_NEAR(eval_log_field(cfg, 0.4, y), 1.0 + std::sqrt(std::sqrt(std::numbers::pi) * 0.25 / 2.0), 1e-15);
    EXPECT_NEAR(eval_log_field(cfg, 0.4, y), 1.4707, 5e-5);
}

TEST(RandomField, CoefficientAtZeroParameter)
{
    const FieldConfig cfg = example_field();
    EXPECT_NEAR(eval_coefficient(cfg, {0.2, 0.0}, ParameterVector::zeros(5)), 0.5 + std::exp(1.0), 1e-14);
}

TEST(RandomField, CoefficientDependsOnFirstCoordinateOnly)
{
    const FieldConfig cfg = example_field();
    const ParameterVector y({0.3, -1.2, 1.7, 0.0, -0.4});
    EXPECT_EQ(eval_coefficient(cfg, {0.35, 0.0}, y), eval_coefficient(cfg, {0.35, 1.0}, y));
}

TEST(RandomField, Forcing)
{
    EXPECT_DOUBLE_EQ(eval_forcing(1, {0.0, 0.0}), 1.0);
    EXPECT_NEAR(eval_forcing(1, {1.0, 0.0}), 0.54030, 1e-5);
    EXPECT_NEAR(eval_forcing(2, {0.0, 1.0}), 0.84147, 1e-5);
    EXPECT_THROW(eval_forcing(3, {0.0, 0.0}), InvalidArgument);
}

TEST(RandomField, RejectsParametersOutsideBox)
{
    EXPECT_THROW(ParameterVector({1.8}), InvalidArgument);
    EXPECT_NO_THROW(ParameterVector({kParameterHalfWidth, -kParameterHalfWidth}));
    const FieldConfig cfg = example_field();
    EXPECT_THROW(eval_log_field(cfg, 0.5, ParameterVector::zeros(3)), InvalidArgument);
}

TEST(RandomField, CoefficientAboveShiftEverywhere)
{
    const FieldConfig cfg = example_field();
    RandomStream rng(7);
    for (int k = 0; k < 2000; ++k) {
        const ParameterVector y = draw_parameters(rng, 5);
        const double x = rng.uniform();
        EXPECT_GT(eval_coefficient(cfg, {x, 0.0}, y), 0.5);
    }
    // extreme corner of the box
    std::vector<double> corner(5, -kParameterHalfWidth);
    EXPECT_GT(eval_coefficient(cfg, {0.0, 0.0}, ParameterVector(corner)), 0.5);
}

TEST(RandomField, AmplitudeNonIncreasingInFrequency)
{
    FieldConfig cfg = example_field();
    cfg.dimension = 21;
    for (int n = 2; n + 2 <= cfg.dimension; n += 2)
        EXPECT_LE(field_basis_amplitude(cfg, n + 2), field_basis_amplitude(cfg, n));
    EXPECT_EQ(field_basis_amplitude(cfg, 2), field_basis_amplitude(cfg, 3));
}

TEST(RandomField, DrawsAreReproducibleAndDistinct)
{
    RandomStream a(42);
    RandomStream b(42);
    const ParameterVector a1 = draw_parameters(a, 5);
    const ParameterVector a2 = draw_parameters(a, 5);
    EXPECT_EQ(a1, draw_parameters(b, 5));
    EXPECT_EQ(a2, draw_parameters(b, 5));
    EXPECT_NE(a1, a2);
}

TEST(RandomField, TaskStreamsAreIndependentOfOrder)
{
    RandomStream first = RandomStream::for_task(3, 1, 10);
    RandomStream other = RandomStream::for_task(3, 1, 11);
    RandomStream again = RandomStream::for_task(3, 1, 10);
    const double u = first.uniform();
    EXPECT_NE(u, other.uniform());
    EXPECT_EQ(u, again.uniform());
    EXPECT_NE(RandomStream::for_task(3, 2, 10).uniform(), u);
}

TEST(RandomField, DrawsStayInBoxWithUnitVariance)
{
    RandomStream rng(2024);
    const int draws = 100000;
    std::vector<double> sum(5, 0.0), sum_sq(5, 0.0);
    for (int k = 0; k < draws; ++k) {
        const ParameterVector y = draw_parameters(rng, 5);
        for (int n = 0; n < 5; ++n) {
            ASSERT_LE(std::abs(y[n]), kParameterHalfWidth);
            sum[static_cast<std::size_t>(n)] += y[n];
            sum_sq[static_cast<std::size_t>(n)] += y[n] * y[n];
        }
    }
    for (int n = 0; n < 5; ++n) {
        const double mean = sum[static_cast<std::size_t>(n)] / draws;
        EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(static_cast<double>(draws)));
        EXPECT_NEAR(sum_sq[static_cast<std::size_t>(n)] / draws, 1.0, 0.02);
    }
}

// The sample covariance of the log field matches the covariance implied by
// the truncated expansion, written out here term by term.
TEST(RandomField, SampleCovarianceMatchesTruncatedExpansion)
{
    const FieldConfig cfg = example_field();
    const double L = cfg.correlation_length;
    auto expected_cov = [&](double x, double xp) {
        const double rpl = std::sqrt(std::numbers::pi) * L;
        double c = rpl / 2.0;
        for (int k = 1; k <= 2; ++k) {
            const double amp2 = rpl * std::exp(-std::pow(k * std::numbers::pi * L, 2) / 4.0);
            // sin/sin + cos/cos pair of frequency k
            c += amp2 * std::cos(k * std::numbers::pi * (x - xp) / L);
        }
        return c;
    };
    const std::vector<std::pair<double, double>> pairs = {{0.1, 0.1}, {0.1, 0.2}, {0.3, 0.55}, {0.0, 0.9}};
    RandomStream rng(99);
    const int draws = 100000;
    std::vector<double> sxy(pairs.size()), sxy2(pairs.size());
    for (int k = 0; k < draws; ++k) {
        const ParameterVector y = draw_parameters(rng, cfg.dimension);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const double u = eval_log_field(cfg, pairs[p].first, y) - 1.0;
            const double v = eval_log_field(cfg, pairs[p].second, y) - 1.0;
            sxy[p] += u * v;
            sxy2[p] += u * v * u * v;
        }
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double n = draws;
        // the mean is known to be zero; the estimator is the mean product
        const double cov = sxy[p] / n;
        const double std_err = std::sqrt((sxy2[p] / n - cov * cov) / n);
        const double truth = expected_cov(pairs[p].first, pairs[p].second);
        EXPECT_NEAR(truncated_log_covariance(cfg, pairs[p].first, pairs[p].second), truth, 1e-13);
        EXPECT_LT(std::abs(cov - truth), 3.0 * std_err) << "pair " << p;
    }
}

// Pointwise variance of the log field tends to 1 as terms are added.
TEST(RandomField, LongExpansionHasUnitVariance)
{
    FieldConfig cfg = example_field();
    cfg.dimension = 41;
    for (double x : {0.0, 0.3, 0.8})
        EXPECT_NEAR(truncated_log_covariance(cfg, x, x), 1.0, 1e-10);
    cfg.dimension = 5;
    EXPECT_LT(truncated_log_covariance(cfg, 0.3, 0.3), 1.0);
}
