#include "mlsg/random_field.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mlsg/errors.hpp"

namespace mlsg {

ParameterVector::ParameterVector(std::vector<double> components) : components_(std::move(components))
{
    // small slack so that sqrt(3) * 1.0 computed in floating point is accepted
    constexpr double limit = kParameterHalfWidth * (1.0 + 1e-14);
    for (double c : components_) {
        if (!(std::abs(c) <= limit))
            throw InvalidArgument("parameter component " + std::to_string(c) + " outside [-sqrt3, sqrt3]");
    }
}

ParameterVector ParameterVector::zeros(int dimension)
{
    if (dimension < 1)
        throw InvalidArgument("parameter dimension must be >= 1");
    return ParameterVector(std::vector<double>(static_cast<std::size_t>(dimension), 0.0));
}

void FieldConfig::validate() const
{
    if (!(correlation_length > 0.0))
        throw InvalidArgument("correlation length must be positive");
    if (dimension < 1)
        throw InvalidArgument("stochastic dimension must be >= 1");
}

double field_basis_amplitude(const FieldConfig& cfg, int n)
{
    const double root_pi_l = std::sqrt(std::numbers::pi) * cfg.correlation_length;
    if (n == 1)
        return std::sqrt(root_pi_l / 2.0);
    const double k = static_cast<double>(n / 2);
    const double decay = std::exp(-std::pow(k * std::numbers::pi * cfg.correlation_length, 2) / 8.0);
    return std::sqrt(root_pi_l) * decay;
}

double field_basis(const FieldConfig& cfg, int n, double x1)
{
    if (n < 2)
        throw InvalidArgument("field_basis is defined for term index n >= 2");
    const double k = static_cast<double>(n / 2);
    const double arg = k * std::numbers::pi * x1 / cfg.correlation_length;
    const double wave = (n % 2 == 0) ? std::sin(arg) : std::cos(arg);
    return field_basis_amplitude(cfg, n) * wave;
}

double eval_log_field(const FieldConfig& cfg, double x1, const ParameterVector& y)
{
    if (y.dimension() != cfg.dimension)
        throw InvalidArgument("parameter vector has dimension " + std::to_string(y.dimension()) +
                              ", field expects " + std::to_string(cfg.dimension));
    double sum = field_basis_amplitude(cfg, 1) * y[0];
    for (int n = 2; n <= cfg.dimension; ++n)
        sum += field_basis(cfg, n, x1) * y[n - 1];
    return cfg.mean_offset + cfg.amplitude * sum;
}

double eval_coefficient(const FieldConfig& cfg, const SpatialPoint& x, const ParameterVector& y)
{
    return cfg.shift + std::exp(eval_log_field(cfg, x.x1, y));
}

double eval_forcing(int dim, const SpatialPoint& x)
{
    if (dim == 1)
        return std::cos(x.x1);
    if (dim == 2)
        return std::cos(x.x1) * std::sin(x.x2);
    throw InvalidArgument("spatial dimension must be 1 or 2");
}

double truncated_log_covariance(const FieldConfig& cfg, double x1, double x1p)
{
    double cov = std::pow(field_basis_amplitude(cfg, 1), 2);
    for (int n = 2; n <= cfg.dimension; ++n)
        cov += field_basis(cfg, n, x1) * field_basis(cfg, n, x1p);
    return cfg.amplitude * cfg.amplitude * cov;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

RandomStream RandomStream::for_task(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
{
    std::uint64_t state = seed;
    std::uint64_t mixed = splitmix64(state);
    state ^= tag * 0xD1B54A32D192ED03ULL;
    mixed ^= splitmix64(state);
    state ^= index * 0x8CB92BA72F3D8DD7ULL;
    mixed ^= splitmix64(state);
    return RandomStream(mixed);
}

double RandomStream::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

ParameterVector draw_parameters(RandomStream& stream, int dimension)
{
    if (dimension < 1)
        throw InvalidArgument("parameter dimension must be >= 1");
    std::vector<double> y(static_cast<std::size_t>(dimension));
    for (double& c : y)
        c = kParameterHalfWidth * (2.0 * stream.uniform() - 1.0);
    return ParameterVector(std::move(y));
}

} // namespace mlsg
