#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mlsg {

/// Half-width of each parameter interval, sqrt(3), so every component has unit variance.
inline constexpr double kParameterHalfWidth = 1.7320508075688772;

/// A point of the parameter box [-sqrt3, sqrt3]^N.
class ParameterVector {
public:
    ParameterVector() = default;
    explicit ParameterVector(std::vector<double> components);

    static ParameterVector zeros(int dimension);

    int dimension() const { return static_cast<int>(components_.size()); }
    double operator[](int n) const { return components_[static_cast<std::size_t>(n)]; }
    std::span<const double> components() const { return components_; }

    friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

private:
    std::vector<double> components_;
};

/// Finite-noise diffusion coefficient
///   log(a - shift) = mean_offset + sum_n b_n(x1) y_n.
struct FieldConfig {
    double correlation_length = 0.25;
    int dimension = 5;
    double shift = 0.5;
    double mean_offset = 1.0;
    /// Multiplies every stochastic term; 0 gives a y-independent coefficient.
    double amplitude = 1.0;

    void validate() const;
};

struct SpatialPoint {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Basis function b_n(x1) for n >= 2 (1-based term index).
double field_basis(const FieldConfig& cfg, int n, double x1);

/// Amplitude multiplying y_n, independent of x1 (n >= 1).
double field_basis_amplitude(const FieldConfig& cfg, int n);

double eval_log_field(const FieldConfig& cfg, double x1, const ParameterVector& y);

/// Always strictly greater than cfg.shift.
double eval_coefficient(const FieldConfig& cfg, const SpatialPoint& x, const ParameterVector& y);

double eval_forcing(int dim, const SpatialPoint& x);

/// Covariance of the truncated log field between x1 and x1p, from the
/// expansion coefficients (unit-variance parameters).
double truncated_log_covariance(const FieldConfig& cfg, double x1, double x1p);

/// Deterministic stream of uniform variates. Per-task streams are derived
/// from a base seed so that results never depend on scheduling.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Stream for one task, e.g. sample `index` of level `tag`.
    static RandomStream for_task(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

private:
    std::mt19937_64 engine_;
};

ParameterVector draw_parameters(RandomStream& stream, int dimension);

} // namespace mlsg
