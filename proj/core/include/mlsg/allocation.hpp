#pragma once

#include <vector>

namespace mlsg {

/// Sampling-error model  e_l(M) = phi_l * log(M)^mu1 * M^-mu2  with per-sample
/// cost C_l on each level.
struct ErrorModel {
    double mu1 = 0.0;
    double mu2 = 1.0;
    std::vector<double> phi;
    std::vector<double> cost;

    int levels() const { return static_cast<int>(phi.size()); }
    void validate() const;
};

/// Real-valued cost-optimal sizes for mu1 = 0, making the constraint
/// sum_l phi_l M_l^-mu2 = eps/2 active.
std::vector<double> optimal_sizes_algebraic(double eps, const ErrorModel& model);

/// sum_l C_l M_l for the sizes above, in closed form.
double predicted_cost_algebraic(double eps, const ErrorModel& model);

/// Scaling constant (1 + (1/mu2t + mu1t/mu2))^(-mu1 mu2t / mu2).
double ceiling_scale_k1(double mu1, double mu2, double mu1t, double mu2t);

/// ceil(eps^(-1/mu2t) log(1/eps)^(mu1t/mu2)), with eps replaced by K1 eps
/// when apply_k1 is set. The scaled size satisfies
/// M^-mu2 log(M)^mu1 <= eps^(mu2/mu2t).
long ceiling_sample_size(double eps, double mu1, double mu2, double mu1t, double mu2t, bool apply_k1);

/// Integer sizes for mu1 > 0 via the Lagrange-multiplier choice of lambda,
/// each level sized by ceiling_sample_size with mu2t = mu2 + 1. Throws
/// PreconditionViolated when eps/2 > phi_0.
std::vector<long> optimal_sizes_log(double eps, const ErrorModel& model);

/// sum_l phi_l log(M_l)^mu1 M_l^-mu2 - eps/2; feasible when <= 0.
/// Sizes must be positive, and at least 1 when mu1 > 0.
double constraint_residual(const std::vector<double>& sizes, const ErrorModel& model, double eps);
double constraint_residual(const std::vector<long>& sizes, const ErrorModel& model, double eps);

struct BinnedSizes {
    std::vector<long> sizes;
    /// Position of each size in the admissible list (the quadrature level
    /// when the list is the sparse-grid size sequence).
    std::vector<int> index;
    double residual = 0.0;
};

/// Rounds sizes to an increasing admissible list. Levels start rounded down
/// and are rounded up one at a time, cheapest upgrade (next - prev) * C_l
/// first, until the constraint holds. If rounding everything up is not
/// enough, the level whose next admissible step is cheapest moves up one
/// step and the procedure repeats. Size 1 is skipped when mu1 > 0 because
/// the log model assigns it zero error. Throws InvalidArgument when the
/// admissible list is empty or exhausted.
BinnedSizes bin_sizes(const std::vector<double>& sizes, const std::vector<long>& admissible,
                      const ErrorModel& model, double eps);

} // namespace mlsg
