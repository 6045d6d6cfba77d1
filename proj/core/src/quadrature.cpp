#include "mlsg/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "mlsg/errors.hpp"

namespace mlsg {

QuadratureRule1D gauss_legendre(int n)
{
    if (n < 1)
        throw InvalidArgument("Gauss-Legendre rule needs at least one point");
    QuadratureRule1D rule;
    rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
    rule.weights.assign(static_cast<std::size_t>(n), 0.0);
    if (n == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }

    // Legendre P_n(x) and its derivative by the three-term recurrence
    auto legendre = [n](double x, double& derivative) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        derivative = n * (x * p1 - p0) / (x * x - 1.0);
        return p1;
    };

    for (int i = 0; i < n / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            const double dx = legendre(x, dp) / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        legendre(x, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (n % 2 == 1) {
        double dp = 0.0;
        legendre(0.0, dp);
        rule.weights[static_cast<std::size_t>(n / 2)] = 2.0 / (dp * dp);
    }
    return rule;
}

const std::array<TrianglePoint, 6>& triangle_rule_degree4()
{
    constexpr double a1 = 0.445948490915965;
    constexpr double b1 = 1.0 - 2.0 * a1;
    constexpr double w1 = 0.223381589678011;
    constexpr double a2 = 0.091576213509771;
    constexpr double b2 = 1.0 - 2.0 * a2;
    constexpr double w2 = 0.109951743655322;
    static const std::array<TrianglePoint, 6> rule{{
        {a1, a1, w1},
        {b1, a1, w1},
        {a1, b1, w1},
        {a2, a2, w2},
        {b2, a2, w2},
        {a2, b2, w2},
    }};
    return rule;
}

} // namespace mlsg
