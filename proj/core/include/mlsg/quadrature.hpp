#pragma once

#include <array>
#include <vector>

namespace mlsg {

struct QuadratureRule1D {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights; // sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1], exact for polynomials of degree 2n - 1.
QuadratureRule1D gauss_legendre(int n);

struct TrianglePoint {
    double xi;
    double eta;
    double weight; // weights sum to 1; multiply by the triangle area
};

/// Symmetric 6-point rule on the reference triangle, exact to degree 4.
const std::array<TrianglePoint, 6>& triangle_rule_degree4();

} // namespace mlsg
