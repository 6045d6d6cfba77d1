#pragma once

#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlsg/errors.hpp"
#include "mlsg/mesh_fem.hpp"
#include "mlsg/point_id.hpp"
#include "mlsg/random_field.hpp"

namespace mlsg {

/// Nested Clenshaw-Curtis rule of level i >= 1 on [-1, 1]: m_1 = 1 (node 0),
/// m_i = 2^(i-1) + 1 otherwise. Nodes are sorted ascending.
struct OneDimRule {
    int level = 1;
    std::vector<double> nodes;
    std::vector<NodeId> ids;
    /// Quadrature weights for the uniform density 1/2; they sum to 1.
    std::vector<double> weights;
    /// Barycentric weights of the node set (common scaling dropped).
    std::vector<double> barycentric;

    int count() const { return static_cast<int>(nodes.size()); }

    /// Values of all Lagrange basis polynomials at t.
    std::vector<double> basis_values(double t) const;
};

inline constexpr int kMaxRuleLevel = 12;

/// Returns a cached rule; safe to call concurrently.
const OneDimRule& nodes_1d(int level);

using MultiIndex = std::vector<int>;

struct SmolyakTerm {
    MultiIndex index; // components >= 1
    int coefficient = 0;
};

/// Terms of the isotropic Smolyak combination of level nu in N dimensions,
/// i.e. all i >= 1 with max(0, nu - N + 1) <= |i - 1| <= nu, in
/// lexicographic order.
std::vector<SmolyakTerm> smolyak_terms(int dimension, int level);

/// Deduplicated union of the tensor grids of the Smolyak terms. Points are
/// stored in ascending PointId order, which is also the accumulation order
/// of every reduction over the grid.
class SmolyakGrid {
public:
    SmolyakGrid(int dimension, int level);

    int dimension() const { return dimension_; }
    int level() const { return level_; }
    int size() const { return static_cast<int>(points_.size()); }

    const std::vector<PointId>& points() const { return points_; }
    /// Coordinates in [-1, 1]^N of point k.
    std::span<const double> coordinates(int k) const;
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<SmolyakTerm>& terms() const { return terms_; }

    /// Position of a point in points(), or -1.
    int find(const PointId& id) const;

    /// Coefficients c_k such that the Smolyak interpolant at t equals
    /// sum_k c_k v_k, aligned with points().
    std::vector<double> interpolation_coefficients(std::span<const double> t) const;

private:
    int dimension_;
    int level_;
    std::vector<SmolyakTerm> terms_;
    std::vector<PointId> points_;
    std::vector<double> coordinates_;
    std::vector<double> weights_;
    std::unordered_map<PointId, int, PointIdHash> lookup_;
};

SmolyakGrid build_grid(int dimension, int level);

/// Number of points of the level-nu grid, computed without weights.
int grid_size(int dimension, int level);

/// Grid sizes for levels 0..max_level (strictly increasing).
std::vector<int> grid_sizes(int dimension, int max_level);

/// Parameter vector y = sqrt(3) t for t in [-1, 1]^N.
ParameterVector map_point(std::span<const double> t);

template <class V>
using PointValues = std::map<PointId, V>;

namespace detail {

inline void accumulate(double& acc, double w, const double& v) { acc += w * v; }
inline void accumulate(GridFunction& acc, double w, const GridFunction& v) { acc.add_scaled(w, v); }
inline double scaled(double w, const double& v) { return w * v; }
inline GridFunction scaled(double w, const GridFunction& v) { return w * v; }

template <class V>
const V& value_for(const PointValues<V>& values, const PointId& id)
{
    auto it = values.find(id);
    if (it == values.end())
        throw InvalidArgument("no value supplied for sparse-grid point " + id.to_string());
    return it->second;
}

/// sum_k c_k v(point_k), accumulated in the order of `points`.
template <class V>
V combine(const std::vector<PointId>& points, const std::vector<double>& coeffs, const PointValues<V>& values)
{
    if (points.empty())
        throw InvalidArgument("cannot combine an empty point set");
    V acc = scaled(coeffs[0], value_for(values, points[0]));
    for (std::size_t k = 1; k < points.size(); ++k)
        accumulate(acc, coeffs[k], value_for(values, points[k]));
    return acc;
}

} // namespace detail

/// Smolyak interpolant of the supplied point values, evaluated at t.
template <class V>
V interpolate(const SmolyakGrid& grid, const PointValues<V>& values, std::span<const double> t)
{
    return detail::combine(grid.points(), grid.interpolation_coefficients(t), values);
}

/// Quadrature for the uniform probability density on [-1, 1]^N.
template <class V>
V integrate(const SmolyakGrid& grid, const PointValues<V>& values)
{
    return detail::combine(grid.points(), grid.weights(), values);
}

/// Points and interpolation coefficients of the full tensor rule with the
/// given per-dimension levels, in ascending PointId order.
void full_tensor_coefficients(const std::vector<int>& levels, std::span<const double> t,
                              std::vector<PointId>& points, std::vector<double>& coeffs);

template <class V>
V full_tensor_interpolate(const std::vector<int>& levels, const PointValues<V>& values, std::span<const double> t)
{
    std::vector<PointId> points;
    std::vector<double> coeffs;
    full_tensor_coefficients(levels, t, points, coeffs);
    return detail::combine(points, coeffs, values);
}

} // namespace mlsg
