#include "mlsg/sparse_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <set>

#include "mlsg/quadrature.hpp"

namespace mlsg {

namespace {

OneDimRule make_rule(int level)
{
    OneDimRule rule;
    rule.level = level;
    const int m = level == 1 ? 1 : (1 << (level - 1)) + 1;
    for (int j = 0; j < m; ++j) {
        const NodeId id = node_id(level, j);
        rule.ids.push_back(id);
        rule.nodes.push_back(node_coordinate(id));
    }
    rule.barycentric.assign(static_cast<std::size_t>(m), 1.0);
    for (int j = 0; j < m; ++j) {
        double w = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == m - 1)
            w *= 0.5;
        rule.barycentric[static_cast<std::size_t>(j)] = m == 1 ? 1.0 : w;
    }

    // integrate each Lagrange basis polynomial (degree m - 1) exactly
    rule.weights.assign(static_cast<std::size_t>(m), 0.0);
    const QuadratureRule1D gl = gauss_legendre(m / 2 + 2);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const std::vector<double> l = rule.basis_values(gl.nodes[q]);
        for (int j = 0; j < m; ++j)
            rule.weights[static_cast<std::size_t>(j)] += 0.5 * gl.weights[q] * l[static_cast<std::size_t>(j)];
    }
    return rule;
}

/// Odometer over a box of per-dimension counts; calls fn(position) for each tuple.
template <class Fn>
void for_each_tuple(const std::vector<int>& counts, Fn&& fn)
{
    const std::size_t n = counts.size();
    std::vector<int> pos(n, 0);
    while (true) {
        fn(pos);
        std::size_t d = n;
        while (d > 0) {
            --d;
            if (++pos[d] < counts[d])
                break;
            pos[d] = 0;
            if (d == 0)
                return;
        }
        if (n == 0)
            return;
    }
}

long binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0;
    long r = 1;
    for (int j = 1; j <= k; ++j)
        r = r * (n - k + j) / j;
    return r;
}

void compositions(int dimension, int total, MultiIndex& current, int slot, std::vector<MultiIndex>& out)
{
    if (slot == dimension - 1) {
        current[static_cast<std::size_t>(slot)] = total + 1;
        out.push_back(current);
        return;
    }
    for (int k = 0; k <= total; ++k) {
        current[static_cast<std::size_t>(slot)] = k + 1;
        compositions(dimension, total - k, current, slot + 1, out);
    }
}

void check_grid_arguments(int dimension, int level)
{
    if (dimension < 1)
        throw InvalidArgument("sparse-grid dimension must be >= 1");
    if (level < 0)
        throw InvalidArgument("sparse-grid level must be >= 0");
    if (level + 1 > kMaxRuleLevel)
        throw InvalidArgument("sparse-grid level " + std::to_string(level) + " too large");
}

} // namespace

std::vector<double> OneDimRule::basis_values(double t) const
{
    const std::size_t m = nodes.size();
    std::vector<double> l(m, 0.0);
    if (m == 1) {
        l[0] = 1.0;
        return l;
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (t == nodes[j]) {
            l[j] = 1.0;
            return l;
        }
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        l[j] = barycentric[j] / (t - nodes[j]);
        denom += l[j];
    }
    for (double& v : l)
        v /= denom;
    return l;
}

const OneDimRule& nodes_1d(int level)
{
    if (level < 1)
        throw InvalidArgument("1D rule level must be >= 1");
    if (level > kMaxRuleLevel)
        throw InvalidArgument("1D rule level " + std::to_string(level) + " above supported maximum");
    static std::array<OneDimRule, kMaxRuleLevel> rules;
    static std::array<std::once_flag, kMaxRuleLevel> flags;
    const auto slot = static_cast<std::size_t>(level - 1);
    std::call_once(flags[slot], [&] { rules[slot] = make_rule(level); });
    return rules[slot];
}

std::vector<SmolyakTerm> smolyak_terms(int dimension, int level)
{
    check_grid_arguments(dimension, level);
    std::vector<SmolyakTerm> terms;
    const int lo = std::max(0, level - dimension + 1);
    MultiIndex current(static_cast<std::size_t>(dimension), 1);
    std::vector<MultiIndex> indices;
    for (int k = lo; k <= level; ++k)
        compositions(dimension, k, current, 0, indices);
    std::sort(indices.begin(), indices.end());
    for (auto& idx : indices) {
        int sum = 0;
        for (int c : idx)
            sum += c;
        const int e = level + dimension - sum; // = level - |i - 1|, in [0, N - 1]
        const long c = binomial(dimension - 1, e) * ((e % 2 == 0) ? 1 : -1);
        terms.push_back({std::move(idx), static_cast<int>(c)});
    }
    return terms;
}

SmolyakGrid::SmolyakGrid(int dimension, int level)
    : dimension_(dimension), level_(level), terms_(smolyak_terms(dimension, level))
{
    // extended precision: the signed combination cancels heavily in high dimension
    std::map<PointId, long double> weight_of;
    std::vector<const OneDimRule*> rules(static_cast<std::size_t>(dimension));
    std::vector<int> counts(static_cast<std::size_t>(dimension));
    for (const auto& term : terms_) {
        for (int n = 0; n < dimension; ++n) {
            rules[static_cast<std::size_t>(n)] = &nodes_1d(term.index[static_cast<std::size_t>(n)]);
            counts[static_cast<std::size_t>(n)] = rules[static_cast<std::size_t>(n)]->count();
        }
        for_each_tuple(counts, [&](const std::vector<int>& pos) {
            PointId id;
            id.nodes.resize(static_cast<std::size_t>(dimension));
            long double w = term.coefficient;
            for (std::size_t n = 0; n < pos.size(); ++n) {
                const auto j = static_cast<std::size_t>(pos[n]);
                id.nodes[n] = rules[n]->ids[j];
                w *= static_cast<long double>(rules[n]->weights[j]);
            }
            weight_of[id] += w;
        });
    }
    points_.reserve(weight_of.size());
    weights_.reserve(weight_of.size());
    coordinates_.reserve(weight_of.size() * static_cast<std::size_t>(dimension));
    for (const auto& [id, w] : weight_of) {
        lookup_.emplace(id, static_cast<int>(points_.size()));
        points_.push_back(id);
        weights_.push_back(static_cast<double>(w));
        for (NodeId n : id.nodes)
            coordinates_.push_back(node_coordinate(n));
    }
}

std::span<const double> SmolyakGrid::coordinates(int k) const
{
    return std::span<const double>(coordinates_).subspan(static_cast<std::size_t>(k * dimension_),
                                                         static_cast<std::size_t>(dimension_));
}

int SmolyakGrid::find(const PointId& id) const
{
    auto it = lookup_.find(id);
    return it == lookup_.end() ? -1 : it->second;
}

std::vector<double> SmolyakGrid::interpolation_coefficients(std::span<const double> t) const
{
    if (static_cast<int>(t.size()) != dimension_)
        throw InvalidArgument("query point has dimension " + std::to_string(t.size()) + ", grid has " +
                              std::to_string(dimension_));
    // basis[n][level - 1] = Lagrange values of the level rule at t_n
    std::vector<std::vector<std::vector<double>>> basis(static_cast<std::size_t>(dimension_));
    for (int n = 0; n < dimension_; ++n) {
        for (int lev = 1; lev <= level_ + 1; ++lev)
            basis[static_cast<std::size_t>(n)].push_back(nodes_1d(lev).basis_values(t[static_cast<std::size_t>(n)]));
    }
    std::vector<double> coeffs(points_.size(), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(dimension_));
    PointId id;
    id.nodes.resize(static_cast<std::size_t>(dimension_));
    for (const auto& term : terms_) {
        for (int n = 0; n < dimension_; ++n)
            counts[static_cast<std::size_t>(n)] = nodes_1d(term.index[static_cast<std::size_t>(n)]).count();
        for_each_tuple(counts, [&](const std::vector<int>& pos) {
            double c = term.coefficient;
            for (std::size_t n = 0; n < pos.size(); ++n) {
                const int lev = term.index[n];
                const auto j = static_cast<std::size_t>(pos[n]);
                c *= basis[n][static_cast<std::size_t>(lev - 1)][j];
                id.nodes[n] = nodes_1d(lev).ids[j];
            }
            if (c != 0.0)
                coeffs[static_cast<std::size_t>(lookup_.at(id))] += c;
        });
    }
    return coeffs;
}

SmolyakGrid build_grid(int dimension, int level)
{
    return SmolyakGrid(dimension, level);
}

int grid_size(int dimension, int level)
{
    check_grid_arguments(dimension, level);
    std::set<PointId> points;
    std::vector<int> counts(static_cast<std::size_t>(dimension));
    for (const auto& term : smolyak_terms(dimension, level)) {
        for (int n = 0; n < dimension; ++n)
            counts[static_cast<std::size_t>(n)] = nodes_1d(term.index[static_cast<std::size_t>(n)]).count();
        for_each_tuple(counts, [&](const std::vector<int>& pos) {
            PointId id;
            for (std::size_t n = 0; n < pos.size(); ++n)
                id.nodes.push_back(nodes_1d(term.index[n]).ids[static_cast<std::size_t>(pos[n])]);
            points.insert(std::move(id));
        });
    }
    return static_cast<int>(points.size());
}

std::vector<int> grid_sizes(int dimension, int max_level)
{
    std::vector<int> sizes;
    for (int nu = 0; nu <= max_level; ++nu)
        sizes.push_back(grid_size(dimension, nu));
    return sizes;
}

ParameterVector map_point(std::span<const double> t)
{
    std::vector<double> y;
    y.reserve(t.size());
    for (double c : t) {
        if (!(std::abs(c) <= 1.0))
            throw InvalidArgument("sparse-grid coordinate " + std::to_string(c) + " outside [-1, 1]");
        y.push_back(kParameterHalfWidth * c);
    }
    return ParameterVector(std::move(y));
}

void full_tensor_coefficients(const std::vector<int>& levels, std::span<const double> t,
                              std::vector<PointId>& points, std::vector<double>& coeffs)
{
    if (levels.empty() || levels.size() != t.size())
        throw InvalidArgument("full tensor interpolation needs one level per query coordinate");
    std::vector<std::vector<double>> basis;
    std::vector<int> counts;
    for (std::size_t n = 0; n < levels.size(); ++n) {
        const OneDimRule& rule = nodes_1d(levels[n]);
        basis.push_back(rule.basis_values(t[n]));
        counts.push_back(rule.count());
    }
    std::map<PointId, double> acc;
    for_each_tuple(counts, [&](const std::vector<int>& pos) {
        PointId id;
        double c = 1.0;
        for (std::size_t n = 0; n < pos.size(); ++n) {
            const auto j = static_cast<std::size_t>(pos[n]);
            id.nodes.push_back(nodes_1d(levels[n]).ids[j]);
            c *= basis[n][j];
        }
        acc[std::move(id)] += c;
    });
    points.clear();
    coeffs.clear();
    for (const auto& [id, c] : acc) {
        points.push_back(id);
        coeffs.push_back(c);
    }
}

} // namespace mlsg
