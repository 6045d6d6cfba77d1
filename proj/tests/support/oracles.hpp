#pragma once

// Independent reference implementations used by the tests. None of these
// call into the library; they trade speed for obviousness.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <set>
#include <vector>

namespace oracle {

/// Clenshaw-Curtis nodes of level i, ascending: {0} for i = 1, otherwise
/// -cos(pi j / (m - 1)) with m = 2^(i-1) + 1.
inline std::vector<double> cc_nodes(int level)
{
    if (level == 1)
        return {0.0};
    const int m = (1 << (level - 1)) + 1;
    std::vector<double> x(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        x[static_cast<std::size_t>(j)] = -std::cos(std::numbers::pi * j / (m - 1));
    x.front() = -1.0;
    x.back() = 1.0;
    if (m % 2 == 1)
        x[static_cast<std::size_t>(m / 2)] = 0.0;
    return x;
}

/// Lagrange basis polynomial j of the node set, product form.
inline double lagrange(const std::vector<double>& nodes, std::size_t j, double t)
{
    double v = 1.0;
    for (std::size_t k = 0; k < nodes.size(); ++k)
        if (k != j)
            v *= (t - nodes[k]) / (nodes[j] - nodes[k]);
    return v;
}

using Function = std::function<double(const std::vector<double>&)>;

/// Full tensor Lagrange interpolant with per-dimension levels.
inline double tensor_interpolate(const std::vector<int>& levels, const Function& f, const std::vector<double>& t)
{
    const std::size_t n = levels.size();
    std::vector<std::vector<double>> nodes(n);
    for (std::size_t d = 0; d < n; ++d)
        nodes[d] = cc_nodes(levels[d]);
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> point(n);
    double total = 0.0;
    for (;;) {
        double basis = 1.0;
        for (std::size_t d = 0; d < n; ++d) {
            point[d] = nodes[d][idx[d]];
            basis *= lagrange(nodes[d], idx[d], t[d]);
        }
        total += basis * f(point);
        std::size_t d = 0;
        while (d < n && ++idx[d] == nodes[d].size()) {
            idx[d] = 0;
            ++d;
        }
        if (d == n)
            break;
    }
    return total;
}

/// All multi-indices i >= 1 with sum(i - 1) <= level.
inline std::vector<std::vector<int>> simplex_indices(int dim, int level)
{
    std::vector<std::vector<int>> out;
    std::vector<int> i(static_cast<std::size_t>(dim), 1);
    for (;;) {
        int excess = 0;
        for (int v : i)
            excess += v - 1;
        if (excess <= level)
            out.push_back(i);
        std::size_t d = 0;
        while (d < i.size() && ++i[d] > level + 1) {
            i[d] = 1;
            ++d;
        }
        if (d == i.size())
            break;
    }
    return out;
}

/// Smolyak interpolant written as the sum of tensor products of 1D
/// difference operators, expanded by inclusion-exclusion: tensor rule i
/// receives sum over z in {0,1}^N with i + z admissible of (-1)^|z|.
inline double smolyak_interpolate(int dim, int level, const Function& f, const std::vector<double>& t)
{
    const auto indices = simplex_indices(dim, level);
    std::set<std::vector<int>> admissible(indices.begin(), indices.end());
    double total = 0.0;
    for (const auto& i : indices) {
        int coeff = 0;
        for (unsigned mask = 0; mask < (1u << dim); ++mask) {
            std::vector<int> shifted = i;
            int bits = 0;
            for (int d = 0; d < dim; ++d)
                if (mask & (1u << d)) {
                    ++shifted[static_cast<std::size_t>(d)];
                    ++bits;
                }
            if (admissible.count(shifted))
                coeff += (bits % 2 == 0) ? 1 : -1;
        }
        if (coeff != 0)
            total += coeff * tensor_interpolate(i, f, t);
    }
    return total;
}

/// Number of distinct points in the union of the tensor grids with
/// sum(i - 1) <= level, by brute-force enumeration of coordinates.
inline std::size_t enumerate_grid_size(int dim, int level)
{
    std::set<std::vector<long long>> points;
    for (const auto& i : simplex_indices(dim, level)) {
        std::vector<std::vector<double>> nodes;
        for (int v : i)
            nodes.push_back(cc_nodes(v));
        std::vector<std::size_t> idx(i.size(), 0);
        for (;;) {
            std::vector<long long> key;
            for (std::size_t d = 0; d < i.size(); ++d)
                key.push_back(std::llround(nodes[d][idx[d]] * 1e12));
            points.insert(key);
            std::size_t d = 0;
            while (d < i.size() && ++idx[d] == nodes[d].size()) {
                idx[d] = 0;
                ++d;
            }
            if (d == i.size())
                break;
        }
    }
    return points.size();
}

/// Numerical minimiser of sum C_l M_l subject to sum phi_l M_l^-mu2 = budget
/// (mu1 = 0). The objective is convex in the error shares e_l = phi_l
/// M_l^-mu2 on the simplex sum e_l = budget, so repeated pairwise
/// golden-section transfers of error budget converge to the optimum.
inline std::vector<double> minimise_allocation(const std::vector<double>& cost, const std::vector<double>& phi,
                                               double mu2, double budget)
{
    const std::size_t n = cost.size();
    auto level_cost = [&](std::size_t l, double e) { return cost[l] * std::pow(phi[l] / e, 1.0 / mu2); };
    std::vector<double> e(n, budget / static_cast<double>(n));
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int sweep = 0; sweep < 200; ++sweep) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                const double pool = e[a] + e[b];
                auto f = [&](double x) { return level_cost(a, x) + level_cost(b, pool - x); };
                double lo = pool * 1e-12;
                double hi = pool * (1.0 - 1e-12);
                double x1 = hi - golden * (hi - lo);
                double x2 = lo + golden * (hi - lo);
                double f1 = f(x1);
                double f2 = f(x2);
                for (int it = 0; it < 200; ++it) {
                    if (f1 < f2) {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - golden * (hi - lo);
                        f1 = f(x1);
                    } else {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + golden * (hi - lo);
                        f2 = f(x2);
                    }
                }
                e[a] = 0.5 * (lo + hi);
                e[b] = pool - e[a];
            }
    }
    std::vector<double> m(n);
    for (std::size_t l = 0; l < n; ++l)
        m[l] = std::pow(phi[l] / e[l], 1.0 / mu2);
    return m;
}

/// Least-squares slope of log(v) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& v)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]);
        const double ly = std::log(v[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace oracle
