#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mlsg {

/// Level-independent label of a nested Clenshaw-Curtis node.
///
/// Node positions p = j / 2^k in [0, 1] are numbered in order of first
/// appearance: 1/2 -> 0, 0 -> 1, 1 -> 2, then 1/4, 3/4 -> 3, 4, then
/// 1/8 .. 7/8 -> 5 .. 8 and so on.
using NodeId = std::uint16_t;

/// Label of node `index` (0-based) of the level-`level` rule.
NodeId node_id(int level, int index);

/// Coordinate in [-1, 1] of a labelled node; bit-identical for every level
/// that contains it.
double node_coordinate(NodeId id);

/// First 1D level whose rule contains the node.
int node_level(NodeId id);

/// Multi-dimensional sparse-grid point label: one NodeId per dimension.
struct PointId {
    std::vector<NodeId> nodes;

    int dimension() const { return static_cast<int>(nodes.size()); }
    std::string to_string() const;

    friend auto operator<=>(const PointId&, const PointId&) = default;
    friend bool operator==(const PointId&, const PointId&) = default;
};

struct PointIdHash {
    std::size_t operator()(const PointId& id) const noexcept;
};

} // namespace mlsg
