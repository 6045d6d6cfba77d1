#include "mlsg/point_id.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "mlsg/errors.hpp"

namespace mlsg {

NodeId node_id(int level, int index)
{
    if (level < 1 || level > 15)
        throw InvalidArgument("1D level must lie in [1, 15]");
    if (level == 1) {
        if (index != 0)
            throw InvalidArgument("level-1 rule has a single node");
        return 0;
    }
    const int intervals = 1 << (level - 1);
    if (index < 0 || index > intervals)
        throw InvalidArgument("node index out of range");
    if (index == 0)
        return 1;
    if (index == intervals)
        return 2;
    int numerator = index;
    int k = level - 1;
    while (numerator % 2 == 0) {
        numerator /= 2;
        --k;
    }
    if (k == 1)
        return 0;
    return static_cast<NodeId>((1 << (k - 1)) + (numerator - 1) / 2 + 1);
}

double node_coordinate(NodeId id)
{
    if (id == 0)
        return 0.0;
    if (id == 1)
        return -1.0;
    if (id == 2)
        return 1.0;
    const unsigned offset = static_cast<unsigned>(id) - 1u;
    const int k = std::bit_width(offset); // offset in [2^(k-1), 2^k)
    const int odd = 2 * static_cast<int>(offset - (1u << (k - 1))) + 1;
    const double half = static_cast<double>(1 << (k - 1));
    // -cos(pi p) written as a sine so the rule is exactly antisymmetric
    return std::sin(std::numbers::pi * (odd - half) / (2.0 * half));
}

int node_level(NodeId id)
{
    if (id == 0)
        return 1;
    if (id <= 2)
        return 2;
    const unsigned offset = static_cast<unsigned>(id) - 1u;
    return std::bit_width(offset) + 1;
}

std::string PointId::to_string() const
{
    std::string out = "(";
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (n > 0)
            out += ',';
        out += std::to_string(nodes[n]);
    }
    return out + ")";
}

std::size_t PointIdHash::operator()(const PointId& id) const noexcept
{
    std::size_t h = 1469598103934665603ULL;
    for (NodeId n : id.nodes) {
        h ^= n;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace mlsg
