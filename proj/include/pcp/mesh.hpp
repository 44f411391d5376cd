#pragma once

#include <array>

namespace pcp {

/// Uniform tensor-product mesh over a 1D interval or 2D rectangle. Node ids
/// are row-major (first axis slow). Coordinates are always computed as
/// low + i*h so they reproduce bit-identically everywhere.
struct UniformMesh {
    int dims = 0;
    std::array<double, 2> low{};
    std::array<double, 2> high{};
    std::array<int, 2> counts{1, 1};
    std::array<double, 2> h{};

    int n_nodes() const { return counts[0] * counts[1]; }
    double coord(int axis, int i) const { return low[axis] + i * h[axis]; }
    int node_id(int i, int j = 0) const { return i * counts[1] + j; }
};

UniformMesh build_mesh(int dims, const std::array<double, 2>& low,
                       const std::array<double, 2>& high,
                       const std::array<int, 2>& counts);

inline UniformMesh build_mesh_1d(double lo, double hi, int count) {
    return build_mesh(1, {lo, 0.0}, {hi, 0.0}, {count, 1});
}

}  // namespace pcp
