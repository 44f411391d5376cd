#pragma once

#include <cstddef>
#include <vector>

namespace pcp {

/// Dense row-major tensor of rank at most 2. Vectors are n x 1 columns,
/// scalars 1 x 1.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

    size_t size() const { return v.size(); }
    double& at(int i, int j) { return v[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }
    double* data() { return v.data(); }
    const double* data() const { return v.data(); }
};

inline Tensor tensor_from_column(const std::vector<double>& x) {
    Tensor t(static_cast<int>(x.size()), 1);
    t.v = x;
    return t;
}

}  // namespace pcp
