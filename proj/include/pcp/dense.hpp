#pragma once

#include <vector>

#include "pcp/csr.hpp"

namespace pcp {

/// Row-major dense matrix, used for oracle solves and small-system paths.
struct DenseMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : n_rows(rows), n_cols(cols), a(static_cast<size_t>(rows) * cols, 0.0) {}

    double& at(int i, int j) { return a[static_cast<size_t>(i) * n_cols + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * n_cols + j]; }
};

// Any dense factorization or norm beyond this size is refused; the dense
// paths exist as oracles and small-problem backends, not production solvers.
inline constexpr int kDenseSizeCap = 4096;

/// Packed LU factors with partial-pivot row permutation.
struct DenseLu {
    int n = 0;
    std::vector<double> lu;
    std::vector<int> perm;
};

DenseMatrix csr_to_dense(const CsrMatrix& a);

DenseLu dense_lu_factor(const DenseMatrix& a);

std::vector<double> dense_lu_apply(const DenseLu& f, const std::vector<double>& rhs);

/// Factor-and-solve convenience for one right-hand side.
std::vector<double> dense_lu_solve(const DenseMatrix& a, const std::vector<double>& rhs);

std::vector<double> dense_matvec(const DenseMatrix& a, const std::vector<double>& v);

/// Largest singular value via power iteration on A^T A; deterministic
/// all-ones start, relative tolerance 1e-10, at most 10000 iterations.
/// Non-convergence throws with the last estimate in the message.
double dense_spectral_norm(const DenseMatrix& a);

}  // namespace pcp
