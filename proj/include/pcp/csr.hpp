#pragma once

#include <vector>

namespace pcp {

/// Square or rectangular sparse matrix in compressed-sparse-row layout.
/// Invariants: row_ptr has n_rows+1 non-decreasing offsets starting at 0,
/// column indices are strictly increasing within each row and live in
/// [0, n_cols), and all stored values are finite.
struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;

    int nnz() const { return static_cast<int>(values.size()); }
};

struct Triplet {
    int row;
    int col;
    double value;
};

/// Throws std::invalid_argument if any structural invariant is violated.
void validate_csr(const CsrMatrix& a);

/// Builds a CsrMatrix from (row, col, value) entries in any order.
/// Duplicate coordinates are summed in ascending column order.
CsrMatrix csr_from_triplets(int n_rows, int n_cols, std::vector<Triplet> entries);

CsrMatrix csr_identity(int n);

/// y = A * v. Summation within each row runs in ascending column order.
std::vector<double> spmv(const CsrMatrix& a, const std::vector<double>& v);

/// y = A^T * w, accumulated by scattering rows in order.
std::vector<double> spmv_transpose(const CsrMatrix& a, const std::vector<double>& w);

}  // namespace pcp
