#include "pcp/csr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcp {

void validate_csr(const CsrMatrix& a) {
    if (a.n_rows < 0 || a.n_cols < 0)
        throw std::invalid_argument("csr: negative dimensions");
    if (a.row_ptr.size() != static_cast<size_t>(a.n_rows) + 1)
        throw std::invalid_argument("csr: row_ptr length must be n_rows+1");
    if (a.row_ptr.front() != 0)
        throw std::invalid_argument("csr: row_ptr[0] must be 0");
    if (a.row_ptr.back() != static_cast<int>(a.values.size()))
        throw std::invalid_argument("csr: row_ptr[n_rows] must equal nnz");
    if (a.col_idx.size() != a.values.size())
        throw std::invalid_argument("csr: col_idx and values length mismatch");
    for (int i = 0; i < a.n_rows; ++i) {
        if (a.row_ptr[i] > a.row_ptr[i + 1])
            throw std::invalid_argument("csr: row_ptr decreasing at row " + std::to_string(i));
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            int c = a.col_idx[k];
            if (c < 0 || c >= a.n_cols)
                throw std::invalid_argument("csr: column index out of range in row " + std::to_string(i));
            if (k > a.row_ptr[i] && a.col_idx[k - 1] >= c)
                throw std::invalid_argument("csr: columns not strictly increasing in row " +
                                            std::to_string(i));
            if (!std::isfinite(a.values[k]))
                throw std::invalid_argument("csr: non-finite value in row " + std::to_string(i));
        }
    }
}

CsrMatrix csr_from_triplets(int n_rows, int n_cols, std::vector<Triplet> entries) {
    if (n_rows < 0 || n_cols < 0) throw std::invalid_argument("csr: negative dimensions");
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
            throw std::invalid_argument("csr: triplet coordinate out of range");
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& x, const Triplet& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });

    CsrMatrix a;
    a.n_rows = n_rows;
    a.n_cols = n_cols;
    a.row_ptr.assign(n_rows + 1, 0);
    a.col_idx.reserve(entries.size());
    a.values.reserve(entries.size());
    size_t k = 0;
    for (int i = 0; i < n_rows; ++i) {
        while (k < entries.size() && entries[k].row == i) {
            double sum = entries[k].value;
            int col = entries[k].col;
            ++k;
            while (k < entries.size() && entries[k].row == i && entries[k].col == col) {
                sum += entries[k].value;
                ++k;
            }
            a.col_idx.push_back(col);
            a.values.push_back(sum);
        }
        a.row_ptr[i + 1] = static_cast<int>(a.values.size());
    }
    validate_csr(a);
    return a;
}

CsrMatrix csr_identity(int n) {
    CsrMatrix a;
    a.n_rows = a.n_cols = n;
    a.row_ptr.resize(n + 1);
    a.col_idx.resize(n);
    a.values.assign(n, 1.0);
    for (int i = 0; i <= n; ++i) a.row_ptr[i] = i;
    for (int i = 0; i < n; ++i) a.col_idx[i] = i;
    return a;
}

std::vector<double> spmv(const CsrMatrix& a, const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != a.n_cols)
        throw std::invalid_argument("spmv: vector length " + std::to_string(v.size()) +
                                    " does not match n_cols " + std::to_string(a.n_cols));
    std::vector<double> y(a.n_rows, 0.0);
    for (int i = 0; i < a.n_rows; ++i) {
        double s = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.values[k] * v[a.col_idx[k]];
        y[i] = s;
    }
    return y;
}

std::vector<double> spmv_transpose(const CsrMatrix& a, const std::vector<double>& w) {
    if (static_cast<int>(w.size()) != a.n_rows)
        throw std::invalid_argument("spmv_transpose: vector length " + std::to_string(w.size()) +
                                    " does not match n_rows " + std::to_string(a.n_rows));
    std::vector<double> y(a.n_cols, 0.0);
    for (int i = 0; i < a.n_rows; ++i) {
        double wi = w[i];
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) y[a.col_idx[k]] += a.values[k] * wi;
    }
    return y;
}

}  // namespace pcp
