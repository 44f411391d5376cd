#include "pcp/dense.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcp {

DenseMatrix csr_to_dense(const CsrMatrix& a) {
    DenseMatrix d(a.n_rows, a.n_cols);
    for (int i = 0; i < a.n_rows; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) d.at(i, a.col_idx[k]) = a.values[k];
    return d;
}

DenseLu dense_lu_factor(const DenseMatrix& a) {
    if (a.n_rows != a.n_cols) throw std::invalid_argument("dense_lu: matrix must be square");
    int n = a.n_rows;
    if (n > kDenseSizeCap)
        throw std::invalid_argument("dense_lu: n = " + std::to_string(n) + " exceeds the dense cap " +
                                    std::to_string(kDenseSizeCap));
    DenseLu f;
    f.n = n;
    f.lu = a.a;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;

    double* lu = f.lu.data();
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::fabs(lu[static_cast<size_t>(k) * n + k]);
        for (int i = k + 1; i < n; ++i) {
            double cand = std::fabs(lu[static_cast<size_t>(i) * n + k]);
            if (cand > best) {
                best = cand;
                p = i;
            }
        }
        if (best == 0.0)
            throw std::runtime_error("dense_lu: singular to working precision at column " +
                                     std::to_string(k));
        if (p != k) {
            for (int j = 0; j < n; ++j)
                std::swap(lu[static_cast<size_t>(p) * n + j], lu[static_cast<size_t>(k) * n + j]);
            std::swap(f.perm[p], f.perm[k]);
        }
        double pivot = lu[static_cast<size_t>(k) * n + k];
        for (int i = k + 1; i < n; ++i) {
            double m = lu[static_cast<size_t>(i) * n + k] / pivot;
            lu[static_cast<size_t>(i) * n + k] = m;
            if (m != 0.0) {
                const double* rk = lu + static_cast<size_t>(k) * n;
                double* ri = lu + static_cast<size_t>(i) * n;
                for (int j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
            }
        }
    }
    return f;
}

std::vector<double> dense_lu_apply(const DenseLu& f, const std::vector<double>& rhs) {
    if (static_cast<int>(rhs.size()) != f.n)
        throw std::invalid_argument("dense_lu: rhs length does not match dimension");
    int n = f.n;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = rhs[f.perm[i]];
    const double* lu = f.lu.data();
    for (int i = 1; i < n; ++i) {
        double s = y[i];
        const double* ri = lu + static_cast<size_t>(i) * n;
        for (int j = 0; j < i; ++j) s -= ri[j] * y[j];
        y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        const double* ri = lu + static_cast<size_t>(i) * n;
        for (int j = i + 1; j < n; ++j) s -= ri[j] * y[j];
        y[i] = s / ri[i];
    }
    return y;
}

std::vector<double> dense_lu_solve(const DenseMatrix& a, const std::vector<double>& rhs) {
    return dense_lu_apply(dense_lu_factor(a), rhs);
}

std::vector<double> dense_matvec(const DenseMatrix& a, const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != a.n_cols)
        throw std::invalid_argument("dense_matvec: dimension mismatch");
    std::vector<double> y(a.n_rows, 0.0);
    for (int i = 0; i < a.n_rows; ++i) {
        double s = 0.0;
        const double* ri = a.a.data() + static_cast<size_t>(i) * a.n_cols;
        for (int j = 0; j < a.n_cols; ++j) s += ri[j] * v[j];
        y[i] = s;
    }
    return y;
}

namespace {

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double dense_spectral_norm(const DenseMatrix& a) {
    if (a.n_rows > kDenseSizeCap || a.n_cols > kDenseSizeCap)
        throw std::invalid_argument("dense_spectral_norm: size exceeds the dense cap");
    if (a.n_rows == 0 || a.n_cols == 0) return 0.0;

    const int max_iters = 10000;
    const double rel_tol = 1e-10;
    std::vector<double> v(a.n_cols, 1.0 / std::sqrt(static_cast<double>(a.n_cols)));
    double sigma = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        std::vector<double> av = dense_matvec(a, v);
        double av_norm = norm2(av);
        if (av_norm == 0.0) return 0.0;
        // Rayleigh estimate for A^T A is ||A v||^2 with ||v|| = 1.
        double next = av_norm;
        std::vector<double> w(a.n_cols, 0.0);
        for (int i = 0; i < a.n_rows; ++i) {
            const double* ri = a.a.data() + static_cast<size_t>(i) * a.n_cols;
            for (int j = 0; j < a.n_cols; ++j) w[j] += ri[j] * av[i];
        }
        double w_norm = norm2(w);
        for (int j = 0; j < a.n_cols; ++j) v[j] = w[j] / w_norm;
        if (std::fabs(next - sigma) <= rel_tol * next) return next;
        sigma = next;
    }
    throw std::runtime_error("dense_spectral_norm: no convergence after 10000 iterations, last estimate " +
                             std::to_string(sigma));
}

}  // namespace pcp
