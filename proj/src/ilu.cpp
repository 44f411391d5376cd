#include "pcp/ilu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcp {

IluFactors ilu_factorize(const CsrMatrix& a, double drop_tol) {
    if (a.n_rows != a.n_cols) throw std::invalid_argument("ilu: matrix must be square");
    if (drop_tol < 0.0) throw std::invalid_argument("ilu: drop_tol must be non-negative");
    int n = a.n_rows;

    // Finished upper rows, kept row-by-row for the update loop; each row
    // starts with its diagonal.
    std::vector<std::vector<int>> u_cols(n);
    std::vector<std::vector<double>> u_vals(n);

    IluFactors f;
    f.drop_tol = drop_tol;
    f.lower.n_rows = f.lower.n_cols = n;
    f.upper.n_rows = f.upper.n_cols = n;
    f.lower.row_ptr.assign(n + 1, 0);
    f.upper.row_ptr.assign(n + 1, 0);

    std::vector<double> w(n, 0.0);        // working row, dense accumulator
    std::vector<char> in_row(n, 0);
    std::vector<int> pos;                 // sorted nonzero positions of w

    for (int i = 0; i < n; ++i) {
        pos.clear();
        double row_scale = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            int c = a.col_idx[k];
            w[c] = a.values[k];
            in_row[c] = 1;
            pos.push_back(c);
            row_scale += a.values[k] * a.values[k];
        }
        row_scale = std::sqrt(row_scale);
        double tau = drop_tol * row_scale;

        // IKJ elimination: consume pivots k < i in ascending order; fill
        // lands strictly to the right of k, so the scan index stays valid.
        for (size_t scan = 0; scan < pos.size(); ++scan) {
            int k = pos[scan];
            if (k >= i) break;
            double lik = w[k] / u_vals[k][0];
            if (std::fabs(lik) < tau) {
                w[k] = 0.0;
                in_row[k] = 0;
                continue;
            }
            w[k] = lik;
            const std::vector<int>& cols = u_cols[k];
            const std::vector<double>& vals = u_vals[k];
            for (size_t t = 1; t < cols.size(); ++t) {
                int j = cols[t];
                if (!in_row[j]) {
                    in_row[j] = 1;
                    pos.insert(std::lower_bound(pos.begin() + scan + 1, pos.end(), j), j);
                }
                w[j] -= lik * vals[t];
            }
        }

        if (!in_row[i] || std::fabs(w[i]) < 1e-14 * row_scale) {
            double pivot = in_row[i] ? w[i] : 0.0;
            for (int c : pos) {
                w[c] = 0.0;
                in_row[c] = 0;
            }
            throw std::runtime_error("ilu: zero or near-zero pivot " + std::to_string(pivot) +
                                     " at row " + std::to_string(i));
        }

        std::vector<int>& ui_cols = u_cols[i];
        std::vector<double>& ui_vals = u_vals[i];
        ui_cols.push_back(i);
        ui_vals.push_back(w[i]);
        for (int c : pos) {
            if (!in_row[c]) continue;
            in_row[c] = 0;
            double v = w[c];
            w[c] = 0.0;
            if (c < i) {
                f.lower.col_idx.push_back(c);
                f.lower.values.push_back(v);
            } else if (c > i) {
                if (std::fabs(v) < tau) continue;
                ui_cols.push_back(c);
                ui_vals.push_back(v);
            }
        }
        f.lower.row_ptr[i + 1] = static_cast<int>(f.lower.values.size());
    }

    for (int i = 0; i < n; ++i) {
        f.upper.col_idx.insert(f.upper.col_idx.end(), u_cols[i].begin(), u_cols[i].end());
        f.upper.values.insert(f.upper.values.end(), u_vals[i].begin(), u_vals[i].end());
        f.upper.row_ptr[i + 1] = static_cast<int>(f.upper.values.size());
    }
    return f;
}

namespace {

void check_dim(const CsrMatrix& m, const std::vector<double>& rhs, const char* what) {
    if (static_cast<int>(rhs.size()) != m.n_rows)
        throw std::invalid_argument(std::string(what) + ": vector length does not match dimension");
}

}  // namespace

std::vector<double> triangular_solve(const IluFactors& f, TriPart part, bool transposed,
                                     const std::vector<double>& rhs) {
    if (part == TriPart::lower) {
        const CsrMatrix& l = f.lower;
        check_dim(l, rhs, "triangular_solve");
        std::vector<double> y = rhs;
        if (!transposed) {
            for (int i = 0; i < l.n_rows; ++i) {
                double s = y[i];
                for (int k = l.row_ptr[i]; k < l.row_ptr[i + 1]; ++k)
                    s -= l.values[k] * y[l.col_idx[k]];
                y[i] = s;
            }
        } else {
            for (int j = l.n_rows - 1; j >= 0; --j) {
                double yj = y[j];
                for (int k = l.row_ptr[j]; k < l.row_ptr[j + 1]; ++k)
                    y[l.col_idx[k]] -= l.values[k] * yj;
            }
        }
        return y;
    }

    const CsrMatrix& u = f.upper;
    check_dim(u, rhs, "triangular_solve");
    std::vector<double> y = rhs;
    if (!transposed) {
        for (int i = u.n_rows - 1; i >= 0; --i) {
            int b = u.row_ptr[i];
            int e = u.row_ptr[i + 1];
            if (b == e || u.col_idx[b] != i || u.values[b] == 0.0)
                throw std::runtime_error("triangular_solve: zero diagonal in upper factor at row " +
                                         std::to_string(i));
            double s = y[i];
            for (int k = b + 1; k < e; ++k) s -= u.values[k] * y[u.col_idx[k]];
            y[i] = s / u.values[b];
        }
    } else {
        for (int j = 0; j < u.n_rows; ++j) {
            int b = u.row_ptr[j];
            int e = u.row_ptr[j + 1];
            if (b == e || u.col_idx[b] != j || u.values[b] == 0.0)
                throw std::runtime_error("triangular_solve: zero diagonal in upper factor at row " +
                                         std::to_string(j));
            double yj = y[j] / u.values[b];
            y[j] = yj;
            for (int k = b + 1; k < e; ++k) y[u.col_idx[k]] -= u.values[k] * yj;
        }
    }
    return y;
}

std::vector<double> apply_factor(const IluFactors& f, TriPart part, bool transposed,
                                 const std::vector<double>& x) {
    if (part == TriPart::lower) {
        check_dim(f.lower, x, "apply_factor");
        std::vector<double> y = transposed ? spmv_transpose(f.lower, x) : spmv(f.lower, x);
        for (size_t i = 0; i < y.size(); ++i) y[i] += x[i];  // implicit unit diagonal
        return y;
    }
    check_dim(f.upper, x, "apply_factor");
    return transposed ? spmv_transpose(f.upper, x) : spmv(f.upper, x);
}

std::vector<double> apply_preconditioner(const IluFactors& f, const std::vector<double>& x) {
    return apply_factor(f, TriPart::lower, false, apply_factor(f, TriPart::upper, false, x));
}

std::vector<double> apply_preconditioner_transpose(const IluFactors& f, const std::vector<double>& x) {
    return apply_factor(f, TriPart::upper, true, apply_factor(f, TriPart::lower, true, x));
}

std::vector<double> solve_preconditioner(const IluFactors& f, const std::vector<double>& r) {
    return triangular_solve(f, TriPart::upper, false, triangular_solve(f, TriPart::lower, false, r));
}

std::vector<double> solve_preconditioner_transpose(const IluFactors& f, const std::vector<double>& r) {
    return triangular_solve(f, TriPart::lower, true, triangular_solve(f, TriPart::upper, true, r));
}

}  // namespace pcp
