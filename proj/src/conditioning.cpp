#include "pcp/conditioning.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "pcp/dense.hpp"

namespace pcp {

namespace {

// Scaled to survive iterate magnitudes near the double range; wave systems
// past their stability threshold push power iterates to ~1e176.
double norm2(const std::vector<double>& v) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    if (peak == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) {
        const double y = x / peak;
        s += y * y;
    }
    return peak * std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct PowerResult {
    double norm = 0.0;
    int iterations = 0;
    double achieved = 0.0;
};

constexpr double kPowerRelTol = 1e-8;
constexpr int kPowerMaxIter = 5000;

// Largest singular value of the map x -> op(x), via power iteration on the
// symmetric composition op_t(op(v)). The Rayleigh quotient v.B v is exact
// for the current iterate, so the loop tracks its relative change.
template <class Op, class OpT>
PowerResult power_singular_norm(int n, Op&& op, OpT&& op_t) {
    std::vector<double> v(static_cast<size_t>(n),
                          1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int it = 1; it <= kPowerMaxIter; ++it) {
        auto w = op_t(op(v));
        const double next = dot(v, w);
        const double change =
            std::abs(next - lambda) / std::max(std::abs(next), 1e-300);
        lambda = next;
        if (it > 1 && change <= kPowerRelTol) {
            return {std::sqrt(lambda), it, change};
        }
        const double wn = norm2(w);
        if (!(wn > 0.0) || !std::isfinite(wn)) {
            throw std::runtime_error(
                "power iteration broke down: iterate norm " +
                std::to_string(wn));
        }
        for (size_t i = 0; i < w.size(); ++i) w[i] /= wn;
        v = std::move(w);
    }
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "power iteration did not converge in %d iterations; "
                  "last estimate %.6g",
                  kPowerMaxIter, std::sqrt(lambda));
    throw std::runtime_error(msg);
}

PowerResult inverse_norm_power(const CsrMatrix& a) {
    const IluFactors lu = ilu_factorize(a, 0.0);
    return power_singular_norm(
        a.n_rows,
        [&](const std::vector<double>& x) { return solve_preconditioner(lu, x); },
        [&](const std::vector<double>& x) {
            return solve_preconditioner_transpose(lu, x);
        });
}

double inverse_norm_dense(const CsrMatrix& a) {
    const int n = a.n_rows;
    if (n > kDenseSizeCap) {
        throw std::invalid_argument(
            "dense inverse-norm path refuses n > " +
            std::to_string(kDenseSizeCap) + " (got " + std::to_string(n) + ")");
    }
    const DenseLu lu = dense_lu_factor(csr_to_dense(a));
    DenseMatrix inv(n, n);
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        const auto col = dense_lu_apply(lu, e);
        e[j] = 0.0;
        for (int i = 0; i < n; ++i) inv.at(i, j) = col[i];
    }
    return dense_spectral_norm(inv);
}

std::vector<double> reference_or_dense_solution(const BvpSystem& system) {
    if (!system.reference.empty()) return system.reference;
    if (system.matrix.n_rows > kDenseSizeCap) {
        throw std::invalid_argument(
            "system has no reference and exceeds the dense solve cap");
    }
    return dense_lu_solve(csr_to_dense(system.matrix), system.bias);
}

void require_nonzero(double bias_norm, double solution_norm) {
    if (!(bias_norm > 0.0) || !(solution_norm > 0.0)) {
        throw std::runtime_error(
            "condition number needs nonzero bias and solution norms; "
            "the absolute variant is not provided");
    }
}

}  // namespace

const char* norm_method_name(NormMethod m) {
    return m == NormMethod::dense_svd ? "dense_svd" : "power_solves";
}

double inverse_norm_estimate(const CsrMatrix& a, NormMethod method) {
    if (a.n_rows != a.n_cols) {
        throw std::invalid_argument("inverse norm needs a square matrix");
    }
    if (method == NormMethod::dense_svd) return inverse_norm_dense(a);
    return inverse_norm_power(a).norm;
}

ConditionEstimate condition_number(const BvpSystem& system, NormMethod method) {
    ConditionEstimate est;
    est.method = method;
    est.bias_norm = norm2(system.bias);
    est.solution_norm = norm2(reference_or_dense_solution(system));
    require_nonzero(est.bias_norm, est.solution_norm);
    if (method == NormMethod::dense_svd) {
        est.inverse_norm = inverse_norm_dense(system.matrix);
    } else {
        const PowerResult p = inverse_norm_power(system.matrix);
        est.inverse_norm = p.norm;
        est.iterations = p.iterations;
        est.tolerance = p.achieved;
    }
    est.cond = est.bias_norm / est.solution_norm * est.inverse_norm;
    return est;
}

ConditionEstimate preconditioned_condition_number(const BvpSystem& system,
                                                  const IluFactors& f) {
    const CsrMatrix& a = system.matrix;
    const IluFactors complete = ilu_factorize(a, 0.0);

    ConditionEstimate est;
    est.method = NormMethod::power_solves;
    est.bias_norm = norm2(solve_preconditioner(f, system.bias));
    est.solution_norm = norm2(solve_preconditioner(complete, system.bias));
    require_nonzero(est.bias_norm, est.solution_norm);

    const PowerResult p = power_singular_norm(
        a.n_rows,
        [&](const std::vector<double>& x) {
            return solve_preconditioner(complete, apply_preconditioner(f, x));
        },
        [&](const std::vector<double>& x) {
            return apply_preconditioner_transpose(
                f, solve_preconditioner_transpose(complete, x));
        });
    est.inverse_norm = p.norm;
    est.iterations = p.iterations;
    est.tolerance = p.achieved;
    est.cond = est.bias_norm / est.solution_norm * est.inverse_norm;
    return est;
}

double poisson1d_theory_norm(double p) {
    if (!(p > 0.0)) {
        throw std::invalid_argument("theory norm needs P > 0");
    }
    return 4.0 / (p * p);
}

}  // namespace pcp
