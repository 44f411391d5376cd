#include "pcp/loss.hpp"

#include <stdexcept>

#include "pcp/csr.hpp"

namespace pcp {

namespace {

std::vector<double> stencil_residual(const std::vector<double>& u_vals,
                                     const BvpSystem& system) {
    const CsrMatrix& a = system.matrix;
    if (static_cast<int>(u_vals.size()) != a.n_cols ||
        system.bias.size() != u_vals.size()) {
        throw std::invalid_argument("loss input length does not match the system");
    }
    auto r = spmv(a, u_vals);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= system.bias[i];
    return r;
}

double squared_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

LossValue preconditioned_loss(const std::vector<double>& u_vals,
                              const BvpSystem& system, const IluFactors& f) {
    auto r = solve_preconditioner(f, stencil_residual(u_vals, system));
    LossValue lv;
    lv.loss = squared_norm(r);
    lv.residual = std::move(r);
    return lv;
}

std::vector<double> loss_gradient_wrt_outputs(const LossValue& lv,
                                              const BvpSystem& system,
                                              const IluFactors& f) {
    auto g = spmv_transpose(system.matrix,
                            solve_preconditioner_transpose(f, lv.residual));
    for (double& x : g) x *= 2.0;
    return g;
}

LossValue raw_discrete_loss(const std::vector<double>& u_vals,
                            const BvpSystem& system) {
    LossValue lv;
    lv.residual = stencil_residual(u_vals, system);
    lv.loss = squared_norm(lv.residual);
    return lv;
}

std::vector<double> raw_loss_gradient_wrt_outputs(const LossValue& lv,
                                                  const BvpSystem& system) {
    auto g = spmv_transpose(system.matrix, lv.residual);
    for (double& x : g) x *= 2.0;
    return g;
}

}  // namespace pcp
