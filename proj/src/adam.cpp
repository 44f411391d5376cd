#include "pcp/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcp {

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_step: " +
                                    std::to_string(params.size()) +
                                    " params vs " +
                                    std::to_string(grads.size()) + " grads");
    }
    if (state.m.empty()) {
        for (const Tensor* p : params) {
            state.m.emplace_back(p->rows, p->cols);
            state.v.emplace_back(p->rows, p->cols);
        }
    }
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: state sized for " +
                                    std::to_string(state.m.size()) +
                                    " tensors, got " +
                                    std::to_string(params.size()));
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, state.t);
    const double bc2 = 1.0 - std::pow(state.beta2, state.t);
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        if (g.rows != p.rows || g.cols != p.cols || m.rows != p.rows ||
            m.cols != p.cols) {
            throw std::invalid_argument("adam_step: shape mismatch at tensor " +
                                        std::to_string(i));
        }
        for (size_t k = 0; k < p.v.size(); ++k) {
            m.v[k] = state.beta1 * m.v[k] + (1.0 - state.beta1) * g.v[k];
            v.v[k] = state.beta2 * v.v[k] + (1.0 - state.beta2) * g.v[k] * g.v[k];
            const double mhat = m.v[k] / bc1;
            const double vhat = v.v[k] / bc2;
            p.v[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace pcp
