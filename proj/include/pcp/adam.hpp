#pragma once

#include <vector>

#include "pcp/tensor.hpp"

namespace pcp {

/// Bias-corrected Adam. Moment tensors are allocated on the first step and
/// must keep matching the parameter shapes afterwards.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
    long t = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads);

}  // namespace pcp
