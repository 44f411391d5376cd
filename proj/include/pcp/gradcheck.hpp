#pragma once

#include <functional>
#include <vector>

#include "pcp/mlp.hpp"
#include "pcp/tensor.hpp"

namespace pcp {

/// Evaluates a scalar loss at the model's current parameters. When `grads`
/// is non-null the callee fills it with one tensor per collect_params entry,
/// in the same order.
using LossFn = std::function<double(MlpModel&, std::vector<Tensor>* grads)>;

struct GradcheckReport {
    double max_rel_err = 0.0;
    int tensor_index = -1;
    int entry_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
    size_t checked = 0;
    size_t skipped = 0;  // entries with both gradients below the floor
};

/// Central finite differences over every parameter entry. Entries where
/// both the analytic and numeric gradient fall below `grad_floor` in
/// magnitude are skipped (relative error is meaningless there). The model
/// is restored bit-exactly before returning.
GradcheckReport gradcheck(MlpModel& model, const LossFn& loss,
                          double h = 1e-5, double grad_floor = 1e-8);

}  // namespace pcp
