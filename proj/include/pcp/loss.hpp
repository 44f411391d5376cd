#pragma once

#include <vector>

#include "pcp/assembly.hpp"
#include "pcp/ilu.hpp"

namespace pcp {

/// Loss value together with the vector whose squared norm it is; the
/// gradient functions reuse that vector, so keep it paired with the
/// system and factors that produced it.
struct LossValue {
    double loss = 0.0;
    std::vector<double> residual;
};

/// ||U^-1 L^-1 (A u_vals - b)||^2: residual, two triangular solves, square.
LossValue preconditioned_loss(const std::vector<double>& u_vals,
                              const BvpSystem& system, const IluFactors& f);

/// Exact gradient of the preconditioned loss with respect to u_vals:
/// 2 A^T L^-T U^-T r with r the solved residual from preconditioned_loss.
/// Chained into the network tape as the cotangent of the batch predictions.
/// Exact because the factors are constant with respect to the parameters.
std::vector<double> loss_gradient_wrt_outputs(const LossValue& lv,
                                              const BvpSystem& system,
                                              const IluFactors& f);

/// ||A u_vals - b||^2, the unpreconditioned baseline.
LossValue raw_discrete_loss(const std::vector<double>& u_vals,
                            const BvpSystem& system);

std::vector<double> raw_loss_gradient_wrt_outputs(const LossValue& lv,
                                                  const BvpSystem& system);

}  // namespace pcp
