#include "pcp/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcp {

GradcheckReport gradcheck(MlpModel& model, const LossFn& loss, double h,
                          double grad_floor) {
    std::vector<Tensor> grads;
    loss(model, &grads);
    std::vector<Tensor*> params = collect_params(model);
    if (grads.size() != params.size()) {
        throw std::runtime_error("gradcheck: loss returned " +
                                 std::to_string(grads.size()) +
                                 " gradient tensors for " +
                                 std::to_string(params.size()) + " params");
    }

    GradcheckReport report;
    for (size_t ti = 0; ti < params.size(); ++ti) {
        Tensor& p = *params[ti];
        if (grads[ti].rows != p.rows || grads[ti].cols != p.cols) {
            throw std::runtime_error("gradcheck: gradient shape mismatch at tensor " +
                                     std::to_string(ti));
        }
        for (size_t k = 0; k < p.v.size(); ++k) {
            const double saved = p.v[k];
            p.v[k] = saved + h;
            const double fp = loss(model, nullptr);
            p.v[k] = saved - h;
            const double fm = loss(model, nullptr);
            p.v[k] = saved;

            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = grads[ti].v[k];
            if (std::abs(analytic) <= grad_floor &&
                std::abs(numeric) <= grad_floor) {
                ++report.skipped;
                continue;
            }
            ++report.checked;
            const double rel = std::abs(analytic - numeric) /
                               std::max(std::abs(analytic), std::abs(numeric));
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.tensor_index = static_cast<int>(ti);
                report.entry_index = static_cast<int>(k);
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace pcp
