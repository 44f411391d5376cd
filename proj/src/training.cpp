#include "pcp/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <utility>

#include "pcp/adam.hpp"
#include "pcp/csr.hpp"
#include "pcp/dense.hpp"
#include "pcp/loss.hpp"
#include "pcp/rng.hpp"
#include "pcp/tape.hpp"

namespace pcp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point from) {
    return std::chrono::duration<double, std::milli>(Clock::now() - from)
        .count();
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Tensor interior_coordinates(const UniformMesh& mesh,
                            const std::vector<int>& interior_index, int n) {
    Tensor coords(n, mesh.dims);
    for (int node = 0; node < mesh.n_nodes(); ++node) {
        const int row = interior_index[node];
        if (row < 0) continue;
        if (mesh.dims == 1) {
            coords.at(row, 0) = mesh.coord(0, node);
        } else {
            const int i = node / mesh.counts[1];
            const int j = node % mesh.counts[1];
            coords.at(row, 0) = mesh.coord(0, i);
            coords.at(row, 1) = mesh.coord(1, j);
        }
    }
    return coords;
}

std::vector<double> metric_target(const BvpSystem& system) {
    if (!system.reference.empty()) return system.reference;
    if (system.matrix.n_rows > kDenseSizeCap) {
        throw std::invalid_argument(
            "system has no reference and exceeds the dense cap; "
            "no metric target available");
    }
    return dense_lu_solve(csr_to_dense(system.matrix), system.bias);
}

double relative_l2(const std::vector<double>& pred,
                   const std::vector<double>& target, double target_norm) {
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return std::sqrt(s) / target_norm;
}

std::vector<double> plain_predictions(const MlpModel& model,
                                      const Tensor& coords) {
    Tensor out = mlp_forward_batch(model, coords);
    return out.v;
}

}  // namespace

const char* loss_mode_name(LossMode m) {
    return m == LossMode::preconditioned ? "preconditioned" : "raw_discrete";
}

Metrics compute_metrics(const std::vector<double>& pred,
                        const std::vector<double>& reference) {
    if (pred.size() != reference.size() || pred.empty()) {
        throw std::invalid_argument("metrics need equal, nonzero lengths");
    }
    double diff2 = 0.0, diff1 = 0.0, ref2 = 0.0, ref1 = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!std::isfinite(pred[i]) || !std::isfinite(reference[i])) {
            throw std::invalid_argument("metrics inputs must be finite");
        }
        const double d = pred[i] - reference[i];
        diff2 += d * d;
        diff1 += std::abs(d);
        ref2 += reference[i] * reference[i];
        ref1 += std::abs(reference[i]);
    }
    if (ref2 == 0.0) {
        throw std::invalid_argument(
            "reference norm is zero; only the mse is defined "
            "(use mean_squared_error)");
    }
    Metrics m;
    m.l2re = std::sqrt(diff2) / std::sqrt(ref2);
    m.l1re = diff1 / ref1;
    m.mse = diff2 / static_cast<double>(pred.size());
    return m;
}

double mean_squared_error(const std::vector<double>& pred,
                          const std::vector<double>& reference) {
    if (pred.size() != reference.size() || pred.empty()) {
        throw std::invalid_argument("mse needs equal, nonzero lengths");
    }
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - reference[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

TrainRecord train_linear(const BvpSystem& system, MlpModel& model,
                         const TrainConfig& config, const IluFactors* reuse) {
    const int n = system.matrix.n_rows;
    if (n != system.matrix.n_cols || n < 1) {
        throw std::invalid_argument("train_linear needs a square system");
    }
    if (config.iterations < 0 || !(config.learning_rate > 0.0) ||
        config.drop_tol < 0.0 || config.log_stride < 1) {
        throw std::invalid_argument("bad training configuration");
    }
    if (model.input_dim != system.mesh.dims) {
        throw std::invalid_argument("model input dim does not match the mesh");
    }

    TrainRecord rec;
    rec.matrix_nnz = system.matrix.nnz();

    IluFactors local;
    const IluFactors* f = nullptr;
    if (config.mode == LossMode::preconditioned) {
        if (reuse != nullptr) {
            f = reuse;
        } else {
            const auto t0 = Clock::now();
            local = ilu_factorize(system.matrix, config.drop_tol);
            rec.factor_ms = elapsed_ms(t0);
            f = &local;
        }
        rec.factor_nnz = f->lower.nnz() + f->upper.nnz();
    }

    const Tensor coords =
        interior_coordinates(system.mesh, system.interior_index, n);
    const std::vector<double> target = metric_target(system);
    const double target_norm = norm2(target);

    auto eval_loss = [&](const std::vector<double>& u) {
        return config.mode == LossMode::preconditioned
                   ? preconditioned_loss(u, system, *f)
                   : raw_discrete_loss(u, system);
    };

    if (config.iterations == 0) {
        rec.predictions = plain_predictions(model, coords);
        rec.rows.push_back({0, eval_loss(rec.predictions).loss,
                            relative_l2(rec.predictions, target, target_norm),
                            0.0});
        rec.final_metrics = compute_metrics(rec.predictions, target);
        return rec;
    }

    auto params = collect_params(model);
    AdamState adam;
    adam.lr = config.learning_rate;

    Tape tape;
    const auto start = Clock::now();
    for (int k = 1; k <= config.iterations; ++k) {
        tape.reset();
        const ForwardNodes fw = mlp_forward_batch(tape, model, coords);
        const std::vector<double>& u = tape.value(fw.output).v;

        const LossValue lv = eval_loss(u);
        if (!std::isfinite(lv.loss)) {
            char msg[96];
            std::snprintf(msg, sizeof msg,
                          "training diverged at iteration %d: loss = %g", k,
                          lv.loss);
            throw std::runtime_error(msg);
        }

        const std::vector<double> g =
            config.mode == LossMode::preconditioned
                ? loss_gradient_wrt_outputs(lv, system, *f)
                : raw_loss_gradient_wrt_outputs(lv, system);

        if (k % config.log_stride == 0 || k == config.iterations) {
            rec.rows.push_back({k, lv.loss, relative_l2(u, target, target_norm),
                                elapsed_ms(start)});
        }

        tape.backward(fw.output, g);
        std::vector<const Tensor*> grads;
        grads.reserve(params.size());
        for (size_t l = 0; l < fw.weight_ids.size(); ++l) {
            grads.push_back(&tape.grad(fw.weight_ids[l]));
            grads.push_back(&tape.grad(fw.bias_ids[l]));
        }
        adam_step(adam, params, grads);
    }
    rec.iterations_run = config.iterations;

    rec.predictions = plain_predictions(model, coords);
    rec.final_metrics = compute_metrics(rec.predictions, target);
    return rec;
}

void write_train_csv(const std::string& path, const TrainRecord& record) {
    std::unique_ptr<FILE, int (*)(FILE*)> out(std::fopen(path.c_str(), "w"),
                                              &std::fclose);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    std::fprintf(out.get(), "iteration,loss,l2re,wall_ms\n");
    for (const TrainLogRow& r : record.rows) {
        std::fprintf(out.get(), "%d,%.12g,%.12g,%.12g\n", r.iteration, r.loss,
                     r.l2re, r.wall_ms);
    }
}

TimeSteppingResult train_time_stepping(const StepBuilder& builder,
                                       const std::vector<double>& initial_state,
                                       MlpModel& model,
                                       const TimeSteppingConfig& ts,
                                       const TrainConfig& tc) {
    if (ts.steps < 1 || ts.inner_iterations < 0 ||
        ts.cold_start_iterations < 0) {
        throw std::invalid_argument("bad time-stepping configuration");
    }

    BvpSystem first = builder(1);
    if (initial_state.size() !=
        static_cast<size_t>(first.matrix.n_rows)) {
        throw std::invalid_argument(
            "initial state length does not match the step system");
    }

    IluFactors shared;
    bool have_shared = false;
    if (tc.mode == LossMode::preconditioned && ts.reuse_factorization) {
        shared = ilu_factorize(first.matrix, tc.drop_tol);
        have_shared = true;
    }

    TimeSteppingResult result;
    std::vector<double> prev = initial_state;
    for (int step = 1; step <= ts.steps; ++step) {
        BvpSystem sys = step == 1 ? std::move(first) : builder(step);
        for (size_t i = 0; i < prev.size(); ++i) sys.bias[i] += prev[i];

        if (!ts.transfer && step > 1) {
            model = init_like(model, derive_seed(tc.seed, step));
        }
        TrainConfig inner = tc;
        inner.iterations = (step == 1 || !ts.transfer)
                               ? ts.cold_start_iterations
                               : ts.inner_iterations;

        TrainRecord rec =
            train_linear(sys, model, inner, have_shared ? &shared : nullptr);
        result.total_iterations += rec.iterations_run;
        prev = rec.predictions;
        result.step_records.push_back(std::move(rec));
    }
    result.final_state = std::move(prev);
    return result;
}

NewtonProblem newton_problem(const NonlinearSystem& system) {
    auto held = std::make_shared<const NonlinearSystem>(system);
    NewtonProblem p;
    p.mesh = held->mesh;
    p.interior_index = held->interior_index;
    p.initial_guess = held->initial_guess;
    p.residual = [held](const std::vector<double>& u) {
        return held->residual(u);
    };
    p.jacobian = [held](const std::vector<double>& u) {
        return held->jacobian(u);
    };
    return p;
}

NewtonProblem newton_problem(const BvpSystem& system) {
    auto held = std::make_shared<const BvpSystem>(system);
    NewtonProblem p;
    p.mesh = held->mesh;
    p.interior_index = held->interior_index;
    p.initial_guess.assign(held->matrix.n_rows, 0.0);
    p.residual = [held](const std::vector<double>& u) {
        std::vector<double> r = spmv(held->matrix, u);
        for (size_t i = 0; i < r.size(); ++i) r[i] -= held->bias[i];
        return r;
    };
    p.jacobian = [held](const std::vector<double>&) { return held->matrix; };
    return p;
}

NewtonTrainResult train_newton(const NewtonProblem& problem, MlpModel& model,
                               const NewtonConfig& nc, const TrainConfig& tc) {
    if (nc.outer_steps < 1 || !(nc.damping > 0.0) || nc.damping > 1.0) {
        throw std::invalid_argument("bad newton configuration");
    }

    NewtonTrainResult result;
    std::vector<double> u = problem.initial_guess;
    const double initial_residual = inf_norm(problem.residual(u));
    result.residual_norms.push_back(initial_residual);

    int diverging_streak = 0;
    for (int step = 1; step <= nc.outer_steps; ++step) {
        const CsrMatrix jac = problem.jacobian(u);
        const std::vector<double> f_val = problem.residual(u);

        BvpSystem tangent;
        tangent.matrix = jac;
        tangent.bias = spmv(jac, u);
        for (size_t i = 0; i < tangent.bias.size(); ++i) {
            tangent.bias[i] -= f_val[i];
        }
        tangent.mesh = problem.mesh;
        tangent.interior_index = problem.interior_index;
        tangent.forcing = "newton_tangent";

        TrainConfig inner = tc;
        inner.seed = derive_seed(tc.seed, static_cast<uint64_t>(step));
        inner.iterations = nc.inner_iterations;

        TrainRecord rec = train_linear(tangent, model, inner);
        result.total_iterations += rec.iterations_run;
        for (size_t i = 0; i < u.size(); ++i) {
            u[i] += nc.damping * (rec.predictions[i] - u[i]);
        }
        result.inner_records.push_back(std::move(rec));

        const double rn = inf_norm(problem.residual(u));
        result.residual_norms.push_back(rn);
        if (rn > 10.0 * initial_residual) {
            if (++diverging_streak >= 3) {
                std::string msg =
                    "newton diverged; residual history:";
                char buf[32];
                for (double r : result.residual_norms) {
                    std::snprintf(buf, sizeof buf, " %.3e", r);
                    msg += buf;
                }
                throw std::runtime_error(msg);
            }
        } else {
            diverging_streak = 0;
        }
    }
    result.final_state = std::move(u);
    return result;
}

NewtonTrainResult train_newton(const NonlinearSystem& system, MlpModel& model,
                               const NewtonConfig& nc, const TrainConfig& tc) {
    return train_newton(newton_problem(system), model, nc, tc);
}

OracleNewtonResult newton_oracle_solve(const NewtonProblem& problem,
                                       int max_steps, double tol) {
    const int n = static_cast<int>(problem.initial_guess.size());
    if (n > kDenseSizeCap) {
        throw std::invalid_argument("oracle newton needs n within the dense cap");
    }
    OracleNewtonResult result;
    std::vector<double> u = problem.initial_guess;
    std::vector<double> f_val = problem.residual(u);
    result.residual_norms.push_back(inf_norm(f_val));

    while (result.steps < max_steps && result.residual_norms.back() >= tol) {
        const DenseMatrix jac = csr_to_dense(problem.jacobian(u));
        std::vector<double> rhs(f_val.size());
        for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = -f_val[i];
        const std::vector<double> du = dense_lu_solve(jac, rhs);
        for (size_t i = 0; i < u.size(); ++i) u[i] += du[i];
        ++result.steps;
        f_val = problem.residual(u);
        result.residual_norms.push_back(inf_norm(f_val));
    }
    result.solution = std::move(u);
    return result;
}

OracleNewtonResult newton_oracle_solve(const NonlinearSystem& system,
                                       int max_steps, double tol) {
    return newton_oracle_solve(newton_problem(system), max_steps, tol);
}

}  // namespace pcp
