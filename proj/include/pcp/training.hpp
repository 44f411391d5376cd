#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pcp/assembly.hpp"
#include "pcp/ilu.hpp"
#include "pcp/mlp.hpp"

namespace pcp {

enum class LossMode { preconditioned, raw_discrete };

const char* loss_mode_name(LossMode m);

struct TrainConfig {
    int iterations = 1000;
    double learning_rate = 1e-3;
    uint64_t seed = 0;
    double drop_tol = 1e-4;
    int log_stride = 100;
    LossMode mode = LossMode::preconditioned;
};

struct Metrics {
    double l2re = 0.0;
    double l1re = 0.0;
    double mse = 0.0;
};

/// Relative 2-norm and 1-norm errors plus mean squared error. Throws on
/// length mismatch, non-finite entries, or a zero reference norm (only the
/// mse is defined there; use mean_squared_error directly).
Metrics compute_metrics(const std::vector<double>& pred,
                        const std::vector<double>& reference);

double mean_squared_error(const std::vector<double>& pred,
                          const std::vector<double>& reference);

struct TrainLogRow {
    int iteration = 0;
    double loss = 0.0;
    double l2re = 0.0;
    double wall_ms = 0.0;
};

struct TrainRecord {
    std::vector<TrainLogRow> rows;  // sorted by iteration
    Metrics final_metrics;          // against the metric target below
    std::vector<double> predictions;  // network values at interior nodes
    int matrix_nnz = 0;
    int factor_nnz = 0;    // 0 in raw_discrete mode
    double factor_ms = 0.0;
    long iterations_run = 0;
};

/// Algorithm: forward the network on the interior nodes, form the
/// (preconditioned or raw) discrete loss, push its closed-form output
/// gradient back through the tape, Adam-update, repeat. The error metric
/// target is the analytic reference when the system has one, otherwise a
/// dense solve of the system. A prebuilt factorization can be shared via
/// `reuse`; otherwise the drop tolerance in `config` is factored here.
TrainRecord train_linear(const BvpSystem& system, MlpModel& model,
                         const TrainConfig& config,
                         const IluFactors* reuse = nullptr);

/// Writes rows as CSV: iteration,loss,l2re,wall_ms. All float columns use
/// %.12g. wall_ms is measured time and is the one nondeterministic column.
void write_train_csv(const std::string& path, const TrainRecord& record);

/// Builds the linear system for one implicit time step. The returned bias
/// must hold only the step's forcing part; the previous state is added by
/// the stepping loop.
using StepBuilder = std::function<BvpSystem(int step)>;

struct TimeSteppingConfig {
    int steps = 1;
    int inner_iterations = 500;
    int cold_start_iterations = 3000;
    bool transfer = true;            // warm-start parameters across steps
    bool reuse_factorization = true; // matrix is time-invariant
};

struct TimeSteppingResult {
    std::vector<TrainRecord> step_records;
    std::vector<double> final_state;
    long total_iterations = 0;
};

/// Sequential implicit stepping: step i trains the network against
/// A u_i = forcing_i + u_{i-1}, with u_{i-1} read back from the previous
/// step's trained network. With transfer off, every step restarts from a
/// fresh initialization and trains for the cold-start budget; with it on,
/// only the first step does.
TimeSteppingResult train_time_stepping(const StepBuilder& builder,
                                       const std::vector<double>& initial_state,
                                       MlpModel& model,
                                       const TimeSteppingConfig& ts,
                                       const TrainConfig& tc);

/// What the Newton drivers need from a root-finding problem F(u) = 0:
/// callables for F and its Jacobian plus the mesh context the inner
/// training consumes. `newton_problem` adapts the assembled systems; the
/// BvpSystem overload sets F(u) = A u - b, so one exact step solves it.
struct NewtonProblem {
    UniformMesh mesh;
    std::vector<int> interior_index;
    std::vector<double> initial_guess;
    std::function<std::vector<double>(const std::vector<double>&)> residual;
    std::function<CsrMatrix(const std::vector<double>&)> jacobian;
};

NewtonProblem newton_problem(const NonlinearSystem& system);
NewtonProblem newton_problem(const BvpSystem& system);

struct NewtonConfig {
    int outer_steps = 10;
    int inner_iterations = 2000;
    double damping = 1.0;
};

struct NewtonTrainResult {
    std::vector<double> residual_norms;  // ||F(u)||_inf, initial then per step
    std::vector<TrainRecord> inner_records;
    std::vector<double> final_state;
    long total_iterations = 0;
};

/// Newton with the network as the tangent-system solver: linearize at the
/// current state, train against A = J_F(u), b = J_F(u) u - F(u) (factors
/// rebuilt each step), advance by the damped network solution. Aborts when
/// the residual exceeds 10x its initial norm three steps running.
NewtonTrainResult train_newton(const NewtonProblem& problem, MlpModel& model,
                               const NewtonConfig& nc, const TrainConfig& tc);
NewtonTrainResult train_newton(const NonlinearSystem& system, MlpModel& model,
                               const NewtonConfig& nc, const TrainConfig& tc);

struct OracleNewtonResult {
    std::vector<double> solution;
    std::vector<double> residual_norms;  // ||F||_inf per step, initial first
    int steps = 0;
};

/// Plain Newton with dense tangent solves; the reference the network run
/// is judged against.
OracleNewtonResult newton_oracle_solve(const NewtonProblem& problem,
                                       int max_steps, double tol);
OracleNewtonResult newton_oracle_solve(const NonlinearSystem& system,
                                       int max_steps, double tol);

}  // namespace pcp
