#include "pcp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pcp/assembly.hpp"
#include "pcp/conditioning.hpp"
#include "pcp/gradcheck.hpp"
#include "pcp/ilu.hpp"
#include "pcp/loss.hpp"
#include "pcp/rng.hpp"
#include "pcp/tape.hpp"
#include "pcp/training.hpp"

namespace pcp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string iso_timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string sanitize_cell(std::string s) {
    for (char& ch : s) {
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    }
    return s;
}

using CsvFile = std::unique_ptr<FILE, int (*)(FILE*)>;

CsvFile open_csv(const fs::path& path) {
    CsvFile out(std::fopen(path.string().c_str(), "w"), &std::fclose);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

std::vector<uint64_t> trial_seeds(const ExperimentConfig& c) {
    std::vector<uint64_t> seeds;
    for (int t = 0; t < c.trials; ++t) {
        seeds.push_back(derive_seed(c.base_seed, (uint64_t)t));
    }
    return seeds;
}

void write_run_context(const ExperimentConfig& c, const std::string& command,
                       int workers) {
    fs::create_directories(c.out_dir);
    std::ofstream echo(fs::path(c.out_dir) / "config_echo.json");
    echo << serialize_config(c);

    json manifest;
    manifest["command"] = command;
    manifest["problem"] = c.problem;
    manifest["version"] = "pcp 0.1.0";
    manifest["timestamp"] = iso_timestamp();
    manifest["base_seed"] = c.base_seed;
    manifest["seeds"] = trial_seeds(c);
    manifest["trials"] = c.trials;
    manifest["workers"] = workers;
    manifest["mesh"] = c.mesh;
    std::ofstream mf(fs::path(c.out_dir) / "run_manifest.json");
    mf << manifest.dump(2) << "\n";
}

/// Pulls job indices from a shared counter; `fn` must capture its own
/// failures (per-job result slots keep writes disjoint).
void parallel_for(int jobs, const std::function<void(int)>& fn) {
    const int workers = worker_count(jobs);
    if (workers <= 1) {
        for (int i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

int exit_for(int failures, int jobs) {
    if (jobs > 0 && failures == jobs) return kExitFailed;
    if (failures > 0) return kExitPartial;
    return kExitOk;
}

std::vector<double> heat_initial_state(const BvpSystem& s) {
    std::vector<double> u0(s.matrix.n_rows);
    for (int i = 0; i < s.matrix.n_rows; ++i) {
        u0[i] = std::sin(std::numbers::pi * s.mesh.coord(0, i + 1));
    }
    return u0;
}

/// The single linear system a config denotes. The heat step's bias is the
/// canonical first-step right-hand side sin(pi x) so diagnostics have a
/// nonzero b to work with.
BvpSystem build_linear_system(const ExperimentConfig& c) {
    if (c.problem == "poisson") {
        return assemble_poisson_1d(c.P, c.mesh[0]);
    }
    if (c.problem == "helmholtz") {
        return assemble_helmholtz_2d(c.A_param, c.mesh[0]);
    }
    if (c.problem == "wave") {
        return assemble_wave_1d(c.C, c.mesh[0], c.mesh[1]);
    }
    if (c.problem == "heat") {
        BvpSystem s = assemble_heat_step(c.kappa, c.mesh[0], c.dt);
        s.bias = heat_initial_state(s);
        return s;
    }
    throw ConfigError("problem",
                      "'" + c.problem + "' has no single linear system");
}

ExperimentConfig with_swept_value(const ExperimentConfig& c, double value) {
    ExperimentConfig point = c;
    if (c.problem == "poisson") {
        if (value <= 0.0) throw std::invalid_argument("P must be positive");
        point.P = value;
    } else if (c.problem == "helmholtz") {
        const long a = std::llround(value);
        if (a < 1 || std::fabs(value - (double)a) > 1e-9) {
            throw std::invalid_argument("A must be a positive integer");
        }
        point.A_param = (int)a;
    } else if (c.problem == "wave") {
        if (value <= 0.0) throw std::invalid_argument("C must be positive");
        point.C = value;
    } else if (c.problem == "heat") {
        if (value <= 0.0) throw std::invalid_argument("kappa must be positive");
        point.kappa = value;
    } else {
        throw ConfigError("problem", "cond sweep needs a linear problem");
    }
    return point;
}

json stat_pair(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= (double)xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {{"mean", mean}, {"std", std::sqrt(var / (double)xs.size())}};
}

struct TrialOutcome {
    bool ok = false;
    std::string error;
    Metrics metrics;
    double final_loss = 0.0;
    long iterations = 0;
    int matrix_nnz = 0;
    int factor_nnz = 0;
    TrainRecord record;  // the record whose rows go to the trial CSV
};

TrialOutcome run_one_trial(const ExperimentConfig& c, uint64_t seed,
                           const std::vector<double>* burgers_oracle) {
    TrialOutcome out;
    TrainConfig tc = c.train;
    tc.seed = seed;
    MlpModel model =
        build_network(c.network, problem_dims(c.problem), seed);

    if (c.problem == "heat") {
        const BvpSystem proto = assemble_heat_step(c.kappa, c.mesh[0], c.dt);
        const std::vector<double> u0 = heat_initial_state(proto);
        auto builder = [&c](int) {
            return assemble_heat_step(c.kappa, c.mesh[0], c.dt);
        };
        TimeSteppingResult res =
            train_time_stepping(builder, u0, model, c.stepping, tc);

        const double decay = std::exp(-c.kappa * std::numbers::pi *
                                      std::numbers::pi * c.dt *
                                      (double)c.stepping.steps);
        std::vector<double> exact(u0.size());
        for (size_t i = 0; i < u0.size(); ++i) exact[i] = decay * u0[i];
        out.metrics = compute_metrics(res.final_state, exact);
        out.iterations = res.total_iterations;
        out.record = std::move(res.step_records.back());
    } else if (c.problem == "burgers") {
        const NonlinearSystem sys =
            assemble_burgers_1d(c.nu, c.mesh[0], c.mesh[1]);
        NewtonTrainResult res = train_newton(sys, model, c.newton, tc);
        out.metrics = compute_metrics(res.final_state, *burgers_oracle);
        out.iterations = res.total_iterations;
        out.record = std::move(res.inner_records.back());
    } else {
        const BvpSystem sys = build_linear_system(c);
        TrainRecord rec = train_linear(sys, model, tc);
        out.metrics = rec.final_metrics;
        out.iterations = rec.iterations_run;
        out.record = std::move(rec);
    }
    out.final_loss =
        out.record.rows.empty() ? 0.0 : out.record.rows.back().loss;
    out.matrix_nnz = out.record.matrix_nnz;
    out.factor_nnz = out.record.factor_nnz;
    out.ok = true;
    return out;
}

}  // namespace

int worker_count(int jobs) {
    int bound = (int)std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PCP_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) bound = (int)v;
    }
    return std::max(1, std::min(jobs, bound));
}

int cmd_cond_sweep(const ExperimentConfig& config) {
    if (config.problem == "burgers") {
        throw ConfigError("problem", "cond sweep needs a linear problem");
    }
    const int jobs = (int)config.sweep.size();
    write_run_context(config, "cond", worker_count(jobs));

    struct Row {
        double parameter = 0.0;
        int n = 0;
        ConditionEstimate est;
        double theory = -1.0;
        std::string error;
    };
    std::vector<Row> rows(jobs);

    parallel_for(jobs, [&](int i) {
        Row& row = rows[i];
        row.parameter = config.sweep[i];
        try {
            const ExperimentConfig point =
                with_swept_value(config, row.parameter);
            const BvpSystem sys = build_linear_system(point);
            row.n = sys.matrix.n_rows;
            row.est = condition_number(sys);
            if (config.problem == "poisson") {
                row.theory = poisson1d_theory_norm(point.P);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    CsvFile csv = open_csv(fs::path(config.out_dir) / "cond_sweep.csv");
    std::fprintf(csv.get(),
                 "problem,parameter,n,method,inverse_norm,bias_norm,"
                 "solution_norm,cond,iterations,theory,rel_dev,error\n");
    int failures = 0;
    for (const Row& row : rows) {
        if (!row.error.empty()) {
            ++failures;
            std::fprintf(csv.get(), "%s,%.12g,,,,,,,,,,%s\n",
                         config.problem.c_str(), row.parameter,
                         sanitize_cell(row.error).c_str());
            continue;
        }
        std::fprintf(csv.get(), "%s,%.12g,%d,%s,%.12g,%.12g,%.12g,%.12g,%d,",
                     config.problem.c_str(), row.parameter, row.n,
                     norm_method_name(row.est.method), row.est.inverse_norm,
                     row.est.bias_norm, row.est.solution_norm, row.est.cond,
                     row.est.iterations);
        if (row.theory > 0.0) {
            std::fprintf(csv.get(), "%.12g,%.12g,\n", row.theory,
                         std::fabs(row.est.inverse_norm - row.theory) /
                             row.theory);
        } else {
            std::fprintf(csv.get(), ",,\n");
        }
    }
    return exit_for(failures, jobs);
}

int cmd_train(const ExperimentConfig& config) {
    const std::vector<uint64_t> seeds = trial_seeds(config);
    const int jobs = config.trials;
    write_run_context(config, "train", worker_count(jobs));

    // The oracle target is shared by every burgers trial; solve it once.
    std::vector<double> burgers_solution;
    if (config.problem == "burgers") {
        const NonlinearSystem sys =
            assemble_burgers_1d(config.nu, config.mesh[0], config.mesh[1]);
        burgers_solution = newton_oracle_solve(sys, 10, 1e-8).solution;
    }

    std::vector<TrialOutcome> outcomes(jobs);
    parallel_for(jobs, [&](int t) {
        try {
            outcomes[t] = run_one_trial(config, seeds[t],
                                        config.problem == "burgers"
                                            ? &burgers_solution
                                            : nullptr);
        } catch (const std::exception& e) {
            outcomes[t].error = e.what();
        }
    });

    json agg;
    agg["command"] = "train";
    agg["problem"] = config.problem;
    agg["mode"] = loss_mode_name(config.train.mode);
    agg["trials"] = config.trials;
    agg["seeds"] = seeds;
    std::vector<double> l2, l1, mse, loss;
    json errors = json::array();
    int failures = 0;
    for (int t = 0; t < jobs; ++t) {
        const TrialOutcome& out = outcomes[t];
        if (!out.ok) {
            ++failures;
            errors.push_back("trial " + std::to_string(t) + ": " + out.error);
            continue;
        }
        char name[48];
        std::snprintf(name, sizeof name, "train_trial%d.csv", t);
        write_train_csv((fs::path(config.out_dir) / name).string(),
                        out.record);
        l2.push_back(out.metrics.l2re);
        l1.push_back(out.metrics.l1re);
        mse.push_back(out.metrics.mse);
        loss.push_back(out.final_loss);
    }
    if (!l2.empty()) {
        agg["l2re"] = stat_pair(l2);
        agg["l1re"] = stat_pair(l1);
        agg["mse"] = stat_pair(mse);
        agg["final_loss"] = stat_pair(loss);
        for (const TrialOutcome& out : outcomes) {
            if (!out.ok) continue;
            agg["n"] = out.record.predictions.size();
            agg["matrix_nnz"] = out.matrix_nnz;
            agg["factor_nnz"] = out.factor_nnz;
            agg["iterations_per_trial"] = out.iterations;
            break;
        }
    }
    agg["errors"] = errors;
    std::ofstream out(fs::path(config.out_dir) / "aggregate.json");
    out << agg.dump(2) << "\n";
    return exit_for(failures, jobs);
}

int cmd_ablation(const ExperimentConfig& config) {
    const BvpSystem sys = build_linear_system(config);
    const std::vector<uint64_t> seeds = trial_seeds(config);
    const int jobs = (int)config.drop_tols.size() + 1;  // + "none" baseline
    write_run_context(config, "ablate", worker_count(jobs));

    struct Row {
        bool none = false;
        double drop_tol = 0.0;
        double cond = 0.0;
        double l2re = 0.0;
        int factor_nnz = 0;
        double factor_ms = 0.0;
        std::string error;
    };
    std::vector<Row> rows(jobs);

    parallel_for(jobs, [&](int i) {
        Row& row = rows[i];
        row.none = i == (int)config.drop_tols.size();
        try {
            TrainConfig tc = config.train;
            const IluFactors* reuse = nullptr;
            IluFactors factors;
            if (row.none) {
                tc.mode = LossMode::raw_discrete;
                row.cond = condition_number(sys).cond;
            } else {
                row.drop_tol = config.drop_tols[i];
                tc.drop_tol = row.drop_tol;
                const auto t0 = Clock::now();
                factors = ilu_factorize(sys.matrix, row.drop_tol);
                row.factor_ms = std::chrono::duration<double, std::milli>(
                                    Clock::now() - t0)
                                    .count();
                row.factor_nnz = factors.lower.nnz() + factors.upper.nnz();
                row.cond = preconditioned_condition_number(sys, factors).cond;
                reuse = &factors;
            }
            double sum = 0.0;
            for (int t = 0; t < config.trials; ++t) {
                tc.seed = seeds[t];
                MlpModel model = build_network(
                    config.network, problem_dims(config.problem), seeds[t]);
                sum += train_linear(sys, model, tc, reuse).final_metrics.l2re;
            }
            row.l2re = sum / (double)config.trials;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    CsvFile csv = open_csv(fs::path(config.out_dir) / "ablation.csv");
    std::fprintf(csv.get(), "drop_tol,cond,l2re,factor_nnz,factor_ms,error\n");
    int failures = 0;
    for (const Row& row : rows) {
        const std::string label =
            row.none ? "none" : [&] {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.12g", row.drop_tol);
                return std::string(buf);
            }();
        if (!row.error.empty()) {
            ++failures;
            std::fprintf(csv.get(), "%s,,,,,%s\n", label.c_str(),
                         sanitize_cell(row.error).c_str());
            continue;
        }
        std::fprintf(csv.get(), "%s,%.12g,%.12g,%d,%.12g,\n", label.c_str(),
                     row.cond, row.l2re, row.factor_nnz, row.factor_ms);
    }
    return exit_for(failures, jobs);
}

int cmd_gradcheck(const ExperimentConfig& config) {
    write_run_context(config, "gradcheck", 1);

    BvpSystem sys;
    if (config.problem == "burgers") {
        // check the Newton inner chain: the tangent system at the initial guess
        const NonlinearSystem nl =
            assemble_burgers_1d(config.nu, config.mesh[0], config.mesh[1]);
        const std::vector<double>& u0 = nl.initial_guess;
        sys.matrix = nl.jacobian(u0);
        sys.bias = spmv(sys.matrix, u0);
        const std::vector<double> f_val = nl.residual(u0);
        for (size_t i = 0; i < sys.bias.size(); ++i) sys.bias[i] -= f_val[i];
        sys.mesh = nl.mesh;
        sys.interior_index = nl.interior_index;
        sys.forcing = "newton_tangent";
    } else {
        sys = build_linear_system(config);
    }
    const IluFactors f = ilu_factorize(sys.matrix, config.train.drop_tol);

    Tensor coords(sys.matrix.n_rows, sys.mesh.dims);
    for (int node = 0; node < sys.mesh.n_nodes(); ++node) {
        const int row = sys.interior_index[node];
        if (row < 0) continue;
        if (sys.mesh.dims == 1) {
            coords.at(row, 0) = sys.mesh.coord(0, node);
        } else {
            coords.at(row, 0) = sys.mesh.coord(0, node / sys.mesh.counts[1]);
            coords.at(row, 1) = sys.mesh.coord(1, node % sys.mesh.counts[1]);
        }
    }

    MlpModel model = build_network(config.network,
                                   problem_dims(config.problem),
                                   config.base_seed);
    auto loss_fn = [&](MlpModel& m, std::vector<Tensor>* grads) {
        if (grads == nullptr) {
            return preconditioned_loss(mlp_forward_batch(m, coords).v, sys, f)
                .loss;
        }
        Tape tape;
        const ForwardNodes fw = mlp_forward_batch(tape, m, coords);
        const LossValue lv =
            preconditioned_loss(tape.value(fw.output).v, sys, f);
        tape.backward(fw.output, loss_gradient_wrt_outputs(lv, sys, f));
        grads->clear();
        for (size_t l = 0; l < fw.weight_ids.size(); ++l) {
            grads->push_back(tape.grad(fw.weight_ids[l]));
            grads->push_back(tape.grad(fw.bias_ids[l]));
        }
        return lv.loss;
    };
    const GradcheckReport rep = gradcheck(model, loss_fn);

    const double threshold = 1e-6;
    json report;
    report["problem"] = config.problem;
    report["n"] = sys.matrix.n_rows;
    report["drop_tol"] = config.train.drop_tol;
    report["max_rel_err"] = rep.max_rel_err;
    report["checked"] = rep.checked;
    report["skipped"] = rep.skipped;
    report["tensor_index"] = rep.tensor_index;
    report["entry_index"] = rep.entry_index;
    report["threshold"] = threshold;
    report["pass"] = rep.max_rel_err < threshold;
    std::ofstream out(fs::path(config.out_dir) / "gradcheck.json");
    out << report.dump(2) << "\n";
    return rep.max_rel_err < threshold ? kExitOk : kExitFailed;
}

}  // namespace pcp
