#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "pcp/blas_env.hpp"
#include "pcp/config.hpp"
#include "pcp/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    int trials = 0;
    bool seed_set = false;
    bool trials_set = false;
};

void attach(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", opts.out_dir, "output directory override");
    cmd->add_option("--seed", opts.seed, "base seed override")
        ->trigger_on_parse()
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--trials", opts.trials, "trial count override")
        ->each([&opts](const std::string&) { opts.trials_set = true; });
}

pcp::ExperimentConfig load(const CommonOpts& opts) {
    pcp::ExperimentConfig config = pcp::parse_config(opts.config_path);
    if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
    if (opts.seed_set) config.base_seed = opts.seed;
    if (opts.trials_set) {
        if (opts.trials < 1) {
            throw pcp::ConfigError("trials", "must be at least 1");
        }
        config.trials = opts.trials;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    pcp::ensure_blas_env(argv);

    CLI::App app{
        "trains neural solvers for discretized PDEs with factorized "
        "preconditioning and reports conditioning diagnostics"};
    app.require_subcommand(1);

    CommonOpts cond_opts, train_opts, ablate_opts, grad_opts;
    CLI::App* cond =
        app.add_subcommand("cond", "condition-number sweep over a parameter");
    attach(cond, cond_opts);
    CLI::App* train =
        app.add_subcommand("train", "seeded training trials with aggregates");
    attach(train, train_opts);
    CLI::App* ablate =
        app.add_subcommand("ablate", "drop-tolerance ablation table");
    attach(ablate, ablate_opts);
    CLI::App* grad =
        app.add_subcommand("gradcheck", "finite-difference gradient audit");
    attach(grad, grad_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pcp::kExitConfig;
    }

    try {
        if (cond->parsed()) return pcp::cmd_cond_sweep(load(cond_opts));
        if (train->parsed()) return pcp::cmd_train(load(train_opts));
        if (ablate->parsed()) return pcp::cmd_ablation(load(ablate_opts));
        return pcp::cmd_gradcheck(load(grad_opts));
    } catch (const pcp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return pcp::kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return pcp::kExitFailed;
    }
}
