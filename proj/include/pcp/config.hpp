#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcp/mlp.hpp"
#include "pcp/training.hpp"

namespace pcp {

/// Thrown for any config defect; `field` names the offending key (dotted
/// path for nested blocks). The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string f, const std::string& what)
        : std::runtime_error("config field '" + f + "': " + what),
          field(std::move(f)) {}
};

struct NetworkSpec {
    std::vector<int> hidden = {32, 32};
    Activation activation = Activation::tanh_act;
    EmbeddingKind embedding = EmbeddingKind::none;
    int n_freq = 0;
    bool passthrough = false;
};

/// One experiment: a problem instance, solver blocks, a network, and output
/// plumbing. Unset keys keep these defaults; unknown keys are rejected.
struct ExperimentConfig {
    std::string problem;  // poisson | helmholtz | wave | heat | burgers
    double P = 2.0;
    int A_param = 1;
    double C = 2.0;
    double nu = 0.1;
    double kappa = 1.0;
    double dt = 0.005;
    std::vector<int> mesh = {65};
    std::vector<double> sweep;
    std::vector<double> drop_tols = {0.0, 1e-4, 1e-2, 1e-1};
    TrainConfig train;
    NewtonConfig newton;
    TimeSteppingConfig stepping;
    NetworkSpec network;
    std::string out_dir = "pcp_out";
    int trials = 3;
    uint64_t base_seed = 0;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Canonical JSON echo with every field explicit; parsing it back yields an
/// equal config.
std::string serialize_config(const ExperimentConfig& config);

int problem_dims(const std::string& problem);

MlpModel build_network(const NetworkSpec& spec, int input_dim, uint64_t seed);

}  // namespace pcp
