#include "pcp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pcp {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& scope,
                    const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) {
            throw ConfigError(scope.empty() ? item.key()
                                            : scope + "." + item.key(),
                              "unknown key");
        }
    }
}

double take_number(const json& obj, const std::string& scope,
                   const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(scope + key, "expected a number");
    return v.get<double>();
}

int take_int(const json& obj, const std::string& scope, const std::string& key,
             int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError(scope + key, "expected an integer");
    return v.get<int>();
}

bool take_bool(const json& obj, const std::string& scope,
               const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(scope + key, "expected a boolean");
    return v.get<bool>();
}

std::string take_string(const json& obj, const std::string& scope,
                        const std::string& key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(scope + key, "expected a string");
    return v.get<std::string>();
}

template <typename T>
std::vector<T> take_array(const json& obj, const std::string& scope,
                          const std::string& key, std::vector<T> fallback,
                          bool integers) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array()) throw ConfigError(scope + key, "expected an array");
    std::vector<T> out;
    for (const json& e : v) {
        if (integers ? !e.is_number_integer() : !e.is_number()) {
            throw ConfigError(scope + key, integers
                                               ? "expected integer entries"
                                               : "expected numeric entries");
        }
        out.push_back(e.get<T>());
    }
    return out;
}

Activation parse_activation(const std::string& s) {
    if (s == "tanh") return Activation::tanh_act;
    if (s == "silu") return Activation::silu;
    throw ConfigError("network.activation", "unknown activation '" + s + "'");
}

const char* activation_name(Activation a) {
    return a == Activation::tanh_act ? "tanh" : "silu";
}

EmbeddingKind parse_embedding(const std::string& s) {
    if (s == "none") return EmbeddingKind::none;
    if (s == "log_uniform") return EmbeddingKind::log_uniform;
    if (s == "gaussian") return EmbeddingKind::gaussian;
    throw ConfigError("network.embedding", "unknown embedding '" + s + "'");
}

const char* embedding_name(EmbeddingKind k) {
    switch (k) {
        case EmbeddingKind::none: return "none";
        case EmbeddingKind::log_uniform: return "log_uniform";
        default: return "gaussian";
    }
}

LossMode parse_mode(const std::string& s) {
    if (s == "preconditioned") return LossMode::preconditioned;
    if (s == "raw_discrete") return LossMode::raw_discrete;
    throw ConfigError("train.mode", "unknown loss mode '" + s + "'");
}

ExperimentConfig from_json(const json& root) {
    if (!root.is_object()) throw ConfigError("", "top level must be an object");
    reject_unknown(root, "",
                   {"problem", "parameters", "mesh", "sweep", "drop_tols",
                    "train", "newton", "stepping", "network", "out_dir",
                    "trials", "seed"});

    ExperimentConfig c;
    if (!root.contains("problem")) throw ConfigError("problem", "required");
    c.problem = take_string(root, "", "problem", "");
    if (c.problem != "poisson" && c.problem != "helmholtz" &&
        c.problem != "wave" && c.problem != "heat" && c.problem != "burgers") {
        throw ConfigError("problem", "unknown problem '" + c.problem + "'");
    }

    if (root.contains("parameters")) {
        const json& p = root.at("parameters");
        if (!p.is_object()) throw ConfigError("parameters", "expected an object");
        reject_unknown(p, "parameters", {"P", "A", "C", "nu", "kappa", "dt"});
        c.P = take_number(p, "parameters.", "P", c.P);
        c.A_param = take_int(p, "parameters.", "A", c.A_param);
        c.C = take_number(p, "parameters.", "C", c.C);
        c.nu = take_number(p, "parameters.", "nu", c.nu);
        c.kappa = take_number(p, "parameters.", "kappa", c.kappa);
        c.dt = take_number(p, "parameters.", "dt", c.dt);
        if (c.P <= 0.0) throw ConfigError("parameters.P", "must be positive");
        if (c.dt <= 0.0) throw ConfigError("parameters.dt", "must be positive");
    }

    c.mesh = take_array<int>(root, "", "mesh", c.mesh, true);
    // wave and burgers take (nx, nt); helmholtz is square from one count
    const size_t want_axes =
        (c.problem == "wave" || c.problem == "burgers") ? 2 : 1;
    if (c.mesh.size() != want_axes) {
        throw ConfigError("mesh", "problem '" + c.problem + "' needs " +
                                      std::to_string(want_axes) +
                                      " mesh count(s)");
    }
    for (int m : c.mesh) {
        if (m < 3) throw ConfigError("mesh", "counts must be at least 3");
    }

    c.sweep = take_array<double>(root, "", "sweep", c.sweep, false);
    c.drop_tols = take_array<double>(root, "", "drop_tols", c.drop_tols, false);
    for (double d : c.drop_tols) {
        if (d < 0.0) throw ConfigError("drop_tols", "must be non-negative");
    }

    if (root.contains("train")) {
        const json& t = root.at("train");
        if (!t.is_object()) throw ConfigError("train", "expected an object");
        reject_unknown(t, "train",
                       {"iterations", "learning_rate", "drop_tol",
                        "log_stride", "mode"});
        c.train.iterations =
            take_int(t, "train.", "iterations", c.train.iterations);
        c.train.learning_rate =
            take_number(t, "train.", "learning_rate", c.train.learning_rate);
        c.train.drop_tol = take_number(t, "train.", "drop_tol", c.train.drop_tol);
        c.train.log_stride =
            take_int(t, "train.", "log_stride", c.train.log_stride);
        c.train.mode =
            parse_mode(take_string(t, "train.", "mode", "preconditioned"));
        if (c.train.iterations < 0)
            throw ConfigError("train.iterations", "must be non-negative");
        if (!(c.train.learning_rate > 0.0))
            throw ConfigError("train.learning_rate", "must be positive");
        if (c.train.drop_tol < 0.0)
            throw ConfigError("train.drop_tol", "must be non-negative");
        if (c.train.log_stride < 1)
            throw ConfigError("train.log_stride", "must be at least 1");
    }

    if (root.contains("newton")) {
        const json& nj = root.at("newton");
        if (!nj.is_object()) throw ConfigError("newton", "expected an object");
        reject_unknown(nj, "newton",
                       {"outer_steps", "inner_iterations", "damping"});
        c.newton.outer_steps =
            take_int(nj, "newton.", "outer_steps", c.newton.outer_steps);
        c.newton.inner_iterations = take_int(nj, "newton.", "inner_iterations",
                                             c.newton.inner_iterations);
        c.newton.damping = take_number(nj, "newton.", "damping", c.newton.damping);
        if (c.newton.outer_steps < 1)
            throw ConfigError("newton.outer_steps", "must be at least 1");
        if (c.newton.inner_iterations < 0)
            throw ConfigError("newton.inner_iterations", "must be non-negative");
        if (!(c.newton.damping > 0.0) || c.newton.damping > 1.0)
            throw ConfigError("newton.damping", "must lie in (0, 1]");
    }

    if (root.contains("stepping")) {
        const json& sj = root.at("stepping");
        if (!sj.is_object()) throw ConfigError("stepping", "expected an object");
        reject_unknown(sj, "stepping",
                       {"steps", "inner_iterations", "cold_start_iterations",
                        "transfer", "reuse_factorization"});
        c.stepping.steps = take_int(sj, "stepping.", "steps", c.stepping.steps);
        c.stepping.inner_iterations = take_int(
            sj, "stepping.", "inner_iterations", c.stepping.inner_iterations);
        c.stepping.cold_start_iterations =
            take_int(sj, "stepping.", "cold_start_iterations",
                     c.stepping.cold_start_iterations);
        c.stepping.transfer =
            take_bool(sj, "stepping.", "transfer", c.stepping.transfer);
        c.stepping.reuse_factorization =
            take_bool(sj, "stepping.", "reuse_factorization",
                      c.stepping.reuse_factorization);
        if (c.stepping.steps < 1)
            throw ConfigError("stepping.steps", "must be at least 1");
        if (c.stepping.inner_iterations < 0 ||
            c.stepping.cold_start_iterations < 0) {
            throw ConfigError("stepping.inner_iterations",
                              "iteration budgets must be non-negative");
        }
    }

    if (root.contains("network")) {
        const json& n = root.at("network");
        if (!n.is_object()) throw ConfigError("network", "expected an object");
        reject_unknown(n, "network",
                       {"hidden", "activation", "embedding", "n_freq",
                        "passthrough"});
        c.network.hidden =
            take_array<int>(n, "network.", "hidden", c.network.hidden, true);
        if (c.network.hidden.empty())
            throw ConfigError("network.hidden", "needs at least one layer");
        for (int hsz : c.network.hidden) {
            if (hsz < 1)
                throw ConfigError("network.hidden", "widths must be positive");
        }
        c.network.activation =
            parse_activation(take_string(n, "network.", "activation", "tanh"));
        c.network.embedding =
            parse_embedding(take_string(n, "network.", "embedding", "none"));
        c.network.n_freq = take_int(n, "network.", "n_freq", c.network.n_freq);
        c.network.passthrough =
            take_bool(n, "network.", "passthrough", c.network.passthrough);
        if (c.network.embedding != EmbeddingKind::none && c.network.n_freq < 1)
            throw ConfigError("network.n_freq",
                              "must be positive with an embedding");
        if (c.network.embedding == EmbeddingKind::none && c.network.n_freq != 0)
            throw ConfigError("network.n_freq",
                              "must be 0 without an embedding");
    }

    c.out_dir = take_string(root, "", "out_dir", c.out_dir);
    if (c.out_dir.empty()) throw ConfigError("out_dir", "must be non-empty");
    c.trials = take_int(root, "", "trials", c.trials);
    if (c.trials < 1) throw ConfigError("trials", "must be at least 1");
    if (root.contains("seed")) {
        const json& s = root.at("seed");
        if (!s.is_number_unsigned() && !s.is_number_integer())
            throw ConfigError("seed", "expected an integer");
        c.base_seed = s.get<uint64_t>();
    }
    return c;
}

}  // namespace

int problem_dims(const std::string& problem) {
    return (problem == "wave" || problem == "helmholtz" ||
            problem == "burgers")
               ? 2
               : 1;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    return from_json(root);
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("", "cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    json root;
    root["problem"] = c.problem;
    root["parameters"] = {{"P", c.P},   {"A", c.A_param},    {"C", c.C},
                          {"nu", c.nu}, {"kappa", c.kappa},  {"dt", c.dt}};
    root["mesh"] = c.mesh;
    root["sweep"] = c.sweep;
    root["drop_tols"] = c.drop_tols;
    root["train"] = {{"iterations", c.train.iterations},
                     {"learning_rate", c.train.learning_rate},
                     {"drop_tol", c.train.drop_tol},
                     {"log_stride", c.train.log_stride},
                     {"mode", loss_mode_name(c.train.mode)}};
    root["newton"] = {{"outer_steps", c.newton.outer_steps},
                      {"inner_iterations", c.newton.inner_iterations},
                      {"damping", c.newton.damping}};
    root["stepping"] = {{"steps", c.stepping.steps},
                        {"inner_iterations", c.stepping.inner_iterations},
                        {"cold_start_iterations",
                         c.stepping.cold_start_iterations},
                        {"transfer", c.stepping.transfer},
                        {"reuse_factorization", c.stepping.reuse_factorization}};
    root["network"] = {{"hidden", c.network.hidden},
                       {"activation", activation_name(c.network.activation)},
                       {"embedding", embedding_name(c.network.embedding)},
                       {"n_freq", c.network.n_freq},
                       {"passthrough", c.network.passthrough}};
    root["out_dir"] = c.out_dir;
    root["trials"] = c.trials;
    root["seed"] = c.base_seed;
    return root.dump(2) + "\n";
}

MlpModel build_network(const NetworkSpec& spec, int input_dim, uint64_t seed) {
    std::vector<int> sizes;
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
    sizes.push_back(1);
    return init_mlp(sizes, spec.activation, spec.embedding, spec.n_freq,
                    spec.passthrough, seed);
}

}  // namespace pcp
