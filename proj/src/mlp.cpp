#include "pcp/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "pcp/rng.hpp"

namespace pcp {

int FourierEmbedding::feature_dim(int input_dim) const {
    if (kind == EmbeddingKind::none) return input_dim;
    return 2 * n_freq() + (passthrough ? input_dim : 0);
}

size_t MlpModel::param_count() const {
    size_t n = 0;
    for (const Tensor& w : weights) n += w.size();
    for (const Tensor& b : biases) n += b.size();
    return n;
}

int MlpModel::output_dim() const {
    return weights.empty() ? 0 : weights.back().rows;
}

MlpModel init_mlp(const std::vector<int>& layer_sizes, Activation act,
                  EmbeddingKind embedding, int n_freq, bool passthrough,
                  uint64_t seed) {
    if (layer_sizes.size() < 3) {
        throw std::invalid_argument(
            "init_mlp: need at least one hidden layer (got " +
            std::to_string(layer_sizes.size()) + " sizes)");
    }
    for (int s : layer_sizes) {
        if (s < 1) throw std::invalid_argument("init_mlp: layer size < 1");
    }
    if (embedding != EmbeddingKind::none && n_freq < 1) {
        throw std::invalid_argument("init_mlp: embedding needs n_freq >= 1");
    }

    MlpModel model;
    model.input_dim = layer_sizes[0];
    model.activation = act;
    Rng rng(seed);

    model.embedding.kind = embedding;
    model.embedding.passthrough = passthrough;
    if (embedding != EmbeddingKind::none) {
        Tensor f(n_freq, model.input_dim);
        if (embedding == EmbeddingKind::log_uniform) {
            // 2*pi * 2^U(-5,5): log-uniform frequencies spanning a decade of
            // octaves on each side of 2*pi.
            for (double& x : f.v)
                x = 2.0 * std::numbers::pi * std::exp2(rng.uniform(-5.0, 5.0));
        } else {
            const double stddev = std::sqrt(std::numbers::pi);
            for (double& x : f.v) x = rng.normal(0.0, stddev);
        }
        model.embedding.freq = std::move(f);
    }

    int in_dim = model.embedding.feature_dim(model.input_dim);
    for (size_t l = 1; l < layer_sizes.size(); ++l) {
        const int out_dim = layer_sizes[l];
        Tensor w(out_dim, in_dim);
        const double stddev = std::sqrt(2.0 / (in_dim + out_dim));
        for (double& x : w.v) x = rng.normal(0.0, stddev);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(1, out_dim);
        in_dim = out_dim;
    }
    return model;
}

MlpModel init_like(const MlpModel& model, uint64_t seed) {
    std::vector<int> sizes{model.input_dim};
    for (const Tensor& w : model.weights) sizes.push_back(w.rows);
    return init_mlp(sizes, model.activation, model.embedding.kind,
                    model.embedding.n_freq(), model.embedding.passthrough,
                    seed);
}

Tensor embed_inputs(const MlpModel& model, const Tensor& X) {
    if (X.cols != model.input_dim) {
        throw std::invalid_argument("embed_inputs: batch has " +
                                    std::to_string(X.cols) +
                                    " columns, model expects " +
                                    std::to_string(model.input_dim));
    }
    const FourierEmbedding& e = model.embedding;
    if (e.kind == EmbeddingKind::none) return X;

    const int nf = e.n_freq();
    const int fd = e.feature_dim(model.input_dim);
    Tensor out(X.rows, fd);
    for (int i = 0; i < X.rows; ++i) {
        const double* x = X.data() + static_cast<size_t>(i) * X.cols;
        double* o = out.data() + static_cast<size_t>(i) * fd;
        for (int k = 0; k < nf; ++k) {
            double dot = 0.0;
            const double* fr = e.freq.data() + static_cast<size_t>(k) * X.cols;
            for (int j = 0; j < X.cols; ++j) dot += fr[j] * x[j];
            o[k] = std::sin(dot);
            o[nf + k] = std::cos(dot);
        }
        if (e.passthrough) {
            for (int j = 0; j < X.cols; ++j) o[2 * nf + j] = x[j];
        }
    }
    return out;
}

ForwardNodes mlp_forward_features(Tape& tape, const MlpModel& model,
                                  const Tensor& features) {
    if (model.weights.empty()) {
        throw std::invalid_argument("mlp_forward: uninitialized model");
    }
    if (features.cols != model.weights[0].cols) {
        throw std::invalid_argument("mlp_forward: feature dim " +
                                    std::to_string(features.cols) +
                                    " vs first layer " +
                                    std::to_string(model.weights[0].cols));
    }
    ForwardNodes out;
    int h = tape.input(features);
    const size_t n_layers = model.weights.size();
    for (size_t l = 0; l < n_layers; ++l) {
        const int w = tape.param(model.weights[l]);
        const int b = tape.param(model.biases[l]);
        out.weight_ids.push_back(w);
        out.bias_ids.push_back(b);
        h = tape.linear(h, w, b);
        if (l + 1 < n_layers) h = tape.activation(h, model.activation);
    }
    out.output = h;
    return out;
}

ForwardNodes mlp_forward_batch(Tape& tape, const MlpModel& model,
                               const Tensor& X) {
    return mlp_forward_features(tape, model, embed_inputs(model, X));
}

Tensor mlp_forward_batch(const MlpModel& model, const Tensor& X) {
    Tape tape;
    ForwardNodes nodes = mlp_forward_batch(tape, model, X);
    return tape.value(nodes.output);
}

std::vector<Tensor*> collect_params(MlpModel& model) {
    std::vector<Tensor*> out;
    for (size_t l = 0; l < model.weights.size(); ++l) {
        out.push_back(&model.weights[l]);
        out.push_back(&model.biases[l]);
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'P', 'C', 'P', 'N', 'E', 'T', '0', '1'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_u32(std::FILE* f, uint32_t v) {
    if (std::fwrite(&v, sizeof v, 1, f) != 1)
        throw std::runtime_error("checkpoint: short write");
}

void write_doubles(std::FILE* f, const std::vector<double>& v) {
    if (!v.empty() && std::fwrite(v.data(), sizeof(double), v.size(), f) != v.size())
        throw std::runtime_error("checkpoint: short write");
}

uint32_t read_u32(std::FILE* f, const std::string& path) {
    uint32_t v;
    if (std::fread(&v, sizeof v, 1, f) != 1)
        throw std::runtime_error("checkpoint: truncated file " + path);
    return v;
}

void read_doubles(std::FILE* f, std::vector<double>& v,
                  const std::string& path) {
    if (!v.empty() && std::fread(v.data(), sizeof(double), v.size(), f) != v.size())
        throw std::runtime_error("checkpoint: truncated file " + path);
}

}  // namespace

void save_checkpoint(const MlpModel& model, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    if (std::fwrite(kMagic, 1, sizeof kMagic, f.get()) != sizeof kMagic)
        throw std::runtime_error("checkpoint: short write");
    write_u32(f.get(), 1);  // version
    write_u32(f.get(), model.activation == Activation::tanh_act ? 0 : 1);
    write_u32(f.get(), static_cast<uint32_t>(model.embedding.kind));
    write_u32(f.get(), static_cast<uint32_t>(
                           model.embedding.kind == EmbeddingKind::none
                               ? 0
                               : model.embedding.n_freq()));
    write_u32(f.get(), model.embedding.passthrough ? 1 : 0);
    write_u32(f.get(), static_cast<uint32_t>(model.input_dim));
    write_u32(f.get(), static_cast<uint32_t>(model.weights.size()));
    for (const Tensor& w : model.weights) {
        write_u32(f.get(), static_cast<uint32_t>(w.rows));
        write_u32(f.get(), static_cast<uint32_t>(w.cols));
    }
    if (model.embedding.kind != EmbeddingKind::none)
        write_doubles(f.get(), model.embedding.freq.v);
    for (size_t l = 0; l < model.weights.size(); ++l) {
        write_doubles(f.get(), model.weights[l].v);
        write_doubles(f.get(), model.biases[l].v);
    }
}

MlpModel load_checkpoint(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    if (std::fread(magic, 1, sizeof magic, f.get()) != sizeof magic ||
        std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const uint32_t version = read_u32(f.get(), path);
    if (version != 1)
        throw std::runtime_error("checkpoint: unsupported version " +
                                 std::to_string(version) + " in " + path);

    MlpModel model;
    model.activation =
        read_u32(f.get(), path) == 0 ? Activation::tanh_act : Activation::silu;
    const uint32_t ekind = read_u32(f.get(), path);
    if (ekind > 2)
        throw std::runtime_error("checkpoint: bad embedding kind in " + path);
    model.embedding.kind = static_cast<EmbeddingKind>(ekind);
    const uint32_t n_freq = read_u32(f.get(), path);
    model.embedding.passthrough = read_u32(f.get(), path) != 0;
    model.input_dim = static_cast<int>(read_u32(f.get(), path));
    const uint32_t n_layers = read_u32(f.get(), path);
    if (n_layers == 0 || n_layers > 1024)
        throw std::runtime_error("checkpoint: bad layer count in " + path);

    std::vector<std::pair<int, int>> dims;
    for (uint32_t l = 0; l < n_layers; ++l) {
        const int r = static_cast<int>(read_u32(f.get(), path));
        const int c = static_cast<int>(read_u32(f.get(), path));
        dims.emplace_back(r, c);
    }
    if (model.embedding.kind != EmbeddingKind::none) {
        model.embedding.freq = Tensor(static_cast<int>(n_freq), model.input_dim);
        read_doubles(f.get(), model.embedding.freq.v, path);
    }
    for (auto [r, c] : dims) {
        Tensor w(r, c);
        read_doubles(f.get(), w.v, path);
        Tensor b(1, r);
        read_doubles(f.get(), b.v, path);
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    return model;
}

}  // namespace pcp
