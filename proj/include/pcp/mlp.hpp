#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcp/tape.hpp"
#include "pcp/tensor.hpp"

namespace pcp {

enum class EmbeddingKind { none, log_uniform, gaussian };

/// Fourier feature map x -> [sin(F x), cos(F x)] applied before the first
/// layer. Frequencies are drawn once at init and stay fixed; the map is not
/// differentiated through because only parameter gradients are needed.
struct FourierEmbedding {
    EmbeddingKind kind = EmbeddingKind::none;
    Tensor freq;  // n_freq x input_dim
    bool passthrough = false;

    int n_freq() const { return freq.rows; }
    int feature_dim(int input_dim) const;
};

struct MlpModel {
    int input_dim = 0;
    Activation activation = Activation::tanh_act;
    FourierEmbedding embedding;
    std::vector<Tensor> weights;  // layer l: out x in
    std::vector<Tensor> biases;   // layer l: 1 x out

    size_t param_count() const;
    int output_dim() const;
};

/// layer_sizes runs from raw input dim to output dim, hidden sizes between.
/// With an embedding the first weight matrix is sized to the feature dim
/// instead of layer_sizes[0]. Weights are Glorot normal (variance
/// 2/(fan_in+fan_out)), biases zero. Draw order is fixed (frequencies first,
/// then weights layer by layer) so a seed pins every parameter bit.
MlpModel init_mlp(const std::vector<int>& layer_sizes, Activation act,
                  EmbeddingKind embedding, int n_freq, bool passthrough,
                  uint64_t seed);

/// Fresh parameters for this model's exact architecture under a new seed.
MlpModel init_like(const MlpModel& model, uint64_t seed);

/// Applies the embedding to a raw n x input_dim batch. Identity when the
/// model has no embedding.
Tensor embed_inputs(const MlpModel& model, const Tensor& X);

struct ForwardNodes {
    int output = -1;              // n x output_dim, final layer, linear
    std::vector<int> weight_ids;  // tape param nodes, layer order
    std::vector<int> bias_ids;
};

/// Forward over pre-embedded features, recording the graph on the tape.
ForwardNodes mlp_forward_features(Tape& tape, const MlpModel& model,
                                  const Tensor& features);

/// Forward over raw inputs with tape recording (embeds internally).
ForwardNodes mlp_forward_batch(Tape& tape, const MlpModel& model,
                               const Tensor& X);

/// Tape-free forward over raw inputs.
Tensor mlp_forward_batch(const MlpModel& model, const Tensor& X);

/// Pointers to every trainable tensor in the fixed order used by the tape
/// forward, the optimizer, and the checkpoint file.
std::vector<Tensor*> collect_params(MlpModel& model);

/// Flat binary checkpoint (magic, version, architecture, then raw
/// little-endian doubles). Round-trips bit-exactly.
void save_checkpoint(const MlpModel& model, const std::string& path);
MlpModel load_checkpoint(const std::string& path);

}  // namespace pcp
