#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "acdgcl/graph.hpp"
#include "acdgcl/ops.hpp"
#include "acdgcl/tape.hpp"

namespace acdgcl {

struct ModelConfig {
    Index num_layers = 3;
    Index hidden_dim = 32;
    Index embed_dim = 32;  // width of the disentangled representations
    Index num_features = 1;
};

/// Flat named collection of parameter tensors for the encoder, both
/// extractors and the reconstructor.
struct ModelParams {
    ModelConfig config;
    ParamMap tensors;

    Index total_coords() const {
        Index n = 0;
        for (const auto& [k, v] : tensors) n += v.size();
        return n;
    }
};

/// Glorot-uniform weights, zero biases, zero GIN epsilons; deterministic per seed.
ModelParams init_params(const ModelConfig& config, uint64_t seed);

/// Places every parameter on the tape; trainable leaves are named so they show
/// up in backward()'s gradient map.
std::map<std::string, Var> make_taped_params(Tape& tape, const ModelParams& params,
                                             bool trainable = true);

struct EncoderOutput {
    Var hidden1;  // first-layer node embeddings, pre-perturbation
    Var z;        // per-graph sum readout of the final layer
};

struct DisentangledPair {
    Var z_aug;
    Var z_inv;
};

/// Dense symmetric adjacency of the batch (constant input to the encoder).
Tensor batch_adjacency(const GraphBatch& batch);

/// GIN forward pass. When `delta` is given it is added to the first hidden
/// layer's output before the remaining layers.
EncoderOutput encode(Tape& tape, const GraphBatch& batch, const ModelConfig& config,
                     const std::map<std::string, Var>& params, std::optional<Var> delta = {});

/// Layers 2..L plus readout, starting from a given first-layer activation.
Var encode_tail(Tape& tape, const GraphBatch& batch, const ModelConfig& config,
                const std::map<std::string, Var>& params, Var hidden1);

DisentangledPair extract(Tape& tape, Var z, const ModelConfig& config,
                         const std::map<std::string, Var>& params);

/// g_r applied to the element-wise product of the two representations.
Var reconstruct(Tape& tape, Var z_aug, Var z_inv, const ModelConfig& config,
                const std::map<std::string, Var>& params);

struct Checkpoint {
    ModelParams params;
    nlohmann::json config_echo;
};

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const nlohmann::json& config_echo);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace acdgcl
