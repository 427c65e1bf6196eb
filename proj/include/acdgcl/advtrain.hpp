#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "acdgcl/augment.hpp"
#include "acdgcl/objective.hpp"

namespace acdgcl {

enum class PgdInit { Zero, Uniform };

struct PgdConfig {
    double epsilon = 0.01;     // l-inf radius
    Index steps = 3;
    double step_size = 0.0;    // 0 -> 2.5 * epsilon / steps
    PgdInit init = PgdInit::Zero;

    double resolved_step_size() const {
        if (step_size > 0.0) return step_size;
        return steps > 0 ? 2.5 * epsilon / double(steps) : 0.0;
    }
    void validate() const;
};

struct TrainConfig {
    Index epochs = 100;
    Index batch_size = 16;
    double learning_rate = 3e-4;
    double temperature = 0.2;
    double lambda_r = 5.0;
    double lambda_a = 0.5;
    PgdConfig pgd;
    std::vector<AugmentationSpec> augmentations;  // empty -> default family
    ModelConfig model;
    ReconMode recon_mode = ReconMode::Both;
    uint64_t seed = 1;
    bool record_timing = false;

    void validate() const;
    std::vector<AugmentationSpec> augmentation_family() const;
};

struct AdamState {
    ParamMap m;
    ParamMap v;
    long timestep = 0;
};

struct EpochStats {
    Index epoch = 0;
    double l_inv = 0.0;
    double l_recon = 0.0;
    double l_adv = 0.0;
    double total = 0.0;
    double seconds = 0.0;
    Index batches = 0;
    Index pgd_calls = 0;
};

struct PgdResult {
    Tensor delta;
    double loss_init = 0.0;
};

/// Signed-gradient ascent with l-inf projection; grad_fn returns (loss, grad)
/// at the queried point. Every iterate stays inside the epsilon ball.
PgdResult pgd_ascent(const Tensor& init, double epsilon, Index steps, double step_size,
                     const std::function<std::pair<double, Tensor>(const Tensor&)>& grad_fn,
                     const std::function<void(const Tensor&)>& per_iteration = {});

/// Inner maximization of the adversarial loss over a perturbation of the
/// original batch's first hidden layer. Parameters and the two view
/// representations are treated as constants.
PgdResult pgd_maximize(const GraphBatch& original, const ModelParams& params,
                       const Tensor& z1_inv, const Tensor& z2_inv, double temperature,
                       const PgdConfig& cfg, Rng& rng,
                       const std::function<void(const Tensor&)>& per_iteration = {});

/// Adversarial loss at a fixed perturbation (no gradients); evaluation helper.
double adversarial_loss_value(const GraphBatch& original, const ModelParams& params,
                              const Tensor& z1_inv, const Tensor& z2_inv, double temperature,
                              const Tensor& delta);

/// Bias-corrected Adam update; moments are created lazily on first use.
void adam_step(ModelParams& params, const GradientMap& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

EpochStats train_epoch(const GraphDataset& dataset, ModelParams& params, AdamState& state,
                       const TrainConfig& config, Rng& rng);

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> epochs;
};

TrainResult train(const TrainConfig& config, const GraphDataset& dataset);

/// CSV with header epoch,l_inv,l_recon,l_adv,total,seconds.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochStats>& stats);

}  // namespace acdgcl
