#pragma once

#include "acdgcl/advtrain.hpp"

namespace acdgcl {

/// Frozen per-graph invariant representations plus labels.
struct EmbeddingTable {
    Tensor features;  // N x d
    std::vector<Index> labels;
    Index num_classes = 0;

    Index size() const { return static_cast<Index>(labels.size()); }
};

struct EvalReport {
    std::vector<double> fold_accuracies;  // one entry per (seed, fold)
    std::vector<uint64_t> seeds;
    double mean = 0.0;
    double std_dev = 0.0;
    nlohmann::json config_echo;
};

/// Deterministic augmentation-free forward pass producing z_inv per graph.
EmbeddingTable embed_dataset(const ModelParams& params, const GraphDataset& dataset);

struct FoldProbe {
    double accuracy = 0.0;
    Tensor w;  // trained classifier weights, d x C
    Tensor b;  // 1 x C
};

/// Trains an L2-regularized multinomial logistic-regression classifier by
/// full-batch gradient descent from zero init; ties in argmax go to the
/// lowest class index.
FoldProbe train_fold_classifier(const Tensor& x_train, const std::vector<Index>& y_train,
                                const Tensor& x_test, const std::vector<Index>& y_test,
                                Index num_classes, double l2, Index epochs);

/// Cross-validated linear probe over one fold split.
EvalReport linear_probe(const EmbeddingTable& table, const FoldSplit& folds, double l2,
                        Index epochs, std::vector<FoldProbe>* detail = nullptr);

/// Full protocol: k folds per probe seed, accuracies pooled across seeds.
EvalReport evaluate_embeddings(const EmbeddingTable& table, Index k,
                               const std::vector<uint64_t>& seeds, double l2, Index epochs);

struct ProbeOptions {
    Index folds = 10;
    Index seeds = 5;
    double l2 = 1e-3;
    Index epochs = 1000;
};

struct AblationRow {
    std::string variant;
    EvalReport report;
    std::vector<std::vector<EpochStats>> histories;  // per training seed
};

/// Trains four variants (full, w/o intra recon, w/o inter recon, w/o adversarial)
/// with identical seeds and probes each.
std::vector<AblationRow> run_ablation(const TrainConfig& config, const GraphDataset& dataset,
                                      Index num_train_seeds, const ProbeOptions& probe);

enum class SweepAxis { AugRatio, Epsilon, AttackSteps };

SweepAxis sweep_axis_from_string(const std::string& s);
std::string to_string(SweepAxis axis);

struct SweepRow {
    double value = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;
};

/// Accuracy versus one robustness axis; rows sorted by value. When `retrain`
/// is false the base configuration is trained once per seed and only probed
/// at each value.
std::vector<SweepRow> run_robustness_sweep(const TrainConfig& config, const GraphDataset& dataset,
                                           SweepAxis axis, std::vector<double> values,
                                           Index num_train_seeds, const ProbeOptions& probe,
                                           bool retrain = true);

void write_eval_csv(const std::filesystem::path& path, const EvalReport& report, Index folds_per_seed);
void write_sweep_csv(const std::filesystem::path& path, SweepAxis axis,
                     const std::vector<SweepRow>& rows);
void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

/// Runs `jobs` on up to `max_workers` threads; results keyed by job index.
void parallel_run(std::vector<std::function<void()>> jobs, unsigned max_workers = 0);

}  // namespace acdgcl
