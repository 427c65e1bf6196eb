#include "acdgcl/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

namespace acdgcl {

EmbeddingTable embed_dataset(const ModelParams& params, const GraphDataset& dataset) {
    if (params.config.num_features != dataset.num_node_label_classes)
        throw std::invalid_argument("checkpoint expects " + std::to_string(params.config.num_features) +
                                    " node feature classes, dataset has " +
                                    std::to_string(dataset.num_node_label_classes));
    const Index n = dataset.size();
    EmbeddingTable table;
    table.features = Tensor::zeros({n, params.config.embed_dim});
    table.labels.reserve(n);
    table.num_classes = dataset.num_graph_classes;
    for (const Graph& g : dataset.graphs) table.labels.push_back(g.label);

    const Index chunk = 64;
    for (Index start = 0; start < n; start += chunk) {
        const Index end = std::min(start + chunk, n);
        std::span<const Graph> graphs(dataset.graphs.data() + start, end - start);
        GraphBatch batch = to_batch(graphs, dataset.num_node_label_classes);
        Tape tape;
        auto vars = make_taped_params(tape, params, false);
        EncoderOutput enc = encode(tape, batch, params.config, vars);
        DisentangledPair pair = extract(tape, enc.z, params.config, vars);
        const Tensor& z_inv = tape.value(pair.z_inv);
        table.features.mat().middleRows(start, end - start) = z_inv.mat();
    }
    return table;
}

namespace {

struct Standardizer {
    Tensor mean;  // 1 x d
    Tensor scale; // 1 x d

    static Standardizer fit(const Tensor& x) {
        Standardizer s;
        s.mean = Tensor::zeros({1, x.cols()});
        s.scale = Tensor::zeros({1, x.cols()});
        s.mean.mat().row(0) = x.mat().colwise().mean();
        for (Index j = 0; j < x.cols(); ++j) {
            const double var =
                (x.mat().col(j).array() - s.mean(0, j)).square().sum() / double(x.rows());
            s.scale(0, j) = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
        }
        return s;
    }

    Tensor apply(const Tensor& x) const {
        Tensor out = x;
        for (Index j = 0; j < x.cols(); ++j)
            out.mat().col(j) = (x.mat().col(j).array() - mean(0, j)) * scale(0, j);
        return out;
    }
};

Tensor one_hot_rows(const std::vector<Index>& labels, Index num_classes) {
    Tensor y = Tensor::zeros({static_cast<Index>(labels.size()), num_classes});
    for (Index i = 0; i < y.rows(); ++i) y(i, labels[i]) = 1.0;
    return y;
}

Index argmax_lowest_tie(const Tensor& logits, Index row) {
    Index best = 0;
    for (Index j = 1; j < logits.cols(); ++j)
        if (logits(row, j) > logits(row, best)) best = j;
    return best;
}

void mean_std(const std::vector<double>& xs, double& mean, double& std_dev) {
    mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    std_dev = std::sqrt(var / double(xs.size()));
}

}  // namespace

FoldProbe train_fold_classifier(const Tensor& x_train, const std::vector<Index>& y_train,
                                const Tensor& x_test, const std::vector<Index>& y_test,
                                Index num_classes, double l2, Index epochs) {
    std::set<Index> classes(y_train.begin(), y_train.end());
    if (classes.size() < 2)
        throw std::invalid_argument("linear_probe: training fold contains a single class");

    Standardizer std_fit = Standardizer::fit(x_train);
    const Tensor xt = std_fit.apply(x_train);
    const Tensor y_hot = one_hot_rows(y_train, num_classes);

    ParamMap probe_params;
    probe_params.emplace("w", Tensor::zeros({x_train.cols(), num_classes}));
    probe_params.emplace("b", Tensor::zeros({1, num_classes}));

    const double lr = 0.5;
    for (Index e = 0; e < epochs; ++e) {
        Tape tape;
        Var w = tape.param("w", probe_params.at("w"));
        Var b = tape.param("b", probe_params.at("b"));
        Var logits = add(tape, matmul(tape, tape.constant(xt), w), b);
        const Tensor& lv = tape.value(logits);
        Tensor row_max = Tensor::zeros({lv.rows(), 1});
        for (Index i = 0; i < lv.rows(); ++i) row_max(i, 0) = lv.mat().row(i).maxCoeff();
        Var m = tape.constant(row_max);
        Var lse = add(tape, log(tape, rowwise_sum(tape, exp(tape, sub(tape, logits, m)))), m);
        Var true_logit = rowwise_sum(tape, mul(tape, logits, tape.constant(y_hot)));
        Var ce = mean(tape, sub(tape, lse, true_logit));
        Var loss = add(tape, ce, scale(tape, l2_norm_sq(tape, w), l2));
        GradientMap grads = tape.backward(loss);
        probe_params.at("w").array() -= lr * grads.at("w").array();
        probe_params.at("b").array() -= lr * grads.at("b").array();
    }

    FoldProbe result;
    result.w = probe_params.at("w");
    result.b = probe_params.at("b");

    const Tensor xe = std_fit.apply(x_test);
    Tensor logits = Tensor::zeros({xe.rows(), num_classes});
    logits.mat().noalias() = xe.mat() * result.w.mat();
    logits.mat().rowwise() += result.b.mat().row(0);
    Index correct = 0;
    for (Index i = 0; i < xe.rows(); ++i)
        if (argmax_lowest_tie(logits, i) == y_test[i]) ++correct;
    result.accuracy = y_test.empty() ? 0.0 : double(correct) / double(y_test.size());
    return result;
}

EvalReport linear_probe(const EmbeddingTable& table, const FoldSplit& folds, double l2,
                        Index epochs, std::vector<FoldProbe>* detail) {
    if (folds.k() < 2) throw std::invalid_argument("linear_probe: need at least 2 folds");
    EvalReport report;
    for (Index f = 0; f < folds.k(); ++f) {
        std::vector<Index> test_idx = folds.folds[f];
        std::vector<Index> train_idx;
        for (Index g = 0; g < folds.k(); ++g)
            if (g != f) train_idx.insert(train_idx.end(), folds.folds[g].begin(), folds.folds[g].end());

        auto gather = [&](const std::vector<Index>& idx, Tensor& x, std::vector<Index>& y) {
            x = Tensor::zeros({static_cast<Index>(idx.size()), table.features.cols()});
            y.clear();
            for (Index i = 0; i < static_cast<Index>(idx.size()); ++i) {
                x.mat().row(i) = table.features.mat().row(idx[i]);
                y.push_back(table.labels[idx[i]]);
            }
        };
        Tensor x_train, x_test;
        std::vector<Index> y_train, y_test;
        gather(train_idx, x_train, y_train);
        gather(test_idx, x_test, y_test);

        FoldProbe probe = train_fold_classifier(x_train, y_train, x_test, y_test,
                                                table.num_classes, l2, epochs);
        report.fold_accuracies.push_back(probe.accuracy);
        if (detail) detail->push_back(std::move(probe));
    }
    mean_std(report.fold_accuracies, report.mean, report.std_dev);
    return report;
}

EvalReport evaluate_embeddings(const EmbeddingTable& table, Index k,
                               const std::vector<uint64_t>& seeds, double l2, Index epochs) {
    EvalReport merged;
    merged.seeds = seeds;
    for (uint64_t seed : seeds) {
        FoldSplit folds = kfold_split(table.size(), k, seed);
        EvalReport one = linear_probe(table, folds, l2, epochs);
        merged.fold_accuracies.insert(merged.fold_accuracies.end(), one.fold_accuracies.begin(),
                                      one.fold_accuracies.end());
    }
    mean_std(merged.fold_accuracies, merged.mean, merged.std_dev);
    return merged;
}

void parallel_run(std::vector<std::function<void()>> jobs, unsigned max_workers) {
    if (max_workers == 0) max_workers = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            jobs[i]();
        }
    };
    std::vector<std::thread> threads;
    const unsigned n = std::min<unsigned>(max_workers, jobs.size());
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
}

namespace {

/// Trains one configuration per seed (in parallel) and pools the probe
/// accuracies over seeds and folds.
struct VariantOutcome {
    EvalReport report;
    std::vector<std::vector<EpochStats>> histories;
};

VariantOutcome train_and_probe(const TrainConfig& config, const GraphDataset& dataset,
                               Index num_train_seeds, const ProbeOptions& probe) {
    std::vector<TrainResult> results(num_train_seeds);
    std::vector<std::function<void()>> jobs;
    for (Index s = 0; s < num_train_seeds; ++s) {
        jobs.push_back([&, s]() {
            TrainConfig cfg = config;
            cfg.seed = config.seed + static_cast<uint64_t>(s);
            results[s] = train(cfg, dataset);
        });
    }
    parallel_run(std::move(jobs));

    VariantOutcome outcome;
    for (Index s = 0; s < num_train_seeds; ++s) {
        const uint64_t seed = config.seed + static_cast<uint64_t>(s);
        EmbeddingTable table = embed_dataset(results[s].params, dataset);
        EvalReport rep = evaluate_embeddings(table, probe.folds, {seed}, probe.l2, probe.epochs);
        outcome.report.fold_accuracies.insert(outcome.report.fold_accuracies.end(),
                                              rep.fold_accuracies.begin(), rep.fold_accuracies.end());
        outcome.report.seeds.push_back(seed);
        outcome.histories.push_back(std::move(results[s].epochs));
    }
    mean_std(outcome.report.fold_accuracies, outcome.report.mean, outcome.report.std_dev);
    return outcome;
}

}  // namespace

std::vector<AblationRow> run_ablation(const TrainConfig& config, const GraphDataset& dataset,
                                      Index num_train_seeds, const ProbeOptions& probe) {
    std::vector<std::pair<std::string, TrainConfig>> variants;
    variants.emplace_back("full", config);
    TrainConfig wo_intra = config;
    wo_intra.recon_mode = ReconMode::CrossOnly;
    variants.emplace_back("wo_intra_recon", wo_intra);
    TrainConfig wo_inter = config;
    wo_inter.recon_mode = ReconMode::IntraOnly;
    variants.emplace_back("wo_inter_recon", wo_inter);
    TrainConfig wo_adv = config;
    wo_adv.lambda_a = 0.0;
    variants.emplace_back("wo_adv_training", wo_adv);

    std::vector<AblationRow> rows;
    for (const auto& [name, cfg] : variants) {
        VariantOutcome outcome = train_and_probe(cfg, dataset, num_train_seeds, probe);
        rows.push_back(AblationRow{name, std::move(outcome.report), std::move(outcome.histories)});
    }
    return rows;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "aug_ratio") return SweepAxis::AugRatio;
    if (s == "epsilon") return SweepAxis::Epsilon;
    if (s == "attack_steps") return SweepAxis::AttackSteps;
    throw std::invalid_argument("unknown sweep axis: " + s +
                                " (expected aug_ratio, epsilon or attack_steps)");
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::AugRatio: return "aug_ratio";
        case SweepAxis::Epsilon: return "epsilon";
        case SweepAxis::AttackSteps: return "attack_steps";
    }
    throw std::logic_error("unknown sweep axis");
}

namespace {

TrainConfig config_at_value(const TrainConfig& base, SweepAxis axis, double value) {
    TrainConfig cfg = base;
    switch (axis) {
        case SweepAxis::AugRatio: {
            auto family = cfg.augmentation_family();
            for (auto& spec : family)
                spec.ratio = spec.kind == AugmentKind::Subgraph ? 1.0 - value : value;
            cfg.augmentations = family;
            break;
        }
        case SweepAxis::Epsilon:
            cfg.pgd.epsilon = value;
            break;
        case SweepAxis::AttackSteps:
            if (value < 0.0 || value != std::floor(value))
                throw std::invalid_argument("attack_steps sweep values must be non-negative integers");
            cfg.pgd.steps = static_cast<Index>(value);
            break;
    }
    return cfg;
}

}  // namespace

std::vector<SweepRow> run_robustness_sweep(const TrainConfig& config, const GraphDataset& dataset,
                                           SweepAxis axis, std::vector<double> values,
                                           Index num_train_seeds, const ProbeOptions& probe,
                                           bool retrain) {
    if (values.empty()) throw std::invalid_argument("sweep requires at least one value");
    std::sort(values.begin(), values.end());

    std::vector<SweepRow> rows;
    if (!retrain) {
        VariantOutcome base = train_and_probe(config, dataset, num_train_seeds, probe);
        for (double v : values) rows.push_back(SweepRow{v, base.report.mean, base.report.std_dev});
        return rows;
    }
    for (double v : values) {
        TrainConfig cfg = config_at_value(config, axis, v);
        VariantOutcome outcome = train_and_probe(cfg, dataset, num_train_seeds, probe);
        rows.push_back(SweepRow{v, outcome.report.mean, outcome.report.std_dev});
    }
    return rows;
}

void write_eval_csv(const std::filesystem::path& path, const EvalReport& report,
                    Index folds_per_seed) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write eval csv: " + path.string());
    out << "seed,fold,accuracy\n";
    char buf[128];
    for (size_t i = 0; i < report.fold_accuracies.size(); ++i) {
        const size_t seed_idx = folds_per_seed > 0 ? i / static_cast<size_t>(folds_per_seed) : 0;
        const uint64_t seed = seed_idx < report.seeds.size() ? report.seeds[seed_idx] : 0;
        std::snprintf(buf, sizeof(buf), "%llu,%lld,%.17g\n",
                      static_cast<unsigned long long>(seed),
                      static_cast<long long>(folds_per_seed > 0 ? i % folds_per_seed : i),
                      report.fold_accuracies[i]);
        out << buf;
    }
}

void write_sweep_csv(const std::filesystem::path& path, SweepAxis axis,
                     const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep csv: " + path.string());
    out << "axis,value,mean_accuracy,std_accuracy\n";
    char buf[160];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", to_string(axis).c_str(), r.value,
                      r.mean, r.std_dev);
        out << buf;
    }
}

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ablation csv: " + path.string());
    out << "variant,mean_accuracy,std_accuracy\n";
    char buf[160];
    for (const AblationRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", r.variant.c_str(), r.report.mean,
                      r.report.std_dev);
        out << buf;
    }
}

}  // namespace acdgcl
