#include "acdgcl/advtrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace acdgcl {

void PgdConfig::validate() const {
    if (epsilon < 0.0) throw std::invalid_argument("pgd epsilon must be >= 0");
    if (steps < 0) throw std::invalid_argument("pgd steps must be >= 0");
    if (steps > 0 && !(resolved_step_size() > 0.0) && epsilon > 0.0)
        throw std::invalid_argument("pgd step_size must be positive when steps > 0");
}

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (lambda_r < 0.0 || lambda_a < 0.0) throw std::invalid_argument("lambda coefficients must be >= 0");
    for (const auto& spec : augmentations)
        if (spec.ratio < 0.0 || spec.ratio > 1.0)
            throw std::invalid_argument("augmentation ratio outside [0, 1]");
    pgd.validate();
}

std::vector<AugmentationSpec> TrainConfig::augmentation_family() const {
    if (!augmentations.empty()) return augmentations;
    // gentle default: feature masking keeps the topology statistics that sum
    // pooling depends on
    return {{AugmentKind::AttributeMask, 0.1}};
}

PgdResult pgd_ascent(const Tensor& init, double epsilon, Index steps, double step_size,
                     const std::function<std::pair<double, Tensor>(const Tensor&)>& grad_fn,
                     const std::function<void(const Tensor&)>& per_iteration) {
    Tensor delta = init;
    delta.array() = delta.array().min(epsilon).max(-epsilon);  // project the start point
    PgdResult result;
    bool first = true;
    for (Index s = 0; s < steps; ++s) {
        auto [loss, grad] = grad_fn(delta);
        if (first) {
            result.loss_init = loss;
            first = false;
        }
        if (!grad.same_shape(delta))
            throw std::logic_error("pgd gradient shape mismatch: " + shape_str(grad.shape()) +
                                   " vs " + shape_str(delta.shape()));
        delta.array() += step_size * grad.array().sign();
        delta.array() = delta.array().min(epsilon).max(-epsilon);
        if (per_iteration) per_iteration(delta);
    }
    if (first) result.loss_init = grad_fn(delta).first;
    result.delta = std::move(delta);
    return result;
}

namespace {

std::pair<double, Tensor> adv_loss_and_grad(const GraphBatch& original, const ModelParams& params,
                                            const Tensor& h1_value, const Tensor& z1_inv,
                                            const Tensor& z2_inv, double temperature,
                                            const Tensor& delta, bool want_grad) {
    Tape tape;
    auto vars = make_taped_params(tape, params, false);  // frozen for the inner loop
    Var h1 = tape.constant(h1_value);
    Var d = tape.input(delta, want_grad);
    Var h = add(tape, h1, d);
    Var z = encode_tail(tape, original, params.config, vars, h);
    DisentangledPair pair = extract(tape, z, params.config, vars);
    Var loss = adversarial_loss(tape, tape.constant(z1_inv), tape.constant(z2_inv), pair.z_inv,
                                temperature);
    const double value = tape.value(loss).value();
    if (!want_grad) return {value, Tensor{}};
    tape.backward(loss);
    return {value, tape.grad(d)};
}

Tensor original_hidden1(const GraphBatch& original, const ModelParams& params) {
    Tape tape;
    auto vars = make_taped_params(tape, params, false);
    EncoderOutput out = encode(tape, original, params.config, vars);
    return tape.value(out.hidden1);
}

Tensor initial_delta(const Shape& shape, const PgdConfig& cfg, Rng& rng) {
    if (cfg.init == PgdInit::Zero) return Tensor::zeros(shape);
    Tensor d = Tensor::zeros(shape);
    std::uniform_real_distribution<double> dist(-cfg.epsilon, cfg.epsilon);
    for (Index i = 0; i < d.size(); ++i) d[i] = dist(rng);
    return d;
}

}  // namespace

PgdResult pgd_maximize(const GraphBatch& original, const ModelParams& params,
                       const Tensor& z1_inv, const Tensor& z2_inv, double temperature,
                       const PgdConfig& cfg, Rng& rng,
                       const std::function<void(const Tensor&)>& per_iteration) {
    cfg.validate();
    const Tensor h1 = original_hidden1(original, params);
    Tensor delta0 = initial_delta(h1.shape(), cfg, rng);
    auto grad_fn = [&](const Tensor& d) {
        return adv_loss_and_grad(original, params, h1, z1_inv, z2_inv, temperature, d, true);
    };
    return pgd_ascent(delta0, cfg.epsilon, cfg.steps, cfg.resolved_step_size(), grad_fn,
                      per_iteration);
}

double adversarial_loss_value(const GraphBatch& original, const ModelParams& params,
                              const Tensor& z1_inv, const Tensor& z2_inv, double temperature,
                              const Tensor& delta) {
    const Tensor h1 = original_hidden1(original, params);
    return adv_loss_and_grad(original, params, h1, z1_inv, z2_inv, temperature, delta, false).first;
}

void adam_step(ModelParams& params, const GradientMap& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    if (state.timestep == 0 && state.m.empty()) {
        for (const auto& [name, value] : params.tensors) {
            state.m.emplace(name, Tensor::zeros(value.shape()));
            state.v.emplace(name, Tensor::zeros(value.shape()));
        }
    }
    ++state.timestep;
    const double bc1 = 1.0 - std::pow(beta1, double(state.timestep));
    const double bc2 = 1.0 - std::pow(beta2, double(state.timestep));
    for (auto& [name, p] : params.tensors) {
        auto git = grads.find(name);
        if (git == grads.end()) throw std::invalid_argument("adam_step: missing gradient for " + name);
        const Tensor& g = git->second;
        if (!g.same_shape(p))
            throw std::invalid_argument("adam_step: gradient shape " + shape_str(g.shape()) +
                                        " != parameter shape " + shape_str(p.shape()) + " for " + name);
        Tensor& m = state.m.at(name);
        Tensor& v = state.v.at(name);
        m.array() = beta1 * m.array() + (1.0 - beta1) * g.array();
        v.array() = beta2 * v.array() + (1.0 - beta2) * g.array().square();
        p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    }
}

EpochStats train_epoch(const GraphDataset& dataset, ModelParams& params, AdamState& state,
                       const TrainConfig& config, Rng& rng) {
    config.validate();
    if (dataset.graphs.empty()) throw std::invalid_argument("train_epoch: empty dataset");
    const auto family = config.augmentation_family();
    const Index c = dataset.num_node_label_classes;

    std::vector<Index> order(dataset.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    EpochStats stats;
    for (Index start = 0; start < dataset.size(); start += config.batch_size) {
        const Index end = std::min<Index>(start + config.batch_size, dataset.size());
        if (end - start < 2) break;  // drop short tail batches

        std::vector<Graph> originals;
        std::vector<GraphView> views1, views2;
        for (Index i = start; i < end; ++i) {
            const Graph& g = dataset.graphs[order[i]];
            ViewPair pair = sample_view_pair(g, family, rng);
            originals.push_back(g);
            views1.push_back(std::move(pair.view1));
            views2.push_back(std::move(pair.view2));
        }
        GraphBatch batch1 = to_batch(views1, c);
        GraphBatch batch2 = to_batch(views2, c);

        Tape tape;
        auto vars = make_taped_params(tape, params, true);
        EncoderOutput enc1 = encode(tape, batch1, params.config, vars);
        EncoderOutput enc2 = encode(tape, batch2, params.config, vars);
        DisentangledPair p1 = extract(tape, enc1.z, params.config, vars);
        DisentangledPair p2 = extract(tape, enc2.z, params.config, vars);

        Var l_inv = invariance_loss(tape, p1.z_inv, p2.z_inv, config.temperature);
        ReconInputs recon{enc1.z, enc2.z, p1.z_aug, p1.z_inv, p2.z_aug, p2.z_inv};
        Var l_recon = reconstruction_loss(tape, recon, params.config, vars, config.recon_mode);

        std::optional<Var> l_adv;
        if (config.lambda_a > 0.0) {
            GraphBatch batch_orig = to_batch(std::span<const Graph>(originals), c);
            PgdResult pgd = pgd_maximize(batch_orig, params, tape.value(p1.z_inv),
                                         tape.value(p2.z_inv), config.temperature, config.pgd, rng);
            ++stats.pgd_calls;
            EncoderOutput enc_adv =
                encode(tape, batch_orig, params.config, vars, tape.constant(pgd.delta));
            DisentangledPair p_adv = extract(tape, enc_adv.z, params.config, vars);
            l_adv = adversarial_loss(tape, p1.z_inv, p2.z_inv, p_adv.z_inv, config.temperature);
        }

        LossBreakdown loss = joint_objective(tape, l_inv, l_recon, l_adv, config.lambda_r,
                                             config.lambda_a, config.temperature);
        GradientMap grads = tape.backward(loss.total_var);
        adam_step(params, grads, state, config.learning_rate);

        stats.l_inv += loss.l_inv;
        stats.l_recon += loss.l_recon;
        stats.l_adv += loss.l_adv;
        stats.total += loss.total;
        ++stats.batches;
    }
    if (stats.batches > 0) {
        stats.l_inv /= double(stats.batches);
        stats.l_recon /= double(stats.batches);
        stats.l_adv /= double(stats.batches);
        stats.total /= double(stats.batches);
    }
    return stats;
}

TrainResult train(const TrainConfig& config, const GraphDataset& dataset) {
    TrainConfig cfg = config;
    cfg.model.num_features = dataset.num_node_label_classes;
    cfg.validate();
    TrainResult result;
    result.params = init_params(cfg.model, cfg.seed);
    AdamState state;
    Rng rng(cfg.seed);
    for (Index e = 1; e <= cfg.epochs; ++e) {
        const auto start = std::chrono::steady_clock::now();
        EpochStats stats = train_epoch(dataset, result.params, state, cfg, rng);
        stats.epoch = e;
        if (cfg.record_timing) {
            const auto elapsed = std::chrono::steady_clock::now() - start;
            stats.seconds = std::chrono::duration<double>(elapsed).count();
        }
        result.epochs.push_back(stats);
    }
    return result;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochStats>& stats) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics file: " + path.string());
    out << "epoch,l_inv,l_recon,l_adv,total,seconds\n";
    char buf[256];
    for (const EpochStats& s : stats) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                      static_cast<long long>(s.epoch), s.l_inv, s.l_recon, s.l_adv, s.total,
                      s.seconds);
        out << buf;
    }
    if (!out) throw std::runtime_error("metrics write failed: " + path.string());
}

}  // namespace acdgcl
