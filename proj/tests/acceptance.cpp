// Acceptance suite: one pass/fail line per criterion, run under ctest.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "acdgcl/config_io.hpp"
#include "acdgcl/eval.hpp"
#include "acdgcl/selfcheck.hpp"
#include "acdgcl/tu_io.hpp"

using namespace acdgcl;
namespace fs = std::filesystem;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[criterion %d] %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

fs::path mutag_dir() {
    const char* root = std::getenv("ACDGCL_DATA_DIR");
    REQUIRE_MESSAGE(root != nullptr, "ACDGCL_DATA_DIR must point at the data directory");
    return fs::path(root) / "MUTAG";
}

const GraphDataset& mutag() {
    static GraphDataset ds = parse_tu_dataset(mutag_dir());
    return ds;
}

/// Spec-default configuration: 3-layer GIN, hidden 32, lambda_r 5.0,
/// lambda_a 0.5, tau 0.2, 100 epochs.
TrainConfig default_config() {
    TrainConfig cfg;  // defaults already encode the benchmark setting
    return cfg;
}

double train_and_probe_accuracy(const TrainConfig& cfg, const GraphDataset& ds,
                                std::vector<double>* fold_accs = nullptr) {
    TrainResult result = train(cfg, ds);
    EmbeddingTable table = embed_dataset(result.params, ds);
    EvalReport rep = evaluate_embeddings(table, 10, {cfg.seed}, 1e-3, 1000);
    if (fold_accs)
        fold_accs->insert(fold_accs->end(), rep.fold_accuracies.begin(), rep.fold_accuracies.end());
    return rep.mean;
}

/// Mean 10-fold probe accuracy over training seeds base..base+n-1, trainings
/// run in parallel.
double mean_accuracy_over_seeds(const TrainConfig& base_cfg, const GraphDataset& ds, uint64_t seed0,
                                int num_seeds, std::vector<double>* fold_accs = nullptr) {
    std::vector<std::vector<double>> per_seed(num_seeds);
    std::vector<std::function<void()>> jobs;
    for (int s = 0; s < num_seeds; ++s)
        jobs.push_back([&, s]() {
            TrainConfig cfg = base_cfg;
            cfg.seed = seed0 + static_cast<uint64_t>(s);
            (void)train_and_probe_accuracy(cfg, ds, &per_seed[s]);
        });
    parallel_run(std::move(jobs));
    std::vector<double> all;
    for (auto& v : per_seed) all.insert(all.end(), v.begin(), v.end());
    if (fold_accs) *fold_accs = all;
    return std::accumulate(all.begin(), all.end(), 0.0) / double(all.size());
}

double info_nce_oracle(const Tensor& za, const Tensor& zb, double tau) {
    const Index b = za.rows();
    auto normalized = [](const Tensor& z) {
        Tensor n = z;
        for (Index i = 0; i < z.rows(); ++i) n.mat().row(i) = z.mat().row(i) / z.mat().row(i).norm();
        return n;
    };
    Tensor na = normalized(za), nb = normalized(zb);
    double total = 0.0;
    for (int dir = 0; dir < 2; ++dir) {
        const Tensor& anchors = dir == 0 ? na : nb;
        const Tensor& others = dir == 0 ? nb : na;
        for (Index i = 0; i < b; ++i) {
            double denom = 0.0;
            for (Index j = 0; j < b; ++j)
                denom += std::exp(anchors.mat().row(i).dot(others.mat().row(j)) / tau);
            total += -std::log(std::exp(anchors.mat().row(i).dot(others.mat().row(i)) / tau) / denom);
        }
    }
    return total / double(2 * b);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("criterion 1: gradient integrity of every loss term") {
    Timer timer;
    std::vector<LossCheck> checks = loss_gradcheck_suite(1e-5, 100);
    bool pass = true;
    double worst = 0.0;
    long coords = 0;
    for (const LossCheck& c : checks) {
        pass = pass && c.report.pass && c.report.coords_checked >= 100;
        worst = std::max(worst, c.report.max_rel_err);
        coords += c.report.coords_checked;
        CHECK_MESSAGE(c.report.pass, c.name, " max_rel_err=", c.report.max_rel_err);
        CHECK(c.report.coords_checked >= 100);
    }
    const double secs = timer.seconds();
    pass = pass && secs < 120.0;
    CHECK(secs < 120.0);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "losses=%zu worst_rel_err=%.3g coords=%ld runtime=%.1fs (limit 120s)",
                  checks.size(), worst, coords, secs);
    report(1, pass, detail);
}

TEST_CASE("criterion 2: oracle equivalence") {
    bool pass = true;

    // info_nce vs O(B^2) double loop, 50 random batches
    Rng rng(777);
    std::uniform_int_distribution<Index> bd(2, 16), dd(2, 10);
    std::uniform_real_distribution<double> vd(-1.0, 1.0), td(0.1, 1.0);
    double worst_nce = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index b = bd(rng), d = dd(rng);
        Tensor za = Tensor::zeros({b, d}), zb = Tensor::zeros({b, d});
        for (Index i = 0; i < za.size(); ++i) za[i] = vd(rng);
        for (Index i = 0; i < zb.size(); ++i) zb[i] = vd(rng);
        const double tau = td(rng);
        Tape t;
        const double got = t.value(info_nce(t, t.constant(za), t.constant(zb), tau)).value();
        worst_nce = std::max(worst_nce, std::abs(got - info_nce_oracle(za, zb, tau)));
    }
    pass = pass && worst_nce < 1e-10;
    CHECK(worst_nce < 1e-10);

    // segment readout vs per-graph loop, exact
    bool segment_exact = true;
    for (int trial = 0; trial < 20; ++trial) {
        GraphDataset ds = make_random_dataset(6, 3, 2, 1000 + trial);
        GraphBatch batch = to_batch(std::span<const Graph>(ds.graphs), 3);
        Tensor h = Tensor::zeros({batch.total_nodes(), 5});
        for (Index i = 0; i < h.size(); ++i) h[i] = vd(rng);
        Tape t;
        Var s = segment_sum(t, t.constant(h), batch.segment_ids, batch.num_graphs);
        Tensor oracle = Tensor::zeros({batch.num_graphs, 5});
        for (Index i = 0; i < batch.total_nodes(); ++i)
            oracle.mat().row(batch.segment_ids[i]) += h.mat().row(i);
        for (Index i = 0; i < oracle.size(); ++i)
            segment_exact = segment_exact && t.value(s)[i] == oracle[i];
    }
    pass = pass && segment_exact;
    CHECK(segment_exact);

    // hand-evaluated reconstruction loss on the B=1 fixture: value 4
    ModelConfig mc;
    mc.num_layers = 1;
    mc.hidden_dim = 2;
    mc.embed_dim = 2;
    mc.num_features = 2;
    ModelParams mp = init_params(mc, 3);
    Tape t0;
    auto v0 = make_taped_params(t0, mp, false);
    Tensor za = Tensor::matrix({{0.5, -1.0}});
    Tensor zi = Tensor::matrix({{1.5, 0.25}});
    Tensor rec_out = t0.value(reconstruct(t0, t0.constant(za), t0.constant(zi), mc, v0));
    Tensor target = rec_out;
    target.array() += 1.0;  // every residual vector becomes (1, 1)
    Tape t1;
    auto v1 = make_taped_params(t1, mp, false);
    ReconInputs in{t1.constant(target), t1.constant(target), t1.constant(za), t1.constant(zi),
                   t1.constant(za), t1.constant(zi)};
    const double recon = t1.value(reconstruction_loss(t1, in, mc, v1)).value();
    pass = pass && std::abs(recon - 4.0) < 1e-12;
    CHECK(recon == doctest::Approx(4.0).epsilon(1e-12));

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "info_nce_worst=%.3g (tol 1e-10), segment_exact=%d, recon_fixture=%.12f",
                  worst_nce, segment_exact ? 1 : 0, recon);
    report(2, pass, detail);
}

TEST_CASE("criterion 3: PGD contract over 1000 randomized runs") {
    Rng rng(4242);
    std::uniform_real_distribution<double> ed(0.0, 0.1), vd(-1.0, 1.0);
    std::uniform_int_distribution<Index> sd(1, 4);
    long violations = 0;
    long ascents = 0;
    long zero_eps_ok = 0, zero_eps_total = 0;
    const int runs = 1000;
    ModelConfig mc;
    mc.num_layers = 2;
    mc.hidden_dim = 4;
    mc.embed_dim = 3;
    mc.num_features = 3;
    for (int run = 0; run < runs; ++run) {
        ModelParams params = init_params(mc, 10000 + run);
        GraphDataset ds = make_random_dataset(3, mc.num_features, 2, 20000 + run, 3, 6, 0.5);
        GraphBatch batch = to_batch(std::span<const Graph>(ds.graphs), mc.num_features);
        Tensor z1 = Tensor::zeros({batch.num_graphs, mc.embed_dim});
        Tensor z2 = Tensor::zeros({batch.num_graphs, mc.embed_dim});
        for (Index i = 0; i < z1.size(); ++i) z1[i] = vd(rng);
        for (Index i = 0; i < z2.size(); ++i) z2[i] = vd(rng);

        PgdConfig cfg;
        cfg.epsilon = run % 10 == 0 ? 0.0 : ed(rng);  // every tenth run hits epsilon = 0
        cfg.steps = sd(rng);
        cfg.init = run % 2 == 0 ? PgdInit::Zero : PgdInit::Uniform;

        PgdResult result = pgd_maximize(batch, params, z1, z2, 0.2, cfg, rng,
                                        [&](const Tensor& delta) {
                                            if (delta.array().abs().maxCoeff() > cfg.epsilon)
                                                ++violations;
                                        });
        if (cfg.epsilon == 0.0) {
            ++zero_eps_total;
            if (result.delta.array().abs().maxCoeff() == 0.0) ++zero_eps_ok;
        }
        const double final_loss =
            adversarial_loss_value(batch, params, z1, z2, 0.2, result.delta);
        if (final_loss >= result.loss_init - 1e-12) ++ascents;
    }
    const double ascent_rate = double(ascents) / double(runs);
    const bool pass = violations == 0 && zero_eps_ok == zero_eps_total && ascent_rate >= 0.95;
    CHECK(violations == 0);
    CHECK(zero_eps_ok == zero_eps_total);
    CHECK(ascent_rate >= 0.95);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "runs=%d ball_violations=%ld eps0_exact=%ld/%ld ascent_rate=%.3f (need >= 0.95)",
                  runs, violations, zero_eps_ok, zero_eps_total, ascent_rate);
    report(3, pass, detail);
}

TEST_CASE("criterion 4: invariance suite") {
    ModelConfig mc;
    mc.num_layers = 3;
    mc.hidden_dim = 8;
    mc.embed_dim = 6;
    mc.num_features = 4;
    ModelParams params = init_params(mc, 99);
    Rng rng(555);

    double worst_perm = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Graph g = make_random_graph(3, 14, 0.4, mc.num_features, 2, rng);
        std::vector<Index> perm(g.num_nodes);
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        Graph pg = permute_graph(g, perm);
        for (const Graph* gr : {&g, &pg}) (void)gr;
        auto embed_one = [&](const Graph& gg, Tensor& z_out, Tensor& zinv_out) {
            GraphBatch b = to_batch(std::span<const Graph>(&gg, 1), mc.num_features);
            Tape t;
            auto vars = make_taped_params(t, params, false);
            EncoderOutput enc = encode(t, b, mc, vars);
            DisentangledPair pair = extract(t, enc.z, mc, vars);
            z_out = t.value(enc.z);
            zinv_out = t.value(pair.z_inv);
        };
        Tensor z1, zi1, z2, zi2;
        embed_one(g, z1, zi1);
        embed_one(pg, z2, zi2);
        worst_perm = std::max(worst_perm, (z1.array() - z2.array()).abs().maxCoeff());
        worst_perm = std::max(worst_perm, (zi1.array() - zi2.array()).abs().maxCoeff());
    }

    // batching equivalence
    GraphDataset ds = make_random_dataset(12, mc.num_features, 2, 556);
    GraphBatch whole = to_batch(std::span<const Graph>(ds.graphs), mc.num_features);
    Tape t;
    auto vars = make_taped_params(t, params, false);
    Tensor z_batched = t.value(encode(t, whole, mc, vars).z);
    double worst_batch = 0.0;
    for (Index i = 0; i < ds.size(); ++i) {
        GraphBatch one = to_batch(std::span<const Graph>(&ds.graphs[i], 1), mc.num_features);
        Tape ti;
        auto vi = make_taped_params(ti, params, false);
        Tensor zi = ti.value(encode(ti, one, mc, vi).z);
        worst_batch =
            std::max(worst_batch, (z_batched.mat().row(i) - zi.mat().row(0)).cwiseAbs().maxCoeff());
    }

    // ratio-0 augmentations are identities (subgraph at ratio 1)
    bool identity_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        Graph g = make_random_graph(2, 12, 0.3, mc.num_features, 2, rng);
        Rng r2(trial);
        auto eq = [&](const Graph& a, const Graph& b) {
            return a.num_nodes == b.num_nodes && a.edges == b.edges && a.node_labels == b.node_labels;
        };
        identity_ok = identity_ok && eq(node_drop(g, 0.0, r2), g);
        identity_ok = identity_ok && eq(edge_perturb(g, 0.0, r2), g);
        GraphView mv = attribute_mask(g, 0.0, r2);
        identity_ok = identity_ok && eq(mv.graph, g) && mv.masked.empty();
        identity_ok = identity_ok && eq(subgraph_sample(g, 1.0, r2), g);
    }

    const bool pass = worst_perm < 1e-9 && worst_batch < 1e-9 && identity_ok;
    CHECK(worst_perm < 1e-9);
    CHECK(worst_batch < 1e-9);
    CHECK(identity_ok);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "perm_err=%.3g batch_err=%.3g (tol 1e-9) ratio0_identity=%d", worst_perm,
                  worst_batch, identity_ok ? 1 : 0);
    report(4, pass, detail);
}

TEST_CASE("criterion 5: MUTAG desk-scale benchmark") {
    Timer timer;
    const GraphDataset& ds = mutag();
    TrainConfig cfg = default_config();
    std::vector<double> folds;
    const double mean = mean_accuracy_over_seeds(cfg, ds, 1, 5, &folds);
    const double secs = timer.seconds();
    const bool pass = mean >= 0.85 && secs <= 1800.0 && folds.size() == 50;
    CHECK(mean >= 0.85);
    CHECK(secs <= 1800.0);
    CHECK(folds.size() == 50);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "mean_accuracy=%.4f (need >= 0.85) over %zu folds, runtime=%.0fs (limit 1800s)",
                  mean, folds.size(), secs);
    report(5, pass, detail);
}

TEST_CASE("criterion 6: ablation ordering on MUTAG") {
    const GraphDataset& ds = mutag();
    TrainConfig full_cfg = default_config();
    TrainConfig wo_inter = full_cfg;
    wo_inter.recon_mode = ReconMode::IntraOnly;  // inter-view reconstruction dropped
    TrainConfig wo_adv = full_cfg;
    wo_adv.lambda_a = 0.0;

    const double acc_full = mean_accuracy_over_seeds(full_cfg, ds, 1, 5);
    const double acc_wo_inter = mean_accuracy_over_seeds(wo_inter, ds, 1, 5);
    const double acc_wo_adv = mean_accuracy_over_seeds(wo_adv, ds, 1, 5);

    const double noise = 0.005;  // ties allowed within 0.5 accuracy points
    const bool pass = acc_full >= acc_wo_inter - noise && acc_wo_adv >= acc_wo_inter - noise;
    CHECK(acc_full >= acc_wo_inter - noise);
    CHECK(acc_wo_adv >= acc_wo_inter - noise);
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "full=%.4f wo_adv=%.4f wo_inter=%.4f (need full >= wo_inter-%.3f and wo_adv >= "
                  "wo_inter-%.3f)",
                  acc_full, acc_wo_adv, acc_wo_inter, noise, noise);
    report(6, pass, detail);
}

TEST_CASE("criterion 7: robustness to augmentation strength on MUTAG") {
    const GraphDataset& ds = mutag();
    const std::vector<double> ratios{0.1, 0.2, 0.3, 0.4};
    const int seeds = 3;

    auto accuracy_at = [&](bool full_model, double ratio) {
        TrainConfig cfg = default_config();
        if (!full_model) {
            cfg.lambda_r = 0.0;
            cfg.lambda_a = 0.0;
        }
        // sweep the whole operator family at the given strength
        cfg.augmentations = {{AugmentKind::NodeDrop, ratio},
                             {AugmentKind::EdgePerturb, ratio},
                             {AugmentKind::AttributeMask, ratio},
                             {AugmentKind::Subgraph, 1.0 - ratio}};
        return mean_accuracy_over_seeds(cfg, ds, 1, seeds);
    };

    std::vector<double> acc_full, acc_base;
    for (double r : ratios) {
        acc_full.push_back(accuracy_at(true, r));
        acc_base.push_back(accuracy_at(false, r));
    }
    const double deg_full = acc_full.front() - acc_full.back();
    const double deg_base = acc_base.front() - acc_base.back();
    const bool pass = deg_full <= deg_base + 1e-9;
    CHECK(deg_full <= deg_base + 1e-9);
    char detail[240];
    std::snprintf(detail, sizeof(detail),
                  "full: %.4f->%.4f (deg %.4f), baseline: %.4f->%.4f (deg %.4f); need deg_full <= "
                  "deg_base",
                  acc_full.front(), acc_full.back(), deg_full, acc_base.front(), acc_base.back(),
                  deg_base);
    report(7, pass, detail);
}

TEST_CASE("criterion 8: byte-identical metrics and checkpoint") {
    const char* bin = std::getenv("ACDGCL_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "ACDGCL_BIN must point at the CLI binary");
    fs::path root = fs::temp_directory_path() / "acdgcl_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);
    fs::path config = root / "config.json";
    {
        TrainConfig cfg = default_config();
        cfg.epochs = 3;
        std::ofstream(config) << train_config_to_json(cfg).dump(2);
    }
    auto run_once = [&](const fs::path& out) {
        std::string cmd = std::string(bin) + " train --data " + mutag_dir().string() +
                          " --config " + config.string() + " --out " + out.string() +
                          " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    REQUIRE(run_once(root / "a") == 0);
    REQUIRE(run_once(root / "b") == 0);
    const bool metrics_same = slurp(root / "a" / "metrics.csv") == slurp(root / "b" / "metrics.csv");
    const bool ckpt_same =
        slurp(root / "a" / "checkpoint.json") == slurp(root / "b" / "checkpoint.json");
    const bool pass = metrics_same && ckpt_same;
    CHECK(metrics_same);
    CHECK(ckpt_same);
    char detail[120];
    std::snprintf(detail, sizeof(detail), "metrics_identical=%d checkpoint_identical=%d",
                  metrics_same ? 1 : 0, ckpt_same ? 1 : 0);
    report(8, pass, detail);
}
