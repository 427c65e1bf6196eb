#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "acdgcl/advtrain.hpp"
#include "acdgcl/selfcheck.hpp"

using namespace acdgcl;

namespace {

struct Fixture {
    ModelConfig config;
    ModelParams params;
    GraphBatch original;
    Tensor z1_inv, z2_inv;
};

Fixture make_fixture(uint64_t seed = 50) {
    Fixture f;
    f.config.num_layers = 2;
    f.config.hidden_dim = 5;
    f.config.embed_dim = 4;
    f.config.num_features = 3;
    f.params = init_params(f.config, seed);
    GraphDataset ds = make_random_dataset(4, f.config.num_features, 2, seed + 1);
    f.original = to_batch(std::span<const Graph>(ds.graphs), f.config.num_features);

    Tape tape;
    auto vars = make_taped_params(tape, f.params, false);
    EncoderOutput enc = encode(tape, f.original, f.config, vars);
    DisentangledPair pair = extract(tape, enc.z, f.config, vars);
    // stand-in view representations: perturbed copies of the clean ones
    f.z1_inv = tape.value(pair.z_inv);
    f.z2_inv = f.z1_inv;
    Rng rng(seed + 2);
    std::uniform_real_distribution<double> d(-0.1, 0.1);
    for (Index i = 0; i < f.z2_inv.size(); ++i) f.z2_inv[i] += d(rng);
    return f;
}

TrainConfig small_train_config() {
    TrainConfig c;
    c.epochs = 3;
    c.batch_size = 8;
    c.learning_rate = 1e-2;
    c.temperature = 0.2;
    c.lambda_r = 1.0;
    c.lambda_a = 0.5;
    c.pgd.epsilon = 0.01;
    c.pgd.steps = 2;
    c.model.num_layers = 2;
    c.model.hidden_dim = 6;
    c.model.embed_dim = 5;
    c.seed = 4;
    return c;
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
    if (a.tensors.size() != b.tensors.size()) return false;
    for (const auto& [name, t] : a.tensors) {
        auto it = b.tensors.find(name);
        if (it == b.tensors.end() || !t.same_shape(it->second)) return false;
        for (Index i = 0; i < t.size(); ++i)
            if (t[i] != it->second[i]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("pgd_ascent on a linear surrogate saturates the ball in one step") {
    // f(d) = c . d  ->  grad = c (constant)
    Tensor c = Tensor::vector({2.0, -1.0, 0.0});
    auto grad_fn = [&](const Tensor& d) {
        return std::make_pair((c.array() * d.array()).sum(), c);
    };
    PgdResult r = pgd_ascent(Tensor::zeros({3}), 0.05, 1, 0.1, grad_fn);
    CHECK(r.delta[0] == 0.05);   // eps * sign(2)
    CHECK(r.delta[1] == -0.05);  // eps * sign(-1)
    CHECK(r.delta[2] == 0.0);    // sign(0) = 0
    CHECK(r.loss_init == 0.0);
}

TEST_CASE("pgd_ascent keeps every iterate inside the ball") {
    Rng rng(60);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Tensor g0 = Tensor::zeros({10});
    auto grad_fn = [&](const Tensor& delta) {
        Tensor g = Tensor::zeros({10});
        for (Index i = 0; i < 10; ++i) g[i] = d(rng);
        return std::make_pair(delta.array().sum(), g);
    };
    Index iterations = 0;
    pgd_ascent(Tensor::full({10}, 5.0), 0.02, 7, 0.013, grad_fn, [&](const Tensor& delta) {
        ++iterations;
        CHECK(delta.array().abs().maxCoeff() <= 0.02);
    });
    CHECK(iterations == 7);
}

TEST_CASE("pgd_maximize degenerate cases") {
    Fixture f = make_fixture();
    SUBCASE("epsilon 0 gives exactly zero delta") {
        PgdConfig cfg;
        cfg.epsilon = 0.0;
        cfg.steps = 3;
        cfg.step_size = 0.1;
        Rng rng(1);
        PgdResult r = pgd_maximize(f.original, f.params, f.z1_inv, f.z2_inv, 0.2, cfg, rng);
        CHECK(r.delta.array().abs().maxCoeff() == 0.0);
    }
    SUBCASE("zero steps with zero init gives zero delta") {
        PgdConfig cfg;
        cfg.epsilon = 0.05;
        cfg.steps = 0;
        Rng rng(1);
        PgdResult r = pgd_maximize(f.original, f.params, f.z1_inv, f.z2_inv, 0.2, cfg, rng);
        CHECK(r.delta.array().abs().maxCoeff() == 0.0);
    }
    SUBCASE("uniform init stays in the ball") {
        PgdConfig cfg;
        cfg.epsilon = 0.03;
        cfg.steps = 0;
        cfg.init = PgdInit::Uniform;
        Rng rng(2);
        PgdResult r = pgd_maximize(f.original, f.params, f.z1_inv, f.z2_inv, 0.2, cfg, rng);
        CHECK(r.delta.array().abs().maxCoeff() <= 0.03);
        CHECK(r.delta.array().abs().maxCoeff() > 0.0);
    }
}

TEST_CASE("pgd_maximize ascends and leaves parameters untouched") {
    Fixture f = make_fixture(51);
    ModelParams before = f.params;
    PgdConfig cfg;
    cfg.epsilon = 0.05;
    cfg.steps = 5;
    Rng rng(3);
    PgdResult r = pgd_maximize(f.original, f.params, f.z1_inv, f.z2_inv, 0.2, cfg, rng,
                               [&](const Tensor& delta) {
                                   CHECK(delta.array().abs().maxCoeff() <= 0.05);
                               });
    CHECK(params_equal(before, f.params));
    const double final_loss =
        adversarial_loss_value(f.original, f.params, f.z1_inv, f.z2_inv, 0.2, r.delta);
    CHECK(final_loss >= r.loss_init - 1e-12);
}

TEST_CASE("adam_step") {
    SUBCASE("zero gradients leave parameters unchanged") {
        ModelConfig c;
        c.num_layers = 1;
        c.hidden_dim = 3;
        c.embed_dim = 2;
        c.num_features = 2;
        ModelParams p = init_params(c, 1);
        ModelParams before = p;
        GradientMap zero;
        for (const auto& [name, t] : p.tensors) zero.emplace(name, Tensor::zeros(t.shape()));
        AdamState state;
        adam_step(p, zero, state, 0.1);
        CHECK(params_equal(p, before));
        CHECK(state.timestep == 1);
    }
    SUBCASE("first step matches the bias-corrected closed form") {
        ModelParams p;
        p.config = ModelConfig{};
        p.tensors.emplace("w", Tensor::vector({1.0, -2.0, 0.5}));
        GradientMap g;
        g.emplace("w", Tensor::vector({0.3, -0.7, 0.0}));
        AdamState state;
        const double lr = 0.05, eps = 1e-8;
        adam_step(p, g, state, lr, 0.9, 0.999, eps);
        // at t=1 bias corrections cancel: update = lr * g / (|g| + eps)
        CHECK(p.tensors.at("w")[0] ==
              doctest::Approx(1.0 - lr * 0.3 / (0.3 + eps)).epsilon(1e-14));
        CHECK(p.tensors.at("w")[1] ==
              doctest::Approx(-2.0 + lr * 0.7 / (0.7 + eps)).epsilon(1e-14));
        CHECK(p.tensors.at("w")[2] == 0.5);
    }
    SUBCASE("shape mismatch and missing gradient are errors") {
        ModelParams p;
        p.config = ModelConfig{};
        p.tensors.emplace("w", Tensor::vector({1.0, 2.0}));
        AdamState state;
        GradientMap bad;
        bad.emplace("w", Tensor::vector({1.0, 2.0, 3.0}));
        CHECK_THROWS_WITH_AS(adam_step(p, bad, state, 0.1), doctest::Contains("shape"),
                             std::invalid_argument);
        GradientMap missing;
        AdamState s2;
        CHECK_THROWS_WITH_AS(adam_step(p, missing, s2, 0.1), doctest::Contains("missing gradient"),
                             std::invalid_argument);
    }
}

TEST_CASE("train_epoch") {
    GraphDataset ds = make_random_dataset(20, 3, 2, 70);
    SUBCASE("plain two-view contrastive training decreases the loss") {
        TrainConfig cfg = small_train_config();
        cfg.lambda_r = 0.0;
        cfg.lambda_a = 0.0;
        cfg.model.num_features = 3;
        ModelParams params = init_params(cfg.model, cfg.seed);
        AdamState state;
        Rng rng(cfg.seed);
        double first = 0.0, last = 0.0;
        for (int e = 0; e < 10; ++e) {
            EpochStats s = train_epoch(ds, params, state, cfg, rng);
            CHECK(s.pgd_calls == 0);  // lambda_a = 0 never invokes the attack
            CHECK(s.l_recon >= 0.0);
            if (e == 0) first = s.total;
            last = s.total;
        }
        CHECK(last < first);
    }
    SUBCASE("short tail batches are dropped") {
        TrainConfig cfg = small_train_config();
        cfg.lambda_a = 0.0;
        cfg.batch_size = 7;  // 20 = 7 + 7 + 6 -> 3 batches
        cfg.model.num_features = 3;
        ModelParams params = init_params(cfg.model, cfg.seed);
        AdamState state;
        Rng rng(1);
        CHECK(train_epoch(ds, params, state, cfg, rng).batches == 3);

        GraphDataset five = make_random_dataset(5, 3, 2, 71);
        cfg.batch_size = 4;  // 5 = 4 + 1 -> tail of one dropped
        ModelParams p2 = init_params(cfg.model, cfg.seed);
        AdamState s2;
        Rng rng2(1);
        CHECK(train_epoch(five, p2, s2, cfg, rng2).batches == 1);
    }
    SUBCASE("batch_size below 2 is rejected") {
        TrainConfig cfg = small_train_config();
        cfg.batch_size = 1;
        ModelParams params = init_params(cfg.model, 1);
        AdamState state;
        Rng rng(1);
        CHECK_THROWS_AS((void)train_epoch(ds, params, state, cfg, rng), std::invalid_argument);
    }
}

TEST_CASE("train") {
    GraphDataset ds = make_random_dataset(12, 3, 2, 80);
    SUBCASE("zero epochs returns the initialization") {
        TrainConfig cfg = small_train_config();
        cfg.epochs = 0;
        TrainResult r = train(cfg, ds);
        ModelConfig mc = cfg.model;
        mc.num_features = 3;
        CHECK(params_equal(r.params, init_params(mc, cfg.seed)));
        CHECK(r.epochs.empty());
    }
    SUBCASE("identical config and seed give identical trajectories") {
        TrainConfig cfg = small_train_config();
        TrainResult a = train(cfg, ds);
        TrainResult b = train(cfg, ds);
        CHECK(params_equal(a.params, b.params));
        REQUIRE(a.epochs.size() == b.epochs.size());
        for (size_t i = 0; i < a.epochs.size(); ++i) {
            CHECK(a.epochs[i].total == b.epochs[i].total);
            CHECK(a.epochs[i].l_inv == b.epochs[i].l_inv);
            CHECK(a.epochs[i].l_recon == b.epochs[i].l_recon);
            CHECK(a.epochs[i].l_adv == b.epochs[i].l_adv);
        }
        CHECK(a.epochs.back().pgd_calls > 0);
    }
    SUBCASE("loss decreases over a short run with the adversarial term active") {
        TrainConfig cfg = small_train_config();
        cfg.epochs = 10;
        TrainResult r = train(cfg, ds);
        CHECK(r.epochs.back().total < r.epochs.front().total);
    }
}

TEST_CASE("metrics csv format") {
    std::vector<EpochStats> stats(2);
    stats[0].epoch = 1;
    stats[0].l_inv = 1.5;
    stats[1].epoch = 2;
    stats[1].total = 0.25;
    auto path = std::filesystem::temp_directory_path() / "acdgcl_metrics_test.csv";
    write_metrics_csv(path, stats);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "epoch,l_inv,l_recon,l_adv,total,seconds");
    std::string row1, row2;
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(row1.substr(0, 6) == "1,1.5,");
    CHECK(row2.substr(0, 2) == "2,");
}
