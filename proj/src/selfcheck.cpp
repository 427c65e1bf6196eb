#include "acdgcl/selfcheck.hpp"

#include <algorithm>
#include <numeric>

namespace acdgcl {

Graph make_random_graph(Index min_nodes, Index max_nodes, double edge_prob, Index num_node_classes,
                        Index num_graph_classes, Rng& rng) {
    std::uniform_int_distribution<Index> nd(min_nodes, max_nodes);
    std::uniform_int_distribution<Index> ld(0, num_node_classes - 1);
    std::uniform_int_distribution<Index> gd(0, num_graph_classes - 1);
    std::uniform_real_distribution<double> pd(0.0, 1.0);
    Graph g;
    g.num_nodes = nd(rng);
    g.label = gd(rng);
    for (Index v = 0; v < g.num_nodes; ++v) g.node_labels.push_back(ld(rng));
    for (Index u = 0; u < g.num_nodes; ++u)
        for (Index v = u + 1; v < g.num_nodes; ++v)
            if (pd(rng) < edge_prob) g.edges.emplace_back(u, v);
    return g;
}

GraphDataset make_random_dataset(Index num_graphs, Index num_node_classes, Index num_graph_classes,
                                 uint64_t seed, Index min_nodes, Index max_nodes, double edge_prob) {
    Rng rng(seed);
    GraphDataset ds;
    ds.name = "synthetic";
    ds.num_node_label_classes = num_node_classes;
    ds.num_graph_classes = num_graph_classes;
    for (Index i = 0; i < num_graphs; ++i)
        ds.graphs.push_back(make_random_graph(min_nodes, max_nodes, edge_prob, num_node_classes,
                                              num_graph_classes, rng));
    // make sure every class label occurs at least once
    for (Index c = 0; c < num_graph_classes && c < num_graphs; ++c) ds.graphs[c].label = c;
    ds.validate();
    return ds;
}

Graph permute_graph(const Graph& g, const std::vector<Index>& perm) {
    if (static_cast<Index>(perm.size()) != g.num_nodes)
        throw std::invalid_argument("permutation size mismatch");
    Graph out;
    out.num_nodes = g.num_nodes;
    out.label = g.label;
    out.node_labels.resize(g.num_nodes);
    for (Index v = 0; v < g.num_nodes; ++v) out.node_labels[perm[v]] = g.node_labels[v];
    for (auto [u, v] : g.edges) out.edges.emplace_back(perm[u], perm[v]);
    return out;
}

namespace {

/// Fixture shared by all loss checks: two augmented views and the original
/// batch with a fixed in-ball perturbation.
struct LossFixture {
    ModelConfig config;
    ModelParams params;
    GraphBatch view1, view2, original;
    Tensor delta;
    double temperature = 0.2;
    double lambda_r = 5.0;
    double lambda_a = 0.5;
};

LossFixture make_loss_fixture() {
    LossFixture f;
    f.config.num_layers = 2;
    f.config.hidden_dim = 6;
    f.config.embed_dim = 5;
    f.config.num_features = 3;

    GraphDataset ds = make_random_dataset(4, f.config.num_features, 2, 99, 4, 7, 0.5);
    f.params = init_params(f.config, 7);

    Rng rng(123);
    std::vector<AugmentationSpec> family = {{AugmentKind::NodeDrop, 0.2},
                                            {AugmentKind::AttributeMask, 0.3}};
    std::vector<GraphView> v1, v2;
    for (const Graph& g : ds.graphs) {
        ViewPair pair = sample_view_pair(g, family, rng);
        v1.push_back(std::move(pair.view1));
        v2.push_back(std::move(pair.view2));
    }
    f.view1 = to_batch(v1, f.config.num_features);
    f.view2 = to_batch(v2, f.config.num_features);
    f.original = to_batch(std::span<const Graph>(ds.graphs), f.config.num_features);

    // fixed perturbation inside the default ball
    Tape scratch;
    auto vars = make_taped_params(scratch, f.params, false);
    EncoderOutput enc = encode(scratch, f.original, f.config, vars);
    f.delta = Tensor::zeros(scratch.value(enc.hidden1).shape());
    std::uniform_real_distribution<double> dd(-0.01, 0.01);
    for (Index i = 0; i < f.delta.size(); ++i) f.delta[i] = dd(rng);
    return f;
}

struct TapedLosses {
    Var l_inv;
    Var l_recon;
    Var l_adv;
};

TapedLosses build_losses(Tape& tape, const std::map<std::string, Var>& vars, const LossFixture& f) {
    EncoderOutput enc1 = encode(tape, f.view1, f.config, vars);
    EncoderOutput enc2 = encode(tape, f.view2, f.config, vars);
    DisentangledPair p1 = extract(tape, enc1.z, f.config, vars);
    DisentangledPair p2 = extract(tape, enc2.z, f.config, vars);
    TapedLosses losses;
    losses.l_inv = invariance_loss(tape, p1.z_inv, p2.z_inv, f.temperature);
    ReconInputs recon{enc1.z, enc2.z, p1.z_aug, p1.z_inv, p2.z_aug, p2.z_inv};
    losses.l_recon = reconstruction_loss(tape, recon, f.config, vars);
    EncoderOutput enc_adv = encode(tape, f.original, f.config, vars, tape.constant(f.delta));
    DisentangledPair p_adv = extract(tape, enc_adv.z, f.config, vars);
    losses.l_adv = adversarial_loss(tape, p1.z_inv, p2.z_inv, p_adv.z_inv, f.temperature);
    return losses;
}

}  // namespace

std::vector<LossCheck> loss_gradcheck_suite(double tol, long max_coords) {
    auto fixture = std::make_shared<LossFixture>(make_loss_fixture());

    auto check = [&](const std::string& name, const TapeObjective<double>& obj) {
        FiniteDiffReport rep =
            finite_diff_check<double>(obj, fixture->params.tensors, 1e-6, tol, max_coords, 2024);
        return LossCheck{name, rep};
    };

    std::vector<LossCheck> checks;
    checks.push_back(check("l_inv", [fixture](Tape& t, const std::map<std::string, Var>& p) {
        return build_losses(t, p, *fixture).l_inv;
    }));
    checks.push_back(check("l_recon", [fixture](Tape& t, const std::map<std::string, Var>& p) {
        return build_losses(t, p, *fixture).l_recon;
    }));
    checks.push_back(check("l_adv", [fixture](Tape& t, const std::map<std::string, Var>& p) {
        return build_losses(t, p, *fixture).l_adv;
    }));
    checks.push_back(check("joint", [fixture](Tape& t, const std::map<std::string, Var>& p) {
        TapedLosses l = build_losses(t, p, *fixture);
        return joint_objective(t, l.l_inv, l.l_recon, l.l_adv, fixture->lambda_r, fixture->lambda_a,
                               fixture->temperature)
            .total_var;
    }));
    return checks;
}

}  // namespace acdgcl
