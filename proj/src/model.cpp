#include "acdgcl/model.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace acdgcl {

namespace {

Tensor glorot(Index fan_in, Index fan_out, Rng& rng) {
    const double s = std::sqrt(6.0 / double(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    Tensor w = Tensor::zeros({fan_in, fan_out});
    for (Index i = 0; i < w.size(); ++i) w[i] = dist(rng);
    return w;
}

void init_mlp(ParamMap& p, const std::string& prefix, Index in, Index hidden, Index out, Rng& rng) {
    p.emplace(prefix + ".w1", glorot(in, hidden, rng));
    p.emplace(prefix + ".b1", Tensor::zeros({1, hidden}));
    p.emplace(prefix + ".w2", glorot(hidden, out, rng));
    p.emplace(prefix + ".b2", Tensor::zeros({1, out}));
}

Var mlp2(Tape& t, Var x, const std::map<std::string, Var>& p, const std::string& prefix) {
    Var h = relu(t, add(t, matmul(t, x, p.at(prefix + ".w1")), p.at(prefix + ".b1")));
    return add(t, matmul(t, h, p.at(prefix + ".w2")), p.at(prefix + ".b2"));
}

Var gin_layer(Tape& t, Var h, Var adjacency, const std::map<std::string, Var>& p, Index layer) {
    const std::string prefix = "gin." + std::to_string(layer);
    Var one_plus_eps = add_const(t, p.at(prefix + ".eps"), 1.0);
    Var agg = add(t, matmul(t, adjacency, h), mul(t, one_plus_eps, h));
    return mlp2(t, agg, p, prefix);
}

}  // namespace

ModelParams init_params(const ModelConfig& config, uint64_t seed) {
    if (config.num_layers < 1 || config.hidden_dim < 1 || config.embed_dim < 1 ||
        config.num_features < 1)
        throw std::invalid_argument("model dimensions must be positive");
    Rng rng(seed);
    ModelParams params;
    params.config = config;
    for (Index l = 0; l < config.num_layers; ++l) {
        const Index in = l == 0 ? config.num_features : config.hidden_dim;
        init_mlp(params.tensors, "gin." + std::to_string(l), in, config.hidden_dim,
                 config.hidden_dim, rng);
        params.tensors.emplace("gin." + std::to_string(l) + ".eps", Tensor::scalar(0.0));
    }
    init_mlp(params.tensors, "aug", config.hidden_dim, config.hidden_dim, config.embed_dim, rng);
    init_mlp(params.tensors, "inv", config.hidden_dim, config.hidden_dim, config.embed_dim, rng);
    init_mlp(params.tensors, "rec", config.embed_dim, config.hidden_dim, config.hidden_dim, rng);
    return params;
}

std::map<std::string, Var> make_taped_params(Tape& tape, const ModelParams& params, bool trainable) {
    std::map<std::string, Var> vars;
    for (const auto& [name, value] : params.tensors)
        vars.emplace(name, trainable ? tape.param(name, value) : tape.constant(value));
    return vars;
}

Tensor batch_adjacency(const GraphBatch& batch) {
    const Index n = batch.total_nodes();
    Tensor a = Tensor::zeros({n, n});
    for (auto [u, v] : batch.edge_index) a(u, v) = 1.0;
    return a;
}

EncoderOutput encode(Tape& tape, const GraphBatch& batch, const ModelConfig& config,
                     const std::map<std::string, Var>& params, std::optional<Var> delta) {
    Var x = tape.constant(batch.node_features);
    Var a = tape.constant(batch_adjacency(batch));
    Var hidden1 = gin_layer(tape, x, a, params, 0);
    Var h = hidden1;
    if (delta) {
        const Tensor& dv = tape.value(*delta);
        const Tensor& hv = tape.value(hidden1);
        if (!dv.same_shape(hv))
            throw std::invalid_argument("delta shape " + shape_str(dv.shape()) +
                                        " does not match hidden1 " + shape_str(hv.shape()));
        h = add(tape, h, *delta);
    }
    for (Index l = 1; l < config.num_layers; ++l) h = gin_layer(tape, h, a, params, l);
    Var z = segment_sum(tape, h, batch.segment_ids, batch.num_graphs);
    return EncoderOutput{hidden1, z};
}

Var encode_tail(Tape& tape, const GraphBatch& batch, const ModelConfig& config,
                const std::map<std::string, Var>& params, Var hidden1) {
    Var a = tape.constant(batch_adjacency(batch));
    Var h = hidden1;
    for (Index l = 1; l < config.num_layers; ++l) h = gin_layer(tape, h, a, params, l);
    return segment_sum(tape, h, batch.segment_ids, batch.num_graphs);
}

DisentangledPair extract(Tape& tape, Var z, const ModelConfig& config,
                         const std::map<std::string, Var>& params) {
    if (tape.value(z).cols() != config.hidden_dim)
        throw std::invalid_argument("extract: embedding width " +
                                    std::to_string(tape.value(z).cols()) + " != hidden_dim " +
                                    std::to_string(config.hidden_dim));
    return DisentangledPair{mlp2(tape, z, params, "aug"), mlp2(tape, z, params, "inv")};
}

Var reconstruct(Tape& tape, Var z_aug, Var z_inv, const ModelConfig& /*config*/,
                const std::map<std::string, Var>& params) {
    const Tensor& a = tape.value(z_aug);
    const Tensor& b = tape.value(z_inv);
    if (!a.same_shape(b))
        throw std::invalid_argument("reconstruct: shape mismatch " + shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
    Var fusion = mul(tape, z_aug, z_inv);
    return mlp2(tape, fusion, params, "rec");
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const nlohmann::json& config_echo) {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["config"] = config_echo;
    doc["model"] = {{"num_layers", params.config.num_layers},
                    {"hidden_dim", params.config.hidden_dim},
                    {"embed_dim", params.config.embed_dim},
                    {"num_features", params.config.num_features}};
    nlohmann::json tensors = nlohmann::json::object();
    for (const auto& [name, value] : params.tensors) {
        nlohmann::json entry;
        entry["shape"] = value.shape();
        entry["values"] = std::vector<double>(value.data(), value.data() + value.size());
        tensors[name] = std::move(entry);
    }
    doc["params"] = std::move(tensors);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    nlohmann::json doc = nlohmann::json::parse(in);
    if (doc.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint format version");
    Checkpoint ck;
    ck.config_echo = doc.value("config", nlohmann::json::object());
    const auto& m = doc.at("model");
    ck.params.config.num_layers = m.at("num_layers").get<Index>();
    ck.params.config.hidden_dim = m.at("hidden_dim").get<Index>();
    ck.params.config.embed_dim = m.at("embed_dim").get<Index>();
    ck.params.config.num_features = m.at("num_features").get<Index>();
    for (const auto& [name, entry] : doc.at("params").items()) {
        Shape shape = entry.at("shape").get<Shape>();
        std::vector<double> values = entry.at("values").get<std::vector<double>>();
        Tensor t = Tensor::zeros(shape);
        if (static_cast<Index>(values.size()) != t.size())
            throw std::runtime_error("checkpoint tensor " + name + " has " +
                                     std::to_string(values.size()) + " values for shape " +
                                     shape_str(shape));
        std::copy(values.begin(), values.end(), t.data());
        ck.params.tensors.emplace(name, std::move(t));
    }
    return ck;
}

}  // namespace acdgcl
