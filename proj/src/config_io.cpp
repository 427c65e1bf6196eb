#include "acdgcl/config_io.hpp"

#include <fstream>
#include <set>

namespace acdgcl {

namespace {

std::string recon_mode_name(ReconMode m) {
    switch (m) {
        case ReconMode::Both: return "both";
        case ReconMode::IntraOnly: return "intra_only";
        case ReconMode::CrossOnly: return "cross_only";
    }
    throw std::logic_error("unknown recon mode");
}

ReconMode recon_mode_from_string(const std::string& s) {
    if (s == "both") return ReconMode::Both;
    if (s == "intra_only") return ReconMode::IntraOnly;
    if (s == "cross_only") return ReconMode::CrossOnly;
    throw std::invalid_argument("unknown recon_mode: " + s);
}

std::string pgd_init_name(PgdInit i) {
    return i == PgdInit::Zero ? "zero" : "uniform";
}

PgdInit pgd_init_from_string(const std::string& s) {
    if (s == "zero") return PgdInit::Zero;
    if (s == "uniform") return PgdInit::Uniform;
    throw std::invalid_argument("unknown pgd init: " + s + " (expected zero or uniform)");
}

void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key))
            throw std::invalid_argument("unknown config key '" + key + "' in " + where);
}

}  // namespace

nlohmann::json train_config_to_json(const TrainConfig& c) {
    nlohmann::json doc;
    doc["epochs"] = c.epochs;
    doc["batch_size"] = c.batch_size;
    doc["learning_rate"] = c.learning_rate;
    doc["temperature"] = c.temperature;
    doc["lambda_r"] = c.lambda_r;
    doc["lambda_a"] = c.lambda_a;
    doc["pgd"] = {{"epsilon", c.pgd.epsilon},
                  {"steps", c.pgd.steps},
                  {"step_size", c.pgd.step_size},
                  {"init", pgd_init_name(c.pgd.init)}};
    nlohmann::json augs = nlohmann::json::array();
    for (const auto& spec : c.augmentation_family())
        augs.push_back({{"kind", to_string(spec.kind)}, {"ratio", spec.ratio}});
    doc["augmentations"] = std::move(augs);
    doc["model"] = {{"num_layers", c.model.num_layers},
                    {"hidden_dim", c.model.hidden_dim},
                    {"embed_dim", c.model.embed_dim}};
    doc["recon_mode"] = recon_mode_name(c.recon_mode);
    doc["seed"] = c.seed;
    doc["record_timing"] = c.record_timing;
    return doc;
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    reject_unknown_keys(doc,
                        {"epochs", "batch_size", "learning_rate", "temperature", "lambda_r",
                         "lambda_a", "pgd", "augmentations", "model", "recon_mode", "seed",
                         "record_timing"},
                        "config");
    TrainConfig c;
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.temperature = doc.value("temperature", c.temperature);
    c.lambda_r = doc.value("lambda_r", c.lambda_r);
    c.lambda_a = doc.value("lambda_a", c.lambda_a);
    if (doc.contains("pgd")) {
        const auto& p = doc.at("pgd");
        reject_unknown_keys(p, {"epsilon", "steps", "step_size", "init"}, "pgd");
        c.pgd.epsilon = p.value("epsilon", c.pgd.epsilon);
        c.pgd.steps = p.value("steps", c.pgd.steps);
        c.pgd.step_size = p.value("step_size", c.pgd.step_size);
        if (p.contains("init")) c.pgd.init = pgd_init_from_string(p.at("init").get<std::string>());
    }
    if (doc.contains("augmentations")) {
        c.augmentations.clear();
        for (const auto& entry : doc.at("augmentations")) {
            reject_unknown_keys(entry, {"kind", "ratio"}, "augmentations");
            AugmentationSpec spec;
            spec.kind = augment_kind_from_string(entry.at("kind").get<std::string>());
            spec.ratio = entry.at("ratio").get<double>();
            c.augmentations.push_back(spec);
        }
    }
    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        reject_unknown_keys(m, {"num_layers", "hidden_dim", "embed_dim"}, "model");
        c.model.num_layers = m.value("num_layers", c.model.num_layers);
        c.model.hidden_dim = m.value("hidden_dim", c.model.hidden_dim);
        c.model.embed_dim = m.value("embed_dim", c.model.embed_dim);
    }
    if (doc.contains("recon_mode"))
        c.recon_mode = recon_mode_from_string(doc.at("recon_mode").get<std::string>());
    c.seed = doc.value("seed", c.seed);
    c.record_timing = doc.value("record_timing", c.record_timing);
    c.validate();
    return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    return train_config_from_json(nlohmann::json::parse(in));
}

}  // namespace acdgcl
