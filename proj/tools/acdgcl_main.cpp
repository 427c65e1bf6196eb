#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "acdgcl/config_io.hpp"
#include "acdgcl/eval.hpp"
#include "acdgcl/selfcheck.hpp"
#include "acdgcl/tu_io.hpp"

namespace {

using namespace acdgcl;

std::string default_data_dir() {
    const char* env = std::getenv("ACDGCL_DATA_DIR");
    return env ? env : "";
}

GraphDataset load_dataset(const std::string& data_dir) {
    if (data_dir.empty())
        throw std::runtime_error("no dataset directory (use --data or set ACDGCL_DATA_DIR)");
    return parse_tu_dataset(data_dir);
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_dir, int64_t seed_override) {
    TrainConfig config = load_train_config(config_path);
    if (seed_override >= 0) config.seed = static_cast<uint64_t>(seed_override);
    GraphDataset dataset = load_dataset(data_dir);
    std::cout << "training on " << dataset.name << " (" << dataset.size() << " graphs), seed "
              << config.seed << "\n";

    TrainResult result = train(config, dataset);
    std::filesystem::create_directories(out_dir);
    write_metrics_csv(std::filesystem::path(out_dir) / "metrics.csv", result.epochs);
    nlohmann::json echo = train_config_to_json(config);
    echo["dataset"] = dataset.name;
    save_checkpoint(std::filesystem::path(out_dir) / "checkpoint.json", result.params, echo);
    if (!result.epochs.empty())
        std::cout << "final epoch total loss: " << result.epochs.back().total << "\n";
    std::cout << "wrote " << out_dir << "/metrics.csv and " << out_dir << "/checkpoint.json\n";
    return 0;
}

int cmd_eval(const std::string& data_dir, const std::string& checkpoint_path, Index folds,
             Index seeds, const std::string& out_csv, double l2, Index probe_epochs) {
    GraphDataset dataset = load_dataset(data_dir);
    Checkpoint ck = load_checkpoint(checkpoint_path);
    EmbeddingTable table = embed_dataset(ck.params, dataset);
    std::vector<uint64_t> fold_seeds;
    for (Index s = 1; s <= seeds; ++s) fold_seeds.push_back(static_cast<uint64_t>(s));
    EvalReport report = evaluate_embeddings(table, folds, fold_seeds, l2, probe_epochs);
    report.config_echo = ck.config_echo;
    write_eval_csv(out_csv, report, folds);
    std::cout << "accuracy " << report.mean << " +/- " << report.std_dev << " over "
              << report.fold_accuracies.size() << " folds (" << seeds << " seeds x " << folds
              << " folds)\n";
    std::cout << "wrote " << out_csv << "\n";
    return 0;
}

int cmd_ablate(const std::string& data_dir, const std::string& config_path,
               const std::string& out_dir, Index train_seeds, Index folds) {
    TrainConfig config = load_train_config(config_path);
    GraphDataset dataset = load_dataset(data_dir);
    ProbeOptions probe;
    probe.folds = folds;
    std::vector<AblationRow> rows = run_ablation(config, dataset, train_seeds, probe);
    std::filesystem::create_directories(out_dir);
    write_ablation_csv(std::filesystem::path(out_dir) / "ablation.csv", rows);
    for (const AblationRow& row : rows) {
        for (size_t s = 0; s < row.histories.size(); ++s)
            write_metrics_csv(std::filesystem::path(out_dir) /
                                  (row.variant + "_seed" + std::to_string(s) + "_metrics.csv"),
                              row.histories[s]);
        std::cout << row.variant << ": " << row.report.mean << " +/- " << row.report.std_dev << "\n";
    }
    std::cout << "wrote " << out_dir << "/ablation.csv\n";
    return 0;
}

int cmd_sweep(const std::string& data_dir, const std::string& config_path, const std::string& axis,
              const std::vector<double>& values, const std::string& out_csv, Index train_seeds,
              bool retrain) {
    TrainConfig config = load_train_config(config_path);
    GraphDataset dataset = load_dataset(data_dir);
    SweepAxis ax = sweep_axis_from_string(axis);
    ProbeOptions probe;
    std::vector<SweepRow> rows =
        run_robustness_sweep(config, dataset, ax, values, train_seeds, probe, retrain);
    write_sweep_csv(out_csv, ax, rows);
    for (const SweepRow& r : rows)
        std::cout << axis << "=" << r.value << ": " << r.mean << " +/- " << r.std_dev << "\n";
    std::cout << "wrote " << out_csv << "\n";
    return 0;
}

int cmd_gradcheck(double tol, long samples) {
    std::vector<LossCheck> checks = loss_gradcheck_suite(tol, samples);
    bool all_pass = true;
    for (const LossCheck& c : checks) {
        std::cout << c.name << ": max_rel_err=" << c.report.max_rel_err << " over "
                  << c.report.coords_checked << " coords -> " << (c.report.pass ? "PASS" : "FAIL")
                  << "\n";
        all_pass = all_pass && c.report.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ACDGCL: adversarial cross-view disentangled graph contrastive learning"};
    app.require_subcommand(1);

    std::string data_dir = default_data_dir();
    std::string config_path, out_path, checkpoint_path, axis;
    std::vector<double> values;
    int64_t seed_override = -1;
    Index folds = 10, seeds = 5, probe_epochs = 1000, train_seeds = 5;
    double l2 = 1e-3, tol = 1e-5;
    long samples = 100;
    bool no_retrain = false;

    CLI::App* train_cmd = app.add_subcommand("train", "train a model");
    train_cmd->add_option("--data", data_dir, "TU dataset directory");
    train_cmd->add_option("--config", config_path, "config JSON file")->required();
    train_cmd->add_option("--out", out_path, "output directory")->required();
    train_cmd->add_option("--seed", seed_override, "seed override");

    CLI::App* eval_cmd = app.add_subcommand("eval", "linear-probe a checkpoint");
    eval_cmd->add_option("--data", data_dir, "TU dataset directory");
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
    eval_cmd->add_option("--folds", folds, "cross-validation folds");
    eval_cmd->add_option("--seeds", seeds, "fold-split seeds");
    eval_cmd->add_option("--out", out_path, "output CSV")->required();
    eval_cmd->add_option("--l2", l2, "probe L2 regularization");
    eval_cmd->add_option("--probe-epochs", probe_epochs, "probe training epochs");

    CLI::App* ablate_cmd = app.add_subcommand("ablate", "run the ablation variants");
    ablate_cmd->add_option("--data", data_dir, "TU dataset directory");
    ablate_cmd->add_option("--config", config_path, "config JSON file")->required();
    ablate_cmd->add_option("--out", out_path, "output directory")->required();
    ablate_cmd->add_option("--train-seeds", train_seeds, "training seeds per variant");
    ablate_cmd->add_option("--folds", folds, "cross-validation folds");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "robustness sweep over one axis");
    sweep_cmd->add_option("--axis", axis, "aug_ratio|epsilon|attack_steps")->required();
    sweep_cmd->add_option("--values", values, "sweep values")->required()->delimiter(',');
    sweep_cmd->add_option("--config", config_path, "config JSON file")->required();
    sweep_cmd->add_option("--out", out_path, "output CSV")->required();
    sweep_cmd->add_option("--data", data_dir, "TU dataset directory");
    sweep_cmd->add_option("--train-seeds", train_seeds, "training seeds per value");
    sweep_cmd->add_flag("--no-retrain", no_retrain, "probe the base model at every value");

    CLI::App* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference check of all losses");
    gradcheck_cmd->add_option("--tol", tol, "max relative error");
    gradcheck_cmd->add_option("--samples", samples, "sampled coordinates per loss");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(data_dir, config_path, out_path, seed_override);
        if (eval_cmd->parsed())
            return cmd_eval(data_dir, checkpoint_path, folds, seeds, out_path, l2, probe_epochs);
        if (ablate_cmd->parsed())
            return cmd_ablate(data_dir, config_path, out_path, train_seeds, folds);
        if (sweep_cmd->parsed())
            return cmd_sweep(data_dir, config_path, axis, values, out_path, train_seeds, !no_retrain);
        if (gradcheck_cmd->parsed()) return cmd_gradcheck(tol, samples);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
