#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "acdgcl/selfcheck.hpp"
#include "acdgcl/tu_io.hpp"

using namespace acdgcl;
namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("ACDGCL_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliFixture {
    fs::path root;
    fs::path data;
    fs::path config;

    CliFixture() {
        root = fs::temp_directory_path() / "acdgcl_cli_test";
        fs::remove_all(root);
        fs::create_directories(root);
        data = root / "TINY";
        GraphDataset ds = make_random_dataset(14, 3, 2, 404, 4, 8, 0.4);
        write_tu_dataset(ds, data, "TINY");
        config = root / "config.json";
        std::ofstream(config) << R"({
            "epochs": 2, "batch_size": 7, "learning_rate": 0.005,
            "lambda_r": 1.0, "lambda_a": 0.5,
            "pgd": {"epsilon": 0.01, "steps": 1},
            "model": {"num_layers": 1, "hidden_dim": 4, "embed_dim": 3},
            "seed": 3
        })";
    }
};

}  // namespace

TEST_CASE("train subcommand writes metrics and checkpoint deterministically") {
    CliFixture fx;
    const fs::path out1 = fx.root / "run1";
    const fs::path out2 = fx.root / "run2";
    REQUIRE(run("train --data " + fx.data.string() + " --config " + fx.config.string() + " --out " +
                out1.string()) == 0);
    REQUIRE(run("train --data " + fx.data.string() + " --config " + fx.config.string() + " --out " +
                out2.string()) == 0);

    const std::string m1 = slurp(out1 / "metrics.csv");
    CHECK(m1.substr(0, 41) == "epoch,l_inv,l_recon,l_adv,total,seconds\n1");
    CHECK(m1 == slurp(out2 / "metrics.csv"));
    CHECK(slurp(out1 / "checkpoint.json") == slurp(out2 / "checkpoint.json"));

    SUBCASE("seed override changes the checkpoint") {
        const fs::path out3 = fx.root / "run3";
        REQUIRE(run("train --data " + fx.data.string() + " --config " + fx.config.string() +
                    " --out " + out3.string() + " --seed 9") == 0);
        CHECK(slurp(out3 / "checkpoint.json") != slurp(out1 / "checkpoint.json"));
    }

    SUBCASE("eval subcommand probes the checkpoint") {
        const fs::path csv = fx.root / "eval.csv";
        REQUIRE(run("eval --data " + fx.data.string() + " --checkpoint " +
                    (out1 / "checkpoint.json").string() + " --folds 3 --seeds 2 --out " +
                    csv.string() + " --probe-epochs 30") == 0);
        std::ifstream in(csv);
        std::string header;
        std::getline(in, header);
        CHECK(header == "seed,fold,accuracy");
        int rows = 0;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 6);  // 2 seeds x 3 folds
    }
}

TEST_CASE("unknown config keys are rejected") {
    CliFixture fx;
    std::ofstream(fx.config) << R"({"epochs": 1, "no_such_key": 5})";
    CHECK(run("train --data " + fx.data.string() + " --config " + fx.config.string() + " --out " +
              (fx.root / "bad").string()) != 0);
}

TEST_CASE("gradcheck subcommand passes at the default tolerance") {
    CHECK(run("gradcheck --samples 40") == 0);
}

TEST_CASE("sweep subcommand writes a sorted csv") {
    CliFixture fx;
    const fs::path csv = fx.root / "sweep.csv";
    REQUIRE(run("sweep --axis epsilon --values 0.02,0.01 --config " + fx.config.string() +
                " --data " + fx.data.string() + " --out " + csv.string() +
                " --train-seeds 1") == 0);
    std::ifstream in(csv);
    std::string header, r1, r2;
    std::getline(in, header);
    std::getline(in, r1);
    std::getline(in, r2);
    CHECK(header == "axis,value,mean_accuracy,std_accuracy");
    CHECK(r1.substr(0, 13) == "epsilon,0.01,");
    CHECK(r2.substr(0, 13) == "epsilon,0.02,");
}

TEST_CASE("missing data directory is a clean error") {
    CliFixture fx;
    CHECK(run("train --data /nonexistent_dir_42 --config " + fx.config.string() + " --out " +
              (fx.root / "x").string()) != 0);
}
