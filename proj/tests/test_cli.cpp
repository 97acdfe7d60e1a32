#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "metaenc/dataset.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = METAENC_CLI_PATH;

int run(const std::string& args) {
    int status = std::system((kCli + " " + args + " >/dev/null 2>/tmp/metaenc_cli_err.txt").c_str());
    return WEXITSTATUS(status);
}

std::string last_stderr() {
    std::ifstream in("/tmp/metaenc_cli_err.txt");
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

fs::path work_dir() {
    fs::path p = fs::temp_directory_path() / "metaenc_cli_test";
    fs::create_directories(p);
    return p;
}

std::string write_config(const fs::path& dir) {
    fs::path p = dir / "config.json";
    std::ofstream out(p);
    out << R"({
      "mode": "canonical",
      "data": {"kind": "synthetic", "manifold": "tanh_image", "n": 16, "r_true": 2,
               "count": 120, "noise": 0.0, "seed": 3, "train_fraction": 0.8},
      "model": {"h": 8, "r": 2},
      "training": {"epochs": 8, "batch_size": 24, "learning_rate": 3e-3, "seed": 1}
    })";
    return p.string();
}

std::string write_images(const fs::path& dir) {
    using namespace metaenc;
    Dataset d = synthetic_manifold(ManifoldKind::tanh_image, 16, 2, 30, 0.0, 9);
    std::vector<std::uint8_t> pixels;
    for (double v : d.samples.data) {
        double c = std::min(1.0, std::max(0.0, v));
        pixels.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0)));
    }
    fs::path p = dir / "images.idx";
    write_idx_images(p.string(), pixels, 30, 4, 4);
    return p.string();
}

}  // namespace

TEST_CASE("same config and seed produce byte-identical checkpoints") {
    fs::path dir = work_dir();
    std::string cfg = write_config(dir);
    REQUIRE(run("train --config " + cfg + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run("train --config " + cfg + " --out " + (dir / "b").string()) == 0);
    CHECK(slurp((dir / "a/checkpoint.bin").string()) ==
          slurp((dir / "b/checkpoint.bin").string()));
    CHECK(fs::exists(dir / "a/report.json"));
    CHECK(fs::exists(dir / "a/history.csv"));
}

TEST_CASE("missing config path exits 2 and names the path") {
    CHECK(run("train --config /no/such/config.json --out /tmp/x") == 2);
    CHECK(last_stderr().find("/no/such/config.json") != std::string::npos);
}

TEST_CASE("eval writes the CSV schema with requested iterates") {
    fs::path dir = work_dir();
    std::string cfg = write_config(dir);
    REQUIRE(run("train --config " + cfg + " --out " + (dir / "e").string()) == 0);
    std::string images = write_images(dir);
    std::string report = (dir / "eval.csv").string();
    std::string grid = (dir / "grid.pgm").string();
    REQUIRE(run("eval --checkpoint " + (dir / "e/checkpoint.bin").string() + " --images " +
                images + " --k 1,100 --report " + report + " --grid " + grid) == 0);
    std::string csv = slurp(report);
    CHECK(csv.find("mode,mse,sr_mse,ri_residual,k1,k100") == 0);
    CHECK(csv.find("direct,") != std::string::npos);
    CHECK(slurp(grid).substr(0, 2) == "P5");
}

TEST_CASE("correct changes only the header and rejects non-direct input") {
    fs::path dir = work_dir();
    std::string cfg = write_config(dir);
    REQUIRE(run("train --config " + cfg + " --out " + (dir / "c").string()) == 0);
    std::string src = (dir / "c/checkpoint.bin").string();
    std::string dst = (dir / "c/corrected.bin").string();
    REQUIRE(run("correct --checkpoint " + src + " --iters 3 --gamma 1e-8 --out " + dst) == 0);

    // parameter payloads are byte-identical; only the header differs
    std::string a = slurp(src), b = slurp(dst);
    // decoder (2->8->16) has 168 params, encoder0 (16->8->2) has 154
    const std::size_t payload = 8 * ((8 * 2 + 8 + 16 * 8 + 16) + (8 * 16 + 8 + 2 * 8 + 2));
    CHECK(a.substr(a.size() - payload) == b.substr(b.size() - payload));

    CHECK(run("correct --checkpoint " + dst + " --iters 3 --gamma 1e-8 --out " + dst +
              ".again") == 2);
    CHECK(last_stderr().find("direct") != std::string::npos);
}

TEST_CASE("compare requires at least two runs and tabulates them") {
    fs::path dir = work_dir();
    fs::path cfg = dir / "compare.json";
    {
        std::ofstream out(cfg);
        out << R"({
          "data": {"kind": "synthetic", "manifold": "tanh_image", "n": 12, "r_true": 2,
                   "count": 100, "noise": 0.0, "seed": 5, "train_fraction": 0.8},
          "model": {"h": 6, "r": 2},
          "training": {"epochs": 5, "batch_size": 20, "learning_rate": 3e-3, "seed": 2},
          "gn": {"iterations": 2},
          "runs": [{"name": "canonical", "mode": "canonical"},
                   {"name": "meta", "mode": "meta"}]
        })";
    }
    std::string table = (dir / "table.csv").string();
    REQUIRE(run("compare --config " + cfg.string() + " --out " + table) == 0);
    std::string csv = slurp(table);
    CHECK(csv.find("model,train_mse,test_mse,train_sr_mse,test_sr_mse") == 0);
    CHECK(csv.find("canonical,") != std::string::npos);
    CHECK(csv.find("meta,") != std::string::npos);

    fs::path single = dir / "single.json";
    {
        std::ofstream out(single);
        out << R"({
          "data": {"kind": "synthetic", "manifold": "tanh_image", "n": 12, "r_true": 2,
                   "count": 100, "noise": 0.0, "seed": 5},
          "runs": [{"name": "only", "mode": "canonical"}]
        })";
    }
    CHECK(run("compare --config " + single.string() + " --out " + table) == 2);
}

TEST_CASE("environment seed override changes the trained model") {
    fs::path dir = work_dir();
    std::string cfg = write_config(dir);
    REQUIRE(std::system(("METAENC_SEED=77 " + kCli + " train --config " + cfg + " --out " +
                         (dir / "s77").string() + " >/dev/null 2>&1") .c_str()) == 0);
    REQUIRE(run("train --config " + cfg + " --out " + (dir / "s1").string()) == 0);
    CHECK(slurp((dir / "s77/checkpoint.bin").string()) !=
          slurp((dir / "s1/checkpoint.bin").string()));
}
