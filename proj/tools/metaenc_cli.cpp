// Command-line front end: train, evaluate, correct, and compare autoencoder
// models. Configs are JSON; reports are CSV/JSON; image dumps are binary PGM.
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "metaenc/checkpoint.hpp"
#include "metaenc/dataset.hpp"
#include "metaenc/errors.hpp"
#include "metaenc/metrics.hpp"
#include "metaenc/pgm.hpp"
#include "metaenc/train.hpp"

using nlohmann::json;
using namespace metaenc;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
}

std::uint64_t effective_seed(std::uint64_t config_seed) {
    if (const char* env = std::getenv("METAENC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("METAENC_SEED is not an integer: ") + env);
        }
    }
    return config_seed;
}

struct DataPair {
    Dataset train;
    Dataset test;
};

/// data block: either {"kind":"idx","train_images":P,"test_images":P,
/// "train_count":N,"test_count":N} or {"kind":"synthetic","manifold":K,
/// "n":..,"r_true":..,"count":..,"noise":..,"seed":..,"train_fraction":..}.
DataPair load_data(const json& cfg) {
    if (!cfg.contains("data")) throw ConfigError("config missing \"data\" block");
    const json& d = cfg.at("data");
    const std::string kind = d.value("kind", "idx");
    if (kind == "idx") {
        const std::string train_path = d.value("train_images", "");
        const std::string test_path = d.value("test_images", "");
        if (train_path.empty()) throw ConfigError("data.train_images is required");
        if (test_path.empty()) throw ConfigError("data.test_images is required");
        DataPair out{load_idx_images(train_path), load_idx_images(test_path)};
        out.train.split = "train";
        out.test.split = "test";
        if (d.contains("train_count"))
            out.train = take(out.train, d.at("train_count").get<std::size_t>());
        if (d.contains("test_count"))
            out.test = take(out.test, d.at("test_count").get<std::size_t>());
        return out;
    }
    if (kind == "synthetic") {
        const std::string manifold = d.value("manifold", "tanh_image");
        ManifoldKind mk;
        if (manifold == "tanh_image")
            mk = ManifoldKind::tanh_image;
        else if (manifold == "linear_subspace")
            mk = ManifoldKind::linear_subspace;
        else
            throw ConfigError("unknown manifold kind: " + manifold);
        Dataset all = synthetic_manifold(mk, d.at("n").get<std::size_t>(),
                                         d.at("r_true").get<std::size_t>(),
                                         d.at("count").get<std::size_t>(),
                                         d.value("noise", 0.0),
                                         d.value("seed", std::uint64_t{0}));
        auto [train, test] = split(all, d.value("train_fraction", 0.8),
                                   d.value("seed", std::uint64_t{0}) + 1);
        return {std::move(train), std::move(test)};
    }
    throw ConfigError("unknown data kind: " + kind);
}

TrainConfig parse_train_config(const json& cfg) {
    TrainConfig tc;
    const json& t = cfg.value("training", json::object());
    tc.mode = objective_from_name(cfg.value("mode", "canonical"));
    tc.epochs = t.value("epochs", tc.epochs);
    tc.batch_size = t.value("batch_size", tc.batch_size);
    tc.learning_rate = t.value("learning_rate", tc.learning_rate);
    tc.lambda = t.value("lambda", tc.lambda);
    tc.seed = effective_seed(t.value("seed", std::uint64_t{0}));
    tc.parallel = t.value("parallel", true);
    const json& g = cfg.value("gn", json::object());
    tc.gn.iterations = g.value("iterations", tc.gn.iterations);
    tc.gn.damping = g.value("damping", tc.gn.damping);
    tc.gn.cg_tol = g.value("cg_tol", tc.gn.cg_tol);
    tc.validate();
    return tc;
}

std::string config_digest(const json& cfg) {
    // stable content hash of the canonical serialization (FNV-1a 64)
    const std::string s = cfg.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

json report_json(const EvalReport& r) {
    json j{{"dataset", r.dataset}, {"samples", r.samples},      {"mse", r.mse},
           {"sr_mse", r.sr_mse},   {"ri_residual", r.ri_residual}};
    for (const auto& [k, v] : r.kth_recon_mse) j["k" + std::to_string(k)] = v;
    return j;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
    json cfg = load_json(config_path);
    TrainConfig tc = parse_train_config(cfg);
    DataPair data = load_data(cfg);

    const json& m = cfg.value("model", json::object());
    const std::size_t n = data.train.dim();
    const std::size_t h = m.value("h", std::size_t{100});
    const std::size_t r = m.value("r", std::size_t{5});
    if (m.contains("n") && m.at("n").get<std::size_t>() != n)
        throw ConfigError("model.n does not match the data dimension " + std::to_string(n));

    const EncoderMode mode =
        tc.mode == Objective::meta ? EncoderMode::gauss_newton : EncoderMode::direct;
    AutoencoderModel model = make_model(n, h, r, mode, tc.seed, tc.gn);

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult res = train(std::move(model), data.train, tc);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::filesystem::create_directories(out_dir);
    Checkpoint ck;
    ck.model = res.model;
    ck.seed = tc.seed;
    ck.config_digest = config_digest(cfg);
    save_checkpoint(out_dir + "/checkpoint.bin", ck);

    Codec codec = make_codec(res.model);
    EvalReport train_rep = evaluate(codec, data.train.samples, "train", {}, tc.parallel);
    EvalReport test_rep = evaluate(codec, data.test.samples, "test", {}, tc.parallel);

    json report{{"config", cfg},
                {"config_digest", ck.config_digest},
                {"seed", tc.seed},
                {"mode", objective_name(tc.mode)},
                {"epoch_loss", res.epoch_loss},
                {"skipped_batches", res.skipped_batches},
                {"wall_clock_seconds", seconds},
                {"train", report_json(train_rep)},
                {"test", report_json(test_rep)}};
    std::ofstream rep(out_dir + "/report.json");
    rep << report.dump(2) << "\n";

    std::ofstream hist(out_dir + "/history.csv");
    hist << "epoch,loss\n";
    for (std::size_t i = 0; i < res.epoch_loss.size(); ++i)
        hist << (i + 1) << "," << std::setprecision(17) << res.epoch_loss[i] << "\n";

    std::cout << "trained " << objective_name(tc.mode) << " model: final loss "
              << res.epoch_loss.back() << ", test mse " << test_rep.mse << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& images_path,
             const std::string& k_csv, const std::string& report_path,
             const std::string& grid_path) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    Dataset data = load_idx_images(images_path);

    std::vector<int> k_list;
    std::stringstream ks(k_csv);
    for (std::string tok; std::getline(ks, tok, ',');) {
        try {
            k_list.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError("invalid k value: " + tok);
        }
    }

    Codec codec = make_codec(ck.model);
    EvalReport rep = evaluate(codec, data.samples, images_path, k_list, true);

    std::ofstream out(report_path);
    if (!out) throw IoError("cannot write report: " + report_path);
    out << "mode,mse,sr_mse,ri_residual";
    for (const auto& [k, v] : rep.kth_recon_mse) out << ",k" << k;
    out << "\n"
        << mode_name(ck.model.mode) << "," << std::setprecision(17) << rep.mse << ","
        << rep.sr_mse << "," << rep.ri_residual;
    for (const auto& [k, v] : rep.kth_recon_mse) out << "," << v;
    out << "\n";

    if (!grid_path.empty()) {
        const std::size_t side = static_cast<std::size_t>(std::lround(
            std::sqrt(static_cast<double>(data.dim()))));
        if (side * side != data.dim())
            throw ConfigError("image grid needs square samples, dim " +
                              std::to_string(data.dim()));
        Tensor x = data.samples.row(0);
        std::vector<Tensor> panels{x};
        for (int k : k_list) panels.push_back(kth_reconstruction(codec, x, k));
        write_pgm_grid(grid_path, panels, side, side);
    }

    std::cout << "eval " << mode_name(ck.model.mode) << ": mse " << rep.mse << ", sr_mse "
              << rep.sr_mse << "\n";
    return 0;
}

int cmd_correct(const std::string& ckpt_path, int iters, double gamma,
                const std::string& out_path) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    if (ck.model.mode != EncoderMode::direct)
        throw ConfigError("correct expects a direct-mode checkpoint, got " +
                          mode_name(ck.model.mode));
    GnConfig gn;
    gn.iterations = iters;
    gn.damping = gamma;
    gn.validate();
    Checkpoint out = ck;
    out.model = correct_autoencoder(ck.model, gn);
    save_checkpoint(out_path, out);
    std::cout << "corrected checkpoint written to " << out_path << "\n";
    return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_path) {
    json cfg = load_json(config_path);
    if (!cfg.contains("runs") || !cfg.at("runs").is_array() || cfg.at("runs").size() < 2)
        throw ConfigError("compare config must list at least two runs");
    DataPair data = load_data(cfg);

    struct Row {
        std::string name;
        EvalReport train_rep, test_rep;
    };
    std::vector<Row> rows;
    for (const json& run : cfg.at("runs")) {
        json merged = cfg;
        merged.erase("runs");
        for (auto& [key, val] : run.items()) merged[key] = val;
        TrainConfig tc = parse_train_config(merged);
        const json& m = merged.value("model", json::object());
        const std::size_t n = data.train.dim();
        const std::size_t h = m.value("h", std::size_t{100});
        const std::size_t r = m.value("r", std::size_t{5});
        const EncoderMode mode =
            tc.mode == Objective::meta ? EncoderMode::gauss_newton : EncoderMode::direct;
        TrainResult res = train(make_model(n, h, r, mode, tc.seed, tc.gn), data.train, tc);
        Codec codec = make_codec(res.model);
        rows.push_back({run.value("name", objective_name(tc.mode)),
                        evaluate(codec, data.train.samples, "train", {}, tc.parallel),
                        evaluate(codec, data.test.samples, "test", {}, tc.parallel)});
    }

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write report: " + out_path);
    out << "model,train_mse,test_mse,train_sr_mse,test_sr_mse\n";
    for (const Row& row : rows)
        out << row.name << "," << std::setprecision(17) << row.train_rep.mse << ","
            << row.test_rep.mse << "," << row.train_rep.sr_mse << ","
            << row.test_rep.sr_mse << "\n";
    std::cout << "comparison of " << rows.size() << " models written to " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meta-autoencoder training, evaluation, and correction"};
    app.require_subcommand(1);

    std::string config_path, out_dir, ckpt_path, images_path, report_path, out_path;
    std::string k_csv = "1,100";
    std::string grid_path;
    int iters = 4;
    double gamma = 1e-8;

    CLI::App* train_cmd = app.add_subcommand("train", "train a model from a JSON config");
    train_cmd->add_option("--config", config_path, "JSON config file")->required();
    train_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on IDX images");
    eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    eval_cmd->add_option("--images", images_path, "IDX image file")->required();
    eval_cmd->add_option("--k", k_csv, "comma-separated reconstruction iterates");
    eval_cmd->add_option("--report", report_path, "CSV report path")->required();
    eval_cmd->add_option("--grid", grid_path, "optional PGM grid of reconstructions");

    CLI::App* correct_cmd =
        app.add_subcommand("correct", "swap a trained encoder for the refinement solver");
    correct_cmd->add_option("--checkpoint", ckpt_path, "direct-mode checkpoint")->required();
    correct_cmd->add_option("--iters", iters, "refinement iterations");
    correct_cmd->add_option("--gamma", gamma, "damping");
    correct_cmd->add_option("--out", out_path, "output checkpoint path")->required();

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "train and tabulate several configurations");
    compare_cmd->add_option("--config", config_path, "JSON config with a runs list")
        ->required();
    compare_cmd->add_option("--out", out_path, "CSV table path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, out_dir);
        if (eval_cmd->parsed())
            return cmd_eval(ckpt_path, images_path, k_csv, report_path, grid_path);
        if (correct_cmd->parsed()) return cmd_correct(ckpt_path, iters, gamma, out_path);
        if (compare_cmd->parsed()) return cmd_compare(config_path, out_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
