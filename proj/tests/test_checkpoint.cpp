#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "metaenc/checkpoint.hpp"
#include "metaenc/errors.hpp"
#include "metaenc/train.hpp"

using namespace metaenc;

namespace {
std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("round trip restores every parameter bit-exactly") {
    GnConfig gn;
    gn.iterations = 3;
    gn.damping = 1e-7;
    Checkpoint ck;
    ck.model = make_model(6, 5, 2, EncoderMode::gauss_newton, 9, gn);
    ck.seed = 1234;
    ck.config_digest = "abc123";
    std::string path = tmp_path("metaenc_ckpt.bin");
    save_checkpoint(path, ck);
    Checkpoint back = load_checkpoint(path);
    CHECK(model_param_vector(back.model).data == model_param_vector(ck.model).data);
    CHECK(back.model.mode == EncoderMode::gauss_newton);
    CHECK(back.model.gn.iterations == 3);
    CHECK(back.model.gn.damping == 1e-7);
    CHECK(back.seed == 1234);
    CHECK(back.config_digest == "abc123");
    CHECK(back.model.full_dim() == 6);
    CHECK(back.model.hidden_dim() == 5);
    CHECK(back.model.reduced_dim() == 2);
    std::remove(path.c_str());
}

TEST_CASE("saving twice produces byte-identical files") {
    Checkpoint ck;
    ck.model = make_model(4, 3, 2, EncoderMode::direct, 5);
    std::string p1 = tmp_path("metaenc_ckpt_a.bin");
    std::string p2 = tmp_path("metaenc_ckpt_b.bin");
    save_checkpoint(p1, ck);
    save_checkpoint(p2, ck);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    CHECK(s1.substr(0, 4) == "MAE1");
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("corrupted magic and version are rejected") {
    Checkpoint ck;
    ck.model = make_model(4, 3, 2, EncoderMode::direct, 5);
    std::string path = tmp_path("metaenc_ckpt_bad.bin");
    save_checkpoint(path, ck);

    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.put('X');
    }
    CHECK_THROWS_AS(load_checkpoint(path), IoError);

    save_checkpoint(path, ck);
    // truncate the payload
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
    CHECK_THROWS_AS(load_checkpoint(path), IoError);

    CHECK_THROWS_AS(load_checkpoint(tmp_path("metaenc_no_such_ckpt.bin")), IoError);
    std::remove(path.c_str());
}

TEST_CASE("unsupported version is rejected") {
    Checkpoint ck;
    ck.model = make_model(4, 3, 2, EncoderMode::direct, 5);
    ck.version = 999;
    std::string path = tmp_path("metaenc_ckpt_v999.bin");
    save_checkpoint(path, ck);
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
    std::remove(path.c_str());
}
