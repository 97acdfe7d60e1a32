#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "metaenc/dataset.hpp"
#include "metaenc/errors.hpp"
#include "metaenc/linear.hpp"
#include "test_util.hpp"

using namespace metaenc;

namespace {
std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("idx image round trip preserves every pixel") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::uint32_t count = 1 + rng() % 5;
        std::uint32_t rows = 1 + rng() % 6;
        std::uint32_t cols = 1 + rng() % 6;
        std::vector<std::uint8_t> pixels(count * rows * cols);
        for (auto& p : pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
        std::string path = tmp_path("metaenc_idx_rt.bin");
        write_idx_images(path, pixels, count, rows, cols);
        Dataset d = load_idx_images(path);
        REQUIRE(d.count() == count);
        REQUIRE(d.dim() == rows * cols);
        for (std::size_t i = 0; i < pixels.size(); ++i)
            CHECK(d.samples.data[i] == pixels[i] / 255.0);
        std::remove(path.c_str());
    }
}

TEST_CASE("idx label round trip and range check") {
    std::vector<std::uint8_t> labels{0, 3, 9, 5};
    std::string path = tmp_path("metaenc_idx_lbl.bin");
    write_idx_labels(path, labels);
    CHECK(load_idx_labels(path) == labels);

    std::vector<std::uint8_t> bad{0, 10};
    write_idx_labels(path, bad);
    CHECK_THROWS_AS(load_idx_labels(path), IoError);
    std::remove(path.c_str());
}

TEST_CASE("saturated pixels normalize to exactly one") {
    std::string path = tmp_path("metaenc_idx_sat.bin");
    write_idx_images(path, std::vector<std::uint8_t>(4, 255), 1, 2, 2);
    Dataset d = load_idx_images(path);
    for (double v : d.samples.data) CHECK(v == 1.0);
    std::remove(path.c_str());
}

TEST_CASE("wrong magic is reported with the offending value") {
    // a label file fed to the image loader must fail on the magic number
    std::string path = tmp_path("metaenc_idx_magic.bin");
    write_idx_labels(path, {1, 2, 3});
    CHECK_THROWS_WITH_AS(load_idx_images(path), doctest::Contains("2049"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("truncated payload is reported with a byte offset") {
    std::string path = tmp_path("metaenc_idx_trunc.bin");
    write_idx_images(path, std::vector<std::uint8_t>(12, 7), 3, 2, 2);
    // chop the last 5 bytes
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
    CHECK_THROWS_AS(load_idx_images(path), IoError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_idx_images(tmp_path("metaenc_does_not_exist.bin")), IoError);
}

TEST_CASE("linear manifold samples have the advertised rank") {
    Dataset d = synthetic_manifold(ManifoldKind::linear_subspace, 9, 4, 100, 0.0, 3);
    REQUIRE(d.count() == 100);
    REQUIRE(d.dim() == 9);
    CHECK_NOTHROW(pca_fit(d.samples, 4));
    CHECK_THROWS_AS(pca_fit(d.samples, 5), RankDeficiencyError);
}

TEST_CASE("tanh manifold samples lie in the generator image") {
    MlpParams gen = init_mlp(1, 1, 1, 0);  // overwritten below
    TanhManifold tm = tanh_manifold_detail(7, 2, 50, 0.0, 4, &gen);
    REQUIRE(tm.data.count() == 50);
    REQUIRE(tm.codes.rows() == 50);
    REQUIRE(tm.codes.cols() == 2);
    for (std::size_t i = 0; i < 10; ++i) {
        Tensor gen_out = mlp_apply(gen, tm.codes.row(i));
        CHECK(testutil::max_abs_diff(gen_out, tm.data.samples.row(i)) < 1e-12);
    }
}

TEST_CASE("noise moves samples off the clean manifold deterministically") {
    Dataset clean = synthetic_manifold(ManifoldKind::tanh_image, 6, 2, 30, 0.0, 8);
    Dataset noisy1 = synthetic_manifold(ManifoldKind::tanh_image, 6, 2, 30, 0.05, 8);
    Dataset noisy2 = synthetic_manifold(ManifoldKind::tanh_image, 6, 2, 30, 0.05, 8);
    CHECK(noisy1.samples.data == noisy2.samples.data);
    CHECK(noisy1.samples.data != clean.samples.data);
}

TEST_CASE("split is disjoint, exhaustive, and deterministic") {
    Dataset d = synthetic_manifold(ManifoldKind::linear_subspace, 5, 2, 100, 0.1, 6);
    auto [train1, test1] = split(d, 0.8, 42);
    auto [train2, test2] = split(d, 0.8, 42);
    CHECK(train1.count() == 80);
    CHECK(test1.count() == 20);
    CHECK(train1.samples.data == train2.samples.data);
    CHECK(test1.samples.data == test2.samples.data);
    CHECK(train1.split == "train");
    CHECK(test1.split == "test");

    // every original row appears exactly once across the two splits
    auto row_key = [](const Tensor& t, std::size_t i) {
        std::string k;
        for (std::size_t j = 0; j < t.cols(); ++j)
            k += std::to_string(t(i, j)) + ",";
        return k;
    };
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < d.count(); ++i) seen[row_key(d.samples, i)]++;
    std::map<std::string, int> got;
    for (std::size_t i = 0; i < train1.count(); ++i) got[row_key(train1.samples, i)]++;
    for (std::size_t i = 0; i < test1.count(); ++i) got[row_key(test1.samples, i)]++;
    CHECK(seen == got);

    auto [train3, test3] = split(d, 0.8, 43);
    CHECK(train3.samples.data != train1.samples.data);
}

TEST_CASE("take returns the leading samples") {
    Dataset d = synthetic_manifold(ManifoldKind::linear_subspace, 4, 2, 30, 0.0, 7);
    Dataset t = take(d, 10);
    REQUIRE(t.count() == 10);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(t.samples(i, j) == d.samples(i, j));
    CHECK_THROWS_AS(take(d, 31), ConfigError);
}
