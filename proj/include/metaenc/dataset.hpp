#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "metaenc/tensor.hpp"

namespace metaenc {

struct Dataset {
    Tensor samples;  // (N, n)
    double scale = 1.0;
    double offset = 0.0;
    std::string split = "train";

    std::size_t count() const { return samples.rows(); }
    std::size_t dim() const { return samples.cols(); }
};

/// IDX image file: big-endian magic 2051, counts (N, rows, cols), then
/// N*rows*cols unsigned bytes. Pixels are divided by 255.
Dataset load_idx_images(const std::string& path);
std::vector<std::uint8_t> load_idx_labels(const std::string& path);

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

enum class ManifoldKind { linear_subspace, tanh_image };

/// linear_subspace: X = V Z + noise * eps with random orthonormal V (n x r_true).
/// tanh_image: X = phi*(Z) + noise * eps for a frozen random one-hidden-layer
/// tanh decoder phi*, so noiseless samples lie exactly in a decoder image.
Dataset synthetic_manifold(ManifoldKind kind, std::size_t n, std::size_t r_true,
                           std::size_t count, double noise, std::uint64_t seed);

// forward declared in mlp.hpp
struct MlpParams;

/// tanh_image manifold together with its frozen generator network and the
/// codes that produced each sample.
struct TanhManifold {
    Dataset data;
    Tensor codes;  // (N, r_true)
};
TanhManifold tanh_manifold_detail(std::size_t n, std::size_t r_true, std::size_t count,
                                  double noise, std::uint64_t seed,
                                  MlpParams* generator_out);

/// Deterministic shuffled split into (train, test); disjoint and exhaustive.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction,
                                  std::uint64_t seed);

Dataset take(const Dataset& data, std::size_t count);  // first count samples

}  // namespace metaenc
