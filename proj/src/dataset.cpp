#include "metaenc/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "metaenc/errors.hpp"
#include "metaenc/mlp.hpp"

namespace metaenc {

namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;

std::uint32_t read_be32(std::istream& in, const std::string& path, std::size_t offset) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in)
        throw IoError(path + ": truncated file at byte offset " + std::to_string(offset));
    return (static_cast<std::uint32_t>(buf[0]) << 24) |
           (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(buf), 4);
}

double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; <random> distributions are not reproducible across compilers.
double next_gauss(std::mt19937_64& rng) {
    double u1 = next_unit(rng);
    while (u1 <= 0.0) u1 = next_unit(rng);
    const double u2 = next_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

Dataset load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    const std::uint32_t magic = read_be32(in, path, 0);
    if (magic != kImageMagic)
        throw IoError(path + ": bad magic " + std::to_string(magic) + " at byte offset 0, expected " +
                      std::to_string(kImageMagic));
    const std::uint32_t count = read_be32(in, path, 4);
    const std::uint32_t rows = read_be32(in, path, 8);
    const std::uint32_t cols = read_be32(in, path, 12);
    const std::uint64_t pixels =
        static_cast<std::uint64_t>(count) * rows * cols;
    if (rows != 0 && cols != 0 && pixels / rows / cols != count)
        throw IoError(path + ": dimension overflow in header");

    std::vector<unsigned char> raw(pixels);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(pixels));
    if (static_cast<std::uint64_t>(in.gcount()) != pixels)
        throw IoError(path + ": truncated payload at byte offset " +
                      std::to_string(16 + in.gcount()));

    Dataset d;
    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    d.samples = Tensor::zeros({count, dim});
    for (std::size_t i = 0; i < pixels; ++i)
        d.samples.data[i] = static_cast<double>(raw[i]) / 255.0;
    d.scale = 1.0 / 255.0;
    d.offset = 0.0;
    return d;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    const std::uint32_t magic = read_be32(in, path, 0);
    if (magic != kLabelMagic)
        throw IoError(path + ": bad magic " + std::to_string(magic) + " at byte offset 0, expected " +
                      std::to_string(kLabelMagic));
    const std::uint32_t count = read_be32(in, path, 4);
    std::vector<std::uint8_t> labels(count);
    in.read(reinterpret_cast<char*>(labels.data()), count);
    if (static_cast<std::uint32_t>(in.gcount()) != count)
        throw IoError(path + ": truncated payload at byte offset " +
                      std::to_string(8 + in.gcount()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] > 9)
            throw IoError(path + ": label " + std::to_string(labels[i]) +
                          " out of range 0..9 at byte offset " + std::to_string(8 + i));
    return labels;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
    if (pixels.size() != static_cast<std::size_t>(count) * rows * cols)
        throw IoError(path + ": pixel buffer does not match header dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    write_be32(out, kImageMagic);
    write_be32(out, count);
    write_be32(out, rows);
    write_be32(out, cols);
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    write_be32(out, kLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

Dataset synthetic_manifold(ManifoldKind kind, std::size_t n, std::size_t r_true,
                           std::size_t count, double noise, std::uint64_t seed) {
    if (r_true > n) throw ConfigError("synthetic_manifold: r_true must be <= n");
    if (count < 1) throw ConfigError("synthetic_manifold: count must be >= 1");
    std::mt19937_64 rng(seed);
    Dataset d;
    d.samples = Tensor::zeros({count, n});

    if (kind == ManifoldKind::linear_subspace) {
        // random orthonormal basis via Gram-Schmidt on a gaussian matrix
        Tensor v = Tensor::zeros({n, r_true});
        for (double& e : v.data) e = next_gauss(rng);
        for (std::size_t c = 0; c < r_true; ++c) {
            for (std::size_t p = 0; p < c; ++p) {
                double proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) proj += v(i, c) * v(i, p);
                for (std::size_t i = 0; i < n; ++i) v(i, c) -= proj * v(i, p);
            }
            double nrm = 0.0;
            for (std::size_t i = 0; i < n; ++i) nrm += v(i, c) * v(i, c);
            nrm = std::sqrt(nrm);
            for (std::size_t i = 0; i < n; ++i) v(i, c) /= nrm;
        }
        for (std::size_t s = 0; s < count; ++s) {
            std::vector<double> z(r_true);
            for (double& e : z) e = next_gauss(rng);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t c = 0; c < r_true; ++c) acc += v(i, c) * z[c];
                d.samples(s, i) = acc + noise * next_gauss(rng);
            }
        }
        return d;
    }

    return tanh_manifold_detail(n, r_true, count, noise, seed, nullptr).data;
}

TanhManifold tanh_manifold_detail(std::size_t n, std::size_t r_true, std::size_t count,
                                  double noise, std::uint64_t seed,
                                  MlpParams* generator_out) {
    if (r_true > n) throw ConfigError("tanh_manifold: r_true must be <= n");
    std::mt19937_64 rng(seed);
    const std::size_t hidden = std::max<std::size_t>(2 * r_true, 8);
    MlpParams gen = init_mlp(r_true, hidden, n, rng());
    TanhManifold m;
    m.data.samples = Tensor::zeros({count, n});
    m.codes = Tensor::zeros({count, r_true});
    for (std::size_t s = 0; s < count; ++s) {
        std::vector<double> z(r_true);
        for (double& e : z) e = next_gauss(rng);
        for (std::size_t c = 0; c < r_true; ++c) m.codes(s, c) = z[c];
        Tensor x = mlp_apply(gen, Tensor::vector(z));
        for (std::size_t i = 0; i < n; ++i)
            m.data.samples(s, i) = x(i) + noise * next_gauss(rng);
    }
    if (generator_out) *generator_out = gen;
    return m;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction,
                                  std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw ConfigError("split: fraction must lie in (0, 1)");
    const std::size_t n = data.count();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);

    const std::size_t ntrain = static_cast<std::size_t>(fraction * static_cast<double>(n));
    Dataset train, test;
    train.scale = test.scale = data.scale;
    train.offset = test.offset = data.offset;
    train.split = "train";
    test.split = "test";
    train.samples = Tensor::zeros({ntrain, data.dim()});
    test.samples = Tensor::zeros({n - ntrain, data.dim()});
    for (std::size_t i = 0; i < n; ++i) {
        Tensor& dst = (i < ntrain) ? train.samples : test.samples;
        const std::size_t row = (i < ntrain) ? i : i - ntrain;
        for (std::size_t j = 0; j < data.dim(); ++j)
            dst(row, j) = data.samples(order[i], j);
    }
    return {train, test};
}

Dataset take(const Dataset& data, std::size_t count) {
    if (count > data.count())
        throw ConfigError("take: requested " + std::to_string(count) + " of " +
                          std::to_string(data.count()) + " samples");
    Dataset out = data;
    out.samples = Tensor::zeros({count, data.dim()});
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < data.dim(); ++j)
            out.samples(i, j) = data.samples(i, j);
    return out;
}

}  // namespace metaenc
