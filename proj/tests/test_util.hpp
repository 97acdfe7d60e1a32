#pragma once

#include <cmath>
#include <random>

#include "metaenc/tensor.hpp"

namespace testutil {

inline double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit(rng);
}

inline double gauss(std::mt19937_64& rng) {
    double u1 = unit(rng);
    while (u1 <= 0.0) u1 = unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * unit(rng));
}

inline metaenc::Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape,
                                     double scale = 1.0) {
    metaenc::Tensor t = metaenc::Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = scale * gauss(rng);
    return t;
}

// random SPD matrix B^T B + I
inline metaenc::Tensor random_spd(std::mt19937_64& rng, std::size_t m) {
    metaenc::Tensor b = random_tensor(rng, {m, m});
    metaenc::Tensor a = metaenc::kernels::matmul(metaenc::kernels::transpose(b), b);
    for (std::size_t i = 0; i < m; ++i) a(i, i) += 1.0;
    return a;
}

inline double max_abs_diff(const metaenc::Tensor& a, const metaenc::Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i)
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
}

}  // namespace testutil
