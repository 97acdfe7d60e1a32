#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "metaenc/gauss_newton.hpp"
#include "metaenc/mlp.hpp"

namespace metaenc {

enum class EncoderMode { direct, gauss_newton };

std::string mode_name(EncoderMode m);
EncoderMode mode_from_name(const std::string& name);

/// Decoder (r -> n) plus the encoder / initial-condition net (n -> r). In
/// direct mode encoder0 is the encoder itself; in gauss_newton mode it only
/// seeds the embedded solver.
struct AutoencoderModel {
    MlpParams decoder;
    MlpParams encoder0;
    EncoderMode mode = EncoderMode::direct;
    GnConfig gn;

    std::size_t full_dim() const { return decoder.out_dim(); }
    std::size_t reduced_dim() const { return decoder.in_dim(); }
    std::size_t hidden_dim() const { return decoder.hidden_dim(); }
    void validate() const;
};

AutoencoderModel make_model(std::size_t n, std::size_t h, std::size_t r,
                            EncoderMode mode, std::uint64_t seed,
                            const GnConfig& gn = {});

/// Encoder as configured: direct net or escalating Gauss-Newton refinement.
Tensor encode(const AutoencoderModel& m, const Tensor& x);
Tensor decode(const AutoencoderModel& m, const Tensor& u);

/// Type-erased encode/decode pair; metrics run against this so linear
/// baselines and MLP models share one evaluation path.
struct Codec {
    std::size_t full_dim = 0;
    std::size_t reduced_dim = 0;
    std::function<Tensor(const Tensor&)> encode;
    std::function<Tensor(const Tensor&)> decode;
};

Codec make_codec(const AutoencoderModel& m);

}  // namespace metaenc
