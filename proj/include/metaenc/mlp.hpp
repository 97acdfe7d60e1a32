#pragma once

#include <cstdint>

#include "metaenc/tape.hpp"
#include "metaenc/tensor.hpp"

namespace metaenc {

/// One-hidden-layer tanh network: y = W2 tanh(W1 x + b1) + b2.
struct MlpParams {
    Tensor w1;  // (h, d_in)
    Tensor b1;  // (h)
    Tensor w2;  // (d_out, h)
    Tensor b2;  // (d_out)

    std::size_t in_dim() const { return w1.cols(); }
    std::size_t hidden_dim() const { return w1.rows(); }
    std::size_t out_dim() const { return w2.rows(); }

    void validate() const;
};

/// Glorot-uniform weights, zero biases, deterministic in the seed.
MlpParams init_mlp(std::size_t d_in, std::size_t h, std::size_t d_out, std::uint64_t seed);

/// Plain forward pass; x may be a vector (d_in) or a batch (N, d_in). The batch
/// result is the row-stacking of per-sample forwards.
Tensor mlp_apply(const MlpParams& p, const Tensor& x);

/// Analytic Jacobian of mlp_apply at u: W2 diag(1 - tanh^2(W1 u + b1)) W1.
Tensor mlp_jacobian(const MlpParams& p, const Tensor& u);

/// Flat parameter order: W1 row-major, b1, W2 row-major, b2.
Tensor param_vector(const MlpParams& p);
MlpParams load_param_vector(const Tensor& flat, std::size_t d_in, std::size_t h,
                            std::size_t d_out);
std::size_t param_count(std::size_t d_in, std::size_t h, std::size_t d_out);

/// Tape-resident parameter leaves for differentiable forwards.
struct MlpNodes {
    Tape::NodeId w1, b1, w2, b2;
};

MlpNodes tape_params(Tape& tape, const MlpParams& p);
Tape::NodeId mlp_forward_node(Tape& tape, const MlpNodes& p, Tape::NodeId x);

/// Jacobian as a differentiable expression, so the outer loss can flow
/// through it into the decoder weights and u.
Tape::NodeId mlp_jacobian_node(Tape& tape, const MlpNodes& p, Tape::NodeId u);

}  // namespace metaenc
