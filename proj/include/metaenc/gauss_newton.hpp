#pragma once

#include <vector>

#include "metaenc/mlp.hpp"
#include "metaenc/tape.hpp"
#include "metaenc/tensor.hpp"

namespace metaenc {

struct GnConfig {
    int iterations = 4;
    double damping = 1e-8;  // Tikhonov floor keeping J^T J + damping I SPD for CG
    double cg_tol = 1e-10;

    void validate() const;
};

/// Fixed-count Gauss-Newton refinement of the reduced state, fully recorded on
/// the tape: U0 from the initial-condition net, then I updates
/// U <- U - (J^T J + damping I)^{-1} J^T (phi(U) - x).
Tape::NodeId gauss_newton_encode_node(Tape& tape, const MlpNodes& decoder,
                                      const MlpNodes& encoder0, Tape::NodeId x,
                                      const GnConfig& cfg);

/// Tape-free evaluation path; bit-identical to the tape version because both
/// run the same kernels in the same order.
Tensor gauss_newton_encode(const MlpParams& decoder, const MlpParams& encoder0,
                           const Tensor& x, const GnConfig& cfg);

/// Same, but retries with damping <- max(10*damping, 1e-6) on SPD failure,
/// capped at 1e-2.
Tensor gauss_newton_encode_escalating(const MlpParams& decoder, const MlpParams& encoder0,
                                      const Tensor& x, const GnConfig& cfg);
GnConfig escalate_damping(const GnConfig& cfg);
constexpr double kDampingCap = 1e-2;

struct GnTracePoint {
    Tensor u;
    double residual_norm;  // ||phi(u) - x||_2 at this iterate
};

/// Iterates U_0..U_I with their residual norms.
std::vector<GnTracePoint> gn_trace(const MlpParams& decoder, const MlpParams& encoder0,
                                   const Tensor& x, const GnConfig& cfg);

/// Gauss-Newton with an exact linear decoder phi(U) = V U (J = V, constant).
Tensor gn_encode_linear(const Tensor& v, const Tensor& x, const Tensor& u0,
                        const GnConfig& cfg);

}  // namespace metaenc
