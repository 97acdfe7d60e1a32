#pragma once

#include <cstdint>
#include <vector>

#include "metaenc/gauss_newton.hpp"
#include "metaenc/model.hpp"
#include "metaenc/tensor.hpp"

namespace metaenc {

/// Exact linear decoder phi(U) = V U with column-orthonormal V; the executable
/// oracle for the linear/PCA equivalence of the meta formulation.
struct LinearDecoder {
    Tensor v;  // (n, r)
    bool orthonormal = false;
    bool degenerate = false;  // tied eigenvalues were broken by index order
    std::vector<double> eigenvalues;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns pairs
/// sorted by descending eigenvalue, ties broken by original index; each
/// eigenvector's largest-magnitude entry is made positive.
void jacobi_eigen(const Tensor& sym, std::vector<double>& eigenvalues, Tensor& eigenvectors);

/// Top-r eigenvectors of the uncentered second moment (1/N) sum x x^T
/// (optionally centered). Throws on a rank-deficient subspace
/// (r-th eigenvalue below 1e-12).
LinearDecoder pca_fit(const Tensor& data, std::size_t r, bool centered = false);

Tensor linear_encode(const LinearDecoder& d, const Tensor& x);  // V^T x
Tensor linear_decode(const LinearDecoder& d, const Tensor& u);  // V u

Codec make_codec(const LinearDecoder& d);

/// Largest principal angle (radians) between the column spans of two n x r
/// bases.
double principal_angle(const Tensor& a, const Tensor& b);

struct PcaEquivalenceReport {
    double encode_gap = 0.0;      // max |U_GN - V^T x| over samples and entries
    double subspace_angle = 0.0;  // PCA span vs gradient-trained linear meta model
};

/// Fits PCA, checks the Gauss-Newton encode against the exact projection, and
/// trains a linear meta model by gradient descent to compare subspaces.
PcaEquivalenceReport pca_equivalence_check(const Tensor& data, std::size_t r,
                                           const GnConfig& gn, int train_steps = 3000,
                                           double lr = 5e-2, std::uint64_t seed = 0);

}  // namespace metaenc
