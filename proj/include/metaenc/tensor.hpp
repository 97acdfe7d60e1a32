#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace metaenc {

/// Dense row-major tensor of 64-bit floats. Rank 1 and rank 2 are the only
/// shapes the rest of the code needs; scalars are rank-1 tensors of length 1.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> d);

    static Tensor zeros(std::vector<std::size_t> s);
    static Tensor ones(std::vector<std::size_t> s);
    static Tensor identity(std::size_t m);
    static Tensor vector(std::vector<double> d);
    static Tensor scalar(double v);

    std::size_t numel() const;
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double& operator()(std::size_t i) { return data[i]; }
    double operator()(std::size_t i) const { return data[i]; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

    bool all_finite() const;
    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;

    Tensor row(std::size_t i) const;  // rank-2 only, returns rank-1 copy
};

namespace kernels {

// Fixed, documented evaluation order in every kernel so repeated runs are
// bit-identical.

Tensor matmul(const Tensor& a, const Tensor& b);  // (m,k)x(k,n) or (m,k)x(k)
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double alpha);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor tanh_map(const Tensor& a);
Tensor transpose(const Tensor& a);  // rank-2
Tensor sum(const Tensor& a);        // scalar
Tensor mse(const Tensor& a, const Tensor& b);  // mean of squared differences

double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);

/// Conjugate-gradient solve of A y = b for symmetric positive definite A.
/// Stops when the residual drops below tol * max(1, ||b||); throws NonSpdError
/// on a non-positive curvature term, CgConvergenceError after m + 5 iterations.
Tensor cg_solve(const Tensor& a, const Tensor& b, double tol = 1e-10);

}  // namespace kernels

}  // namespace metaenc
