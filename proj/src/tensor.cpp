#include "metaenc/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "metaenc/errors.hpp"

namespace metaenc {

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    if (n != data.size())
        throw ShapeError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str());
}

Tensor Tensor::zeros(std::vector<std::size_t> s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
}

Tensor Tensor::ones(std::vector<std::size_t> s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return Tensor(std::move(s), std::vector<double>(n, 1.0));
}

Tensor Tensor::identity(std::size_t m) {
    Tensor t = zeros({m, m});
    for (std::size_t i = 0; i < m; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::vector(std::vector<double> d) {
    std::size_t n = d.size();
    return Tensor({n}, std::move(d));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

std::size_t Tensor::numel() const { return data.size(); }

std::size_t Tensor::rows() const {
    if (rank() != 2) throw ShapeError("rows() on tensor of shape " + shape_str());
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw ShapeError("cols() on tensor of shape " + shape_str());
    return shape[1];
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

Tensor Tensor::row(std::size_t i) const {
    const std::size_t c = cols();
    std::vector<double> out(c);
    for (std::size_t j = 0; j < c; ++j) out[j] = (*this)(i, j);
    return Tensor::vector(std::move(out));
}

namespace kernels {

namespace {
void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}
}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2, "matmul: left operand must be rank 2, got " + a.shape_str());
    const std::size_t m = a.rows(), k = a.cols();
    if (b.rank() == 1) {
        require(b.shape[0] == k,
                "matmul: shapes " + a.shape_str() + " x " + b.shape_str());
        Tensor y = Tensor::zeros({m});
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            const double* arow = a.data.data() + i * k;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * b.data[p];
            y(i) = acc;
        }
        return y;
    }
    require(b.rank() == 2 && b.rows() == k,
            "matmul: shapes " + a.shape_str() + " x " + b.shape_str());
    const std::size_t n = b.cols();
    Tensor c = Tensor::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c.data.data() + i * n;
        const double* arow = a.data.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b.data.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), "add: shapes " + a.shape_str() + " vs " + b.shape_str());
    Tensor c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
    return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), "sub: shapes " + a.shape_str() + " vs " + b.shape_str());
    Tensor c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
    return c;
}

Tensor scale(const Tensor& a, double alpha) {
    Tensor c = a;
    for (double& v : c.data) v *= alpha;
    return c;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), "hadamard: shapes " + a.shape_str() + " vs " + b.shape_str());
    Tensor c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] *= b.data[i];
    return c;
}

Tensor tanh_map(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data) v = std::tanh(v);
    return c;
}

Tensor transpose(const Tensor& a) {
    require(a.rank() == 2, "transpose: rank-2 expected, got " + a.shape_str());
    const std::size_t m = a.rows(), n = a.cols();
    Tensor c = Tensor::zeros({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c(j, i) = a(i, j);
    return c;
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data) acc += v;
    return Tensor::scalar(acc);
}

Tensor mse(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), "mse: shapes " + a.shape_str() + " vs " + b.shape_str());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return Tensor::scalar(acc / static_cast<double>(a.numel()));
}

double dot(const Tensor& a, const Tensor& b) {
    require(a.numel() == b.numel(), "dot: sizes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

Tensor cg_solve(const Tensor& a, const Tensor& b, double tol) {
    require(a.rank() == 2 && a.rows() == a.cols(), "cg_solve: A must be square");
    const std::size_t m = a.rows();
    require(b.rank() == 1 && b.shape[0] == m, "cg_solve: b must have length " + std::to_string(m));
    // Tolerant symmetry check: finite-difference probes perturb one entry at a
    // time, and the symmetrized adjoint reads A as (A + A^T)/2 anyway.
    double amax = 1.0;
    for (double v : a.data) amax = std::max(amax, std::abs(v));
    Tensor as = a;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            if (std::abs(a(i, j) - a(j, i)) > 1e-5 * amax)
                throw NonSpdError("cg_solve: matrix not symmetric at (" + std::to_string(i) +
                                  "," + std::to_string(j) + ")");
            const double avg = 0.5 * (a(i, j) + a(j, i));
            as(i, j) = avg;
            as(j, i) = avg;
        }

    const double bnorm = norm2(b);
    const double stop = tol * std::max(1.0, bnorm);
    Tensor y = Tensor::zeros({m});
    Tensor r = b;
    Tensor p = b;
    double rs = dot(r, r);
    if (std::sqrt(rs) <= stop) return y;

    // Full reorthogonalization of the residuals keeps the finite-termination
    // property through roundoff at these small dimensions.
    std::vector<Tensor> basis;
    basis.reserve(m);
    const std::size_t max_iter = m + 5;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Tensor ap = matmul(as, p);
        const double curv = dot(p, ap);
        if (curv <= 0.0)
            throw NonSpdError("cg_solve: non-positive curvature " + std::to_string(curv));
        const double alpha = rs / curv;
        for (std::size_t i = 0; i < m; ++i) {
            y(i) += alpha * p(i);
            r(i) -= alpha * ap(i);
        }
        for (const Tensor& u : basis) {
            const double proj = dot(r, u);
            for (std::size_t i = 0; i < m; ++i) r(i) -= proj * u(i);
        }
        double rs_new = dot(r, r);
        if (std::sqrt(rs_new) <= stop) {
            // Recurrence residual can drift from the true one; verify explicitly.
            Tensor rt = sub(b, matmul(as, y));
            if (norm2(rt) <= stop) return y;
            r = rt;
            rs_new = dot(r, r);
            p = r;
            basis.clear();
        } else {
            const double beta = rs_new / rs;
            for (std::size_t i = 0; i < m; ++i) p(i) = r(i) + beta * p(i);
            basis.push_back(kernels::scale(r, 1.0 / std::sqrt(rs_new)));
        }
        rs = rs_new;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", norm2(r));
    throw CgConvergenceError("cg_solve: no convergence after " + std::to_string(max_iter) +
                             " iterations, residual " + std::string(buf));
}

}  // namespace kernels

}  // namespace metaenc
