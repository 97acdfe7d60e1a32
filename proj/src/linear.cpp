#include "metaenc/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "metaenc/errors.hpp"
#include "metaenc/train.hpp"

namespace metaenc {

void jacobi_eigen(const Tensor& sym, std::vector<double>& eigenvalues,
                  Tensor& eigenvectors) {
    if (sym.rank() != 2 || sym.rows() != sym.cols())
        throw ShapeError("jacobi_eigen: square matrix expected, got " + sym.shape_str());
    const std::size_t n = sym.rows();
    Tensor a = sym;
    Tensor v = Tensor::identity(n);

    auto offdiag = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    double norm = 0.0;
    for (double e : a.data) norm += e * e;
    norm = std::sqrt(norm);
    const double stop = std::max(1e-300, 1e-14 * norm);

    for (int sweep = 0; sweep < 100 && offdiag() > stop; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= stop / static_cast<double>(n * n)) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return a(i, i) > a(j, j);  // stable: ties keep original index order
    });

    eigenvalues.resize(n);
    eigenvectors = Tensor::zeros({n, n});
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = idx[c];
        eigenvalues[c] = a(src, src);
        std::size_t imax = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v(i, src)) > std::abs(v(imax, src))) imax = i;
        const double sign = v(imax, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) eigenvectors(i, c) = sign * v(i, src);
    }
}

LinearDecoder pca_fit(const Tensor& data, std::size_t r, bool centered) {
    if (data.rank() != 2) throw ShapeError("pca_fit: (N, n) data expected");
    const std::size_t count = data.rows(), n = data.cols();
    if (r < 1 || r > n || count < r)
        throw ConfigError("pca_fit: need N >= r >= 1 and r <= n");

    std::vector<double> mean(n, 0.0);
    if (centered) {
        for (std::size_t s = 0; s < count; ++s)
            for (std::size_t i = 0; i < n; ++i) mean[i] += data(s, i);
        for (double& m : mean) m /= static_cast<double>(count);
    }

    Tensor moment = Tensor::zeros({n, n});
    for (std::size_t s = 0; s < count; ++s)
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = data(s, i) - mean[i];
            for (std::size_t j = i; j < n; ++j)
                moment(i, j) += xi * (data(s, j) - mean[j]);
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            moment(i, j) /= static_cast<double>(count);
            moment(j, i) = moment(i, j);
        }

    std::vector<double> eigenvalues;
    Tensor eigenvectors;
    jacobi_eigen(moment, eigenvalues, eigenvectors);
    if (eigenvalues[r - 1] < 1e-12)
        throw RankDeficiencyError("pca_fit: eigenvalue " + std::to_string(r) + " is " +
                                  std::to_string(eigenvalues[r - 1]) +
                                  ", subspace is degenerate");

    LinearDecoder d;
    d.v = Tensor::zeros({n, r});
    for (std::size_t c = 0; c < r; ++c)
        for (std::size_t i = 0; i < n; ++i) d.v(i, c) = eigenvectors(i, c);
    d.orthonormal = true;
    d.eigenvalues.assign(eigenvalues.begin(), eigenvalues.begin() + static_cast<long>(r));
    for (std::size_t c = 0; c + 1 <= r && c + 1 < n; ++c) {
        const double gap = std::abs(eigenvalues[c] - eigenvalues[c + 1]);
        if (gap <= 1e-10 * std::max(1.0, std::abs(eigenvalues[c]))) d.degenerate = true;
    }
    return d;
}

Tensor linear_encode(const LinearDecoder& d, const Tensor& x) {
    return kernels::matmul(kernels::transpose(d.v), x);
}

Tensor linear_decode(const LinearDecoder& d, const Tensor& u) {
    return kernels::matmul(d.v, u);
}

Codec make_codec(const LinearDecoder& d) {
    Codec c;
    c.full_dim = d.v.rows();
    c.reduced_dim = d.v.cols();
    c.encode = [d](const Tensor& x) { return linear_encode(d, x); };
    c.decode = [d](const Tensor& u) { return linear_decode(d, u); };
    return c;
}

namespace {

Tensor orthonormalize(const Tensor& m) {
    const std::size_t n = m.rows(), r = m.cols();
    Tensor q = m;
    for (std::size_t c = 0; c < r; ++c) {
        for (int pass = 0; pass < 2; ++pass)  // re-orthogonalize for accuracy
            for (std::size_t p = 0; p < c; ++p) {
                double proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) proj += q(i, c) * q(i, p);
                for (std::size_t i = 0; i < n; ++i) q(i, c) -= proj * q(i, p);
            }
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += q(i, c) * q(i, c);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-300) throw RankDeficiencyError("orthonormalize: rank-deficient basis");
        for (std::size_t i = 0; i < n; ++i) q(i, c) /= nrm;
    }
    return q;
}

double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double principal_angle(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) throw ShapeError("principal_angle: basis shapes differ");
    Tensor qa = orthonormalize(a);
    Tensor qb = orthonormalize(b);
    Tensor m = kernels::matmul(kernels::transpose(qa), qb);
    Tensor mm = kernels::matmul(kernels::transpose(m), m);
    std::vector<double> ev;
    Tensor vecs;
    jacobi_eigen(mm, ev, vecs);
    const double smin = std::sqrt(std::max(0.0, ev.back()));
    return std::acos(std::clamp(smin, 0.0, 1.0));
}

PcaEquivalenceReport pca_equivalence_check(const Tensor& data, std::size_t r,
                                           const GnConfig& gn, int train_steps, double lr,
                                           std::uint64_t seed) {
    PcaEquivalenceReport rep;
    LinearDecoder pca = pca_fit(data, r);
    const std::size_t count = data.rows(), n = data.cols();

    for (std::size_t s = 0; s < count; ++s) {
        const Tensor x = data.row(s);
        Tensor u_gn = gn_encode_linear(pca.v, x, Tensor::zeros({r}), gn);
        Tensor u_proj = linear_encode(pca, x);
        for (std::size_t c = 0; c < r; ++c)
            rep.encode_gap = std::max(rep.encode_gap, std::abs(u_gn(c) - u_proj(c)));
    }

    // Linear meta model: decoder M free, inner code solved exactly per sample,
    // outer gradient via the envelope of the inner optimum.
    std::mt19937_64 rng(seed);
    Tensor m = Tensor::zeros({n, r});
    for (double& e : m.data) e = 0.1 * (2.0 * next_unit(rng) - 1.0);
    Tensor flat = Tensor::vector(m.data);
    AdamState state{Tensor::zeros(flat.shape), Tensor::zeros(flat.shape), 0};
    const Tensor eps_i = kernels::scale(Tensor::identity(r), 1e-9);

    for (int step = 0; step < train_steps; ++step) {
        m.data = flat.data;
        Tensor mt = kernels::transpose(m);
        Tensor gram = kernels::add(kernels::matmul(mt, m), eps_i);
        Tensor grad = Tensor::zeros({n, r});
        for (std::size_t s = 0; s < count; ++s) {
            const Tensor x = data.row(s);
            Tensor u = kernels::cg_solve(gram, kernels::matmul(mt, x), 1e-12);
            Tensor resid = kernels::sub(kernels::matmul(m, u), x);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < r; ++c) grad(i, c) += resid(i) * u(c);
        }
        const double scale = 2.0 / (static_cast<double>(n) * static_cast<double>(count));
        Tensor gflat = Tensor::vector(grad.data);
        for (double& g : gflat.data) g *= scale;
        // halve the step size 8 times over the run so the iterate settles far
        // below the constant-rate noise floor
        const double cur_lr = lr * std::pow(0.5, std::floor(8.0 * step / train_steps));
        adam_step(flat, gflat, state, cur_lr, 0.9, 0.999, 1e-8);
    }
    m.data = flat.data;
    rep.subspace_angle = principal_angle(m, pca.v);
    return rep;
}

}  // namespace metaenc
