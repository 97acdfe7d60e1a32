#include "metaenc/mlp.hpp"

#include <cmath>
#include <random>

#include "metaenc/errors.hpp"

namespace metaenc {

void MlpParams::validate() const {
    if (w1.rank() != 2 || w2.rank() != 2 || b1.rank() != 1 || b2.rank() != 1)
        throw ShapeError("mlp: bad parameter ranks");
    if (b1.shape[0] != w1.rows() || b2.shape[0] != w2.rows() || w2.cols() != w1.rows())
        throw ShapeError("mlp: inconsistent parameter shapes " + w1.shape_str() + " " +
                         b1.shape_str() + " " + w2.shape_str() + " " + b2.shape_str());
    if (!w1.all_finite() || !b1.all_finite() || !w2.all_finite() || !b2.all_finite())
        throw NonFiniteError("mlp: non-finite parameter entry");
}

namespace {

// Portable deterministic uniform in [0,1); distribution objects from <random>
// are implementation-defined and would break cross-compiler reproducibility.
double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void fill_uniform(Tensor& t, double s, std::mt19937_64& rng) {
    for (double& v : t.data) v = (2.0 * next_unit(rng) - 1.0) * s;
}

}  // namespace

MlpParams init_mlp(std::size_t d_in, std::size_t h, std::size_t d_out,
                   std::uint64_t seed) {
    if (d_in < 1 || h < 1 || d_out < 1)
        throw ConfigError("init_mlp: dimensions must be >= 1");
    std::mt19937_64 rng(seed);
    MlpParams p;
    p.w1 = Tensor::zeros({h, d_in});
    p.b1 = Tensor::zeros({h});
    p.w2 = Tensor::zeros({d_out, h});
    p.b2 = Tensor::zeros({d_out});
    fill_uniform(p.w1, std::sqrt(6.0 / static_cast<double>(d_in + h)), rng);
    fill_uniform(p.w2, std::sqrt(6.0 / static_cast<double>(h + d_out)), rng);
    return p;
}

Tensor mlp_apply(const MlpParams& p, const Tensor& x) {
    if (x.rank() == 2) {
        const std::size_t n = x.rows();
        Tensor out = Tensor::zeros({n, p.out_dim()});
        for (std::size_t i = 0; i < n; ++i) {
            Tensor y = mlp_apply(p, x.row(i));
            for (std::size_t j = 0; j < y.numel(); ++j) out(i, j) = y(j);
        }
        return out;
    }
    if (x.rank() != 1 || x.shape[0] != p.in_dim())
        throw ShapeError("mlp_apply: input shape " + x.shape_str() + " does not match d_in " +
                         std::to_string(p.in_dim()));
    Tensor z = kernels::add(kernels::matmul(p.w1, x), p.b1);
    Tensor t = kernels::tanh_map(z);
    return kernels::add(kernels::matmul(p.w2, t), p.b2);
}

Tensor mlp_jacobian(const MlpParams& p, const Tensor& u) {
    if (u.rank() != 1 || u.shape[0] != p.in_dim())
        throw ShapeError("mlp_jacobian: input shape " + u.shape_str());
    Tensor z = kernels::add(kernels::matmul(p.w1, u), p.b1);
    Tensor t = kernels::tanh_map(z);
    const std::size_t h = p.hidden_dim(), r = p.in_dim(), n = p.out_dim();
    Tensor scaled = p.w1;  // rows scaled by sech^2(z)
    for (std::size_t i = 0; i < h; ++i) {
        const double s = 1.0 - t(i) * t(i);
        for (std::size_t j = 0; j < r; ++j) scaled(i, j) *= s;
    }
    (void)n;
    return kernels::matmul(p.w2, scaled);
}

Tensor param_vector(const MlpParams& p) {
    std::vector<double> flat;
    flat.reserve(p.w1.numel() + p.b1.numel() + p.w2.numel() + p.b2.numel());
    flat.insert(flat.end(), p.w1.data.begin(), p.w1.data.end());
    flat.insert(flat.end(), p.b1.data.begin(), p.b1.data.end());
    flat.insert(flat.end(), p.w2.data.begin(), p.w2.data.end());
    flat.insert(flat.end(), p.b2.data.begin(), p.b2.data.end());
    return Tensor::vector(std::move(flat));
}

std::size_t param_count(std::size_t d_in, std::size_t h, std::size_t d_out) {
    return h * d_in + h + d_out * h + d_out;
}

MlpParams load_param_vector(const Tensor& flat, std::size_t d_in, std::size_t h,
                            std::size_t d_out) {
    if (flat.numel() != param_count(d_in, h, d_out))
        throw ShapeError("load_param_vector: expected " +
                         std::to_string(param_count(d_in, h, d_out)) + " entries, got " +
                         std::to_string(flat.numel()));
    MlpParams p;
    auto it = flat.data.begin();
    p.w1 = Tensor({h, d_in}, std::vector<double>(it, it + h * d_in));
    it += h * d_in;
    p.b1 = Tensor({h}, std::vector<double>(it, it + h));
    it += h;
    p.w2 = Tensor({d_out, h}, std::vector<double>(it, it + d_out * h));
    it += d_out * h;
    p.b2 = Tensor({d_out}, std::vector<double>(it, it + d_out));
    return p;
}

MlpNodes tape_params(Tape& tape, const MlpParams& p) {
    p.validate();
    return {tape.leaf(p.w1), tape.leaf(p.b1), tape.leaf(p.w2), tape.leaf(p.b2)};
}

Tape::NodeId mlp_forward_node(Tape& tape, const MlpNodes& p, Tape::NodeId x) {
    Tape::NodeId z = tape.add(tape.matmul(p.w1, x), p.b1);
    return tape.add(tape.matmul(p.w2, tape.tanh(z)), p.b2);
}

Tape::NodeId mlp_jacobian_node(Tape& tape, const MlpNodes& p, Tape::NodeId u) {
    const std::size_t h = tape.value(p.w1).rows();
    const std::size_t r = tape.value(p.w1).cols();
    Tape::NodeId z = tape.add(tape.matmul(p.w1, u), p.b1);
    Tape::NodeId t = tape.tanh(z);
    Tape::NodeId s = tape.sub(tape.leaf(Tensor::ones({h})), tape.hadamard(t, t));
    // broadcast sech^2 down the columns of W1 via an outer product with ones
    Tape::NodeId scol = tape.reshape(s, {h, 1});
    Tape::NodeId smat = tape.matmul(scol, tape.leaf(Tensor::ones({1, r})));
    return tape.matmul(p.w2, tape.hadamard(smat, p.w1));
}

}  // namespace metaenc
