#include "metaenc/gauss_newton.hpp"

#include <algorithm>
#include <string>

#include "metaenc/errors.hpp"

namespace metaenc {

namespace {
constexpr double kDivergenceGuard = 1e6;  // abort when ||U|| exceeds this
}

void GnConfig::validate() const {
    if (iterations < 1) throw ConfigError("gn: iterations must be >= 1");
    if (damping < 0.0) throw ConfigError("gn: damping must be >= 0");
    if (cg_tol <= 0.0) throw ConfigError("gn: cg_tol must be > 0");
}

Tape::NodeId gauss_newton_encode_node(Tape& tape, const MlpNodes& decoder,
                                      const MlpNodes& encoder0, Tape::NodeId x,
                                      const GnConfig& cfg) {
    cfg.validate();
    tape.cg_tol = cfg.cg_tol;
    const std::size_t h = tape.value(decoder.w1).rows();
    const std::size_t r = tape.value(decoder.w1).cols();

    Tape::NodeId ones_h = tape.leaf(Tensor::ones({h}));
    Tape::NodeId ones_1r = tape.leaf(Tensor::ones({1, r}));
    Tape::NodeId damp = tape.leaf(kernels::scale(Tensor::identity(r), cfg.damping));

    Tape::NodeId u = mlp_forward_node(tape, encoder0, x);
    for (int i = 0; i < cfg.iterations; ++i) {
        Tape::NodeId z = tape.add(tape.matmul(decoder.w1, u), decoder.b1);
        Tape::NodeId t = tape.tanh(z);
        Tape::NodeId recon = tape.add(tape.matmul(decoder.w2, t), decoder.b2);
        Tape::NodeId f = tape.sub(recon, x);
        Tape::NodeId s = tape.sub(ones_h, tape.hadamard(t, t));
        Tape::NodeId smat = tape.matmul(tape.reshape(s, {h, 1}), ones_1r);
        Tape::NodeId j = tape.matmul(decoder.w2, tape.hadamard(smat, decoder.w1));
        Tape::NodeId jt = tape.transpose(j);
        Tape::NodeId a = tape.add(tape.matmul(jt, j), damp);
        Tape::NodeId g = tape.matmul(jt, f);
        Tape::NodeId p = tape.sym_solve(a, g);
        u = tape.sub(u, p);
        if (kernels::norm2(tape.value(u)) > kDivergenceGuard)
            throw NonFiniteError("gauss_newton: iterate diverged at step " +
                                 std::to_string(i + 1));
    }
    return u;
}

Tensor gauss_newton_encode(const MlpParams& decoder, const MlpParams& encoder0,
                           const Tensor& x, const GnConfig& cfg) {
    cfg.validate();
    const std::size_t h = decoder.hidden_dim();
    const std::size_t r = decoder.in_dim();
    const Tensor ones_h = Tensor::ones({h});
    const Tensor ones_1r = Tensor::ones({1, r});
    const Tensor damp = kernels::scale(Tensor::identity(r), cfg.damping);

    Tensor u = mlp_apply(encoder0, x);
    for (int i = 0; i < cfg.iterations; ++i) {
        Tensor z = kernels::add(kernels::matmul(decoder.w1, u), decoder.b1);
        Tensor t = kernels::tanh_map(z);
        Tensor recon = kernels::add(kernels::matmul(decoder.w2, t), decoder.b2);
        Tensor f = kernels::sub(recon, x);
        Tensor s = kernels::sub(ones_h, kernels::hadamard(t, t));
        Tensor smat = kernels::matmul(Tensor({h, 1}, s.data), ones_1r);
        Tensor j = kernels::matmul(decoder.w2, kernels::hadamard(smat, decoder.w1));
        Tensor jt = kernels::transpose(j);
        Tensor a = kernels::add(kernels::matmul(jt, j), damp);
        Tensor g = kernels::matmul(jt, f);
        Tensor p = kernels::cg_solve(a, g, cfg.cg_tol);
        u = kernels::sub(u, p);
        if (kernels::norm2(u) > kDivergenceGuard)
            throw NonFiniteError("gauss_newton: iterate diverged at step " +
                                 std::to_string(i + 1));
    }
    return u;
}

GnConfig escalate_damping(const GnConfig& cfg) {
    GnConfig next = cfg;
    next.damping = std::max(10.0 * cfg.damping, 1e-6);
    return next;
}

Tensor gauss_newton_encode_escalating(const MlpParams& decoder, const MlpParams& encoder0,
                                      const Tensor& x, const GnConfig& cfg) {
    GnConfig cur = cfg;
    for (;;) {
        try {
            return gauss_newton_encode(decoder, encoder0, x, cur);
        } catch (const NonSpdError&) {
            if (cur.damping >= kDampingCap) throw;
            cur = escalate_damping(cur);
            if (cur.damping > kDampingCap) cur.damping = kDampingCap;
        }
    }
}

std::vector<GnTracePoint> gn_trace(const MlpParams& decoder, const MlpParams& encoder0,
                                   const Tensor& x, const GnConfig& cfg) {
    cfg.validate();
    const std::size_t h = decoder.hidden_dim();
    const std::size_t r = decoder.in_dim();
    const Tensor ones_h = Tensor::ones({h});
    const Tensor ones_1r = Tensor::ones({1, r});
    const Tensor damp = kernels::scale(Tensor::identity(r), cfg.damping);

    std::vector<GnTracePoint> trace;
    Tensor u = mlp_apply(encoder0, x);
    for (int i = 0; i <= cfg.iterations; ++i) {
        Tensor z = kernels::add(kernels::matmul(decoder.w1, u), decoder.b1);
        Tensor t = kernels::tanh_map(z);
        Tensor recon = kernels::add(kernels::matmul(decoder.w2, t), decoder.b2);
        Tensor f = kernels::sub(recon, x);
        trace.push_back({u, kernels::norm2(f)});
        if (i == cfg.iterations) break;
        Tensor s = kernels::sub(ones_h, kernels::hadamard(t, t));
        Tensor smat = kernels::matmul(Tensor({h, 1}, s.data), ones_1r);
        Tensor j = kernels::matmul(decoder.w2, kernels::hadamard(smat, decoder.w1));
        Tensor jt = kernels::transpose(j);
        Tensor a = kernels::add(kernels::matmul(jt, j), damp);
        Tensor g = kernels::matmul(jt, f);
        Tensor p = kernels::cg_solve(a, g, cfg.cg_tol);
        u = kernels::sub(u, p);
        if (kernels::norm2(u) > kDivergenceGuard)
            throw NonFiniteError("gauss_newton: iterate diverged at step " +
                                 std::to_string(i + 1));
    }
    return trace;
}

Tensor gn_encode_linear(const Tensor& v, const Tensor& x, const Tensor& u0,
                        const GnConfig& cfg) {
    cfg.validate();
    if (v.rank() != 2 || x.rank() != 1 || x.shape[0] != v.rows())
        throw ShapeError("gn_encode_linear: shapes " + v.shape_str() + " vs " +
                         x.shape_str());
    const std::size_t r = v.cols();
    const Tensor vt = kernels::transpose(v);
    const Tensor damp = kernels::scale(Tensor::identity(r), cfg.damping);
    const Tensor a = kernels::add(kernels::matmul(vt, v), damp);

    Tensor u = u0;
    for (int i = 0; i < cfg.iterations; ++i) {
        Tensor f = kernels::sub(kernels::matmul(v, u), x);
        Tensor g = kernels::matmul(vt, f);
        Tensor p = kernels::cg_solve(a, g, cfg.cg_tol);
        u = kernels::sub(u, p);
    }
    return u;
}

}  // namespace metaenc
