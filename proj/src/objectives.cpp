#include "metaenc/objectives.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "metaenc/errors.hpp"

namespace metaenc {

std::string objective_name(Objective o) {
    switch (o) {
        case Objective::canonical: return "canonical";
        case Objective::meta: return "meta";
        case Objective::weak_ri: return "weak_ri";
    }
    return "?";
}

Objective objective_from_name(const std::string& name) {
    if (name == "canonical") return Objective::canonical;
    if (name == "meta") return Objective::meta;
    if (name == "weak_ri") return Objective::weak_ri;
    throw ConfigError("unknown objective '" + name + "'");
}

Tape::NodeId sample_loss_node(Tape& tape, const MlpNodes& decoder, const MlpNodes& encoder0,
                              Tape::NodeId x, Objective objective, double lambda,
                              const GnConfig& gn) {
    switch (objective) {
        case Objective::canonical: {
            Tape::NodeId u = mlp_forward_node(tape, encoder0, x);
            Tape::NodeId recon = mlp_forward_node(tape, decoder, u);
            return tape.mse(recon, x);
        }
        case Objective::weak_ri: {
            Tape::NodeId u = mlp_forward_node(tape, encoder0, x);
            Tape::NodeId recon = mlp_forward_node(tape, decoder, u);
            Tape::NodeId u2 = mlp_forward_node(tape, encoder0, recon);
            return tape.add(tape.mse(recon, x), tape.scale(tape.mse(u2, u), lambda));
        }
        case Objective::meta: {
            Tape::NodeId u = gauss_newton_encode_node(tape, decoder, encoder0, x, gn);
            Tape::NodeId recon = mlp_forward_node(tape, decoder, u);
            return tape.mse(recon, x);
        }
    }
    throw ConfigError("sample_loss_node: bad objective");
}

namespace {

void require_mode(const AutoencoderModel& m, Objective o) {
    const bool needs_gn = (o == Objective::meta);
    const bool is_gn = (m.mode == EncoderMode::gauss_newton);
    if (needs_gn != is_gn)
        throw ConfigError("objective " + objective_name(o) + " does not match model mode " +
                          mode_name(m.mode));
}

struct SampleResult {
    double loss;
    Tensor grad;
    int escalations;
};

SampleResult sample_loss_grad(const AutoencoderModel& m, const Tensor& x,
                              Objective objective, double lambda) {
    GnConfig cfg = m.gn;
    int escalations = 0;
    for (;;) {
        try {
            Tape tape;
            MlpNodes dn = tape_params(tape, m.decoder);
            MlpNodes en = tape_params(tape, m.encoder0);
            Tape::NodeId xn = tape.leaf(x);
            Tape::NodeId root = sample_loss_node(tape, dn, en, xn, objective, lambda, cfg);
            std::vector<Tensor> g = tape.backward(
                root, {dn.w1, dn.b1, dn.w2, dn.b2, en.w1, en.b1, en.w2, en.b2});
            std::vector<double> flat;
            flat.reserve(param_count(m.reduced_dim(), m.hidden_dim(), m.full_dim()) +
                         param_count(m.full_dim(), m.hidden_dim(), m.reduced_dim()));
            for (const Tensor& t : g)
                flat.insert(flat.end(), t.data.begin(), t.data.end());
            return {tape.value(root).data[0], Tensor::vector(std::move(flat)), escalations};
        } catch (const NonSpdError&) {
            if (cfg.damping >= kDampingCap) throw;
            cfg = escalate_damping(cfg);
            if (cfg.damping > kDampingCap) cfg.damping = kDampingCap;
            ++escalations;
        }
    }
}

double mean_loss(const AutoencoderModel& m, const Tensor& batch, Objective objective,
                 double lambda) {
    if (batch.rank() != 2 || batch.cols() != m.full_dim())
        throw ShapeError("loss: batch shape " + batch.shape_str() + " does not match n=" +
                         std::to_string(m.full_dim()));
    require_mode(m, objective);
    double acc = 0.0;
    for (std::size_t i = 0; i < batch.rows(); ++i) {
        Tape tape;
        MlpNodes dn = tape_params(tape, m.decoder);
        MlpNodes en = tape_params(tape, m.encoder0);
        Tape::NodeId xn = tape.leaf(batch.row(i));
        acc += tape.value(sample_loss_node(tape, dn, en, xn, objective, lambda, m.gn)).data[0];
    }
    return acc / static_cast<double>(batch.rows());
}

constexpr std::size_t kBlock = 16;  // reduction block; fixes summation order

}  // namespace

double canonical_loss(const AutoencoderModel& m, const Tensor& batch) {
    return mean_loss(m, batch, Objective::canonical, 0.0);
}

double meta_loss(const AutoencoderModel& m, const Tensor& batch) {
    return mean_loss(m, batch, Objective::meta, 0.0);
}

double weak_ri_loss(const AutoencoderModel& m, const Tensor& batch, double lambda) {
    if (lambda < 0.0) throw ConfigError("weak_ri_loss: lambda must be >= 0");
    return mean_loss(m, batch, Objective::weak_ri, lambda);
}

BatchGrad batch_loss_grad(const AutoencoderModel& m, const Tensor& batch,
                          Objective objective, double lambda, bool parallel) {
    if (batch.rank() != 2 || batch.cols() != m.full_dim())
        throw ShapeError("batch_loss_grad: batch shape " + batch.shape_str());
    require_mode(m, objective);

    const std::size_t count = batch.rows();
    const std::size_t total =
        param_count(m.reduced_dim(), m.hidden_dim(), m.full_dim()) +
        param_count(m.full_dim(), m.hidden_dim(), m.reduced_dim());
    const std::size_t nblocks = (count + kBlock - 1) / kBlock;

    std::vector<Tensor> block_grad(nblocks);
    std::vector<double> block_loss(nblocks, 0.0);
    std::vector<int> block_esc(nblocks, 0);
    std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
        if (failure) continue;
        try {
            Tensor acc = Tensor::zeros({total});
            const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
            const std::size_t end = std::min(begin + kBlock, count);
            for (std::size_t i = begin; i < end; ++i) {
                SampleResult r = sample_loss_grad(m, batch.row(i), objective, lambda);
                block_loss[b] += r.loss;
                block_esc[b] += r.escalations;
                for (std::size_t k = 0; k < total; ++k) acc.data[k] += r.grad.data[k];
            }
            block_grad[b] = std::move(acc);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    BatchGrad out;
    out.grad = Tensor::zeros({total});
    for (std::size_t b = 0; b < nblocks; ++b) {
        out.loss += block_loss[b];
        out.escalations += block_esc[b];
        for (std::size_t k = 0; k < total; ++k) out.grad.data[k] += block_grad[b].data[k];
    }
    const double inv = 1.0 / static_cast<double>(count);
    out.loss *= inv;
    for (double& v : out.grad.data) v *= inv;
    return out;
}

}  // namespace metaenc
