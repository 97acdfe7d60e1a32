#include "metaenc/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "metaenc/errors.hpp"

namespace metaenc {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
    if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 || adam_beta2 >= 1.0)
        throw ConfigError("train: adam betas must lie in (0, 1)");
    if (lambda < 0.0) throw ConfigError("train: lambda must be >= 0");
    if (mode == Objective::meta) gn.validate();
}

void adam_step(Tensor& params, const Tensor& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    if (!params.same_shape(grads) || !params.same_shape(state.m) ||
        !params.same_shape(state.v))
        throw ShapeError("adam_step: parameter/gradient/state shapes differ");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.numel(); ++i) {
        const double g = grads.data[i];
        state.m.data[i] = beta1 * state.m.data[i] + (1.0 - beta1) * g;
        state.v.data[i] = beta2 * state.v.data[i] + (1.0 - beta2) * g * g;
        const double mhat = state.m.data[i] / bc1;
        const double vhat = state.v.data[i] / bc2;
        params.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

Tensor model_param_vector(const AutoencoderModel& m) {
    Tensor dec = param_vector(m.decoder);
    Tensor enc = param_vector(m.encoder0);
    std::vector<double> flat = std::move(dec.data);
    flat.insert(flat.end(), enc.data.begin(), enc.data.end());
    return Tensor::vector(std::move(flat));
}

void load_model_params(AutoencoderModel& m, const Tensor& flat) {
    const std::size_t ndec = param_count(m.reduced_dim(), m.hidden_dim(), m.full_dim());
    const std::size_t nenc = param_count(m.full_dim(), m.hidden_dim(), m.reduced_dim());
    if (flat.numel() != ndec + nenc)
        throw ShapeError("load_model_params: expected " + std::to_string(ndec + nenc) +
                         " entries, got " + std::to_string(flat.numel()));
    Tensor dec = Tensor::vector(
        std::vector<double>(flat.data.begin(), flat.data.begin() + ndec));
    Tensor enc = Tensor::vector(
        std::vector<double>(flat.data.begin() + ndec, flat.data.end()));
    m.decoder = load_param_vector(dec, m.reduced_dim(), m.hidden_dim(), m.full_dim());
    m.encoder0 = load_param_vector(enc, m.full_dim(), m.hidden_dim(), m.reduced_dim());
}

TrainResult train(AutoencoderModel model, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    if (data.count() == 0) throw ConfigError("train: dataset is empty");
    if (data.dim() != model.full_dim())
        throw ShapeError("train: dataset dim " + std::to_string(data.dim()) +
                         " does not match model n=" + std::to_string(model.full_dim()));
    if (cfg.mode == Objective::meta) model.gn = cfg.gn;

    const std::size_t count = data.count();
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

    Tensor params = model_param_vector(model);
    AdamState state{Tensor::zeros(params.shape), Tensor::zeros(params.shape), 0};
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    result.skipped_batches = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = count; i > 1; --i)
            std::swap(order[i - 1], order[rng() % i]);

        double epoch_loss = 0.0;
        std::size_t counted = 0;
        for (std::size_t start = 0; start < count; start += bs) {
            const std::size_t end = std::min(start + bs, count);
            Tensor batch = Tensor::zeros({end - start, data.dim()});
            for (std::size_t i = start; i < end; ++i)
                for (std::size_t j = 0; j < data.dim(); ++j)
                    batch(i - start, j) = data.samples(order[i], j);
            try {
                BatchGrad bg =
                    batch_loss_grad(model, batch, cfg.mode, cfg.lambda, cfg.parallel);
                adam_step(params, bg.grad, state, cfg.learning_rate, cfg.adam_beta1,
                          cfg.adam_beta2, cfg.adam_eps);
                load_model_params(model, params);
                epoch_loss += bg.loss * static_cast<double>(end - start);
                counted += end - start;
            } catch (const NonSpdError& e) {
                ++result.skipped_batches;
                std::fprintf(stderr, "train: skipping batch at sample %zu: %s\n", start,
                             e.what());
            }
        }
        result.epoch_loss.push_back(counted ? epoch_loss / static_cast<double>(counted)
                                            : std::nan(""));
    }
    result.model = std::move(model);
    return result;
}

AutoencoderModel correct_autoencoder(const AutoencoderModel& model, const GnConfig& gn) {
    if (model.mode != EncoderMode::direct)
        throw ConfigError("correct_autoencoder: input model must be in direct mode");
    gn.validate();
    AutoencoderModel corrected = model;
    corrected.mode = EncoderMode::gauss_newton;
    corrected.gn = gn;
    return corrected;
}

}  // namespace metaenc
