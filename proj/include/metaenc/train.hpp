#pragma once

#include <cstdint>
#include <vector>

#include "metaenc/dataset.hpp"
#include "metaenc/objectives.hpp"

namespace metaenc {

struct TrainConfig {
    Objective mode = Objective::canonical;
    int epochs = 50;
    int batch_size = 128;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double lambda = 1.0;  // weak_ri penalty weight
    std::uint64_t seed = 0;
    GnConfig gn;
    bool parallel = true;

    void validate() const;
};

struct AdamState {
    Tensor m;
    Tensor v;
    long t = 0;
};

void adam_step(Tensor& params, const Tensor& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps);

struct TrainResult {
    AutoencoderModel model;
    std::vector<double> epoch_loss;
    int skipped_batches = 0;
};

/// Mini-batch ADAM over shuffled epochs; the shuffle stream is seeded once so
/// full runs are bit-reproducible. A batch is skipped (and counted) only when
/// damping escalation is exhausted.
TrainResult train(AutoencoderModel model, const Dataset& data, const TrainConfig& cfg);

/// Reuses a trained direct encoder as the Gauss-Newton initial condition; the
/// decoder is untouched and nothing is retrained.
AutoencoderModel correct_autoencoder(const AutoencoderModel& model, const GnConfig& gn);

/// Flat view of all trainable parameters, decoder first.
Tensor model_param_vector(const AutoencoderModel& m);
void load_model_params(AutoencoderModel& m, const Tensor& flat);

}  // namespace metaenc
