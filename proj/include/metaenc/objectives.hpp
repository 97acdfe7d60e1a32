#pragma once

#include <vector>

#include "metaenc/model.hpp"
#include "metaenc/tensor.hpp"

namespace metaenc {

enum class Objective { canonical, meta, weak_ri };

std::string objective_name(Objective o);
Objective objective_from_name(const std::string& name);

/// Per-sample scalar loss recorded on the tape. Parameter leaves are supplied
/// by the caller so backward() can target them.
Tape::NodeId sample_loss_node(Tape& tape, const MlpNodes& decoder, const MlpNodes& encoder0,
                              Tape::NodeId x, Objective objective, double lambda,
                              const GnConfig& gn);

/// Batch objective values (mean over samples). The model mode must match the
/// objective: canonical/weak_ri need direct, meta needs gauss_newton.
double canonical_loss(const AutoencoderModel& m, const Tensor& batch);
double meta_loss(const AutoencoderModel& m, const Tensor& batch);
double weak_ri_loss(const AutoencoderModel& m, const Tensor& batch, double lambda);

struct BatchGrad {
    double loss = 0.0;
    Tensor grad;  // flat, decoder params then encoder0 params
    int escalations = 0;  // samples that needed damping escalation
};

/// Mean loss and gradient over the batch rows. Per-sample contributions are
/// summed in fixed blocks of 16 samples and the block sums combined in order,
/// so the result is bit-identical for any thread count, including the serial
/// reference (parallel = false).
BatchGrad batch_loss_grad(const AutoencoderModel& m, const Tensor& batch,
                          Objective objective, double lambda, bool parallel);

}  // namespace metaenc
