#pragma once

#include <map>
#include <string>
#include <vector>

#include "metaenc/model.hpp"
#include "metaenc/tensor.hpp"

namespace metaenc {

struct EvalReport {
    std::string dataset;
    std::size_t samples = 0;
    double mse = 0.0;
    double sr_mse = 0.0;
    double ri_residual = 0.0;
    std::map<int, double> kth_recon_mse;  // k -> mean ||(phi theta)^k x - x||^2 / (n N)
};

/// (1/(nN)) sum ||phi(theta(x)) - x||^2.
double reconstruction_mse(const Codec& c, const Tensor& data, bool parallel = true);

/// Second-reconstruction MSE: (1/(nN)) sum ||phi(theta(x1)) - x1||^2 for
/// x1 = phi(theta(x)); a right-inverse diagnostic.
double sr_mse(const Codec& c, const Tensor& data, bool parallel = true);

/// (1/(rN)) sum ||theta(phi(theta(x))) - theta(x)||^2.
double right_inverse_residual(const Codec& c, const Tensor& data, bool parallel = true);

/// (phi o theta) applied k times.
Tensor kth_reconstruction(const Codec& c, const Tensor& x, int k);

EvalReport evaluate(const Codec& c, const Tensor& data, const std::string& name,
                    const std::vector<int>& k_list, bool parallel = true);

}  // namespace metaenc
