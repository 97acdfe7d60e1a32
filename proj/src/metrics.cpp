#include "metaenc/metrics.hpp"

#include <algorithm>

#include "metaenc/errors.hpp"

namespace metaenc {

namespace {

// Per-sample contributions are stored and then summed serially in sample
// order, so the result does not depend on the thread count.
template <typename F>
double mean_over_samples(const Tensor& data, bool parallel, F&& per_sample) {
    const std::size_t count = data.rows();
    if (count == 0) throw ConfigError("metrics: empty data");
    std::vector<double> contrib(count, 0.0);
    std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
#endif
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
        if (failure) continue;
        try {
            contrib[i] = per_sample(data.row(static_cast<std::size_t>(i)));
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    double acc = 0.0;
    for (double v : contrib) acc += v;
    return acc / static_cast<double>(count);
}

double sq_dist_over(const Tensor& a, const Tensor& b, double denom) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / denom;
}

}  // namespace

double reconstruction_mse(const Codec& c, const Tensor& data, bool parallel) {
    const double n = static_cast<double>(c.full_dim);
    return mean_over_samples(data, parallel, [&](const Tensor& x) {
        return sq_dist_over(c.decode(c.encode(x)), x, n);
    });
}

double sr_mse(const Codec& c, const Tensor& data, bool parallel) {
    const double n = static_cast<double>(c.full_dim);
    return mean_over_samples(data, parallel, [&](const Tensor& x) {
        Tensor x1 = c.decode(c.encode(x));
        Tensor x2 = c.decode(c.encode(x1));
        return sq_dist_over(x2, x1, n);
    });
}

double right_inverse_residual(const Codec& c, const Tensor& data, bool parallel) {
    const double r = static_cast<double>(c.reduced_dim);
    return mean_over_samples(data, parallel, [&](const Tensor& x) {
        Tensor u = c.encode(x);
        Tensor u2 = c.encode(c.decode(u));
        return sq_dist_over(u2, u, r);
    });
}

Tensor kth_reconstruction(const Codec& c, const Tensor& x, int k) {
    if (k < 1) throw ConfigError("kth_reconstruction: k must be >= 1");
    Tensor cur = x;
    for (int i = 1; i <= k; ++i) {
        try {
            cur = c.decode(c.encode(cur));
        } catch (const std::runtime_error& e) {
            throw NonFiniteError("kth_reconstruction: failure at iterate " +
                                 std::to_string(i) + ": " + e.what());
        }
    }
    return cur;
}

EvalReport evaluate(const Codec& c, const Tensor& data, const std::string& name,
                    const std::vector<int>& k_list, bool parallel) {
    EvalReport rep;
    rep.dataset = name;
    rep.samples = data.rows();
    rep.mse = reconstruction_mse(c, data, parallel);
    rep.sr_mse = sr_mse(c, data, parallel);
    rep.ri_residual = right_inverse_residual(c, data, parallel);

    if (!k_list.empty()) {
        const int kmax = *std::max_element(k_list.begin(), k_list.end());
        const double n = static_cast<double>(c.full_dim);
        for (int k : k_list) rep.kth_recon_mse[k] = 0.0;
        const std::size_t count = data.rows();
        std::vector<std::map<int, double>> contrib(count);
        std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
#endif
        for (long long i = 0; i < static_cast<long long>(count); ++i) {
            if (failure) continue;
            try {
                const Tensor x = data.row(static_cast<std::size_t>(i));
                Tensor cur = x;
                for (int k = 1; k <= kmax; ++k) {
                    cur = c.decode(c.encode(cur));
                    if (std::count(k_list.begin(), k_list.end(), k))
                        contrib[i][k] = sq_dist_over(cur, x, n);
                }
            } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
        for (std::size_t i = 0; i < count; ++i)
            for (const auto& [k, v] : contrib[i]) rep.kth_recon_mse[k] += v;
        for (auto& [k, v] : rep.kth_recon_mse) v /= static_cast<double>(count);
    }
    return rep;
}

}  // namespace metaenc
