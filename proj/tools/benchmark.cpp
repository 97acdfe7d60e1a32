// Compares the serial reference batch gradient against the OpenMP-parallel
// path on a few representative shapes and confirms bit-identical results.
#include <chrono>
#include <cstdio>

#include "metaenc/dataset.hpp"
#include "metaenc/objectives.hpp"
#include "metaenc/train.hpp"

using namespace metaenc;

namespace {

double time_run(const AutoencoderModel& m, const Tensor& batch, Objective obj,
                bool parallel, int reps, BatchGrad& out) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        out = batch_loss_grad(m, batch, obj, 0.0, parallel);
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt < best) best = dt;
    }
    return best;
}

void bench_case(const char* label, std::size_t n, std::size_t h, std::size_t r,
                std::size_t batch_size, Objective obj, int gn_iters) {
    GnConfig gn;
    gn.iterations = gn_iters;
    const EncoderMode mode =
        obj == Objective::meta ? EncoderMode::gauss_newton : EncoderMode::direct;
    AutoencoderModel m = make_model(n, h, r, mode, 7, gn);
    Dataset d = synthetic_manifold(ManifoldKind::tanh_image, n, r, batch_size, 0.01, 11);

    BatchGrad serial, parallel;
    const double ts = time_run(m, d.samples, obj, false, 3, serial);
    const double tp = time_run(m, d.samples, obj, true, 3, parallel);
    const bool identical =
        serial.loss == parallel.loss && serial.grad.data == parallel.grad.data;
    std::printf("%-28s n=%-4zu h=%-4zu r=%-2zu batch=%-4zu  serial %8.1f ms  "
                "parallel %8.1f ms  speedup %5.2fx  bit-identical %s\n",
                label, n, h, r, batch_size, ts * 1e3, tp * 1e3, ts / tp,
                identical ? "yes" : "NO");
}

}  // namespace

int main() {
    bench_case("canonical small", 32, 16, 4, 256, Objective::canonical, 0);
    bench_case("canonical desk-scale", 784, 100, 5, 128, Objective::canonical, 0);
    bench_case("meta small", 32, 16, 4, 128, Objective::meta, 4);
    bench_case("meta desk-scale", 784, 100, 5, 64, Objective::meta, 4);
    return 0;
}
