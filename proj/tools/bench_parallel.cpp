// Benchmark of the OpenMP-parallel hot loops against the serial reference
// path: trajectory generation, batched loss gradients, and evaluation
// rollouts. The two paths must agree bit-for-bit (fixed-chunk reductions),
// which is asserted here alongside the timings.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "podinn/evaluation.hpp"
#include "podinn/model_zoo.hpp"
#include "podinn/parallel.hpp"
#include "podinn/systems.hpp"
#include "podinn/training.hpp"

using namespace podinn;

namespace {

template <class Fn>
double timed_ms(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void set_serial(bool serial) { setenv("PODINN_SERIAL", serial ? "1" : "0", 1); }

int report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-24s serial %8.1f ms   parallel %8.1f ms   speedup %.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "bit-identical" : "MISMATCH");
    return identical ? 0 : 1;
}

}  // namespace

int main() {
    std::printf("threads available: %d\n", max_threads());
    int failures = 0;

    {
        auto spec = system_spec("b");
        Dataset serial_ds, parallel_ds;
        set_serial(true);
        const double ts = timed_ms([&] { serial_ds = generate(spec, 40, 100, 11); });
        set_serial(false);
        const double tp = timed_ms([&] { parallel_ds = generate(spec, 40, 100, 11); });
        failures += report("generate b 40x100", ts, tp,
                           serial_ds.obs == parallel_ds.obs && serial_ds.ext == parallel_ds.ext);
    }

    {
        auto spec = system_spec("b");
        set_serial(false);
        auto ds = generate(spec, 10, 60, 3);
        ParamSet params;
        ModelOptions opt;
        opt.hidden = 64;
        opt.init_seed = 1;
        auto model = build_model(spec, opt, params);
        auto td = prepare_training_data(ds);
        std::vector<std::pair<int, int>> batch;
        for (int k = 0; k < 100; ++k) batch.push_back({k % 10, (7 * k) % 59});
        std::vector<double> g_serial, g_parallel;
        double l_serial = 0.0, l_parallel = 0.0;
        set_serial(true);
        const double ts = timed_ms([&] {
            for (int rep = 0; rep < 10; ++rep) {
                l_serial = one_step_loss(model, params, td, batch, 1, &g_serial);
            }
        });
        set_serial(false);
        const double tp = timed_ms([&] {
            for (int rep = 0; rep < 10; ++rep) {
                l_parallel = one_step_loss(model, params, td, batch, 1, &g_parallel);
            }
        });
        failures += report("loss gradient x10", ts, tp,
                           l_serial == l_parallel && g_serial == g_parallel);
    }

    {
        auto spec = system_spec("g");
        set_serial(false);
        auto ds = generate(spec, 8, 100, 5);
        ParamSet params;
        auto truth = build_truth_model(spec, params);
        EvalReport serial_rep, parallel_rep;
        set_serial(true);
        const double ts =
            timed_ms([&] { serial_rep = evaluate_model(AnyModel{truth}, params, ds, ds.theta); });
        set_serial(false);
        const double tp =
            timed_ms([&] { parallel_rep = evaluate_model(AnyModel{truth}, params, ds, ds.theta); });
        failures += report("eval rollouts g 8x100", ts, tp,
                           serial_rep.per_traj_mse == parallel_rep.per_traj_mse);
    }

    return failures;
}
