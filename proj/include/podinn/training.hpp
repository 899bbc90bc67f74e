#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "podinn/dataset.hpp"
#include "podinn/model.hpp"
#include "podinn/params.hpp"

namespace podinn {

struct TrainConfig {
    long iterations = 100'000;
    int batch_size = 100;
    double lr0 = 1e-3;  ///< cosine-annealed to zero at the final iteration
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int substeps = 4;  ///< RK4 compositions per one-step prediction
    std::uint64_t seed = 0;
    long checkpoint_interval = 2'000;
    long history_interval = 100;
    long start_iteration = 0;  ///< resume offset
};

struct TrainHistory {
    std::vector<long> iterations;
    std::vector<double> losses;
    std::vector<double> lrs;
    std::vector<double> wall_ms;
};

struct TrainResult {
    TrainHistory history;
    double final_loss = 0.0;
    long iterations_run = 0;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Standard bias-corrected Adam update, in place.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// lr0/2 (1 + cos(pi i/(n-1))): full rate at i=0, exactly zero at the last
/// iteration.
double cosine_lr(double lr0, long iteration, long total_iterations);

/// Dataset plus per-trajectory input signals and the per-dimension
/// normalization computed over the full training subset.
struct TrainData {
    const Dataset* data = nullptr;
    std::vector<ExternalStream> streams;
    std::vector<double> stds;
};

/// Regenerates analytic input signals when the dataset's system is known;
/// falls back to linear interpolation of the recorded columns otherwise.
/// Throws UsageError naming the dimension if any observation is constant.
TrainData prepare_training_data(const Dataset& ds);

/// Mean over batch items and dimensions of ((pred - next)/sigma)^2, where
/// pred is one RK4 step of the model field over dt.
double one_step_loss(const AnyModel& model, const ParamSet& params, const TrainData& data,
                     std::span<const std::pair<int, int>> batch, int substeps,
                     std::vector<double>* grad_out = nullptr);

/// Adam + cosine schedule over mini-batches of random (trajectory, step)
/// pairs. Deterministic given the seed regardless of thread count (fixed
/// chunked reduction). on_checkpoint fires every checkpoint_interval
/// iterations and once at the end.
TrainResult train(const AnyModel& model, ParamSet& params, const TrainData& data,
                  const TrainConfig& config,
                  const std::function<void(long, const ParamSet&)>& on_checkpoint = {});

void write_history_csv(const TrainHistory& history, const std::string& path);

}  // namespace podinn
