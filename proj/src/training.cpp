#include "podinn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "podinn/integrators.hpp"
#include "podinn/parallel.hpp"
#include "podinn/rng.hpp"
#include "podinn/systems.hpp"

namespace podinn {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
    if (params.size() != grad.size() || params.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

double cosine_lr(double lr0, long iteration, long total_iterations) {
    if (total_iterations <= 1) return 0.0;
    const double x = static_cast<double>(iteration) / static_cast<double>(total_iterations - 1);
    return 0.5 * lr0 * (1.0 + std::cos(3.14159265358979323846 * std::min(1.0, x)));
}

TrainData prepare_training_data(const Dataset& ds) {
    TrainData td;
    td.data = &ds;
    td.stds = ds.observation_stds();
    for (std::size_t d = 0; d < td.stds.size(); ++d) {
        if (!(td.stds[d] > 0.0)) {
            throw UsageError("observation dimension '" + ds.obs_names[d] +
                             "' is constant over the training subset; cannot normalize");
        }
    }
    td.streams = dataset_streams(ds);
    return td;
}

namespace {

/// Loss and parameter gradient of a contiguous run of batch items,
/// accumulated serially on one tape.
double chunk_loss(const AnyModel& model, const TrainData& data,
                  std::span<const std::pair<int, int>> items, int substeps, ad::Tape& tape,
                  std::vector<double>* grad_out) {
    const Dataset& ds = *data.data;
    const int dim = ds.obs_dim();
    std::vector<double> inv_sigma(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) inv_sigma[k] = 1.0 / data.stds[k];

    double loss_sum = 0.0;
    for (const auto& [tr, st] : items) {
        const ExternalStream& stream = data.streams[static_cast<std::size_t>(tr)];
        tape.reset();
        auto field = [&](ad::Tape& ex, ad::NodeId u, double t) {
            return model_field(model, ex, u, ext_at(stream, t));
        };
        ad::NodeId obs = tape.constant(ds.obs_at(tr, st));
        ad::NodeId pred = rk4_step(tape, field, obs, ds.time_at(st), ds.dt, substeps);
        ad::NodeId resid = tape.sub(pred, tape.constant(ds.obs_at(tr, st + 1)));
        ad::NodeId scaled = tape.mul(resid, tape.constant(inv_sigma));
        ad::NodeId loss = tape.scale(tape.sum(tape.square(scaled)), 1.0 / dim);
        loss_sum += tape.scalar_value(loss);
        if (grad_out != nullptr) {
            tape.backward(loss, *grad_out);
        }
    }
    return loss_sum;
}

constexpr int kGradChunks = 16;  // fixed count keeps reductions thread-count independent

}  // namespace

double one_step_loss(const AnyModel& model, const ParamSet& params, const TrainData& data,
                     std::span<const std::pair<int, int>> batch, int substeps,
                     std::vector<double>* grad_out) {
    if (batch.empty()) throw std::invalid_argument("one_step_loss: empty batch");
    const int chunks = static_cast<int>(std::min<std::size_t>(kGradChunks, batch.size()));
    std::vector<double> partial_loss(chunks, 0.0);
    std::vector<std::vector<double>> partial_grad;
    if (grad_out != nullptr) {
        partial_grad.assign(chunks, std::vector<double>(params.size(), 0.0));
    }
    std::vector<ad::Tape> tapes;
    tapes.reserve(chunks);
    for (int c = 0; c < chunks; ++c) tapes.emplace_back(&params);

    // Exceptions may not unwind out of the parallel region; capture the
    // first one and rethrow afterwards.
    std::string error;
    parallel_for(chunks, [&](std::int64_t c) {
        try {
            const std::size_t lo = batch.size() * c / chunks;
            const std::size_t hi = batch.size() * (c + 1) / chunks;
            partial_loss[c] = chunk_loss(model, data, batch.subspan(lo, hi - lo), substeps,
                                         tapes[c], grad_out ? &partial_grad[c] : nullptr);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(podinn_loss_error)
#endif
            if (error.empty()) error = e.what();
        }
    });
    if (!error.empty()) throw NumericalError(error);

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (int c = 0; c < chunks; ++c) loss += partial_loss[c];
    loss *= inv_batch;
    if (grad_out != nullptr) {
        grad_out->assign(params.size(), 0.0);
        for (int c = 0; c < chunks; ++c) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                (*grad_out)[i] += partial_grad[c][i];
            }
        }
        for (auto& g : *grad_out) g *= inv_batch;
    }
    return loss;
}

TrainResult train(const AnyModel& model, ParamSet& params, const TrainData& data,
                  const TrainConfig& config,
                  const std::function<void(long, const ParamSet&)>& on_checkpoint) {
    if (config.iterations <= 0 || config.batch_size <= 0) {
        throw UsageError("train: iterations and batch size must be positive");
    }
    if (config.start_iteration >= config.iterations) {
        throw UsageError("train: resume iteration " + std::to_string(config.start_iteration) +
                         " is not below the target iteration count " +
                         std::to_string(config.iterations));
    }
    const Dataset& ds = *data.data;
    if (ds.n_steps < 2) throw UsageError("train: dataset has no transitions");

    TrainResult result;
    AdamState adam(params.size());
    std::vector<double> grad(params.size(), 0.0);
    std::vector<std::pair<int, int>> batch(static_cast<std::size_t>(config.batch_size));
    const auto t_start = std::chrono::steady_clock::now();

    for (long it = config.start_iteration; it < config.iterations; ++it) {
        // Fresh uniform sample over all (trajectory, step) transitions.
        CounterRng rng(config.seed ^ 0x7261696eULL, static_cast<std::uint64_t>(it));
        for (int k = 0; k < config.batch_size; ++k) {
            batch[k] = {static_cast<int>(rng.below(2 * k, ds.n_traj)),
                        static_cast<int>(rng.below(2 * k + 1, ds.n_steps - 1))};
        }
        const double loss = one_step_loss(model, params, data, batch, config.substeps, &grad);
        if (!std::isfinite(loss)) {
            throw NumericalError("training aborted: non-finite loss at iteration " +
                                 std::to_string(it) + " (last checkpoint retained)");
        }
        const double lr = cosine_lr(config.lr0, it, config.iterations);
        adam_step(params.values(), grad, adam, lr, config.beta1, config.beta2, config.eps);

        const bool last = it + 1 == config.iterations;
        if (it % config.history_interval == 0 || last) {
            const auto now = std::chrono::steady_clock::now();
            result.history.iterations.push_back(it);
            result.history.losses.push_back(loss);
            result.history.lrs.push_back(lr);
            result.history.wall_ms.push_back(
                std::chrono::duration<double, std::milli>(now - t_start).count());
        }
        if (on_checkpoint && (last || (it > 0 && it % config.checkpoint_interval == 0))) {
            on_checkpoint(it + 1, params);
        }
        result.final_loss = loss;
        result.iterations_run = it + 1;
    }
    return result;
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write history file: " + path);
    out << "iteration,loss,lr,wall_ms\n";
    for (std::size_t i = 0; i < history.iterations.size(); ++i) {
        out << history.iterations[i] << ',' << history.losses[i] << ',' << history.lrs[i]
            << ',' << history.wall_ms[i] << '\n';
    }
}

}  // namespace podinn
