#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "podinn/errors.hpp"

namespace podinn {

inline constexpr int dataset_schema_version = 1;

/// Sampled observations and external-effort records on a shared dt grid.
/// Layout: row-major [trajectory][step][dimension].
struct Dataset {
    std::string system;
    double dt = 0.1;
    int n_traj = 0;
    int n_steps = 0;  ///< samples per trajectory, including t = 0
    std::uint64_t seed = 0;
    double theta = 1e-3;  ///< VPT threshold used when evaluating on this data
    std::vector<std::string> obs_names;
    std::vector<std::string> ext_names;
    std::vector<double> obs;
    std::vector<double> ext;

    [[nodiscard]] int obs_dim() const { return static_cast<int>(obs_names.size()); }
    [[nodiscard]] int ext_dim() const { return static_cast<int>(ext_names.size()); }
    [[nodiscard]] double time_at(int step) const { return step * dt; }

    [[nodiscard]] std::span<const double> obs_at(int traj, int step) const {
        const std::size_t d = obs_names.size();
        return {obs.data() + (static_cast<std::size_t>(traj) * n_steps + step) * d, d};
    }
    [[nodiscard]] std::span<double> obs_at(int traj, int step) {
        const std::size_t d = obs_names.size();
        return {obs.data() + (static_cast<std::size_t>(traj) * n_steps + step) * d, d};
    }
    [[nodiscard]] std::span<const double> ext_at(int traj, int step) const {
        const std::size_t d = ext_names.size();
        return {ext.data() + (static_cast<std::size_t>(traj) * n_steps + step) * d, d};
    }
    [[nodiscard]] std::span<double> ext_at(int traj, int step) {
        const std::size_t d = ext_names.size();
        return {ext.data() + (static_cast<std::size_t>(traj) * n_steps + step) * d, d};
    }

    void allocate() {
        obs.assign(static_cast<std::size_t>(n_traj) * n_steps * obs_names.size(), 0.0);
        ext.assign(static_cast<std::size_t>(n_traj) * n_steps * ext_names.size(), 0.0);
    }

    /// Per-dimension standard deviation over every recorded observation.
    [[nodiscard]] std::vector<double> observation_stds() const;
};

/// Writes meta.json and trajectories.csv; doubles are formatted with exact
/// round-trip precision.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace podinn
