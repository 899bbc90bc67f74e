#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "podinn/components.hpp"
#include "podinn/dataset.hpp"
#include "podinn/integrators.hpp"

namespace podinn {

enum class CoordinateMode { Relative, Absolute };

enum class SystemFamily {
    MassSpringForced,    ///< (a): chain from a fixed wall, external force
    MassSpringBoundary,  ///< (b): chain from a moving wall
    Redundant2D,         ///< (c): two masses, five springs, 2-D, conservative
    FitzHughNagumo,      ///< (d)
    Chua,                ///< (e)
    DcMotor,             ///< (f)
    HydraulicTank,       ///< (g)
};

/// Frozen description of one benchmark system: physical parameters,
/// initial-condition and input distributions, grid step, and the VPT
/// threshold used on its evaluations.
struct SystemSpec {
    std::string id;
    SystemFamily family;
    CoordinateMode mode = CoordinateMode::Relative;
    double dt = 0.1;
    double theta = 1e-3;
    int state_dim = 0;
    std::vector<std::string> obs_names;
    std::vector<std::string> ext_names;
    int n_ext_efforts = 0;  ///< leading ext columns that are port efforts

    std::vector<std::pair<std::string, double>> params;

    [[nodiscard]] int obs_dim() const { return static_cast<int>(obs_names.size()); }
    [[nodiscard]] double param(const std::string& name) const;
};

SystemSpec system_spec(const std::string& id);
std::vector<std::string> known_system_ids();

/// External inputs of one trajectory: port-effort signals first, then
/// auxiliary recorded signals (a boundary position fed to networks).
struct ExternalStream {
    std::vector<ExternalSignal> efforts;
    std::vector<ExternalSignal> aux;

    [[nodiscard]] std::vector<double> efforts_at(double t) const;
    [[nodiscard]] std::vector<double> aux_at(double t) const;
    [[nodiscard]] std::vector<double> all_at(double t) const;
};

/// Deterministic per-trajectory draws; n_traj matters only for the constant
/// current of the FitzHugh-Nagumo set, which is evenly spaced over
/// trajectories rather than sampled.
ExternalStream external_stream(const SystemSpec& spec, std::uint64_t seed, std::uint64_t traj,
                               int n_traj);
std::vector<double> initial_state(const SystemSpec& spec, std::uint64_t seed,
                                  std::uint64_t traj);

/// Ground-truth right-hand side, evaluated exactly as printed.
void system_field(const SystemSpec& spec, std::span<const double> state, double t,
                  const ExternalStream& stream, std::span<double> du);

/// Observation row for one state (identity for every system but the 2-D
/// redundant one, whose 8-dim state projects to 14 observations).
void observe(const SystemSpec& spec, std::span<const double> state, std::span<double> obs);

/// Total energy of a state; defined for the conservative 2-D system and the
/// other mechanical/multiphysics systems (used by conservation checks).
double system_energy(const SystemSpec& spec, std::span<const double> state);

/// Integrate n_traj trajectories of n_steps grid samples with dopri5 and
/// record observations plus external-effort values. Deterministic per
/// (seed, trajectory index) and safe to parallelize over trajectories.
Dataset generate(const SystemSpec& spec, int n_traj, int n_steps, std::uint64_t seed,
                 double atol = 1e-7, double rtol = 1e-9);

/// Per-trajectory input signals for a dataset: regenerated analytically when
/// the system id is known, interpolated from the recorded columns otherwise.
std::vector<ExternalStream> dataset_streams(const Dataset& ds);

}  // namespace podinn
