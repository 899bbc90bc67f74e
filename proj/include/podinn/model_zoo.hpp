#pragma once

#include <cstdint>
#include <string>

#include "podinn/model.hpp"
#include "podinn/params.hpp"
#include "podinn/systems.hpp"

namespace podinn {

/// Assembly choices for a trainable model.
struct ModelOptions {
    std::string kind = "podinn";  ///< podinn | neural-ode
    int hidden = 200;             ///< width of both hidden layers
    int n_d = -1;  ///< assumed resistive ports of the system's default flow kind (-1: true count)
    int n_g = -1;  ///< assumed voltage-flow resistors, circuits only (-1: true count)
    std::uint64_t init_seed = 0;
};

/// Trainable model for a benchmark system, assembled per its port layout,
/// compatibility mask, and the published initialization: dissipative- and
/// external-related bivector entries uniform on (-0.1, 0.1), storage-storage
/// entries zero unless fixed at canonical values (absolute coordinates, the
/// motor's unit couplings).
AnyModel build_model(const SystemSpec& spec, const ModelOptions& options, ParamSet& params);

/// Analytic ground-truth components and the true bivector; reproduces the
/// generator's dynamics exactly (systems a, b, d, f, g, both coordinate
/// modes of a and b).
PoissonDiracModel build_truth_model(const SystemSpec& spec, ParamSet& params);

}  // namespace podinn
