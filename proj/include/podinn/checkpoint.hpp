#pragma once

#include <filesystem>
#include <string>

#include "podinn/model.hpp"
#include "podinn/model_zoo.hpp"
#include "podinn/params.hpp"
#include "podinn/systems.hpp"

namespace podinn {

inline constexpr int checkpoint_schema_version = 1;

struct LoadedCheckpoint {
    SystemSpec spec;
    ModelOptions options;
    AnyModel model;
    ParamSet params;
    long iteration = 0;
    std::uint64_t config_hash = 0;
};

/// JSON checkpoint: schema version, system id, assembly options, port
/// layout, bivector entries, named parameter arrays (network weights,
/// observation-map log-scales, bivector coefficients), iteration count.
void save_checkpoint(const std::filesystem::path& path, const SystemSpec& spec,
                     const ModelOptions& options, const AnyModel& model,
                     const ParamSet& params, long iteration, std::uint64_t config_hash = 0);

/// Rebuilds the model from the stored assembly options and restores every
/// parameter slice; layout or slice mismatches raise SchemaError.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace podinn
