#include "podinn/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace podinn {

namespace {

nlohmann::json layout_json(const PortLayout& layout) {
    nlohmann::json j;
    j["storage"] = nlohmann::json::array();
    for (const auto& s : layout.storage) {
        j["storage"].push_back({{"name", s.name}, {"domain", to_string(s.domain)}});
    }
    j["resistive"] = nlohmann::json::array();
    for (const auto& r : layout.resistive) {
        j["resistive"].push_back({{"name", r.name}, {"flow", to_string(r.flow)}});
    }
    j["external"] = nlohmann::json::array();
    for (const auto& e : layout.external) {
        j["external"].push_back({{"name", e.name}, {"effort", to_string(e.effort)}});
    }
    return j;
}

const char* status_name(EntryStatus s) {
    switch (s) {
        case EntryStatus::FixedZero: return "fixed-zero";
        case EntryStatus::FixedValue: return "fixed-value";
        case EntryStatus::Learnable: return "learnable";
    }
    return "?";
}

nlohmann::json bivector_json(const Bivector& b, const ParamSet& params) {
    nlohmann::json j;
    j["n"] = b.dim();
    j["entries"] = nlohmann::json::array();
    for (const auto& e : b.entries()) {
        nlohmann::json je;
        je["i"] = e.i;
        je["j"] = e.j;
        je["status"] = status_name(e.status);
        je["value"] = e.status == EntryStatus::Learnable ? params[e.slot] : e.value;
        j["entries"].push_back(je);
    }
    return j;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SystemSpec& spec,
                     const ModelOptions& options, const AnyModel& model,
                     const ParamSet& params, long iteration, std::uint64_t config_hash) {
    nlohmann::json j;
    j["schema_version"] = checkpoint_schema_version;
    j["system"] = spec.id;
    j["iteration"] = iteration;
    j["config_hash"] = config_hash;
    j["options"] = {{"kind", options.kind},
                    {"hidden", options.hidden},
                    {"n_d", options.n_d},
                    {"n_g", options.n_g},
                    {"init_seed", options.init_seed}};
    if (const auto* pd = std::get_if<PoissonDiracModel>(&model)) {
        j["layout"] = layout_json(pd->layout);
        j["bivector"] = bivector_json(pd->bivector, params);
        nlohmann::json scales = nlohmann::json::array();
        for (const auto& s : pd->obs_map.scales) {
            scales.push_back(s.log_slot == no_slot ? nlohmann::json(nullptr)
                                                   : nlohmann::json(params[s.log_slot]));
        }
        j["observation_log_scales"] = scales;
    }
    nlohmann::json slices = nlohmann::json::array();
    for (const auto& s : params.slices()) {
        nlohmann::json js;
        js["name"] = s.name;
        js["offset"] = s.offset;
        js["size"] = s.size;
        js["values"] = std::vector<double>(params.view(s.offset, s.size).begin(),
                                           params.view(s.offset, s.size).end());
        slices.push_back(js);
    }
    j["parameters"] = slices;

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write checkpoint: " + path.string());
    out << j.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("missing checkpoint file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("malformed checkpoint JSON: " + std::string(e.what()));
    }
    if (!j.contains("schema_version") ||
        j["schema_version"].get<int>() != checkpoint_schema_version) {
        throw SchemaError("checkpoint schema version mismatch: " + path.string());
    }

    LoadedCheckpoint out;
    try {
        out.spec = system_spec(j.at("system").get<std::string>());
        out.iteration = j.at("iteration").get<long>();
        out.config_hash = j.value("config_hash", std::uint64_t{0});
        const auto& o = j.at("options");
        out.options.kind = o.at("kind").get<std::string>();
        out.options.hidden = o.at("hidden").get<int>();
        out.options.n_d = o.at("n_d").get<int>();
        out.options.n_g = o.at("n_g").get<int>();
        out.options.init_seed = o.at("init_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("checkpoint missing fields: " + std::string(e.what()));
    }

    out.model = build_model(out.spec, out.options, out.params);
    for (const auto& js : j.at("parameters")) {
        const auto name = js.at("name").get<std::string>();
        if (!out.params.has_slice(name)) {
            throw SchemaError("checkpoint parameter slice '" + name +
                              "' does not exist in the rebuilt model");
        }
        const auto& slice = out.params.slice(name);
        const auto values = js.at("values").get<std::vector<double>>();
        if (slice.offset != js.at("offset").get<std::size_t>() || slice.size != values.size()) {
            throw SchemaError("checkpoint parameter slice '" + name + "' has mismatched shape");
        }
        auto dst = out.params.view(slice.offset, slice.size);
        std::copy(values.begin(), values.end(), dst.begin());
    }
    return out;
}

}  // namespace podinn
