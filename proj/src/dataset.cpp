#include "podinn/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace podinn {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return {buf, ptr};
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw SchemaError("malformed number in trajectories.csv: " + std::string(s));
    }
    return v;
}

}  // namespace

std::vector<double> Dataset::observation_stds() const {
    const int d = obs_dim();
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    const std::size_t rows = static_cast<std::size_t>(n_traj) * n_steps;
    for (std::size_t r = 0; r < rows; ++r) {
        for (int k = 0; k < d; ++k) mean[k] += obs[r * d + k];
    }
    for (int k = 0; k < d; ++k) mean[k] /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (int k = 0; k < d; ++k) {
            const double dd = obs[r * d + k] - mean[k];
            var[k] += dd * dd;
        }
    }
    std::vector<double> sd(d);
    for (int k = 0; k < d; ++k) sd[k] = std::sqrt(var[k] / static_cast<double>(rows));
    return sd;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    nlohmann::json meta;
    meta["schema_version"] = dataset_schema_version;
    meta["system"] = ds.system;
    meta["dt"] = ds.dt;
    meta["n_traj"] = ds.n_traj;
    meta["n_steps"] = ds.n_steps;
    meta["seed"] = ds.seed;
    meta["theta"] = ds.theta;
    meta["obs_names"] = ds.obs_names;
    meta["ext_names"] = ds.ext_names;
    {
        std::ofstream out(dir / "meta.json");
        if (!out) throw SchemaError("cannot write " + (dir / "meta.json").string());
        out << meta.dump(2) << "\n";
    }

    std::ofstream csv(dir / "trajectories.csv");
    if (!csv) throw SchemaError("cannot write " + (dir / "trajectories.csv").string());
    csv << "traj_id,step,t";
    for (const auto& n : ds.obs_names) csv << ',' << n;
    for (const auto& n : ds.ext_names) csv << ',' << n;
    csv << '\n';
    std::string line;
    for (int tr = 0; tr < ds.n_traj; ++tr) {
        for (int st = 0; st < ds.n_steps; ++st) {
            line.clear();
            line += std::to_string(tr);
            line += ',';
            line += std::to_string(st);
            line += ',';
            line += format_double(ds.time_at(st));
            for (double v : ds.obs_at(tr, st)) {
                line += ',';
                line += format_double(v);
            }
            for (double v : ds.ext_at(tr, st)) {
                line += ',';
                line += format_double(v);
            }
            line += '\n';
            csv << line;
        }
    }
}

Dataset read_dataset(const std::filesystem::path& dir) {
    const auto meta_path = dir / "meta.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw SchemaError("missing dataset meta file: " + meta_path.string());
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("malformed meta.json: " + std::string(e.what()));
    }
    if (!meta.contains("schema_version") ||
        meta["schema_version"].get<int>() != dataset_schema_version) {
        throw SchemaError("dataset schema version mismatch in " + meta_path.string());
    }

    Dataset ds;
    try {
        ds.system = meta.at("system").get<std::string>();
        ds.dt = meta.at("dt").get<double>();
        ds.n_traj = meta.at("n_traj").get<int>();
        ds.n_steps = meta.at("n_steps").get<int>();
        ds.seed = meta.at("seed").get<std::uint64_t>();
        ds.theta = meta.at("theta").get<double>();
        ds.obs_names = meta.at("obs_names").get<std::vector<std::string>>();
        ds.ext_names = meta.at("ext_names").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("meta.json missing fields: " + std::string(e.what()));
    }
    ds.allocate();

    std::ifstream csv(dir / "trajectories.csv");
    if (!csv) throw SchemaError("missing trajectories.csv in " + dir.string());
    std::string line;
    if (!std::getline(csv, line)) throw SchemaError("empty trajectories.csv");
    {
        std::string expect = "traj_id,step,t";
        for (const auto& n : ds.obs_names) expect += "," + n;
        for (const auto& n : ds.ext_names) expect += "," + n;
        if (line != expect) throw SchemaError("trajectories.csv header does not match meta.json");
    }

    const int d_obs = ds.obs_dim();
    const int d_ext = ds.ext_dim();
    std::size_t rows = 0;
    std::vector<std::string_view> fields;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        fields.clear();
        std::string_view sv(line);
        std::size_t pos = 0;
        while (pos <= sv.size()) {
            const std::size_t comma = sv.find(',', pos);
            if (comma == std::string_view::npos) {
                fields.push_back(sv.substr(pos));
                break;
            }
            fields.push_back(sv.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (static_cast<int>(fields.size()) != 3 + d_obs + d_ext) {
            throw SchemaError("trajectories.csv row has wrong column count");
        }
        const int tr = static_cast<int>(parse_double(fields[0]));
        const int st = static_cast<int>(parse_double(fields[1]));
        if (tr < 0 || tr >= ds.n_traj || st < 0 || st >= ds.n_steps) {
            throw SchemaError("trajectories.csv row out of declared grid");
        }
        auto orow = ds.obs_at(tr, st);
        for (int k = 0; k < d_obs; ++k) orow[k] = parse_double(fields[3 + k]);
        auto erow = ds.ext_at(tr, st);
        for (int k = 0; k < d_ext; ++k) erow[k] = parse_double(fields[3 + d_obs + k]);
        ++rows;
    }
    if (rows != static_cast<std::size_t>(ds.n_traj) * ds.n_steps) {
        throw SchemaError("trajectories.csv row count does not match meta.json grid");
    }
    return ds;
}

}  // namespace podinn
