#include "podinn/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "podinn/checkpoint.hpp"
#include "podinn/evaluation.hpp"
#include "podinn/model_zoo.hpp"
#include "podinn/systems.hpp"
#include "podinn/training.hpp"

namespace podinn {

namespace {

namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Every command records the resolved configuration and its hash next to
/// its outputs, so runs are reproducible from the artifacts alone.
void write_run_record(const fs::path& out_dir, const std::string& command,
                      const std::string& config_str, std::uint64_t hash) {
    fs::create_directories(out_dir);
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = hash;
    j["config"] = config_str;
    std::ofstream out(out_dir / "run.json");
    out << j.dump(2) << "\n";
}

struct CliState {
    // generate
    std::string system = "b";
    int n_traj = 100;
    int n_steps = 200;
    double theta = -1.0;
    // train
    std::string data_dir;
    std::string model = "podinn";
    int hidden = 200;
    int n_d = -1;
    int n_g = -1;
    long iterations = 20'000;
    int batch = 100;
    double lr0 = 1e-3;
    int substeps = 4;
    long checkpoint_interval = 2'000;
    std::string resume;
    // eval / analyze / export-plots
    std::string checkpoint;
    std::vector<std::string> checkpoints;
    int traj = 0;
    // shared
    double atol = 1e-7;
    double rtol = 1e-9;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

int cmd_generate(const CliState& st, const std::string& config_str, std::uint64_t hash) {
    auto spec = system_spec(st.system);
    auto ds = generate(spec, st.n_traj, st.n_steps, st.seed, st.atol, st.rtol);
    if (st.theta > 0.0) ds.theta = st.theta;
    write_dataset(ds, st.out_dir);
    write_run_record(st.out_dir, "generate", config_str, hash);
    std::cout << "wrote " << ds.n_traj << " x " << ds.n_steps << " grid for system "
              << ds.system << " to " << st.out_dir << "\n";
    return 0;
}

int cmd_train(const CliState& st, const std::string& config_str, std::uint64_t hash) {
    if (st.data_dir.empty()) throw UsageError("train: --data is required");
    Dataset ds = read_dataset(st.data_dir);
    auto spec = system_spec(ds.system);

    ParamSet params;
    AnyModel model;
    ModelOptions opt;
    TrainConfig cfg;
    if (!st.resume.empty()) {
        auto loaded = load_checkpoint(st.resume);
        if (loaded.spec.id != ds.system) {
            throw SchemaError("checkpoint system '" + loaded.spec.id +
                              "' does not match dataset system '" + ds.system + "'");
        }
        opt = loaded.options;
        params = std::move(loaded.params);
        model = std::move(loaded.model);
        cfg.start_iteration = loaded.iteration;
    } else {
        opt.kind = st.model;
        opt.hidden = st.hidden;
        opt.n_d = st.n_d;
        opt.n_g = st.n_g;
        opt.init_seed = st.seed;
        model = build_model(spec, opt, params);
    }
    cfg.iterations = st.iterations;
    cfg.batch_size = st.batch;
    cfg.lr0 = st.lr0;
    cfg.substeps = st.substeps;
    cfg.seed = st.seed;
    cfg.checkpoint_interval = st.checkpoint_interval;

    const fs::path out(st.out_dir);
    fs::create_directories(out);
    write_run_record(out, "train", config_str, hash);
    const fs::path ckpt_path = out / "checkpoint.json";
    auto data = prepare_training_data(ds);
    auto result = train(model, params, data, cfg, [&](long iter, const ParamSet& p) {
        save_checkpoint(ckpt_path, spec, opt, model, p, iter, hash);
    });
    write_history_csv(result.history, (out / "history.csv").string());
    std::cout << "trained " << result.iterations_run << " iterations, final loss "
              << result.final_loss << ", checkpoint " << ckpt_path << "\n";
    return 0;
}

int cmd_eval(const CliState& st, const std::string& config_str, std::uint64_t hash) {
    if (st.data_dir.empty() || st.checkpoint.empty()) {
        throw UsageError("eval: --data and --checkpoint are required");
    }
    Dataset ds = read_dataset(st.data_dir);
    auto loaded = load_checkpoint(st.checkpoint);
    const double theta = st.theta > 0.0 ? st.theta : ds.theta;
    auto report = evaluate_model(loaded.model, loaded.params, ds, theta, st.atol, st.rtol);

    const fs::path out(st.out_dir);
    fs::create_directories(out);
    write_run_record(out, "eval", config_str, hash);
    {
        std::ofstream j(out / "report.json");
        j << eval_report_json(report) << "\n";
    }
    for (int tr = 0; tr < ds.n_traj; ++tr) {
        std::ofstream csv(out / ("mse_traj" + std::to_string(tr) + ".csv"));
        csv << "step,mse\n";
        for (std::size_t n = 0; n < report.mse_series[tr].size(); ++n) {
            csv << (n + 1) << ',' << report.mse_series[tr][n] << '\n';
        }
    }
    std::cout << "overall MSE " << report.overall << ", mean VPT " << report.mean_vpt
              << " at theta " << theta << "\n";
    return 0;
}

int cmd_analyze(const CliState& st, const std::string& config_str, std::uint64_t hash) {
    if (st.checkpoint.empty()) throw UsageError("analyze: --checkpoint is required");
    auto loaded = load_checkpoint(st.checkpoint);
    const auto* pd = std::get_if<PoissonDiracModel>(&loaded.model);
    if (pd == nullptr) {
        throw UsageError("analyze: checkpoint holds no bivector (neural-ode model)");
    }
    auto report = coupling_report(pd->bivector, pd->layout, loaded.params);
    const fs::path out(st.out_dir);
    fs::create_directories(out);
    write_run_record(out, "analyze", config_str, hash);
    {
        std::ofstream j(out / "coupling.json");
        j << coupling_report_json(report) << "\n";
    }
    const std::string laws = kirchhoff_view(report, pd->layout, loaded.params, pd->bivector);
    {
        std::ofstream txt(out / "kirchhoff.txt");
        txt << laws;
    }
    std::cout << "detected " << report.detected.size() << " couplings, suppressed "
              << report.suppressed.size() << ", storage rank " << report.storage_rank.rank
              << "\n"
              << laws;
    return 0;
}

int cmd_export_plots(const CliState& st, const std::string& config_str, std::uint64_t hash) {
    if (st.data_dir.empty()) throw UsageError("export-plots: --data is required");
    Dataset ds = read_dataset(st.data_dir);
    if (st.traj < 0 || st.traj >= ds.n_traj) throw UsageError("export-plots: --traj out of range");
    const fs::path out(st.out_dir);
    fs::create_directories(out);
    write_run_record(out, "export-plots", config_str, hash);

    {
        std::ofstream csv(out / ("truth_traj" + std::to_string(st.traj) + ".csv"));
        csv << "step,t";
        for (const auto& n : ds.obs_names) csv << ',' << n;
        csv << '\n';
        for (int stp = 0; stp < ds.n_steps; ++stp) {
            csv << stp << ',' << ds.time_at(stp);
            for (double v : ds.obs_at(st.traj, stp)) csv << ',' << v;
            csv << '\n';
        }
    }
    std::vector<double> times(static_cast<std::size_t>(ds.n_steps));
    for (int k = 0; k < ds.n_steps; ++k) times[k] = ds.time_at(k);
    const auto streams = dataset_streams(ds);
    int trial = 0;
    for (const auto& ck : st.checkpoints) {
        auto loaded = load_checkpoint(ck);
        auto pred = rollout(loaded.model, loaded.params, ds.obs_at(st.traj, 0), times,
                            streams[st.traj], st.atol, st.rtol);
        std::ofstream csv(out / ("error_traj" + std::to_string(st.traj) + "_trial" +
                                 std::to_string(trial) + ".csv"));
        csv << "step,t";
        for (const auto& n : ds.obs_names) csv << ',' << n;
        csv << '\n';
        for (int stp = 0; stp < ds.n_steps; ++stp) {
            csv << stp << ',' << ds.time_at(stp);
            auto truth = ds.obs_at(st.traj, stp);
            for (int d = 0; d < ds.obs_dim(); ++d) {
                csv << ',' << std::abs(pred[stp][d] - truth[d]);
            }
            csv << '\n';
        }
        ++trial;
    }
    std::cout << "exported truth and " << trial << " error trails for trajectory " << st.traj
              << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Poisson-Dirac port-coupled dynamics models: data generation, training, "
                 "evaluation, and coupling analysis"};
    app.require_subcommand(1);
    app.set_config("--config", "", "experiment manifest (key=value, [subcommand] sections)");

    CliState st;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", st.seed, "deterministic seed");
        cmd->add_option("--out", st.out_dir, "output directory");
        cmd->add_option("--atol", st.atol, "integrator absolute tolerance");
        cmd->add_option("--rtol", st.rtol, "integrator relative tolerance");
    };

    auto* gen = app.add_subcommand("generate", "generate a ground-truth dataset");
    gen->add_option("--system", st.system, "system id")->required();
    gen->add_option("--n-traj", st.n_traj, "trajectories");
    gen->add_option("--n-steps", st.n_steps, "grid samples per trajectory");
    gen->add_option("--theta", st.theta, "VPT threshold stored in the dataset");
    add_common(gen);

    auto* tr = app.add_subcommand("train", "train a model with one-step predictions");
    tr->add_option("--data", st.data_dir, "training dataset directory")->required();
    tr->add_option("--model", st.model, "podinn | neural-ode");
    tr->add_option("--hidden", st.hidden, "hidden width of component networks");
    tr->add_option("--n-d", st.n_d, "assumed default-flow resistive ports (-1: true count)");
    tr->add_option("--n-g", st.n_g, "assumed voltage-flow resistors (-1: true count)");
    tr->add_option("--iterations", st.iterations, "training iterations");
    tr->add_option("--batch", st.batch, "batch size");
    tr->add_option("--lr", st.lr0, "initial learning rate (cosine-annealed to zero)");
    tr->add_option("--substeps", st.substeps, "RK4 substeps per prediction");
    tr->add_option("--checkpoint-interval", st.checkpoint_interval, "iterations per checkpoint");
    tr->add_option("--resume", st.resume, "checkpoint to resume from");
    add_common(tr);

    auto* ev = app.add_subcommand("eval", "initial-value rollouts, MSE and VPT");
    ev->add_option("--data", st.data_dir, "test dataset directory")->required();
    ev->add_option("--checkpoint", st.checkpoint, "model checkpoint")->required();
    ev->add_option("--theta", st.theta, "VPT threshold (default: dataset theta)");
    add_common(ev);

    auto* an = app.add_subcommand("analyze", "coupling report and circuit laws");
    an->add_option("--checkpoint", st.checkpoint, "model checkpoint")->required();
    add_common(an);

    auto* ex = app.add_subcommand("export-plots", "truth and per-trial error CSVs");
    ex->add_option("--data", st.data_dir, "dataset directory")->required();
    ex->add_option("--checkpoints", st.checkpoints, "trial checkpoints")->delimiter(',');
    ex->add_option("--traj", st.traj, "trajectory index");
    add_common(ex);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e);  // --help
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        if (dynamic_cast<const CLI::ValidationError*>(&e) == nullptr) {
            std::cerr << "valid systems: ";
            for (const auto& id : known_system_ids()) std::cerr << id << ' ';
            std::cerr << "\n";
        }
        return 2;
    }

    const std::string config_str = app.config_to_str(true, false);
    const std::uint64_t hash = fnv1a(config_str);
    try {
        if (gen->parsed()) return cmd_generate(st, config_str, hash);
        if (tr->parsed()) return cmd_train(st, config_str, hash);
        if (ev->parsed()) return cmd_eval(st, config_str, hash);
        if (an->parsed()) return cmd_analyze(st, config_str, hash);
        if (ex->parsed()) return cmd_export_plots(st, config_str, hash);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        std::cerr << "valid systems: ";
        for (const auto& id : known_system_ids()) std::cerr << id << ' ';
        std::cerr << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "data/schema error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace podinn
