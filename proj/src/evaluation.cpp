#include "podinn/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "podinn/parallel.hpp"
#include "podinn/systems.hpp"

namespace podinn {

std::pair<double, std::vector<double>> overall_mse(
    const std::vector<std::vector<double>>& pred,
    const std::vector<std::vector<double>>& truth) {
    if (pred.size() != truth.size()) {
        throw std::invalid_argument("overall_mse: trajectory length mismatch");
    }
    if (pred.empty()) throw std::invalid_argument("overall_mse: empty trajectories");
    std::vector<double> series;
    series.reserve(pred.size() - 1);
    for (std::size_t n = 1; n < pred.size(); ++n) {
        if (pred[n].size() != truth[n].size()) {
            throw std::invalid_argument("overall_mse: dimension mismatch");
        }
        double acc = 0.0;
        for (std::size_t d = 0; d < pred[n].size(); ++d) {
            const double r = pred[n][d] - truth[n][d];
            acc += r * r;
        }
        series.push_back(acc / static_cast<double>(pred[n].size()));
    }
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    return {mean, series};
}

double vpt(const std::vector<double>& mse_series, double theta) {
    if (mse_series.empty()) throw std::invalid_argument("vpt: empty series");
    if (!(theta > 0.0)) throw std::invalid_argument("vpt: theta must be positive");
    std::size_t n_f = 0;
    while (n_f < mse_series.size() && mse_series[n_f] < theta) ++n_f;
    return static_cast<double>(n_f) / static_cast<double>(mse_series.size());
}

EvalReport evaluate_model(const AnyModel& model, const ParamSet& params, const Dataset& test,
                          double theta, double atol, double rtol) {
    EvalReport report;
    report.theta = theta;
    report.per_traj_mse.assign(test.n_traj, 0.0);
    report.per_traj_vpt.assign(test.n_traj, 0.0);
    report.mse_series.assign(test.n_traj, {});
    report.diverged_at.assign(test.n_traj, -1.0);

    const auto streams = dataset_streams(test);
    std::vector<double> times(static_cast<std::size_t>(test.n_steps));
    for (int k = 0; k < test.n_steps; ++k) times[k] = test.time_at(k);

    std::string error;  // exceptions may not unwind out of the parallel region
    parallel_for(test.n_traj, [&](std::int64_t tr) {
        try {
            std::vector<std::vector<double>> pred;
            try {
                pred = rollout(model, params, test.obs_at(tr, 0), times, streams[tr], atol,
                               rtol);
            } catch (const NumericalError&) {
                pred.clear();
            }
            if (static_cast<int>(pred.size()) < test.n_steps) {
                // Integrate as far as possible step by step, then hold the
                // last state; record where the rollout broke down.
                pred.assign(1, std::vector<double>(test.obs_at(tr, 0).begin(),
                                                   test.obs_at(tr, 0).end()));
                for (int st = 1; st < test.n_steps; ++st) {
                    if (report.diverged_at[tr] < 0.0) {
                        try {
                            std::vector<double> seg = {times[st - 1], times[st]};
                            auto piece = rollout(model, params, pred.back(), seg, streams[tr],
                                                 atol, rtol);
                            pred.push_back(piece.back());
                            continue;
                        } catch (const NumericalError&) {
                            report.diverged_at[tr] = times[st - 1];
                        }
                    }
                    pred.push_back(pred.back());
                }
            }
            std::vector<std::vector<double>> truth;
            truth.reserve(static_cast<std::size_t>(test.n_steps));
            for (int st = 0; st < test.n_steps; ++st) {
                auto row = test.obs_at(tr, st);
                truth.emplace_back(row.begin(), row.end());
            }
            auto [mean, series] = overall_mse(pred, truth);
            report.per_traj_mse[tr] = mean;
            report.per_traj_vpt[tr] = vpt(series, theta);
            report.mse_series[tr] = std::move(series);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(podinn_eval_error)
#endif
            if (error.empty()) error = e.what();
        }
    });
    if (!error.empty()) throw NumericalError("evaluation failed: " + error);

    double acc = 0.0, vacc = 0.0;
    for (int tr = 0; tr < test.n_traj; ++tr) {
        acc += report.per_traj_mse[tr];
        vacc += report.per_traj_vpt[tr];
    }
    report.overall = acc / test.n_traj;
    report.mean_vpt = vacc / test.n_traj;
    return report;
}

CouplingReport coupling_report(const Bivector& b, const PortLayout& layout,
                               const ParamSet& params, double factor) {
    CouplingReport report;
    report.factor = factor;
    double max_abs = 0.0;
    for (const auto& e : b.entries()) {
        if (e.status == EntryStatus::Learnable) {
            max_abs = std::max(max_abs, std::abs(params[e.slot]));
        }
    }
    report.max_abs = max_abs;
    if (max_abs == 0.0) {
        report.note = "warning: all learnable couplings are zero; nothing to detect";
        report.storage_rank = degeneracy_rank(b, layout, params);
        return report;
    }
    for (const auto& e : b.entries()) {
        if (e.status != EntryStatus::Learnable) continue;
        CouplingEntry ce;
        ce.i = e.i;
        ce.j = e.j;
        ce.port_i = layout.name_of(e.i);
        ce.port_j = layout.name_of(e.j);
        ce.value = params[e.slot];
        if (std::abs(ce.value) > max_abs / factor) {
            report.detected.push_back(ce);
        } else {
            report.suppressed.push_back(ce);
        }
    }
    double max_detected = 0.0;
    for (const auto& ce : report.detected) {
        max_detected = std::max(max_detected, std::abs(ce.value));
    }
    for (auto& ce : report.detected) ce.normalized = ce.value / max_detected;
    report.note =
        "coefficients normalized to the largest detected magnitude; the overall "
        "scale cancels against component characteristics and is not identifiable";
    report.storage_rank = degeneracy_rank(b, layout, params);
    return report;
}

namespace {

std::string kind_letter(PortKind k) {
    switch (k) {
        case PortKind::Current: return "I";
        case PortKind::Voltage: return "V";
        default: return to_string(k);
    }
}

std::string term(double coeff, const std::string& label, bool first) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", std::abs(coeff));
    std::string out;
    if (coeff < 0.0) {
        out = first ? "-" : "- ";
    } else if (!first) {
        out = "+ ";
    }
    const bool unit = std::abs(std::abs(coeff) - 1.0) < 1e-12;
    if (!unit) {
        out += buf;
        out += "*";
    }
    out += label;
    return out;
}

}  // namespace

std::string kirchhoff_view(const CouplingReport& report, const PortLayout& layout,
                           const ParamSet& params, const Bivector& b) {
    for (const auto& s : layout.storage) {
        if (s.domain != Domain::Electric && s.domain != Domain::Magnetic) {
            return "unsupported domain: current/voltage laws apply to electro-magnetic "
                   "layouts only\n";
        }
    }
    auto detected = [&](int i, int j) {
        const int a = std::min(i, j), bb = std::max(i, j);
        for (const auto& ce : report.detected) {
            if (ce.i == a && ce.j == bb) return true;
        }
        // Fixed nonzero entries are known couplings and always listed.
        const BivectorEntry* e = b.find(a, bb);
        return e != nullptr && e->status == EntryStatus::FixedValue && e->value != 0.0;
    };

    std::string out;
    const int ns = layout.n_storage();
    const int nr = layout.n_resistive();
    for (int row = 0; row < ns + nr; ++row) {
        std::string line = kind_letter(layout.flow_of(row)) + "_" + layout.name_of(row) + " = ";
        bool first = true;
        bool any = false;
        for (int col = 0; col < b.dim(); ++col) {
            if (col == row || !detected(row, col)) continue;
            const double c = b.coefficient(row, col, params);
            if (c == 0.0) continue;
            if (!first) line += ' ';
            line += term(c, kind_letter(layout.effort_of(col)) + "_" + layout.name_of(col),
                         first);
            first = false;
            any = true;
        }
        if (!any) line += "0";
        out += line + "\n";
    }
    return out;
}

std::string coupling_report_json(const CouplingReport& report) {
    nlohmann::json j;
    j["factor"] = report.factor;
    j["max_abs_learnable"] = report.max_abs;
    j["note"] = report.note;
    auto entry = [](const CouplingEntry& ce) {
        return nlohmann::json{{"i", ce.i},           {"j", ce.j},
                              {"port_i", ce.port_i}, {"port_j", ce.port_j},
                              {"value", ce.value},   {"normalized", ce.normalized}};
    };
    j["detected"] = nlohmann::json::array();
    for (const auto& ce : report.detected) j["detected"].push_back(entry(ce));
    j["suppressed"] = nlohmann::json::array();
    for (const auto& ce : report.suppressed) j["suppressed"].push_back(entry(ce));
    j["storage_rank"] = report.storage_rank.rank;
    j["storage_singular_values"] = report.storage_rank.singular_values;
    nlohmann::json null_basis = nlohmann::json::array();
    const Matrix& nb = report.storage_rank.nullspace;
    for (int c = 0; c < nb.cols; ++c) {
        nlohmann::json col = nlohmann::json::array();
        for (int r = 0; r < nb.rows; ++r) col.push_back(nb.at(r, c));
        null_basis.push_back(col);
    }
    j["storage_nullspace"] = null_basis;
    return j.dump(2);
}

std::vector<int> match_resistors(const std::vector<ResistiveMap>& learned,
                                 const ParamSet& learned_params,
                                 const std::vector<ResistiveMap>& reference,
                                 const ParamSet& reference_params, double span, int samples) {
    if (learned.size() != reference.size()) {
        throw std::invalid_argument("match_resistors: port counts differ");
    }
    const int n = static_cast<int>(learned.size());
    // Pairwise L2 distance between sampled characteristics.
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < samples; ++k) {
                const double f = -span + 2.0 * span * k / (samples - 1);
                const double d = resist_value(reference[i], reference_params, f) -
                                 resist_value(learned[j], learned_params, f);
                acc += d * d;
            }
            cost[i][j] = acc;
        }
    }
    // Port counts stay tiny, so brute-force assignment is fine.
    std::vector<int> perm(n), best(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += cost[i][perm[i]];
        if (acc < best_cost) {
            best_cost = acc;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::string eval_report_json(const EvalReport& report) {
    nlohmann::json j;
    j["theta"] = report.theta;
    j["overall_mse"] = report.overall;
    j["mean_vpt"] = report.mean_vpt;
    j["per_traj_mse"] = report.per_traj_mse;
    j["per_traj_vpt"] = report.per_traj_vpt;
    j["diverged_at"] = report.diverged_at;
    return j.dump(2);
}

}  // namespace podinn
