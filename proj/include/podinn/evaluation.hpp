#pragma once

#include <string>
#include <vector>

#include "podinn/bivector.hpp"
#include "podinn/dataset.hpp"
#include "podinn/model.hpp"

namespace podinn {

/// Per-step mean squared error over dimensions of one rollout against one
/// recorded trajectory; steps are 1-based (the shared initial condition is
/// excluded). Returns (mean over steps, per-step series).
std::pair<double, std::vector<double>> overall_mse(
    const std::vector<std::vector<double>>& pred, const std::vector<std::vector<double>>& truth);

/// Fraction of the rollout before the step-wise MSE first exceeds theta:
/// (largest n_f with mse_n < theta for all n <= n_f) / N.
double vpt(const std::vector<double>& mse_series, double theta);

struct EvalReport {
    double theta = 0.0;
    double overall = 0.0;                         ///< mean over trajectories and steps
    std::vector<double> per_traj_mse;             ///< mean over steps, per trajectory
    std::vector<double> per_traj_vpt;
    double mean_vpt = 0.0;
    std::vector<std::vector<double>> mse_series;  ///< [traj][step-1]
    std::vector<double> diverged_at;              ///< time of rollout failure, or -1
};

/// Initial-value rollouts on every test trajectory. A model whose rollout
/// breaks down mid-trajectory keeps its last state for the remaining steps
/// (the step-wise MSE then reflects the divergence) and the failure time is
/// recorded.
EvalReport evaluate_model(const AnyModel& model, const ParamSet& params, const Dataset& test,
                          double theta, double atol = 1e-7, double rtol = 1e-9);

struct CouplingEntry {
    int i = 0;
    int j = 0;  ///< upper-triangle pair
    std::string port_i;
    std::string port_j;
    double value = 0.0;       ///< learned coefficient B[i][j]
    double normalized = 0.0;  ///< value / largest detected magnitude
};

struct CouplingReport {
    double factor = 1000.0;
    double max_abs = 0.0;  ///< largest learnable magnitude (detection reference)
    std::vector<CouplingEntry> detected;
    std::vector<CouplingEntry> suppressed;
    std::string note;
    RankResult storage_rank;  ///< degeneracy of the storage-storage block
};

/// Detection rule over the learnable entries: an entry couples its ports iff
/// its magnitude is within `factor` of the largest learnable magnitude;
/// detected coefficients are normalized so the largest is 1 (the overall
/// scale is not identifiable).
CouplingReport coupling_report(const Bivector& b, const PortLayout& layout,
                               const ParamSet& params, double factor = 1000.0);

/// Current/voltage-law listing for electro-magnetic layouts: one line per
/// storage flow and per resistive flow, built from the detected entries.
std::string kirchhoff_view(const CouplingReport& report, const PortLayout& layout,
                           const ParamSet& params, const Bivector& b);

std::string coupling_report_json(const CouplingReport& report);
std::string eval_report_json(const EvalReport& report);

/// Learned resistive ports carry no inherent order; before comparing against
/// a reference set, match them by minimum total distance between their
/// characteristic curves sampled over [-span, span]. Returns, per reference
/// port, the index of the matched learned port.
std::vector<int> match_resistors(const std::vector<ResistiveMap>& learned,
                                 const ParamSet& learned_params,
                                 const std::vector<ResistiveMap>& reference,
                                 const ParamSet& reference_params, double span = 2.0,
                                 int samples = 41);

}  // namespace podinn
