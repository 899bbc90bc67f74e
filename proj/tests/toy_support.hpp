#pragma once

// Linear mass-spring-damper chains used as training fixtures: small enough
// to train in seconds, rich enough to exercise coupling identification.

#include <string>
#include <vector>

#include "podinn/dataset.hpp"
#include "podinn/model.hpp"
#include "podinn/model_zoo.hpp"
#include "podinn/rng.hpp"

namespace toy {

using namespace podinn;

struct ChainSpec {
    int n = 2;                              ///< masses (= springs), chain from a fixed wall
    std::vector<double> k = {1.0, 0.7};     ///< linear spring constants
    std::vector<double> mass = {1.0, 1.5};  ///< masses
    int damper_spring = 0;                  ///< damper parallel to this spring (-1: none)
    double damper_coeff = 0.4;
    double dt = 0.1;
};

/// Ground-truth model of the chain (exact linear components).
inline PoissonDiracModel truth_model(const ChainSpec& c, ParamSet& params) {
    (void)params;
    PoissonDiracModel m;
    for (int i = 0; i < c.n; ++i) {
        m.layout.storage.push_back({"q" + std::to_string(i + 1), Domain::MechPotential});
    }
    for (int i = 0; i < c.n; ++i) {
        m.layout.storage.push_back({"p" + std::to_string(i + 1), Domain::MechKinetic});
    }
    const bool damped = c.damper_spring >= 0;
    if (damped) m.layout.resistive.push_back({"d1", PortKind::Velocity});
    m.bivector = Bivector(m.layout.n_total());
    m.obs_map = ObservationMap::identity(2 * c.n);
    for (int i = 0; i < c.n; ++i) {
        m.energy.push_back(PolynomialPotential{i, 0.5 * c.k[i], 0.0});
        m.energy.push_back(QuadraticStorage{c.n + i, PositiveScalar::constant(c.mass[i])});
        m.obs_map.scales[c.n + i] = PositiveScalar::constant(c.mass[i]);
        m.bivector.couple_fixed(c.n + i, i, 1.0);
        if (i + 1 < c.n) m.bivector.couple_fixed(c.n + i, i + 1, -1.0);
    }
    if (damped) {
        m.resistors.push_back(LinearResistive{FreeScalar::constant(c.damper_coeff), 0.0});
        // Damper parallel to spring s: relative velocity v_s - v_{s-1}.
        const int s = c.damper_spring;
        m.bivector.couple_fixed(c.n + s, 2 * c.n, 1.0);
        if (s > 0) m.bivector.couple_fixed(c.n + s - 1, 2 * c.n, -1.0);
    }
    m.finalize();
    return m;
}

/// Dataset of rollouts of the truth model from random initial conditions.
inline Dataset generate(const ChainSpec& c, int n_traj, int n_steps, std::uint64_t seed) {
    ParamSet params;
    auto truth = truth_model(c, params);
    Dataset ds;
    ds.system = "toy-chain";
    ds.dt = c.dt;
    ds.n_traj = n_traj;
    ds.n_steps = n_steps;
    ds.seed = seed;
    ds.theta = 1e-4;
    for (int i = 0; i < c.n; ++i) ds.obs_names.push_back("q" + std::to_string(i + 1));
    for (int i = 0; i < c.n; ++i) ds.obs_names.push_back("v" + std::to_string(i + 1));
    ds.allocate();
    std::vector<double> times(static_cast<std::size_t>(n_steps));
    for (int k = 0; k < n_steps; ++k) times[k] = k * c.dt;
    ExternalStream none;
    for (int tr = 0; tr < n_traj; ++tr) {
        CounterRng rng(seed, tr);
        std::vector<double> obs0(static_cast<std::size_t>(2 * c.n));
        for (int i = 0; i < c.n; ++i) obs0[i] = rng.uniform(i, -0.5, 0.5);
        for (int i = 0; i < c.n; ++i) obs0[c.n + i] = rng.uniform(c.n + i, -0.3, 0.3);
        auto states = rollout(AnyModel{truth}, params, obs0, times, none);
        for (int st = 0; st < n_steps; ++st) {
            std::copy(states[st].begin(), states[st].end(), ds.obs_at(tr, st).begin());
        }
    }
    return ds;
}

/// Trainable counterpart: learnable quadratic storages, learnable linear
/// dampers, learnable couplings over the admissible mask.
inline PoissonDiracModel trainable_model(const ChainSpec& c, int n_d, ParamSet& params,
                                         std::uint64_t init_seed) {
    DrawStream rng(init_seed, 0x746f79);
    PoissonDiracModel m;
    for (int i = 0; i < c.n; ++i) {
        m.layout.storage.push_back({"q" + std::to_string(i + 1), Domain::MechPotential});
    }
    for (int i = 0; i < c.n; ++i) {
        m.layout.storage.push_back({"p" + std::to_string(i + 1), Domain::MechKinetic});
    }
    for (int k = 0; k < n_d; ++k) {
        m.layout.resistive.push_back({"d" + std::to_string(k + 1), PortKind::Velocity});
    }
    m.bivector = Bivector(m.layout.n_total());
    m.obs_map = ObservationMap::identity(2 * c.n);
    for (int i = 0; i < c.n; ++i) {
        m.energy.push_back(QuadraticStorage{
            i, PositiveScalar::learnable(params, "spring" + std::to_string(i + 1), 1.0)});
        PositiveScalar mi =
            PositiveScalar::learnable(params, "obs.m" + std::to_string(i + 1), 1.0);
        m.obs_map.scales[c.n + i] = mi;
        m.energy.push_back(QuadraticStorage{c.n + i, mi});
    }
    for (int k = 0; k < n_d; ++k) {
        m.resistors.push_back(LinearResistive{
            FreeScalar::learnable(params, "damper" + std::to_string(k + 1), 0.1), 0.0});
    }
    const auto mask = m.layout.compatibility_mask();
    for (int i = 0; i < m.layout.n_total(); ++i) {
        for (int j = i + 1; j < m.layout.n_total(); ++j) {
            if (!mask[i][j]) continue;
            const bool storage_pair = i < 2 * c.n && j < 2 * c.n;
            const double init = storage_pair ? 0.0 : rng.uniform(-0.1, 0.1);
            m.bivector.set_learnable(i, j, params,
                                     "B." + m.layout.name_of(i) + "." + m.layout.name_of(j),
                                     init);
        }
    }
    m.finalize();
    return m;
}

}  // namespace toy
