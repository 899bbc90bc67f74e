#pragma once

#include <variant>
#include <vector>

#include "podinn/bivector.hpp"
#include "podinn/components.hpp"
#include "podinn/ports.hpp"
#include "podinn/systems.hpp"

namespace podinn {

/// External inputs at one instant: port efforts plus auxiliary network
/// inputs (a boundary position in absolute coordinates).
struct ExtInput {
    std::vector<double> efforts;
    std::vector<double> aux;
};

ExtInput ext_at(const ExternalStream& stream, double t);

/// The learnable dynamics model: an energy function, per-port resistive
/// characteristics, time-dependent external efforts, and a skew bivector
/// coupling them over the combined port basis. Flows follow from efforts
/// through f = B e, so the model is a Dirac structure by construction.
struct PoissonDiracModel {
    PortLayout layout;
    Bivector bivector;
    std::vector<EnergyTerm> energy;
    std::vector<ResistiveMap> resistors;  ///< one per resistive port
    ObservationMap obs_map;
    CoordinateMode mode = CoordinateMode::Relative;
    int n_aux = 0;
    CausalBlocks blocks;  ///< cached views; refresh via finalize()

    /// Validates the structure (one resistor per port, every storage
    /// coordinate covered exactly once, B_RR empty) and caches the blocks.
    void finalize();
};

/// Baseline: a single network approximating the observation-rate field.
struct NeuralOdeModel {
    Mlp net;
    int obs_dim = 0;
    int ext_dim = 0;  ///< external efforts + auxiliary inputs
};

using AnyModel = std::variant<PoissonDiracModel, NeuralOdeModel>;

int model_obs_dim(const AnyModel& model);

/// Explicit causal evaluation of the observation rate:
///   u = to_state(obs); e^S = dH(u); e^I = externals;
///   f^R = B_RS e^S + B_RI e^I; e^R = R(f^R) port-wise;
///   f^S = B_SS e^S + B_SR e^R + B_SI e^I; rate = from_state(f^S).
/// B_RR is structurally zero, so every step is explicit.
template <class Ex>
ad::NodeId podinn_field(const PoissonDiracModel& m, Ex& ex, ad::NodeId obs,
                        const ExtInput& ext) {
    if (static_cast<int>(ext.efforts.size()) != m.layout.n_external() ||
        static_cast<int>(ext.aux.size()) != m.n_aux) {
        throw std::invalid_argument("podinn_field: external input layout mismatch");
    }
    ad::NodeId u = m.obs_map.to_state(ex, obs);
    std::vector<ad::NodeId> aux_nodes;
    aux_nodes.reserve(ext.aux.size());
    for (double a : ext.aux) aux_nodes.push_back(ex.constant(a));
    ad::NodeId e_s = grad_energy(m.energy, ex, u, aux_nodes);

    const bool has_i = m.layout.n_external() > 0;
    ad::NodeId e_i = has_i ? ex.constant(ext.efforts) : -1;

    ad::NodeId f_s = ex.coeff_matvec(m.blocks.ss, e_s);
    if (m.layout.n_resistive() > 0) {
        ad::NodeId f_r = ex.coeff_matvec(m.blocks.rs, e_s);
        if (has_i) f_r = ex.add(f_r, ex.coeff_matvec(m.blocks.ri, e_i));
        std::vector<ad::NodeId> efforts_r;
        efforts_r.reserve(m.resistors.size());
        for (std::size_t k = 0; k < m.resistors.size(); ++k) {
            efforts_r.push_back(resist(m.resistors[k], ex, ex.slice(f_r, static_cast<int>(k), 1)));
        }
        ad::NodeId e_r = ex.concat(efforts_r);
        f_s = ex.add(f_s, ex.coeff_matvec(m.blocks.sr, e_r));
    }
    if (has_i) f_s = ex.add(f_s, ex.coeff_matvec(m.blocks.si, e_i));
    return m.obs_map.from_state(ex, f_s);
}

template <class Ex>
ad::NodeId neural_ode_field(const NeuralOdeModel& m, Ex& ex, ad::NodeId obs,
                            const ExtInput& ext) {
    if (static_cast<int>(ext.efforts.size() + ext.aux.size()) != m.ext_dim) {
        throw std::invalid_argument("neural_ode_field: external input dimension mismatch");
    }
    std::vector<ad::NodeId> parts = {obs};
    if (!ext.efforts.empty()) parts.push_back(ex.constant(ext.efforts));
    if (!ext.aux.empty()) parts.push_back(ex.constant(ext.aux));
    return m.net.forward(ex, parts.size() == 1 ? obs : ex.concat(parts));
}

template <class Ex>
ad::NodeId model_field(const AnyModel& model, Ex& ex, ad::NodeId obs, const ExtInput& ext) {
    return std::visit(
        [&](const auto& m) -> ad::NodeId {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PoissonDiracModel>) {
                return podinn_field(m, ex, obs, ext);
            } else {
                return neural_ode_field(m, ex, obs, ext);
            }
        },
        model);
}

/// Plain-mode observation rate.
std::vector<double> model_field_value(const AnyModel& model, const ParamSet& params,
                                      std::span<const double> obs, const ExtInput& ext);

/// Full port variables at one evaluation, for diagnostics and tests. The
/// reaction flows f^I = B_IS e^S + B_IR e^R never enter the dynamics.
struct PortState {
    std::vector<double> e_s, e_r, e_i;
    std::vector<double> f_s, f_r, f_i;

    [[nodiscard]] double pairing_residual() const;
};

PortState port_state(const PoissonDiracModel& m, const ParamSet& params,
                     std::span<const double> obs, const ExtInput& ext);

/// Both sides of the power identity dH/dt = -(e^R . f^R + e^I . f^I); they
/// agree to rounding for any parameters, trained or not.
std::pair<double, double> power_balance(const PoissonDiracModel& m, const ParamSet& params,
                                        std::span<const double> obs, const ExtInput& ext);

/// dopri5 rollout of the model field with externals evaluated continuously.
std::vector<std::vector<double>> rollout(const AnyModel& model, const ParamSet& params,
                                         std::span<const double> obs0,
                                         std::span<const double> times,
                                         const ExternalStream& stream, double atol = 1e-7,
                                         double rtol = 1e-9);

}  // namespace podinn
