#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "podinn/errors.hpp"
#include "podinn/mlp.hpp"
#include "podinn/params.hpp"
#include "podinn/tape.hpp"

namespace podinn {

/// Strictly positive scalar stored as its logarithm when learnable, so no
/// update can leave the valid range.
struct PositiveScalar {
    std::size_t log_slot = no_slot;
    double fixed = 1.0;

    static PositiveScalar learnable(ParamSet& params, const std::string& name, double init) {
        PositiveScalar s;
        s.log_slot = params.add_scalar(name, std::log(init));
        return s;
    }
    static PositiveScalar constant(double v) { return {no_slot, v}; }

    [[nodiscard]] double value(const ParamSet& p) const {
        return log_slot == no_slot ? fixed : std::exp(p[log_slot]);
    }
    template <class Ex>
    ad::NodeId node(Ex& ex) const {
        return log_slot == no_slot ? ex.constant(fixed) : ex.exp_(ex.param_scalar(log_slot));
    }
    template <class Ex>
    ad::NodeId inverse_node(Ex& ex) const {
        return log_slot == no_slot ? ex.constant(1.0 / fixed)
                                   : ex.exp_(ex.neg(ex.param_scalar(log_slot)));
    }
};

/// Sign-unconstrained scalar, learnable or fixed.
struct FreeScalar {
    std::size_t slot = no_slot;
    double fixed = 0.0;

    static FreeScalar learnable(ParamSet& params, const std::string& name, double init) {
        return {params.add_scalar(name, init), 0.0};
    }
    static FreeScalar constant(double v) { return {no_slot, v}; }

    [[nodiscard]] double value(const ParamSet& p) const {
        return slot == no_slot ? fixed : p[slot];
    }
    template <class Ex>
    ad::NodeId node(Ex& ex) const {
        return slot == no_slot ? ex.constant(fixed) : ex.param_scalar(slot);
    }
};

// ---------------------------------------------------------------------------
// Energy terms
// ---------------------------------------------------------------------------

/// H = s^2 / (2 theta); houses masses, capacitances, inductances, and the
/// tank coefficient A/(rho g).
struct QuadraticStorage {
    int coord = 0;
    PositiveScalar theta;
};

/// Ground-truth polynomial potential a2 s^2 + a4 s^4 (integral of a cubic
/// spring law).
struct PolynomialPotential {
    int coord = 0;
    double a2 = 0.0;
    double a4 = 0.0;
};

/// Ground-truth pendulum potential -scale * cos(s).
struct CosinePotential {
    int coord = 0;
    double scale = 0.0;
};

/// Neural potential over a subset of storage coordinates, optionally with
/// trailing non-storage inputs (e.g. a boundary position in absolute
/// coordinates). Gradients w.r.t. the extra inputs are discarded: they act
/// on external ports, not on storage flows.
struct NeuralPotential {
    std::vector<int> coords;
    int n_aux = 0;
    Mlp net;
};

using EnergyTerm =
    std::variant<QuadraticStorage, PolynomialPotential, CosinePotential, NeuralPotential>;

namespace detail {

inline void check_coord(int coord, int n_state) {
    if (coord < 0 || coord >= n_state) {
        throw std::invalid_argument("energy term references a missing coordinate");
    }
}

template <class Ex>
ad::NodeId gather(Ex& ex, ad::NodeId state, const std::vector<int>& coords,
                  std::span<const ad::NodeId> aux) {
    std::vector<ad::NodeId> parts;
    parts.reserve(coords.size() + aux.size());
    for (int c : coords) {
        check_coord(c, ex.size(state));
        parts.push_back(ex.slice(state, c, 1));
    }
    parts.insert(parts.end(), aux.begin(), aux.end());
    if (parts.size() == 1) return parts[0];
    return ex.concat(parts);
}

}  // namespace detail

/// Scalar energy of one term at the given state.
template <class Ex>
ad::NodeId energy(const EnergyTerm& term, Ex& ex, ad::NodeId state,
                  std::span<const ad::NodeId> aux = {}) {
    return std::visit(
        [&](const auto& t) -> ad::NodeId {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, QuadraticStorage>) {
                detail::check_coord(t.coord, ex.size(state));
                ad::NodeId s = ex.slice(state, t.coord, 1);
                return ex.scale(ex.mul(ex.square(s), t.theta.inverse_node(ex)), 0.5);
            } else if constexpr (std::is_same_v<T, PolynomialPotential>) {
                detail::check_coord(t.coord, ex.size(state));
                ad::NodeId s = ex.slice(state, t.coord, 1);
                ad::NodeId s2 = ex.square(s);
                return ex.add(ex.scale(s2, t.a2), ex.scale(ex.square(s2), t.a4));
            } else if constexpr (std::is_same_v<T, CosinePotential>) {
                detail::check_coord(t.coord, ex.size(state));
                ad::NodeId s = ex.slice(state, t.coord, 1);
                return ex.scale(ex.cos_(s), -t.scale);
            } else {
                ad::NodeId x = detail::gather(ex, state, t.coords, aux);
                return t.net.forward(ex, x);
            }
        },
        term);
}

/// Per-coordinate gradient contributions dH/du of one term, appended to
/// `acc` (length = state dimension, -1 meaning "no contribution yet").
template <class Ex>
void grad_energy_accumulate(const EnergyTerm& term, Ex& ex, ad::NodeId state,
                            std::span<const ad::NodeId> aux, std::vector<ad::NodeId>& acc) {
    auto deposit = [&](int coord, ad::NodeId g) {
        acc[coord] = acc[coord] < 0 ? g : ex.add(acc[coord], g);
    };
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, QuadraticStorage>) {
                detail::check_coord(t.coord, ex.size(state));
                ad::NodeId s = ex.slice(state, t.coord, 1);
                deposit(t.coord, ex.mul(s, t.theta.inverse_node(ex)));
            } else if constexpr (std::is_same_v<T, PolynomialPotential>) {
                detail::check_coord(t.coord, ex.size(state));
                ad::NodeId s = ex.slice(state, t.coord, 1);
                ad::NodeId s3 = ex.mul(ex.square(s), s);
                deposit(t.coord, ex.add(ex.scale(s, 2.0 * t.a2), ex.scale(s3, 4.0 * t.a4)));
            } else if constexpr (std::is_same_v<T, CosinePotential>) {
                detail::check_coord(t.coord, ex.size(state));
                ad::NodeId s = ex.slice(state, t.coord, 1);
                deposit(t.coord, ex.scale(ex.sin_(s), t.scale));
            } else {
                ad::NodeId x = detail::gather(ex, state, t.coords, aux);
                ad::NodeId g = t.net.input_gradient(ex, x);
                for (std::size_t k = 0; k < t.coords.size(); ++k) {
                    deposit(t.coords[k], ex.slice(g, static_cast<int>(k), 1));
                }
            }
        },
        term);
}

/// Full storage effort e^S = dH for a sum of terms.
template <class Ex>
ad::NodeId grad_energy(const std::vector<EnergyTerm>& terms, Ex& ex, ad::NodeId state,
                       std::span<const ad::NodeId> aux = {}) {
    const int n = ex.size(state);
    std::vector<ad::NodeId> acc(static_cast<std::size_t>(n), -1);
    for (const auto& t : terms) grad_energy_accumulate(t, ex, state, aux, acc);
    for (auto& a : acc) {
        if (a < 0) a = ex.zeros(1);
    }
    return ex.concat(acc);
}

template <class Ex>
ad::NodeId total_energy(const std::vector<EnergyTerm>& terms, Ex& ex, ad::NodeId state,
                        std::span<const ad::NodeId> aux = {}) {
    ad::NodeId h = ex.zeros(1);
    for (const auto& t : terms) h = ex.add(h, energy(t, ex, state, aux));
    return h;
}

// ---------------------------------------------------------------------------
// Resistive maps
// ---------------------------------------------------------------------------

/// e = gain * f + offset. The gain is the port's direct characteristic: a
/// passive element has gain > 0 and dissipates e*f = g f^2; the reaction on
/// the coupled storage coordinates comes out of the skew bivector. The
/// offset absorbs a constant source in series (FitzHugh-Nagumo's E).
struct LinearResistive {
    FreeScalar gain;
    double offset = 0.0;
};

/// e = d * sgn(f) |f|^{1/3} (dampers and dry friction).
struct SignedPowerDamper {
    double d = 0.0;
};

/// e = c * f^3.
struct CubicResistor {
    double c = 0.0;
};

/// Piecewise-linear diode current m1 f + (m0 - m1)(|f+1| - |f-1|)/2.
struct ChuaDiode {
    double m0 = 0.0;
    double m1 = 0.0;
};

/// Tunnel diode current f^3/3 - f.
struct TunnelDiodeCubic {};

/// Learned characteristic f^R -> e^R, one scalar port.
struct NeuralResistor {
    Mlp net;
};

using ResistiveMap = std::variant<LinearResistive, SignedPowerDamper, CubicResistor, ChuaDiode,
                                  TunnelDiodeCubic, NeuralResistor>;

/// Scalar effort of one resistive port for a scalar flow.
template <class Ex>
ad::NodeId resist(const ResistiveMap& map, Ex& ex, ad::NodeId flow) {
    return std::visit(
        [&](const auto& m) -> ad::NodeId {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearResistive>) {
                ad::NodeId e = ex.mul(m.gain.node(ex), flow);
                if (m.offset != 0.0) e = ex.add(e, ex.constant(m.offset));
                return e;
            } else if constexpr (std::is_same_v<T, SignedPowerDamper>) {
                return ex.scale(ex.signed_cbrt(flow), m.d);
            } else if constexpr (std::is_same_v<T, CubicResistor>) {
                return ex.scale(ex.mul(ex.square(flow), flow), m.c);
            } else if constexpr (std::is_same_v<T, ChuaDiode>) {
                ad::NodeId one = ex.constant(1.0);
                ad::NodeId lo = ex.abs_(ex.add(flow, one));
                ad::NodeId hi = ex.abs_(ex.sub(flow, one));
                return ex.add(ex.scale(flow, m.m1), ex.scale(ex.sub(lo, hi), 0.5 * (m.m0 - m.m1)));
            } else if constexpr (std::is_same_v<T, TunnelDiodeCubic>) {
                return ex.sub(ex.scale(ex.mul(ex.square(flow), flow), 1.0 / 3.0), flow);
            } else {
                return m.net.forward(ex, flow);
            }
        },
        map);
}

// ---------------------------------------------------------------------------
// External signals
// ---------------------------------------------------------------------------

struct SineComponent {
    double amplitude = 0.0;
    double angular_velocity = 0.0;
    double phase = 0.0;
};

struct SumOfSines {
    std::vector<SineComponent> waves;
};

struct ConstantSignal {
    double value = 0.0;
};

/// Piecewise-linear interpolation of recorded samples; times strictly
/// increasing, queries outside the range are an error.
struct SampledSeries {
    std::vector<double> times;
    std::vector<double> values;
};

using ExternalSignal = std::variant<SumOfSines, ConstantSignal, SampledSeries>;

double signal(const ExternalSignal& s, double t);

/// d/dt of a sum-of-sines position: another sum of sines.
SumOfSines derivative(const SumOfSines& s);

// ---------------------------------------------------------------------------
// Observation map
// ---------------------------------------------------------------------------

/// Per-coordinate map between observations and storage states: identity or
/// scale by a learnable positive parameter (p = m v, Q = C V, phi = L I).
struct ObservationMap {
    std::vector<PositiveScalar> scales;  ///< one per storage coordinate

    static ObservationMap identity(int n) {
        ObservationMap m;
        m.scales.assign(static_cast<std::size_t>(n), PositiveScalar::constant(1.0));
        return m;
    }

    [[nodiscard]] int dim() const { return static_cast<int>(scales.size()); }

    void check(const ParamSet& params) const {
        for (std::size_t i = 0; i < scales.size(); ++i) {
            if (!(scales[i].value(params) > 0.0)) {
                throw NumericalError("observation scale " + std::to_string(i) +
                                     " is non-positive");
            }
        }
    }

    template <class Ex>
    ad::NodeId scale_vector(Ex& ex) const {
        std::vector<ad::NodeId> parts;
        parts.reserve(scales.size());
        for (const auto& s : scales) parts.push_back(s.node(ex));
        return ex.concat(parts);
    }
    template <class Ex>
    ad::NodeId inverse_scale_vector(Ex& ex) const {
        std::vector<ad::NodeId> parts;
        parts.reserve(scales.size());
        for (const auto& s : scales) parts.push_back(s.inverse_node(ex));
        return ex.concat(parts);
    }

    /// u = scale * obs.
    template <class Ex>
    ad::NodeId to_state(Ex& ex, ad::NodeId obs) const {
        if (ex.size(obs) != dim()) throw std::invalid_argument("observation dimension mismatch");
        return ex.mul(obs, scale_vector(ex));
    }
    /// obs = u / scale; also maps storage flows to observation rates.
    template <class Ex>
    ad::NodeId from_state(Ex& ex, ad::NodeId u) const {
        if (ex.size(u) != dim()) throw std::invalid_argument("state dimension mismatch");
        return ex.mul(u, inverse_scale_vector(ex));
    }

    std::vector<double> to_state(const ParamSet& params, std::span<const double> obs) const;
    std::vector<double> from_state(const ParamSet& params, std::span<const double> u) const;
};

// Plain-mode conveniences used by tests and analysis code.
double energy_value(const EnergyTerm& term, const ParamSet& params, std::span<const double> state,
                    std::span<const double> aux = {});
std::vector<double> grad_energy_value(const std::vector<EnergyTerm>& terms,
                                      const ParamSet& params, std::span<const double> state,
                                      std::span<const double> aux = {});
double resist_value(const ResistiveMap& map, const ParamSet& params, double flow);

}  // namespace podinn
