#include "podinn/model.hpp"

#include <algorithm>
#include <cmath>

namespace podinn {

ExtInput ext_at(const ExternalStream& stream, double t) {
    return {stream.efforts_at(t), stream.aux_at(t)};
}

void PoissonDiracModel::finalize() {
    if (bivector.dim() != layout.n_total()) {
        throw std::invalid_argument("model: bivector dimension does not match the port layout");
    }
    if (static_cast<int>(resistors.size()) != layout.n_resistive()) {
        throw std::invalid_argument("model: need exactly one resistive map per resistive port");
    }
    if (obs_map.dim() != layout.n_storage()) {
        throw std::invalid_argument("model: observation map must cover the storage space");
    }
    std::vector<int> covered(static_cast<std::size_t>(layout.n_storage()), 0);
    for (const auto& term : energy) {
        std::visit(
            [&](const auto& t) {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, NeuralPotential>) {
                    for (int c : t.coords) covered.at(c) += 1;
                } else {
                    covered.at(t.coord) += 1;
                }
            },
            term);
    }
    for (std::size_t i = 0; i < covered.size(); ++i) {
        if (covered[i] != 1) {
            throw std::invalid_argument("model: storage coordinate " + layout.name_of(static_cast<int>(i)) +
                                        " must be covered by exactly one energy term");
        }
    }
    blocks = causal_blocks(bivector, layout);
}

int model_obs_dim(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PoissonDiracModel>) {
                return m.layout.n_storage();
            } else {
                return m.obs_dim;
            }
        },
        model);
}

std::vector<double> model_field_value(const AnyModel& model, const ParamSet& params,
                                      std::span<const double> obs, const ExtInput& ext) {
    ad::PlainExec ex(&params);
    ad::NodeId rate = model_field(model, ex, ex.constant(obs), ext);
    auto v = ex.value(rate);
    return {v.begin(), v.end()};
}

double PortState::pairing_residual() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < e_s.size(); ++i) acc += e_s[i] * f_s[i];
    for (std::size_t i = 0; i < e_r.size(); ++i) acc += e_r[i] * f_r[i];
    for (std::size_t i = 0; i < e_i.size(); ++i) acc += e_i[i] * f_i[i];
    return acc;
}

PortState port_state(const PoissonDiracModel& m, const ParamSet& params,
                     std::span<const double> obs, const ExtInput& ext) {
    ad::PlainExec ex(&params);
    ad::NodeId u = m.obs_map.to_state(ex, ex.constant(obs));
    std::vector<ad::NodeId> aux_nodes;
    for (double a : ext.aux) aux_nodes.push_back(ex.constant(a));
    ad::NodeId e_s = grad_energy(m.energy, ex, u, aux_nodes);

    PortState out;
    auto copy = [&](ad::NodeId id, std::vector<double>& dst) {
        auto v = ex.value(id);
        dst.assign(v.begin(), v.end());
    };
    copy(e_s, out.e_s);
    out.e_i = ext.efforts;

    const bool has_i = m.layout.n_external() > 0;
    ad::NodeId e_i = has_i ? ex.constant(ext.efforts) : -1;
    ad::NodeId f_s = ex.coeff_matvec(m.blocks.ss, e_s);
    ad::NodeId e_r = -1;
    if (m.layout.n_resistive() > 0) {
        ad::NodeId f_r = ex.coeff_matvec(m.blocks.rs, e_s);
        if (has_i) f_r = ex.add(f_r, ex.coeff_matvec(m.blocks.ri, e_i));
        std::vector<ad::NodeId> efforts_r;
        for (std::size_t k = 0; k < m.resistors.size(); ++k) {
            efforts_r.push_back(resist(m.resistors[k], ex, ex.slice(f_r, static_cast<int>(k), 1)));
        }
        e_r = ex.concat(efforts_r);
        copy(f_r, out.f_r);
        copy(e_r, out.e_r);
        f_s = ex.add(f_s, ex.coeff_matvec(m.blocks.sr, e_r));
    }
    if (has_i) f_s = ex.add(f_s, ex.coeff_matvec(m.blocks.si, e_i));
    copy(f_s, out.f_s);

    if (has_i) {
        // Reaction flows: computed on demand only, never fed back.
        ad::NodeId f_i = ex.coeff_matvec(m.blocks.is, e_s);
        if (e_r >= 0) f_i = ex.add(f_i, ex.coeff_matvec(m.blocks.ir, e_r));
        copy(f_i, out.f_i);
    }
    return out;
}

std::pair<double, double> power_balance(const PoissonDiracModel& m, const ParamSet& params,
                                        std::span<const double> obs, const ExtInput& ext) {
    PortState ps = port_state(m, params, obs, ext);
    double dhdt = 0.0;
    for (std::size_t i = 0; i < ps.e_s.size(); ++i) dhdt += ps.e_s[i] * ps.f_s[i];
    double supplied = 0.0;
    for (std::size_t i = 0; i < ps.e_r.size(); ++i) supplied += ps.e_r[i] * ps.f_r[i];
    for (std::size_t i = 0; i < ps.e_i.size(); ++i) supplied += ps.e_i[i] * ps.f_i[i];
    return {dhdt, -supplied};
}

std::vector<std::vector<double>> rollout(const AnyModel& model, const ParamSet& params,
                                         std::span<const double> obs0,
                                         std::span<const double> times,
                                         const ExternalStream& stream, double atol,
                                         double rtol) {
    ad::PlainExec ex(&params);
    PlainField f = [&](std::span<const double> u, double t, std::span<double> du) {
        ex.reset();
        ad::NodeId rate = model_field(model, ex, ex.constant(u), ext_at(stream, t));
        auto v = ex.value(rate);
        std::copy(v.begin(), v.end(), du.begin());
    };
    return dopri5_integrate(f, obs0, times, atol, rtol);
}

}  // namespace podinn
