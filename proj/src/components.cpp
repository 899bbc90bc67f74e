#include "podinn/components.hpp"

#include <algorithm>
#include <cmath>

namespace podinn {

double signal(const ExternalSignal& s, double t) {
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SumOfSines>) {
                double acc = 0.0;
                for (const auto& w : v.waves) {
                    acc += w.amplitude * std::sin(w.angular_velocity * t + w.phase);
                }
                return acc;
            } else if constexpr (std::is_same_v<T, ConstantSignal>) {
                return v.value;
            } else {
                if (v.times.size() < 2 || v.times.size() != v.values.size()) {
                    throw std::invalid_argument("sampled series needs matching times/values");
                }
                if (t < v.times.front() || t > v.times.back()) {
                    throw std::out_of_range("sampled series queried outside its time range");
                }
                auto it = std::upper_bound(v.times.begin(), v.times.end(), t);
                if (it == v.times.end()) return v.values.back();
                const auto hi = static_cast<std::size_t>(it - v.times.begin());
                const std::size_t lo = hi - 1;
                const double w = (t - v.times[lo]) / (v.times[hi] - v.times[lo]);
                return (1.0 - w) * v.values[lo] + w * v.values[hi];
            }
        },
        s);
}

SumOfSines derivative(const SumOfSines& s) {
    SumOfSines d;
    d.waves.reserve(s.waves.size());
    for (const auto& w : s.waves) {
        // A sin(wt + p) -> A w cos(wt + p) = A w sin(wt + p + pi/2)
        d.waves.push_back({w.amplitude * w.angular_velocity, w.angular_velocity,
                           w.phase + 3.14159265358979323846 / 2.0});
    }
    return d;
}

std::vector<double> ObservationMap::to_state(const ParamSet& params,
                                             std::span<const double> obs) const {
    if (static_cast<int>(obs.size()) != dim()) {
        throw std::invalid_argument("observation dimension mismatch");
    }
    check(params);
    std::vector<double> u(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) u[i] = scales[i].value(params) * obs[i];
    return u;
}

std::vector<double> ObservationMap::from_state(const ParamSet& params,
                                               std::span<const double> u) const {
    if (static_cast<int>(u.size()) != dim()) {
        throw std::invalid_argument("state dimension mismatch");
    }
    check(params);
    std::vector<double> obs(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) obs[i] = u[i] / scales[i].value(params);
    return obs;
}

double energy_value(const EnergyTerm& term, const ParamSet& params, std::span<const double> state,
                    std::span<const double> aux) {
    ad::PlainExec ex(&params);
    ad::NodeId u = ex.constant(state);
    std::vector<ad::NodeId> aux_nodes;
    for (double a : aux) aux_nodes.push_back(ex.constant(a));
    return ex.scalar_value(energy(term, ex, u, aux_nodes));
}

std::vector<double> grad_energy_value(const std::vector<EnergyTerm>& terms,
                                      const ParamSet& params, std::span<const double> state,
                                      std::span<const double> aux) {
    ad::PlainExec ex(&params);
    ad::NodeId u = ex.constant(state);
    std::vector<ad::NodeId> aux_nodes;
    for (double a : aux) aux_nodes.push_back(ex.constant(a));
    ad::NodeId g = grad_energy(terms, ex, u, aux_nodes);
    auto v = ex.value(g);
    return {v.begin(), v.end()};
}

double resist_value(const ResistiveMap& map, const ParamSet& params, double flow) {
    ad::PlainExec ex(&params);
    ad::NodeId f = ex.constant(flow);
    return ex.scalar_value(resist(map, ex, f));
}

}  // namespace podinn
