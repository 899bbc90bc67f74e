#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "podinn/errors.hpp"
#include "podinn/tape.hpp"

namespace podinn {

struct IntegratorConfig {
    std::string method = "dopri5";  ///< dopri5 | rk4
    double dt = 0.1;
    int substeps = 4;  ///< rk4 only
    double atol = 1e-7;
    double rtol = 1e-9;
    long max_steps = 20'000'000;
};

namespace detail {
template <class Ex>
void check_finite(Ex& ex, ad::NodeId v, double t) {
    for (double x : ex.value(v)) {
        if (!std::isfinite(x)) {
            throw NumericalError("non-finite field output at t=" + std::to_string(t));
        }
    }
}
}  // namespace detail

/// Classical RK4 composed `substeps` times over dt. Runs on either executor,
/// so the whole step lands on the tape during training.
template <class Ex, class Field>
ad::NodeId rk4_step(Ex& ex, Field&& field, ad::NodeId u, double t, double dt, int substeps) {
    if (substeps < 1) throw std::invalid_argument("rk4_step: substeps must be >= 1");
    const double h = dt / substeps;
    for (int s = 0; s < substeps; ++s) {
        const double ts = t + s * h;
        ad::NodeId k1 = field(ex, u, ts);
        detail::check_finite(ex, k1, ts);
        ad::NodeId k2 = field(ex, ex.add(u, ex.scale(k1, h / 2)), ts + h / 2);
        ad::NodeId k3 = field(ex, ex.add(u, ex.scale(k2, h / 2)), ts + h / 2);
        ad::NodeId k4 = field(ex, ex.add(u, ex.scale(k3, h)), ts + h);
        detail::check_finite(ex, k4, ts + h);
        ad::NodeId ksum = ex.add(ex.add(k1, k4), ex.scale(ex.add(k2, k3), 2.0));
        u = ex.add(u, ex.scale(ksum, h / 6));
    }
    return u;
}

/// Plain-vector right-hand side for non-differentiated integration.
using PlainField =
    std::function<void(std::span<const double> u, double t, std::span<double> du)>;

/// Dormand-Prince 5(4) with PI step control and 4th-order dense output,
/// sampled at the given times. sample_times must be strictly increasing and
/// start at the initial time. Mixed error test atol + rtol*|u|.
std::vector<std::vector<double>> dopri5_integrate(
    const PlainField& field, std::span<const double> u0, std::span<const double> sample_times,
    double atol = 1e-7, double rtol = 1e-9, long max_steps = 20'000'000);

}  // namespace podinn
