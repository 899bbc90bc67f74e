#include "podinn/integrators.hpp"

#include <algorithm>
#include <cmath>

namespace podinn {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th- and embedded 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Work {
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp, u1;
};

void eval_stages(const PlainField& f, std::span<const double> u, double t, double h, Work& w) {
    const std::size_t n = u.size();
    auto stage = [&](std::vector<double>& k, double c, auto&& fill_tmp) {
        fill_tmp();
        f(w.tmp, t + c * h, k);
    };
    stage(w.k2, c2, [&] {
        for (std::size_t i = 0; i < n; ++i) w.tmp[i] = u[i] + h * a21 * w.k1[i];
    });
    stage(w.k3, c3, [&] {
        for (std::size_t i = 0; i < n; ++i) w.tmp[i] = u[i] + h * (a31 * w.k1[i] + a32 * w.k2[i]);
    });
    stage(w.k4, c4, [&] {
        for (std::size_t i = 0; i < n; ++i) {
            w.tmp[i] = u[i] + h * (a41 * w.k1[i] + a42 * w.k2[i] + a43 * w.k3[i]);
        }
    });
    stage(w.k5, c5, [&] {
        for (std::size_t i = 0; i < n; ++i) {
            w.tmp[i] = u[i] + h * (a51 * w.k1[i] + a52 * w.k2[i] + a53 * w.k3[i] + a54 * w.k4[i]);
        }
    });
    stage(w.k6, 1.0, [&] {
        for (std::size_t i = 0; i < n; ++i) {
            w.tmp[i] = u[i] + h * (a61 * w.k1[i] + a62 * w.k2[i] + a63 * w.k3[i] +
                                   a64 * w.k4[i] + a65 * w.k5[i]);
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        w.u1[i] = u[i] + h * (b1 * w.k1[i] + b3 * w.k3[i] + b4 * w.k4[i] + b5 * w.k5[i] +
                              b6 * w.k6[i]);
    }
    f(w.u1, t + h, w.k7);  // FSAL
}

/// 4th-order dense interpolant at theta in (0,1) inside an accepted step.
void dense_eval(std::span<const double> u0, const Work& w, double h, double theta,
                std::span<double> out) {
    const double x1 = 5.0 * (2558722523.0 - 31403016.0 * theta) / 11282082432.0;
    const double x3 = 100.0 * (882725551.0 - 15701508.0 * theta) / 32700410799.0;
    const double x4 = 25.0 * (443332067.0 - 31403016.0 * theta) / 1880347072.0;
    const double x5 = 32805.0 * (23143187.0 - 3489224.0 * theta) / 199316789632.0;
    const double x6 = 55.0 * (29972135.0 - 7076736.0 * theta) / 822651844.0;
    const double x7 = 10.0 * (7414447.0 - 829305.0 * theta) / 29380423.0;

    const double tm1 = theta - 1.0;
    const double t2 = theta * theta;
    const double pa = t2 * (3.0 - 2.0 * theta);
    const double pb = t2 * tm1;
    const double pc = t2 * tm1 * tm1;
    const double pd = theta * tm1 * tm1;

    const double w1 = pa * b1 - pc * x1 + pd;
    const double w3 = pa * b3 + pc * x3;
    const double w4 = pa * b4 - pc * x4;
    const double w5 = pa * b5 + pc * x5;
    const double w6 = pa * b6 - pc * x6;
    const double w7 = pb + pc * x7;

    for (std::size_t i = 0; i < u0.size(); ++i) {
        out[i] = u0[i] + h * (w1 * w.k1[i] + w3 * w.k3[i] + w4 * w.k4[i] + w5 * w.k5[i] +
                              w6 * w.k6[i] + w7 * w.k7[i]);
    }
}

double error_norm(std::span<const double> u0, const Work& w, double h, double atol,
                  double rtol) {
    double acc = 0.0;
    const std::size_t n = u0.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double err = h * (e1 * w.k1[i] + e3 * w.k3[i] + e4 * w.k4[i] + e5 * w.k5[i] +
                                e6 * w.k6[i] + e7 * w.k7[i]);
        const double sc = atol + rtol * std::max(std::abs(u0[i]), std::abs(w.u1[i]));
        acc += (err / sc) * (err / sc);
    }
    return std::sqrt(acc / static_cast<double>(n));
}

double initial_step(const PlainField& f, std::span<const double> u0, double t0, double span,
                    double atol, double rtol, Work& w) {
    const std::size_t n = u0.size();
    f(u0, t0, w.k1);
    double d0 = 0.0;
    double d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::abs(u0[i]);
        d0 += (u0[i] / sc) * (u0[i] / sc);
        d1 += (w.k1[i] / sc) * (w.k1[i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min(h, span);
}

}  // namespace

std::vector<std::vector<double>> dopri5_integrate(const PlainField& field,
                                                  std::span<const double> u0,
                                                  std::span<const double> sample_times,
                                                  double atol, double rtol, long max_steps) {
    if (sample_times.empty()) throw std::invalid_argument("dopri5: no sample times");
    for (std::size_t i = 1; i < sample_times.size(); ++i) {
        if (!(sample_times[i] > sample_times[i - 1])) {
            throw std::invalid_argument("dopri5: sample times must be strictly increasing");
        }
    }
    if (!(atol > 0.0) || !(rtol > 0.0)) throw std::invalid_argument("dopri5: tolerances must be positive");

    const std::size_t n = u0.size();
    Work w;
    for (auto* v : {&w.k1, &w.k2, &w.k3, &w.k4, &w.k5, &w.k6, &w.k7, &w.tmp, &w.u1}) {
        v->assign(n, 0.0);
    }

    std::vector<std::vector<double>> out;
    out.reserve(sample_times.size());
    out.emplace_back(u0.begin(), u0.end());
    if (sample_times.size() == 1) return out;

    const double t_end = sample_times.back();
    double t = sample_times.front();
    const double span = t_end - t;
    std::vector<double> u(u0.begin(), u0.end());

    double h = initial_step(field, u, t, span, atol, rtol, w);  // also fills k1
    double facold = 1e-4;
    std::size_t next_sample = 1;
    long steps = 0;

    while (t < t_end) {
        if (++steps > max_steps) throw NumericalError("dopri5: max step count exceeded");
        if (h < 1e-14 * span) throw NumericalError("dopri5: step size underflow (stiff problem?)");
        h = std::min(h, t_end - t);

        eval_stages(field, u, t, h, w);
        for (double v : w.u1) {
            if (!std::isfinite(v)) throw NumericalError("dopri5: non-finite state at t=" + std::to_string(t));
        }
        const double err = error_norm(u, w, h, atol, rtol);

        if (err <= 1.0) {
            const double t_new = t + h;
            while (next_sample < sample_times.size() && sample_times[next_sample] <= t_new + 1e-14 * span) {
                const double ts = sample_times[next_sample];
                std::vector<double> s(n);
                if (std::abs(ts - t_new) <= 1e-14 * span) {
                    s = w.u1;
                } else {
                    dense_eval(u, w, h, (ts - t) / h, s);
                }
                out.push_back(std::move(s));
                ++next_sample;
            }
            u = w.u1;
            std::swap(w.k1, w.k7);  // FSAL
            t = t_new;

            const double fac = std::pow(err, 0.17) / std::pow(facold, 0.04);
            h *= std::min(5.0, std::max(0.2, 0.9 / std::max(fac, 1e-30)));
            facold = std::max(err, 1e-4);
        } else {
            h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
        }
    }
    if (next_sample != sample_times.size()) {
        throw NumericalError("dopri5: failed to reach all sample times");
    }
    return out;
}

}  // namespace podinn
