#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "podinn/integrators.hpp"
#include "podinn/mlp.hpp"
#include "podinn/rng.hpp"

using namespace podinn;

namespace {

/// Plain-executor field wrapper for rk4_step tests.
template <class F>
auto vec_field(F&& f) {
    return [f](auto& ex, ad::NodeId u, double t) -> ad::NodeId {
        auto uv = ex.value(u);
        std::vector<double> du(uv.size());
        f(std::span<const double>(uv.data(), uv.size()), t, std::span<double>(du));
        return ex.constant(du);
    };
}

std::vector<double> rk4_plain(const PlainField& f, std::vector<double> u0, double t, double dt,
                              int substeps) {
    ParamSet params;
    ad::PlainExec ex(&params);
    auto field = [&](ad::PlainExec& e, ad::NodeId u, double tt) {
        auto uv = e.value(u);
        std::vector<double> du(uv.size());
        f(uv, tt, du);
        return e.constant(du);
    };
    auto out = rk4_step(ex, field, ex.constant(u0), t, dt, substeps);
    auto v = ex.value(out);
    return {v.begin(), v.end()};
}

void harmonic(std::span<const double> u, double, std::span<double> du) {
    du[0] = u[1];
    du[1] = -u[0];
}

void fitzhugh(std::span<const double> u, double, std::span<double> du) {
    const double V = u[0], W = u[1], J = 0.5;
    du[0] = V - V * V * V / 3.0 - W + J;
    du[1] = 0.08 * (V + 0.7 - 0.8 * W);
}

void chua(std::span<const double> u, double, std::span<double> du) {
    const double alpha = 15.6, beta = 28.0, m0 = -8.0 / 7.0, m1 = -5.0 / 7.0;
    const double v1 = u[0], v2 = u[1], il = u[2];
    const double fv = m1 * v1 + 0.5 * (m0 - m1) * (std::abs(v1 + 1) - std::abs(v1 - 1));
    du[0] = alpha * (v2 - v1 - fv);
    du[1] = v1 - v2 + il;
    du[2] = -beta * v2;
}

}  // namespace

TEST_CASE("rk4: zero field leaves the state unchanged") {
    auto out = rk4_plain([](auto, double, std::span<double> du) { du[0] = 0.0; du[1] = 0.0; },
                         {0.3, -0.7}, 0.0, 0.1, 4);
    CHECK(out[0] == 0.3);
    CHECK(out[1] == -0.7);
}

TEST_CASE("rk4: harmonic oscillator one step matches the analytic rotation") {
    auto out = rk4_plain(harmonic, {1.0, 0.0}, 0.0, 0.1, 4);
    CHECK(std::abs(out[0] - std::cos(0.1)) < 1e-8);
    CHECK(std::abs(out[1] + std::sin(0.1)) < 1e-8);
}

TEST_CASE("rk4: linear decay matches exp(-0.1) to 1e-9") {
    auto out = rk4_plain([](auto u, double, std::span<double> du) { du[0] = -u[0]; }, {1.0},
                         0.0, 0.1, 4);
    CHECK(std::abs(out[0] - std::exp(-0.1)) < 1e-9);
}

TEST_CASE("rk4: global error on the harmonic oscillator shrinks 12x per halving") {
    auto roll = [&](double dt) {
        std::vector<double> u = {1.0, 0.0};
        const int n = static_cast<int>(std::round(2.0 / dt));
        for (int i = 0; i < n; ++i) u = rk4_plain(harmonic, u, i * dt, dt, 1);
        return std::hypot(u[0] - std::cos(2.0), u[1] + std::sin(2.0));
    };
    const double e1 = roll(0.1);
    const double e2 = roll(0.05);
    const double e3 = roll(0.025);
    CHECK(e1 / e2 >= 12.0);
    CHECK(e2 / e3 >= 12.0);
}

TEST_CASE("rk4: non-finite field output raises a numerical error") {
    CHECK_THROWS_AS(
        rk4_plain([](auto, double, std::span<double> du) { du[0] = std::nan(""); }, {1.0}, 0.0,
                  0.1, 2),
        NumericalError);
}

TEST_CASE("rk4 on the tape: gradients w.r.t. initial state and parameters") {
    // Field du = A u with a learnable skew A: one rk4 step, loss = |u1|^2.
    ParamSet params;
    const std::size_t c = params.add_scalar("c", 0.8);
    ad::CoeffMatrix mat;
    mat.rows = 2;
    mat.cols = 2;
    mat.triplets.push_back({0, 1, 1.0, c, 0.0});
    mat.triplets.push_back({1, 0, 1.0, c, 0.0});
    mat.triplets.push_back({1, 1, 0.0, no_slot, -0.4});
    std::vector<double> u0 = {0.6, -0.2};

    auto field = [&](auto& ex, ad::NodeId u, double) { return ex.coeff_matvec(mat, u); };

    ad::Tape tape(&params);
    auto u0n = tape.input(u0);
    auto u1 = rk4_step(tape, field, u0n, 0.0, 0.1, 4);
    auto loss = tape.dot(u1, u1);
    std::vector<double> grad(params.size(), 0.0);
    tape.backward(loss, grad);

    auto loss_plain = [&](const ParamSet& p, const std::vector<double>& u) {
        ad::PlainExec ex(&p);
        auto uu = rk4_step(ex, field, ex.constant(u), 0.0, 0.1, 4);
        return ex.scalar_value(ex.dot(uu, uu));
    };

    // d loss / d u0 against finite differences
    auto fd_u = oracle::fd_gradient(
        [&](const std::vector<double>& u) { return loss_plain(params, u); }, u0);
    std::vector<double> ad_u(tape.adjoint(u0n).begin(), tape.adjoint(u0n).end());
    CHECK(oracle::max_rel_err(ad_u, fd_u) < 1e-4);

    // d loss / d c against finite differences
    const double fd_c = oracle::fd_derivative(
        [&](double v) {
            ParamSet p2 = params;
            p2[c] = v;
            return loss_plain(p2, u0);
        },
        params[c]);
    CHECK(std::abs(grad[c] - fd_c) / std::max(std::abs(fd_c), 1e-8) < 1e-4);
}

TEST_CASE("dopri5: harmonic oscillator returns to (1,0) after one period") {
    std::vector<double> times;
    const double period = 2.0 * 3.14159265358979323846;
    times = {0.0, period};
    auto out = dopri5_integrate(harmonic, std::vector<double>{1.0, 0.0}, times, 1e-7, 1e-9);
    CHECK(std::abs(out[1][0] - 1.0) < 1e-6);
    CHECK(std::abs(out[1][1]) < 1e-6);
}

TEST_CASE("dopri5: FitzHugh-Nagumo at J=0.5 matches a tighter-tolerance run") {
    std::vector<double> times;
    for (int i = 0; i <= 100; ++i) times.push_back(0.1 * i);
    auto coarse = dopri5_integrate(fitzhugh, std::vector<double>{0.0, 0.0}, times, 1e-7, 1e-9);
    auto fine = dopri5_integrate(fitzhugh, std::vector<double>{0.0, 0.0}, times, 1e-10, 1e-12);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        worst = std::max(worst, std::abs(coarse[i][0] - fine[i][0]));
        worst = std::max(worst, std::abs(coarse[i][1] - fine[i][1]));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("dopri5: Chua's circuit over one time unit matches a tighter-tolerance run") {
    std::vector<double> times;
    for (int i = 0; i <= 100; ++i) times.push_back(0.01 * i);
    std::vector<double> u0 = {0.1, 0.1, 0.1};
    auto coarse = dopri5_integrate(chua, u0, times, 1e-7, 1e-9);
    auto fine = dopri5_integrate(chua, u0, times, 1e-11, 1e-13);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (int d = 0; d < 3; ++d) worst = std::max(worst, std::abs(coarse[i][d] - fine[i][d]));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("dopri5: dense output converges at high order") {
    // One forced step of size h; the mid-step interpolant of u' = -u should
    // gain ~2^5 accuracy per halving while the error is resolution-limited.
    auto mid_error = [&](double h) {
        PlainField f = [](std::span<const double> u, double, std::span<double> du) {
            du[0] = -u[0];
        };
        std::vector<double> times = {0.0, h / 2, h};
        auto out = dopri5_integrate(f, std::vector<double>{1.0}, times, 1e30, 1e30, 1000);
        return std::abs(out[1][0] - std::exp(-h / 2));
    };
    const double e1 = mid_error(0.4);
    const double e2 = mid_error(0.2);
    CHECK(e1 / e2 > 16.0);
}

TEST_CASE("dopri5: blow-up triggers the stiffness/underflow error") {
    PlainField f = [](std::span<const double> u, double, std::span<double> du) {
        du[0] = u[0] * u[0];
    };
    std::vector<double> times = {0.0, 2.0};  // u' = u^2 from 1 escapes at t=1
    CHECK_THROWS_AS(static_cast<void>(dopri5_integrate(f, std::vector<double>{1.0}, times)),
                    NumericalError);
}

TEST_CASE("dopri5: max step budget is enforced") {
    PlainField f = [](std::span<const double>, double, std::span<double> du) { du[0] = 1.0; };
    std::vector<double> times = {0.0, 1.0};
    CHECK_THROWS_AS(
        static_cast<void>(dopri5_integrate(f, std::vector<double>{0.0}, times, 1e-14, 1e-14, 3)),
        NumericalError);
}

TEST_CASE("dopri5: sample time validation") {
    PlainField f = [](std::span<const double>, double, std::span<double> du) { du[0] = 1.0; };
    std::vector<double> bad = {0.0, 0.5, 0.5};
    CHECK_THROWS_AS(static_cast<void>(dopri5_integrate(f, std::vector<double>{0.0}, bad)),
                    std::invalid_argument);
}
