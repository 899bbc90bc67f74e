#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "podinn/bivector.hpp"
#include "podinn/ports.hpp"
#include "podinn/rng.hpp"

using namespace podinn;

namespace {

// Two-mass two-spring chain from a fixed wall, basis (q1, q2, p1, p2):
// B = dp1^dq1 - dp1^dq2 + dp2^dq2.
Bivector chain_bivector() {
    Bivector b(4);
    b.set_fixed(0, 2, 1.0);   // dp1 ^ dq1: effort of p1 drives the flow of q1
    b.set_fixed(1, 2, -1.0);  // - dp1 ^ dq2
    b.set_fixed(1, 3, 1.0);   // dp2 ^ dq2
    return b;
}

PortLayout mech_layout(int n_masses, int n_springs, int n_dampers, int n_forces,
                       int n_walls = 0) {
    PortLayout l;
    for (int i = 0; i < n_springs; ++i) {
        l.storage.push_back({"q" + std::to_string(i + 1), Domain::MechPotential});
    }
    for (int i = 0; i < n_masses; ++i) {
        l.storage.push_back({"p" + std::to_string(i + 1), Domain::MechKinetic});
    }
    for (int i = 0; i < n_dampers; ++i) {
        l.resistive.push_back({"d" + std::to_string(i + 1), PortKind::Velocity});
    }
    for (int i = 0; i < n_forces; ++i) {
        l.external.push_back({"F" + std::to_string(i + 1), PortKind::Force});
    }
    for (int i = 0; i < n_walls; ++i) {
        l.external.push_back({"b" + std::to_string(i + 1), PortKind::Velocity});
    }
    return l;
}

}  // namespace

TEST_CASE("chain bivector matches the frozen matrix and unit-effort flows") {
    ParamSet params;
    Bivector b = chain_bivector();
    Matrix m = b.dense(params);
    const double expect[4][4] = {{0, 0, 1, 0}, {0, 0, -1, 1}, {-1, 1, 0, 0}, {0, -1, 0, 0}};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) CHECK(m.at(i, j) == expect[i][j]);
    }
    // Oracle: the printed equations of motion at unit effort e_q1 = 1 give
    // dq1 = 0, dq2 = 0, dp1 = -1, dp2 = 0.
    const std::vector<double> e = {1, 0, 0, 0};
    auto f = b.apply(e, params);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 0.0);
    CHECK(f[2] == -1.0);
    CHECK(f[3] == 0.0);
}

TEST_CASE("bundle map: zero effort gives zero flow, canonical 2-dim rotates") {
    ParamSet params;
    Bivector b = chain_bivector();
    auto f0 = b.apply(std::vector<double>{0, 0, 0, 0}, params);
    for (double v : f0) CHECK(v == 0.0);

    Bivector c(2);
    c.set_fixed(0, 1, 1.0);  // B = [0 1; -1 0]
    auto f = c.apply(std::vector<double>{0.3, -1.7}, params);
    CHECK(f[0] == doctest::Approx(-1.7));
    CHECK(f[1] == doctest::Approx(-0.3));

    CHECK_THROWS_AS(static_cast<void>(c.apply(std::vector<double>{1.0}, params)),
                    std::invalid_argument);
}

TEST_CASE("pairing examples and skew property over random bivectors") {
    ParamSet params;
    CHECK(pairing(std::vector<double>{1, 0}, std::vector<double>{1, 0}) == 1.0);
    CHECK(pairing(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(pairing(std::vector<double>{1, 2}, std::vector<double>{2, -1}) == 0.0);
    CHECK_THROWS_AS(pairing(std::vector<double>{1}, std::vector<double>{1, 2}),
                    std::invalid_argument);

    for (int seed = 0; seed < 10; ++seed) {
        DrawStream rng(seed, 99);
        const int n = 2 + static_cast<int>(rng.below(8));
        Bivector b(n);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng.uniform01() < 0.6) b.set_fixed(i, j, rng.uniform(-2.0, 2.0));
            }
        }
        std::vector<double> e(n);
        for (auto& v : e) v = rng.uniform(-3.0, 3.0);
        auto f = b.apply(e, params);
        double norm_e = 0.0, norm_f = 0.0;
        for (double v : e) norm_e += v * v;
        for (double v : f) norm_f += v * v;
        const double scale = std::sqrt(norm_e * norm_f);
        if (scale > 0.0) CHECK(std::abs(pairing(e, f)) < 1e-12 * scale);
    }
}

TEST_CASE("bundle map is linear in the efforts") {
    ParamSet params;
    Bivector b = chain_bivector();
    DrawStream rng(4, 0);
    std::vector<double> e1(4), e2(4), mix(4);
    for (int i = 0; i < 4; ++i) {
        e1[i] = rng.uniform(-1, 1);
        e2[i] = rng.uniform(-1, 1);
    }
    const double al = 0.7, be = -1.3;
    for (int i = 0; i < 4; ++i) mix[i] = al * e1[i] + be * e2[i];
    auto f1 = b.apply(e1, params);
    auto f2 = b.apply(e2, params);
    auto fm = b.apply(mix, params);
    for (int i = 0; i < 4; ++i) {
        CHECK(fm[i] == doctest::Approx(al * f1[i] + be * f2[i]).epsilon(1e-12));
    }
}

TEST_CASE("degeneracy rank: constrained two-mass bivector has rank 2 of 4") {
    // B = (1/(m1+m2)) (m1 dp1 + m2 dp2) ^ (dq1 + dq2) with m1 = m2 = 1:
    // every (p_i, q_j) pair carries coefficient 1/2.
    ParamSet params;
    PortLayout layout = mech_layout(2, 2, 0, 0);
    Bivector b(4);
    for (int pi : {2, 3}) {
        for (int qj : {0, 1}) b.set_fixed(pi, qj, 0.5);
    }
    auto r = degeneracy_rank(b, layout, params);
    CHECK(r.rank == 2);
    REQUIRE(r.nullspace.cols == 2);
    // Kernel vectors satisfy e_q1 = -e_q2 and e_p1 = -e_p2: orthogonal to
    // (1,1,0,0) and (0,0,1,1), i.e. they span the (q1 - q2)-type constraint.
    for (int j = 0; j < r.nullspace.cols; ++j) {
        CHECK(std::abs(r.nullspace.at(0, j) + r.nullspace.at(1, j)) < 1e-10);
        CHECK(std::abs(r.nullspace.at(2, j) + r.nullspace.at(3, j)) < 1e-10);
    }
}

TEST_CASE("degeneracy rank: canonical form is full rank, zero matrix is rank 0") {
    ParamSet params;
    for (int n : {2, 3}) {
        PortLayout layout = mech_layout(n, n, 0, 0);
        Bivector b(2 * n);
        for (int i = 0; i < n; ++i) b.set_fixed(n + i, i, 1.0);
        CHECK(degeneracy_rank(b, layout, params).rank == 2 * n);
    }
    PortLayout layout = mech_layout(2, 2, 0, 0);
    Bivector z(4);
    auto r = degeneracy_rank(z, layout, params);
    CHECK(r.rank == 0);
    CHECK(r.nullspace.cols == 4);
}

TEST_CASE("causal blocks: skewness ties B_SR and B_RS, zero bivector stays zero") {
    ParamSet params;
    PortLayout layout = mech_layout(1, 1, 1, 0);  // basis (q1, p1, d1)
    Bivector b(3);
    b.set_fixed(0, 2, 0.5);  // B[q1][d1] = 0.5
    auto blocks = causal_blocks(b, layout);

    auto dense = [&](const ad::CoeffMatrix& m) {
        Matrix d(m.rows, m.cols);
        for (const auto& t : m.triplets) {
            d.at(t.row, t.col) += t.slot == no_slot ? t.value : t.sign * params[t.slot];
        }
        return d;
    };
    Matrix sr = dense(blocks.sr);
    CHECK(sr.at(0, 0) == 0.5);
    CHECK(sr.at(1, 0) == 0.0);
    Matrix rs = dense(blocks.rs);
    CHECK(rs.at(0, 0) == -0.5);
    CHECK(rs.at(0, 1) == 0.0);

    Bivector z(3);
    auto zb = causal_blocks(z, layout);
    CHECK(zb.ss.triplets.empty());
    CHECK(zb.sr.triplets.empty());
    CHECK(zb.rs.triplets.empty());
}

TEST_CASE("causal blocks reject resistive-resistive couplings") {
    ParamSet params;
    PortLayout layout = mech_layout(1, 1, 2, 0);  // (q1, p1, d1, d2)
    Bivector b(4);
    b.set_fixed(2, 3, 0.3);  // d1-d2 coupling would demand a DAE
    CHECK_THROWS_AS(causal_blocks(b, layout), std::invalid_argument);
}

TEST_CASE("moving-boundary damper chain reproduces the learned block signs") {
    // Dampers d_i coupled as a_i (dp_i - dp_{i-1}) ^ xi_i: each damper row of
    // B_RS carries +a at its own mass and -a at the neighbor.
    ParamSet params;
    PortLayout layout = mech_layout(3, 3, 3, 0);  // (q1..3, p1..3, d1..3)
    Bivector b(6 + 3);
    const double a[3] = {0.8, 1.1, 0.9};
    for (int i = 0; i < 3; ++i) {
        b.set_fixed(6 + i, 3 + i, a[i]);                  // dp_i ^ xi_i
        if (i > 0) b.set_fixed(6 + i, 3 + i - 1, -a[i]);  // - dp_{i-1} ^ xi_i
    }
    auto blocks = causal_blocks(b, layout);
    Matrix rs(3, 6);
    for (const auto& t : blocks.rs.triplets) rs.at(t.row, t.col) += t.value;
    for (int i = 0; i < 3; ++i) {
        CHECK(rs.at(i, 3 + i) == doctest::Approx(a[i]));
        if (i > 0) CHECK(rs.at(i, 3 + i - 1) == doctest::Approx(-a[i]));
    }
}

TEST_CASE("compatibility mask encodes the physical coupling rules") {
    PortLayout l = mech_layout(3, 3, 2, 1, 1);  // q1..3 p1..3 d1..2 F1 b1
    auto mask = l.compatibility_mask();
    const int q1 = 0, p1 = 3, p2 = 4, d1 = 6, d2 = 7, F = 8, wall = 9;
    CHECK(mask[q1][p1]);        // spring-mass
    CHECK_FALSE(mask[p1][p2]);  // masses never couple directly
    CHECK_FALSE(mask[q1][1]);   // nor springs
    CHECK(mask[p1][d1]);        // mass-damper
    CHECK(mask[p1][F]);         // mass-force
    CHECK_FALSE(mask[q1][F]);   // spring-force kinds mismatch
    CHECK(mask[q1][wall]);      // moving wall drives a spring
    CHECK(mask[d1][wall]);      // moving wall drives a damper
    CHECK_FALSE(mask[p1][wall]);
    CHECK_FALSE(mask[d1][d2]);  // resistive-resistive always forbidden
    for (int i = 0; i < l.n_total(); ++i) {
        for (int j = 0; j < l.n_total(); ++j) CHECK(mask[i][j] == mask[j][i]);
    }
}

TEST_CASE("compatibility mask admits gyrator and transformer pairs") {
    PortLayout motor;
    motor.storage.push_back({"theta", Domain::RotPotential});
    motor.storage.push_back({"p", Domain::RotKinetic});
    motor.storage.push_back({"phi", Domain::Magnetic});
    motor.resistive.push_back({"fric", PortKind::AngularVelocity});
    motor.resistive.push_back({"R", PortKind::Current});
    motor.external.push_back({"E", PortKind::Voltage});
    auto mask = motor.compatibility_mask();
    CHECK(mask[0][1]);        // pendulum angle-momentum
    CHECK(mask[1][2]);        // gyrator: flux with angular momentum
    CHECK_FALSE(mask[0][2]);  // flux with angle is no gyrator pair
    CHECK(mask[1][3]);        // friction on the momentum
    CHECK(mask[2][4]);        // armature resistance on the flux
    CHECK(mask[2][5]);        // voltage source on the flux
    CHECK_FALSE(mask[1][5]);

    PortLayout tank;
    tank.storage.push_back({"V", Domain::Hydraulic});
    tank.storage.push_back({"q1", Domain::MechPotential});
    tank.storage.push_back({"p1", Domain::MechKinetic});
    auto tmask = tank.compatibility_mask();
    CHECK(tmask[0][2]);        // transformer: volume with momentum
    CHECK_FALSE(tmask[0][1]);  // volume with spring displacement
}

TEST_CASE("circuit mask: flow kinds decide which elements may couple") {
    PortLayout l;
    l.storage.push_back({"Q1", Domain::Electric});
    l.storage.push_back({"Q2", Domain::Electric});
    l.storage.push_back({"psi", Domain::Magnetic});
    l.resistive.push_back({"Rv", PortKind::Voltage});
    l.resistive.push_back({"Rc", PortKind::Current});
    l.external.push_back({"J", PortKind::Current});
    auto mask = l.compatibility_mask();
    CHECK_FALSE(mask[0][1]);  // capacitor-capacitor
    CHECK(mask[0][2]);        // capacitor-inductor
    CHECK(mask[0][3]);        // capacitor with voltage-flow resistor
    CHECK_FALSE(mask[0][4]);  // capacitor with current-flow resistor
    CHECK(mask[2][4]);        // inductor with current-flow resistor
    CHECK_FALSE(mask[2][3]);
    CHECK(mask[0][5]);        // current source feeds the capacitor node
    CHECK_FALSE(mask[2][5]);
    CHECK(mask[4][5]);        // current source with current-flow resistor
    CHECK_FALSE(mask[3][4]);  // mixed-flow resistor pair would be a DAE
}

TEST_CASE("learnable entries live in the ParamSet and fixed zeros stay implicit") {
    ParamSet params;
    Bivector b(3);
    std::size_t slot = b.set_learnable(0, 2, params, "B.q1.d1", 0.25);
    CHECK(b.coefficient(0, 2, params) == 0.25);
    CHECK(b.coefficient(2, 0, params) == -0.25);
    CHECK(b.coefficient(0, 1, params) == 0.0);
    params[slot] = -1.5;
    CHECK(b.coefficient(0, 2, params) == -1.5);
    CHECK_THROWS_AS(b.set_learnable(2, 0, params, "dup", 0.0), std::invalid_argument);
}
