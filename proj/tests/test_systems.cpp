#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "podinn/linalg.hpp"
#include "podinn/systems.hpp"

using namespace podinn;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("podinn_test_" + tag);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("frozen parameter table matches the published systems") {
    auto a = system_spec("a");
    CHECK(a.param("m1") == 1.0);
    CHECK(a.param("m2") == doctest::Approx(1.2));
    CHECK(a.param("m3") == doctest::Approx(1.4));
    CHECK(a.param("k1.lin") == doctest::Approx(0.2));
    CHECK(a.param("k3.lin") == doctest::Approx(0.4));
    CHECK(a.param("k2.cub") == 0.1);
    CHECK(a.param("d1") == doctest::Approx(0.08));
    CHECK(a.param("d3") == doctest::Approx(0.04));

    auto b = system_spec("b");
    CHECK(b.param("m1") == doctest::Approx(1.4));
    CHECK(b.param("m3") == doctest::Approx(1.0));
    CHECK(b.param("k1.lin") == doctest::Approx(0.5));
    CHECK(b.param("d1") == 0.10);
    CHECK(b.param("d2") == 0.05);
    CHECK(b.param("d3") == 0.02);

    auto c = system_spec("c");
    CHECK(c.param("m1") == 5.0);
    CHECK(c.param("m2") == 3.0);
    CHECK(c.param("k1.lin") == 2.5);
    CHECK(c.param("k1.cub") == 3.4);
    CHECK(c.param("k3.lin") == 2.1);
    CHECK(c.param("k5.cub") == 1.6);
    CHECK(c.param("l1") == 3.0);
    CHECK(c.param("l3") == 4.0);
    CHECK(c.param("l4") == 5.0);

    auto d = system_spec("d");
    CHECK(d.param("L") == doctest::Approx(12.5));
    CHECK(d.param("R2") == 0.8);
    CHECK(d.param("E") == -0.7);

    auto e = system_spec("e");
    CHECK(e.param("alpha") == 15.6);
    CHECK(e.param("beta") == 28.0);
    CHECK(e.param("m0") == doctest::Approx(-8.0 / 7.0));
    CHECK(e.dt == 0.01);

    auto f = system_spec("f");
    CHECK(f.param("L") == 2.5);
    CHECK(f.param("m") == 2.0);
    CHECK(f.param("l") == 1.5);
    CHECK(f.param("K") == 0.5);

    auto g = system_spec("g");
    CHECK(g.param("A") == 5.0);
    CHECK(g.param("rho") == 10.0);
    CHECK(g.param("a2") == 0.3);
    CHECK(g.param("d1") == doctest::Approx(0.06));
    CHECK(g.param("d2") == doctest::Approx(0.02));

    CHECK_THROWS_AS(system_spec("z"), UsageError);
}

TEST_CASE("motor field: omega rate is K I / (m l^2) = 1/9 at rest") {
    auto spec = system_spec("f");
    ExternalStream stream;
    stream.efforts.push_back(ConstantSignal{0.0});
    std::vector<double> u = {0.0, 0.0, 1.0};
    std::vector<double> du(3);
    system_field(spec, u, 0.0, stream, du);
    CHECK(du[0] == 0.0);
    CHECK(du[1] == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("FitzHugh field at the origin with J=0 is (0, 0.056)") {
    auto spec = system_spec("d");
    ExternalStream stream;
    stream.efforts.push_back(ConstantSignal{0.0});
    std::vector<double> du(2);
    system_field(spec, std::vector<double>{0.0, 0.0}, 0.0, stream, du);
    CHECK(du[0] == doctest::Approx(0.0));
    CHECK(du[1] == doctest::Approx(0.08 * 0.7));
}

TEST_CASE("tank field: no piston motion means no volume change") {
    auto spec = system_spec("g");
    ExternalStream stream;
    stream.efforts.push_back(ConstantSignal{0.0});
    std::vector<double> u = {5.0, -10.0, 6.0, 0.0, 0.0};
    std::vector<double> du(5);
    system_field(spec, u, 0.0, stream, du);
    CHECK(du[0] == 0.0);
    CHECK(du[1] == 0.0);
    CHECK(du[2] == 0.0);
}

TEST_CASE("system (a) at rest with zero force stays put") {
    auto spec = system_spec("a");
    ExternalStream stream;
    stream.efforts.push_back(ConstantSignal{0.0});
    std::vector<double> u(6, 0.0);
    std::vector<double> du(6);
    system_field(spec, u, 0.0, stream, du);
    for (double v : du) CHECK(v == 0.0);
}

TEST_CASE("FitzHugh current is evenly spaced across 30 trajectories") {
    auto spec = system_spec("d");
    for (int tr : {0, 7, 29}) {
        auto stream = external_stream(spec, 5, tr, 30);
        const double J = signal(stream.efforts[0], 3.7);
        CHECK(J == doctest::Approx(0.1 + (1.5 - 0.1) * tr / 29.0));
    }
    // constant within a trajectory
    auto stream = external_stream(spec, 5, 3, 30);
    CHECK(signal(stream.efforts[0], 0.0) == signal(stream.efforts[0], 55.0));
}

TEST_CASE("tank initial conditions sit near the stated equilibrium") {
    auto spec = system_spec("g");
    for (int tr = 0; tr < 20; ++tr) {
        auto u = initial_state(spec, 11, tr);
        CHECK(std::abs(u[0] - 5.0) <= 0.25);
        CHECK(std::abs(u[1] + 10.0) <= 0.3);
        CHECK(std::abs(u[2] - 6.0) <= 0.3);
        CHECK(std::abs(u[3]) <= 0.3);
    }
}

TEST_CASE("generation is deterministic and order-independent") {
    auto spec = system_spec("b");
    auto ds1 = generate(spec, 4, 20, 42);
    auto ds2 = generate(spec, 4, 20, 42);
    CHECK(ds1.obs == ds2.obs);
    CHECK(ds1.ext == ds2.ext);
    // The last trajectory alone reproduces its slice bit-for-bit.
    auto single_stream = external_stream(spec, 42, 3, 1);
    auto u0 = initial_state(spec, 42, 3);
    CHECK(u0[0] == ds1.obs_at(3, 0)[0]);
    CHECK(signal(single_stream.efforts[0], 0.0) == ds1.ext_at(3, 0)[0]);
}

TEST_CASE("dataset round-trips bit-exactly through the directory format") {
    auto spec = system_spec("g");
    auto ds = generate(spec, 2, 12, 7);
    auto dir = temp_dir("roundtrip");
    write_dataset(ds, dir);
    auto back = read_dataset(dir);
    CHECK(back.system == ds.system);
    CHECK(back.dt == ds.dt);
    CHECK(back.seed == ds.seed);
    CHECK(back.theta == ds.theta);
    CHECK(back.obs_names == ds.obs_names);
    CHECK(back.ext_names == ds.ext_names);
    CHECK(back.obs == ds.obs);  // bit-exact
    CHECK(back.ext == ds.ext);
    std::filesystem::remove_all(dir);
}

TEST_CASE("dataset header names match the system's observation names") {
    auto spec = system_spec("b_abs");
    auto ds = generate(spec, 1, 4, 1);
    auto dir = temp_dir("header");
    write_dataset(ds, dir);
    std::ifstream csv(dir / "trajectories.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "traj_id,step,t,x1,x2,x3,v1,v2,v3,v_b,q_b");
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing meta file raises a schema error") {
    auto dir = temp_dir("missing_meta");
    std::filesystem::create_directories(dir);
    CHECK_THROWS_AS(static_cast<void>(read_dataset(dir)), SchemaError);
    // Corrupt schema version as well.
    {
        std::ofstream meta(dir / "meta.json");
        meta << "{\"schema_version\": 999}\n";
    }
    CHECK_THROWS_AS(static_cast<void>(read_dataset(dir)), SchemaError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("conservative 2-D system: energy drift below 1e-6 over 1000 steps") {
    // The system itself conserves H exactly; the integrator tracks it to
    // well under 1e-6 once the tolerance is tight enough for H ~ 0.2.
    auto spec = system_spec("c");
    ExternalStream stream;
    auto u0 = initial_state(spec, 3, 0);
    std::vector<double> times;
    for (int i = 0; i <= 1000; ++i) times.push_back(0.1 * i);
    PlainField f = [&](std::span<const double> u, double t, std::span<double> du) {
        system_field(spec, u, t, stream, du);
    };
    auto states = dopri5_integrate(f, u0, times, 1e-12, 1e-12);
    const double h0 = system_energy(spec, states.front());
    double worst = 0.0;
    for (const auto& s : states) {
        worst = std::max(worst, std::abs(system_energy(spec, s) - h0));
    }
    CHECK(worst / std::abs(h0) < 1e-6);
}

TEST_CASE("redundant observations lie on a low-dimensional manifold") {
    // Stack finite-difference tangents of the 14-dim observation track; at
    // most 8 singular values stay above 1e-6 of the largest.
    auto spec = system_spec("c");
    auto ds = generate(spec, 4, 60, 9);
    const int rows = 4 * 59;
    Matrix tangents(rows, 14);
    int r = 0;
    for (int tr = 0; tr < 4; ++tr) {
        for (int st = 0; st + 1 < 60; ++st, ++r) {
            auto a = ds.obs_at(tr, st);
            auto b = ds.obs_at(tr, st + 1);
            for (int k = 0; k < 14; ++k) tangents.at(r, k) = (b[k] - a[k]) / ds.dt;
        }
    }
    auto svd = jacobi_svd(tangents);
    int above = 0;
    for (double s : svd.singular_values) {
        if (s > 1e-6 * svd.singular_values.front()) ++above;
    }
    CHECK(above <= 8);
}

TEST_CASE("spring observations of the 2-D system follow the mass displacements") {
    auto spec = system_spec("c");
    std::vector<double> state = {0.2, -0.1, 0.05, 0.3, 0.0, 0.0, 0.0, 0.0};
    std::vector<double> obs(14);
    observe(spec, state, obs);
    CHECK(obs[0] == doctest::Approx(0.2));    // q1 = dm1
    CHECK(obs[1] == doctest::Approx(-0.1));
    CHECK(obs[2] == doctest::Approx(0.05));   // q2 = dm2
    CHECK(obs[4] == doctest::Approx(0.05 - 0.2));  // q3 = dm2 - dm1
    CHECK(obs[6] == doctest::Approx(0.05));   // q4 = dm2
    CHECK(obs[8] == doctest::Approx(0.2));    // q5 = dm1
    CHECK(obs[9] == doctest::Approx(-0.1));
}

TEST_CASE("generate validates its grid arguments") {
    auto spec = system_spec("a");
    CHECK_THROWS_AS(static_cast<void>(generate(spec, 0, 10, 1)), UsageError);
    CHECK_THROWS_AS(static_cast<void>(generate(spec, 1, 1, 1)), UsageError);
}
