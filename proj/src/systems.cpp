#include "podinn/systems.hpp"

#include <algorithm>
#include <cmath>

#include "podinn/parallel.hpp"
#include "podinn/rng.hpp"

namespace podinn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cubic_force(double lin, double cub, double dq) { return lin * dq + cub * dq * dq * dq; }
double cubic_potential(double lin, double cub, double dq) {
    return 0.5 * lin * dq * dq + 0.25 * cub * dq * dq * dq * dq;
}
double power_damper(double c, double v) { return c * std::cbrt(v); }

// ---- system (c) geometry ---------------------------------------------------
// Rest layout: masses at (0,0) and (4,0), wall anchors at (0,3) and (4,3).
// Springs (from, to): 1 A->m1, 2 B->m2, 3 m1->m2, 4 A->m2, 5 B->m1, so the
// rest lengths (3,3,4,5,5) carry no pre-tension and the frame is a crossed
// 3-4-5 brace.
struct SpringDef {
    int from;  // -1: anchor A, -2: anchor B, else mass index
    int to;
    double lin, cub, rest;
};
constexpr double kAnchorA[2] = {0.0, 3.0};
constexpr double kAnchorB[2] = {4.0, 3.0};
constexpr double kMassRest[2][2] = {{0.0, 0.0}, {4.0, 0.0}};
const SpringDef kSprings2D[5] = {
    {-1, 0, 2.5, 3.4, 3.0}, {-2, 1, 3.0, 0.5, 3.0}, {0, 1, 2.1, 4.1, 4.0},
    {-1, 1, 3.5, 2.4, 5.0}, {-2, 0, 2.5, 1.6, 5.0},
};

void endpoint_position(int which, std::span<const double> state, double* out) {
    if (which == -1) {
        out[0] = kAnchorA[0];
        out[1] = kAnchorA[1];
    } else if (which == -2) {
        out[0] = kAnchorB[0];
        out[1] = kAnchorB[1];
    } else {
        out[0] = kMassRest[which][0] + state[2 * which];
        out[1] = kMassRest[which][1] + state[2 * which + 1];
    }
}

std::vector<std::pair<std::string, double>> mass_spring_params(SystemFamily family) {
    std::vector<std::pair<std::string, double>> p;
    if (family == SystemFamily::MassSpringForced) {
        // m_i = 0.8 + 0.2 i ; k_i = (0.1 + 0.1 i) dq + 0.1 dq^3 ;
        // dampers parallel to springs 1 and 3 with d_i = 0.1 - 0.02 i.
        for (int i = 1; i <= 3; ++i) {
            p.emplace_back("m" + std::to_string(i), 0.8 + 0.2 * i);
            p.emplace_back("k" + std::to_string(i) + ".lin", 0.1 + 0.1 * i);
            p.emplace_back("k" + std::to_string(i) + ".cub", 0.1);
        }
        p.emplace_back("d1", 0.1 - 0.02 * 1);
        p.emplace_back("d3", 0.1 - 0.02 * 3);
    } else {
        // m_i = 1.6 - 0.2 i ; k_i = (0.6 - 0.1 i) dq + 0.1 dq^3 ;
        // dampers parallel to every spring with (0.10, 0.05, 0.02).
        const double dtil[3] = {0.10, 0.05, 0.02};
        for (int i = 1; i <= 3; ++i) {
            p.emplace_back("m" + std::to_string(i), 1.6 - 0.2 * i);
            p.emplace_back("k" + std::to_string(i) + ".lin", 0.6 - 0.1 * i);
            p.emplace_back("k" + std::to_string(i) + ".cub", 0.1);
            p.emplace_back("d" + std::to_string(i), dtil[i - 1]);
        }
    }
    return p;
}

}  // namespace

double SystemSpec::param(const std::string& name) const {
    for (const auto& [k, v] : params) {
        if (k == name) return v;
    }
    throw std::out_of_range("system " + id + " has no parameter " + name);
}

std::vector<std::string> known_system_ids() {
    return {"a", "a_abs", "b", "b_abs", "c", "d", "e", "f", "g"};
}

SystemSpec system_spec(const std::string& id) {
    SystemSpec s;
    s.id = id;
    if (id == "a" || id == "a_abs") {
        s.family = SystemFamily::MassSpringForced;
        s.mode = id == "a" ? CoordinateMode::Relative : CoordinateMode::Absolute;
        s.theta = 1e-3;
        s.state_dim = 6;
        const char* q = s.mode == CoordinateMode::Relative ? "dq" : "x";
        for (int i = 1; i <= 3; ++i) s.obs_names.push_back(q + std::to_string(i));
        for (int i = 1; i <= 3; ++i) s.obs_names.push_back("v" + std::to_string(i));
        s.ext_names = {"F"};
        s.n_ext_efforts = 1;
        s.params = mass_spring_params(s.family);
    } else if (id == "b" || id == "b_abs") {
        s.family = SystemFamily::MassSpringBoundary;
        s.mode = id == "b" ? CoordinateMode::Relative : CoordinateMode::Absolute;
        s.theta = 1e-4;
        s.state_dim = 6;
        const char* q = s.mode == CoordinateMode::Relative ? "dq" : "x";
        for (int i = 1; i <= 3; ++i) s.obs_names.push_back(q + std::to_string(i));
        for (int i = 1; i <= 3; ++i) s.obs_names.push_back("v" + std::to_string(i));
        if (s.mode == CoordinateMode::Relative) {
            s.ext_names = {"v_b"};
        } else {
            s.ext_names = {"v_b", "q_b"};  // the wall position feeds the potential net
        }
        s.n_ext_efforts = 1;
        s.params = mass_spring_params(s.family);
    } else if (id == "c") {
        s.family = SystemFamily::Redundant2D;
        s.theta = 1e-3;
        s.state_dim = 8;
        for (int i = 1; i <= 5; ++i) {
            s.obs_names.push_back("qx" + std::to_string(i));
            s.obs_names.push_back("qy" + std::to_string(i));
        }
        for (int i = 1; i <= 2; ++i) {
            s.obs_names.push_back("vx" + std::to_string(i));
            s.obs_names.push_back("vy" + std::to_string(i));
        }
        s.params = {{"m1", 5.0}, {"m2", 3.0}};
        for (int i = 0; i < 5; ++i) {
            const auto tag = "k" + std::to_string(i + 1);
            s.params.emplace_back(tag + ".lin", kSprings2D[i].lin);
            s.params.emplace_back(tag + ".cub", kSprings2D[i].cub);
            s.params.emplace_back("l" + std::to_string(i + 1), kSprings2D[i].rest);
        }
    } else if (id == "d") {
        s.family = SystemFamily::FitzHughNagumo;
        s.theta = 1e-3;
        s.state_dim = 2;
        s.obs_names = {"V", "W"};
        s.ext_names = {"J"};
        s.n_ext_efforts = 1;
        s.params = {{"C", 1.0},  {"L", 1.0 / 0.08}, {"R2", 0.8},
                    {"E", -0.7}, {"J.lo", 0.1},     {"J.hi", 1.5}};
    } else if (id == "e") {
        s.family = SystemFamily::Chua;
        s.theta = 1e-3;
        s.dt = 0.01;
        s.state_dim = 3;
        s.obs_names = {"V_C1", "V_C2", "I_L"};
        s.params = {{"alpha", 15.6}, {"beta", 28.0}, {"m0", -8.0 / 7.0},
                    {"m1", -5.0 / 7.0}, {"R1", 1.0}};
    } else if (id == "f") {
        s.family = SystemFamily::DcMotor;
        s.theta = 1e-4;
        s.state_dim = 3;
        s.obs_names = {"theta", "omega", "I"};
        s.ext_names = {"E"};
        s.n_ext_efforts = 1;
        s.params = {{"L", 2.5}, {"m", 2.0},    {"l", 1.5},
                    {"g", 1.0}, {"K", 0.5},    {"d", 0.02},
                    {"R", 0.05}};
    } else if (id == "g") {
        s.family = SystemFamily::HydraulicTank;
        s.theta = 1e-4;
        s.state_dim = 5;
        s.obs_names = {"V", "q1", "q2", "v1", "v2"};
        s.ext_names = {"F"};
        s.n_ext_efforts = 1;
        s.params = {{"A", 5.0},  {"g", 1.0},  {"rho", 10.0}, {"a1", 1.0},
                    {"a2", 0.3}, {"m1", 3.0}, {"m2", 1.0},   {"k.lin", 0.1},
                    {"k.cub", 0.01}, {"d1", 0.1 - 0.04 * 1}, {"d2", 0.1 - 0.04 * 2}};
    } else {
        throw UsageError("unknown system id: " + id);
    }
    return s;
}

std::vector<double> ExternalStream::efforts_at(double t) const {
    std::vector<double> v(efforts.size());
    for (std::size_t i = 0; i < efforts.size(); ++i) v[i] = signal(efforts[i], t);
    return v;
}

std::vector<double> ExternalStream::aux_at(double t) const {
    std::vector<double> v(aux.size());
    for (std::size_t i = 0; i < aux.size(); ++i) v[i] = signal(aux[i], t);
    return v;
}

std::vector<double> ExternalStream::all_at(double t) const {
    auto v = efforts_at(t);
    auto a = aux_at(t);
    v.insert(v.end(), a.begin(), a.end());
    return v;
}

namespace {

// Per-trajectory draw indices are fixed per family, so initial conditions
// and signal parameters can be regenerated independently and in any order.
SumOfSines draw_waves(const CounterRng& rng, std::uint64_t first_draw, double amp_lo,
                      double amp_hi, double w_lo, double w_hi) {
    SumOfSines s;
    for (int k = 0; k < 3; ++k) {
        const std::uint64_t base = first_draw + 3 * k;
        s.waves.push_back({rng.uniform(base, amp_lo, amp_hi),
                           rng.uniform(base + 1, w_lo, w_hi),
                           rng.uniform(base + 2, 0.0, 2.0 * kPi)});
    }
    return s;
}

}  // namespace

ExternalStream external_stream(const SystemSpec& spec, std::uint64_t seed, std::uint64_t traj,
                               int n_traj) {
    CounterRng rng(seed, traj);
    ExternalStream out;
    switch (spec.family) {
        case SystemFamily::MassSpringForced:
            out.efforts.push_back(draw_waves(rng, 6, 0.2, 0.5, 0.1 * kPi, 0.2 * kPi));
            break;
        case SystemFamily::MassSpringBoundary: {
            SumOfSines pos = draw_waves(rng, 6, 0.2, 0.4, 0.05 * kPi, 0.2 * kPi);
            out.efforts.push_back(derivative(pos));  // the wall effort is its velocity
            if (spec.mode == CoordinateMode::Absolute) out.aux.push_back(pos);
            break;
        }
        case SystemFamily::FitzHughNagumo: {
            // Evenly spaced constant current over the trajectory set.
            const double lo = spec.param("J.lo");
            const double hi = spec.param("J.hi");
            const double denom = std::max(1, n_traj - 1);
            out.efforts.push_back(
                ConstantSignal{lo + (hi - lo) * static_cast<double>(traj) / denom});
            break;
        }
        case SystemFamily::DcMotor:
            out.efforts.push_back(draw_waves(rng, 3, 0.2, 0.5, 0.1 * kPi, 0.2 * kPi));
            break;
        case SystemFamily::HydraulicTank:
            out.efforts.push_back(draw_waves(rng, 5, 0.05, 0.2, 0.1 * kPi, 0.3 * kPi));
            break;
        case SystemFamily::Redundant2D:
        case SystemFamily::Chua:
            break;
    }
    return out;
}

std::vector<double> initial_state(const SystemSpec& spec, std::uint64_t seed,
                                  std::uint64_t traj) {
    CounterRng rng(seed, traj);
    std::vector<double> u(static_cast<std::size_t>(spec.state_dim), 0.0);
    switch (spec.family) {
        case SystemFamily::MassSpringForced:
        case SystemFamily::MassSpringBoundary: {
            double dq[3], v[3];
            for (int i = 0; i < 3; ++i) dq[i] = rng.uniform(i, -0.5, 0.5);
            for (int i = 0; i < 3; ++i) v[i] = rng.uniform(3 + i, -0.3, 0.3);
            if (spec.mode == CoordinateMode::Relative) {
                for (int i = 0; i < 3; ++i) u[i] = dq[i];
            } else {
                // Natural lengths are taken as zero, so positions accumulate
                // displacements from the wall; the moving wall starts at its
                // t = 0 position.
                double base = 0.0;
                if (spec.family == SystemFamily::MassSpringBoundary) {
                    base = signal(external_stream(spec, seed, traj, 1).aux.at(0), 0.0);
                }
                for (int i = 0; i < 3; ++i) {
                    base += dq[i];
                    u[i] = base;
                }
            }
            for (int i = 0; i < 3; ++i) u[3 + i] = v[i];
            break;
        }
        case SystemFamily::Redundant2D:
            for (int i = 0; i < 4; ++i) u[i] = rng.uniform(i, -0.5, 0.5);
            for (int i = 0; i < 4; ++i) u[4 + i] = rng.uniform(4 + i, -0.1, 0.1);
            break;
        case SystemFamily::FitzHughNagumo:
            u[0] = rng.uniform(0, -3.0, 3.0);
            u[1] = rng.uniform(1, -3.0, 3.0);
            break;
        case SystemFamily::Chua:
            for (int i = 0; i < 3; ++i) u[i] = rng.uniform(i, -0.5, 0.5);
            break;
        case SystemFamily::DcMotor:
            u[0] = rng.uniform(0, -0.5, 0.5);
            u[1] = rng.uniform(1, -0.3, 0.3);
            u[2] = rng.uniform(2, -0.3, 0.3);
            break;
        case SystemFamily::HydraulicTank:
            u[0] = rng.uniform(0, 5.0 - 0.25, 5.0 + 0.25);
            u[1] = rng.uniform(1, -10.0 - 0.3, -10.0 + 0.3);
            u[2] = rng.uniform(2, 6.0 - 0.3, 6.0 + 0.3);
            u[3] = rng.uniform(3, -0.3, 0.3);
            u[4] = rng.uniform(4, -0.3, 0.3);
            break;
    }
    return u;
}

void system_field(const SystemSpec& spec, std::span<const double> state, double t,
                  const ExternalStream& stream, std::span<double> du) {
    if (static_cast<int>(state.size()) != spec.state_dim) {
        throw std::invalid_argument("system_field: state dimension mismatch");
    }
    switch (spec.family) {
        case SystemFamily::MassSpringForced: {
            const double F = signal(stream.efforts.at(0), t);
            double dq[3];
            if (spec.mode == CoordinateMode::Relative) {
                for (int i = 0; i < 3; ++i) dq[i] = state[i];
            } else {
                dq[0] = state[0];
                dq[1] = state[1] - state[0];
                dq[2] = state[2] - state[1];
            }
            const double v1 = state[3], v2 = state[4], v3 = state[5];
            double k[3];
            for (int i = 0; i < 3; ++i) {
                k[i] = cubic_force(spec.param("k" + std::to_string(i + 1) + ".lin"),
                                   spec.param("k" + std::to_string(i + 1) + ".cub"), dq[i]);
            }
            const double f_d1 = power_damper(spec.param("d1"), v1);
            const double f_d3 = power_damper(spec.param("d3"), v3 - v2);
            if (spec.mode == CoordinateMode::Relative) {
                du[0] = v1;
                du[1] = v2 - v1;
                du[2] = v3 - v2;
            } else {
                du[0] = v1;
                du[1] = v2;
                du[2] = v3;
            }
            du[3] = (-k[0] - f_d1 + k[1]) / spec.param("m1");
            du[4] = (-k[1] + k[2] + f_d3) / spec.param("m2");
            du[5] = (-k[2] - f_d3 + F) / spec.param("m3");
            break;
        }
        case SystemFamily::MassSpringBoundary: {
            const double vb = signal(stream.efforts.at(0), t);
            double dq[3];
            if (spec.mode == CoordinateMode::Relative) {
                for (int i = 0; i < 3; ++i) dq[i] = state[i];
            } else {
                const double qb = signal(stream.aux.at(0), t);
                dq[0] = state[0] - qb;
                dq[1] = state[1] - state[0];
                dq[2] = state[2] - state[1];
            }
            const double v1 = state[3], v2 = state[4], v3 = state[5];
            double k[3], fd[3];
            const double rel[3] = {v1 - vb, v2 - v1, v3 - v2};
            for (int i = 0; i < 3; ++i) {
                k[i] = cubic_force(spec.param("k" + std::to_string(i + 1) + ".lin"),
                                   spec.param("k" + std::to_string(i + 1) + ".cub"), dq[i]);
                fd[i] = power_damper(spec.param("d" + std::to_string(i + 1)), rel[i]);
            }
            if (spec.mode == CoordinateMode::Relative) {
                du[0] = rel[0];
                du[1] = rel[1];
                du[2] = rel[2];
            } else {
                du[0] = v1;
                du[1] = v2;
                du[2] = v3;
            }
            du[3] = (-k[0] - fd[0] + k[1] + fd[1]) / spec.param("m1");
            du[4] = (-k[1] - fd[1] + k[2] + fd[2]) / spec.param("m2");
            du[5] = (-k[2] - fd[2]) / spec.param("m3");
            break;
        }
        case SystemFamily::Redundant2D: {
            const double m[2] = {spec.param("m1"), spec.param("m2")};
            double force[2][2] = {{0, 0}, {0, 0}};
            for (const auto& sp : kSprings2D) {
                double pf[2], pt[2];
                endpoint_position(sp.from, state, pf);
                endpoint_position(sp.to, state, pt);
                const double rx = pt[0] - pf[0];
                const double ry = pt[1] - pf[1];
                const double len = std::hypot(rx, ry);
                const double mag = cubic_force(sp.lin, sp.cub, len - sp.rest);
                const double ux = rx / len, uy = ry / len;
                if (sp.to >= 0) {
                    force[sp.to][0] -= mag * ux;
                    force[sp.to][1] -= mag * uy;
                }
                if (sp.from >= 0) {
                    force[sp.from][0] += mag * ux;
                    force[sp.from][1] += mag * uy;
                }
            }
            for (int i = 0; i < 2; ++i) {
                du[2 * i] = state[4 + 2 * i];
                du[2 * i + 1] = state[4 + 2 * i + 1];
                du[4 + 2 * i] = force[i][0] / m[i];
                du[4 + 2 * i + 1] = force[i][1] / m[i];
            }
            break;
        }
        case SystemFamily::FitzHughNagumo: {
            const double J = signal(stream.efforts.at(0), t);
            const double V = state[0], W = state[1];
            du[0] = V - V * V * V / 3.0 - W + J;
            du[1] = 0.08 * (V + 0.7 - 0.8 * W);
            break;
        }
        case SystemFamily::Chua: {
            const double alpha = spec.param("alpha"), beta = spec.param("beta");
            const double m0 = spec.param("m0"), m1 = spec.param("m1");
            const double v1 = state[0], v2 = state[1], il = state[2];
            const double fv =
                m1 * v1 + 0.5 * (m0 - m1) * (std::abs(v1 + 1.0) - std::abs(v1 - 1.0));
            du[0] = alpha * (v2 - v1 - fv);
            du[1] = v1 - v2 + il;
            du[2] = -beta * v2;
            break;
        }
        case SystemFamily::DcMotor: {
            const double E = signal(stream.efforts.at(0), t);
            const double m = spec.param("m"), l = spec.param("l"), g = spec.param("g");
            const double K = spec.param("K"), L = spec.param("L");
            const double th = state[0], w = state[1], i = state[2];
            du[0] = w;
            du[1] = (-m * g * l * std::sin(th) + K * i - power_damper(spec.param("d"), w)) /
                    (m * l * l);
            du[2] = (-w * K + E - spec.param("R") * i * i * i) / L;
            break;
        }
        case SystemFamily::HydraulicTank: {
            const double F = signal(stream.efforts.at(0), t);
            const double A = spec.param("A"), g = spec.param("g"), rho = spec.param("rho");
            const double a1 = spec.param("a1"), a2 = spec.param("a2");
            const double m1 = spec.param("m1"), m2 = spec.param("m2");
            const double V = state[0], q1 = state[1], q2 = state[2];
            const double v1 = state[3], v2 = state[4];
            const double pressure = rho * g * V / A;
            const double klin = spec.param("k.lin"), kcub = spec.param("k.cub");
            du[0] = a1 * v1 - a2 * v2;
            du[1] = v1;
            du[2] = v2;
            du[3] = (-pressure * a1 - cubic_force(klin, kcub, q1) -
                     power_damper(spec.param("d1"), v1)) /
                    m1;
            du[4] = (pressure * a2 - cubic_force(klin, kcub, q2) -
                     power_damper(spec.param("d2"), v2) + F) /
                    m2;
            break;
        }
    }
}

void observe(const SystemSpec& spec, std::span<const double> state, std::span<double> obs) {
    if (spec.family != SystemFamily::Redundant2D) {
        std::copy(state.begin(), state.end(), obs.begin());
        return;
    }
    // Spring displacement 2-vectors (current minus rest end-to-end vector),
    // then the mass velocities.
    for (int sidx = 0; sidx < 5; ++sidx) {
        const auto& sp = kSprings2D[sidx];
        double pf[2], pt[2], rf[2], rt[2];
        endpoint_position(sp.from, state, pf);
        endpoint_position(sp.to, state, pt);
        const double zero_state[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        endpoint_position(sp.from, zero_state, rf);
        endpoint_position(sp.to, zero_state, rt);
        obs[2 * sidx] = (pt[0] - pf[0]) - (rt[0] - rf[0]);
        obs[2 * sidx + 1] = (pt[1] - pf[1]) - (rt[1] - rf[1]);
    }
    for (int i = 0; i < 4; ++i) obs[10 + i] = state[4 + i];
}

double system_energy(const SystemSpec& spec, std::span<const double> state) {
    switch (spec.family) {
        case SystemFamily::Redundant2D: {
            double h = 0.0;
            const double m[2] = {spec.param("m1"), spec.param("m2")};
            for (int i = 0; i < 2; ++i) {
                h += 0.5 * m[i] *
                     (state[4 + 2 * i] * state[4 + 2 * i] +
                      state[4 + 2 * i + 1] * state[4 + 2 * i + 1]);
            }
            for (const auto& sp : kSprings2D) {
                double pf[2], pt[2];
                endpoint_position(sp.from, state, pf);
                endpoint_position(sp.to, state, pt);
                const double len = std::hypot(pt[0] - pf[0], pt[1] - pf[1]);
                h += cubic_potential(sp.lin, sp.cub, len - sp.rest);
            }
            return h;
        }
        case SystemFamily::MassSpringForced:
        case SystemFamily::MassSpringBoundary: {
            double h = 0.0;
            double dq[3];
            if (spec.mode == CoordinateMode::Relative) {
                for (int i = 0; i < 3; ++i) dq[i] = state[i];
            } else {
                dq[0] = state[0];
                dq[1] = state[1] - state[0];
                dq[2] = state[2] - state[1];
            }
            for (int i = 0; i < 3; ++i) {
                h += 0.5 * spec.param("m" + std::to_string(i + 1)) * state[3 + i] * state[3 + i];
                h += cubic_potential(spec.param("k" + std::to_string(i + 1) + ".lin"),
                                     spec.param("k" + std::to_string(i + 1) + ".cub"), dq[i]);
            }
            return h;
        }
        case SystemFamily::FitzHughNagumo: {
            const double C = spec.param("C"), L = spec.param("L");
            return 0.5 * C * state[0] * state[0] + 0.5 * L * state[1] * state[1];
        }
        case SystemFamily::Chua: {
            const double alpha = spec.param("alpha"), beta = spec.param("beta");
            return 0.5 * state[0] * state[0] / alpha + 0.5 * state[1] * state[1] +
                   0.5 * state[2] * state[2] / beta;
        }
        case SystemFamily::DcMotor: {
            const double m = spec.param("m"), l = spec.param("l"), g = spec.param("g");
            const double L = spec.param("L");
            return 0.5 * m * l * l * state[1] * state[1] - m * g * l * std::cos(state[0]) +
                   0.5 * L * state[2] * state[2];
        }
        case SystemFamily::HydraulicTank: {
            const double rho = spec.param("rho"), g = spec.param("g"), A = spec.param("A");
            const double klin = spec.param("k.lin"), kcub = spec.param("k.cub");
            double h = rho * g / (2.0 * A) * state[0] * state[0];
            h += cubic_potential(klin, kcub, state[1]) + cubic_potential(klin, kcub, state[2]);
            h += 0.5 * spec.param("m1") * state[3] * state[3] +
                 0.5 * spec.param("m2") * state[4] * state[4];
            return h;
        }
    }
    throw std::logic_error("unreachable");
}

Dataset generate(const SystemSpec& spec, int n_traj, int n_steps, std::uint64_t seed,
                 double atol, double rtol) {
    if (n_traj < 1 || n_steps < 2) {
        throw UsageError("generate: need at least one trajectory of two steps");
    }
    Dataset ds;
    ds.system = spec.id;
    ds.dt = spec.dt;
    ds.n_traj = n_traj;
    ds.n_steps = n_steps;
    ds.seed = seed;
    ds.theta = spec.theta;
    ds.obs_names = spec.obs_names;
    ds.ext_names = spec.ext_names;
    ds.allocate();

    std::vector<double> times(static_cast<std::size_t>(n_steps));
    for (int k = 0; k < n_steps; ++k) times[k] = k * spec.dt;

    std::string failure;
    parallel_for(n_traj, [&](std::int64_t tr) {
        try {
            const ExternalStream stream =
                external_stream(spec, seed, static_cast<std::uint64_t>(tr), n_traj);
            const std::vector<double> u0 =
                initial_state(spec, seed, static_cast<std::uint64_t>(tr));
            PlainField f = [&](std::span<const double> u, double t, std::span<double> du) {
                system_field(spec, u, t, stream, du);
            };
            auto states = dopri5_integrate(f, u0, times, atol, rtol);
            for (int st = 0; st < n_steps; ++st) {
                observe(spec, states[static_cast<std::size_t>(st)], ds.obs_at(tr, st));
                for (double o : ds.obs_at(tr, st)) {
                    if (!std::isfinite(o)) throw NumericalError("non-finite observation");
                }
                auto ext = stream.all_at(times[static_cast<std::size_t>(st)]);
                std::copy(ext.begin(), ext.end(), ds.ext_at(tr, st).begin());
            }
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(podinn_generate_failure)
#endif
            if (failure.empty()) {
                failure = "trajectory " + std::to_string(tr) + ": " + e.what();
            }
        }
    });
    if (!failure.empty()) throw NumericalError("generation failed at " + failure);
    return ds;
}

std::vector<ExternalStream> dataset_streams(const Dataset& ds) {
    std::vector<ExternalStream> streams;
    streams.reserve(static_cast<std::size_t>(ds.n_traj));
    bool analytic = true;
    SystemSpec spec;
    try {
        spec = system_spec(ds.system);
    } catch (const UsageError&) {
        analytic = false;
    }
    for (int tr = 0; tr < ds.n_traj; ++tr) {
        if (analytic) {
            streams.push_back(external_stream(spec, ds.seed, tr, ds.n_traj));
            continue;
        }
        ExternalStream stream;
        for (int k = 0; k < ds.ext_dim(); ++k) {
            SampledSeries series;
            series.times.resize(static_cast<std::size_t>(ds.n_steps));
            series.values.resize(static_cast<std::size_t>(ds.n_steps));
            for (int st = 0; st < ds.n_steps; ++st) {
                series.times[st] = ds.time_at(st);
                series.values[st] = ds.ext_at(tr, st)[k];
            }
            stream.efforts.push_back(std::move(series));
        }
        streams.push_back(std::move(stream));
    }
    return streams;
}

}  // namespace podinn
