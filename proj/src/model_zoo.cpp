#include "podinn/model_zoo.hpp"

#include <cmath>

#include "podinn/rng.hpp"

namespace podinn {

namespace {

struct Builder {
    const SystemSpec& spec;
    const ModelOptions& opt;
    ParamSet& params;
    DrawStream rng;
    PoissonDiracModel m;

    Builder(const SystemSpec& s, const ModelOptions& o, ParamSet& p)
        : spec(s), opt(o), params(p), rng(o.init_seed, 0x6d6f64) {}

    Mlp potential_net(const std::string& name, int in) {
        return Mlp::create(params, name, in, {opt.hidden, opt.hidden}, 1, rng);
    }

    /// Learnable entries over every admissible pair in the given index
    /// ranges; storage-storage entries start at zero, entries touching
    /// resistive or external ports start uniform on (-0.1, 0.1).
    void learnable_block(const std::vector<std::vector<bool>>& mask, int lo_a, int hi_a,
                         int lo_b, int hi_b) {
        const int ns = m.layout.n_storage();
        for (int i = lo_a; i < hi_a; ++i) {
            for (int j = std::max(i + 1, lo_b); j < hi_b; ++j) {
                if (!mask[i][j] || m.bivector.find(i, j) != nullptr) continue;
                const bool storage_pair = i < ns && j < ns;
                const double init = storage_pair ? 0.0 : rng.uniform(-0.1, 0.1);
                m.bivector.set_learnable(i, j, params,
                                         "B." + m.layout.name_of(i) + "." + m.layout.name_of(j),
                                         init);
            }
        }
    }

    void learnable_couplings() {
        auto mask = m.layout.compatibility_mask();
        const int n = m.layout.n_total();
        if (m.mode == CoordinateMode::Absolute) {
            // The storage-storage block is pinned to the standard form; only
            // resistive and external couplings stay free.
            const int ns = m.layout.n_storage();
            for (int i = 0; i < ns; ++i) {
                for (int j = 0; j < ns; ++j) mask[i][j] = false;
            }
        }
        learnable_block(mask, 0, n, 0, n);
    }

    void mass_like(const std::string& name, int coord, double init = 1.0) {
        PositiveScalar s = PositiveScalar::learnable(params, "obs." + name, init);
        m.obs_map.scales[coord] = s;
        m.energy.push_back(QuadraticStorage{coord, s});
    }

    void neural_resistors(const std::string& prefix, int count) {
        for (int k = 0; k < count; ++k) {
            m.resistors.push_back(
                NeuralResistor{Mlp::create(params, prefix + std::to_string(k + 1), 1,
                                           {opt.hidden, opt.hidden}, 1, rng)});
        }
    }
};

int default_n_d(const SystemSpec& spec) {
    switch (spec.family) {
        case SystemFamily::MassSpringForced: return 2;
        case SystemFamily::MassSpringBoundary: return 3;
        case SystemFamily::Redundant2D: return 0;
        case SystemFamily::FitzHughNagumo: return 1;  // current-flow resistor
        case SystemFamily::Chua: return 0;
        case SystemFamily::DcMotor: return 2;  // friction + armature resistance, fixed kinds
        case SystemFamily::HydraulicTank: return 2;
    }
    return 0;
}

int default_n_g(const SystemSpec& spec) {
    switch (spec.family) {
        case SystemFamily::FitzHughNagumo: return 1;
        case SystemFamily::Chua: return 2;
        default: return 0;
    }
}

PoissonDiracModel build_podinn(const SystemSpec& spec, const ModelOptions& opt,
                               ParamSet& params) {
    Builder b(spec, opt, params);
    PoissonDiracModel& m = b.m;
    m.mode = spec.mode;
    const int n_d = opt.n_d >= 0 ? opt.n_d : default_n_d(spec);
    const int n_g = opt.n_g >= 0 ? opt.n_g : default_n_g(spec);

    switch (spec.family) {
        case SystemFamily::MassSpringForced:
        case SystemFamily::MassSpringBoundary: {
            const bool forced = spec.family == SystemFamily::MassSpringForced;
            for (int i = 0; i < 3; ++i) m.layout.storage.push_back({spec.obs_names[i], Domain::MechPotential});
            for (int i = 0; i < 3; ++i) m.layout.storage.push_back({"p" + std::to_string(i + 1), Domain::MechKinetic});
            for (int k = 0; k < n_d; ++k) m.layout.resistive.push_back({"d" + std::to_string(k + 1), PortKind::Velocity});
            m.layout.external.push_back(forced ? ExternalPort{"F", PortKind::Force}
                                               : ExternalPort{"b", PortKind::Velocity});
            m.bivector = Bivector(m.layout.n_total());
            m.obs_map = ObservationMap::identity(6);
            if (spec.mode == CoordinateMode::Relative) {
                for (int i = 0; i < 3; ++i) {
                    m.energy.push_back(NeuralPotential{{i}, 0, b.potential_net("U" + std::to_string(i + 1), 1)});
                }
            } else {
                // One collective potential over all positions (plus the wall
                // position for the moving-boundary system); the
                // storage-storage block is fixed to the standard form.
                m.n_aux = forced ? 0 : 1;
                m.energy.push_back(NeuralPotential{{0, 1, 2}, m.n_aux, b.potential_net("U", 3 + m.n_aux)});
                for (int i = 0; i < 3; ++i) m.bivector.couple_fixed(3 + i, i, 1.0);
            }
            for (int i = 0; i < 3; ++i) b.mass_like("m" + std::to_string(i + 1), 3 + i);
            b.neural_resistors("R", n_d);
            b.learnable_couplings();
            break;
        }
        case SystemFamily::Redundant2D: {
            for (int i = 0; i < 10; ++i) m.layout.storage.push_back({spec.obs_names[i], Domain::MechPotential});
            for (int i = 0; i < 4; ++i) m.layout.storage.push_back({spec.obs_names[10 + i], Domain::MechKinetic});
            for (int k = 0; k < n_d; ++k) m.layout.resistive.push_back({"d" + std::to_string(k + 1), PortKind::Velocity});
            m.bivector = Bivector(m.layout.n_total());
            m.obs_map = ObservationMap::identity(14);
            for (int s = 0; s < 5; ++s) {
                m.energy.push_back(NeuralPotential{{2 * s, 2 * s + 1}, 0,
                                                   b.potential_net("U" + std::to_string(s + 1), 2)});
            }
            // x and y momenta of one mass share the learnable mass.
            for (int i = 0; i < 2; ++i) {
                PositiveScalar s = PositiveScalar::learnable(params, "obs.m" + std::to_string(i + 1), 1.0);
                for (int d = 0; d < 2; ++d) {
                    const int coord = 10 + 2 * i + d;
                    m.obs_map.scales[coord] = s;
                    m.energy.push_back(QuadraticStorage{coord, s});
                }
            }
            b.neural_resistors("R", n_d);
            b.learnable_couplings();
            break;
        }
        case SystemFamily::FitzHughNagumo: {
            m.layout.storage.push_back({"C", Domain::Electric});
            m.layout.storage.push_back({"L", Domain::Magnetic});
            for (int k = 0; k < n_d; ++k) m.layout.resistive.push_back({"Rc" + std::to_string(k + 1), PortKind::Current});
            for (int k = 0; k < n_g; ++k) m.layout.resistive.push_back({"Rv" + std::to_string(k + 1), PortKind::Voltage});
            m.layout.external.push_back({"J", PortKind::Current});
            m.bivector = Bivector(m.layout.n_total());
            m.obs_map = ObservationMap::identity(2);
            b.mass_like("C", 0);
            b.mass_like("L", 1);
            b.neural_resistors("R", n_d + n_g);
            b.learnable_couplings();
            break;
        }
        case SystemFamily::Chua: {
            m.layout.storage.push_back({"C1", Domain::Electric});
            m.layout.storage.push_back({"C2", Domain::Electric});
            m.layout.storage.push_back({"L", Domain::Magnetic});
            for (int k = 0; k < n_d; ++k) m.layout.resistive.push_back({"Rc" + std::to_string(k + 1), PortKind::Current});
            for (int k = 0; k < n_g; ++k) m.layout.resistive.push_back({"Rv" + std::to_string(k + 1), PortKind::Voltage});
            m.bivector = Bivector(m.layout.n_total());
            m.obs_map = ObservationMap::identity(3);
            b.mass_like("C1", 0);
            b.mass_like("C2", 1);
            b.mass_like("L", 2);
            b.neural_resistors("R", n_d + n_g);
            b.learnable_couplings();
            break;
        }
        case SystemFamily::DcMotor: {
            m.layout.storage.push_back({"theta", Domain::RotPotential});
            m.layout.storage.push_back({"p", Domain::RotKinetic});
            m.layout.storage.push_back({"phi", Domain::Magnetic});
            m.layout.resistive.push_back({"fric", PortKind::AngularVelocity});
            m.layout.resistive.push_back({"R", PortKind::Current});
            m.layout.external.push_back({"E", PortKind::Voltage});
            m.bivector = Bivector(m.layout.n_total());
            m.obs_map = ObservationMap::identity(3);
            m.energy.push_back(NeuralPotential{{0}, 0, b.potential_net("U", 1)});
            b.mass_like("J", 1);
            b.mass_like("L", 2);
            b.neural_resistors("R", 2);
            // The coupling pattern is unique here, so strengths are fixed at
            // 1.0 and only the gyrator constant K is learned.
            m.bivector.couple_fixed(1, 0, 1.0);  // dp ^ dtheta
            m.bivector.set_learnable(1, 2, params, "B.K", 0.0);  // flux-momentum gyrator
            m.bivector.couple_fixed(1, 3, 1.0);  // friction on the momentum
            m.bivector.couple_fixed(2, 4, 1.0);  // armature resistance on the flux
            m.bivector.couple_fixed(5, 2, 1.0);  // voltage source into the flux
            break;
        }
        case SystemFamily::HydraulicTank: {
            m.layout.storage.push_back({"V", Domain::Hydraulic});
            m.layout.storage.push_back({"q1", Domain::MechPotential});
            m.layout.storage.push_back({"q2", Domain::MechPotential});
            m.layout.storage.push_back({"p1", Domain::MechKinetic});
            m.layout.storage.push_back({"p2", Domain::MechKinetic});
            for (int k = 0; k < n_d; ++k) m.layout.resistive.push_back({"d" + std::to_string(k + 1), PortKind::Velocity});
            m.layout.external.push_back({"F", PortKind::Force});
            m.bivector = Bivector(m.layout.n_total());
            m.obs_map = ObservationMap::identity(5);
            PositiveScalar tank = PositiveScalar::learnable(params, "obs.tank", 1.0);
            m.energy.push_back(QuadraticStorage{0, tank});
            m.energy.push_back(NeuralPotential{{1}, 0, b.potential_net("U1", 1)});
            m.energy.push_back(NeuralPotential{{2}, 0, b.potential_net("U2", 1)});
            b.mass_like("m1", 3);
            b.mass_like("m2", 4);
            b.neural_resistors("R", n_d);
            b.learnable_couplings();
            break;
        }
    }
    m.finalize();
    return m;
}

NeuralOdeModel build_neural_ode(const SystemSpec& spec, const ModelOptions& opt,
                                ParamSet& params) {
    NeuralOdeModel m;
    m.obs_dim = spec.obs_dim();
    m.ext_dim = static_cast<int>(spec.ext_names.size());
    DrawStream rng(opt.init_seed, 0x6f6465);
    m.net = Mlp::create(params, "field", m.obs_dim + m.ext_dim, {opt.hidden, opt.hidden},
                        m.obs_dim, rng);
    return m;
}

}  // namespace

AnyModel build_model(const SystemSpec& spec, const ModelOptions& options, ParamSet& params) {
    if (options.kind == "podinn") return build_podinn(spec, options, params);
    if (options.kind == "neural-ode") return build_neural_ode(spec, options, params);
    throw UsageError("unknown model kind: " + options.kind + " (expected podinn | neural-ode)");
}

PoissonDiracModel build_truth_model(const SystemSpec& spec, ParamSet& params) {
    PoissonDiracModel m;
    m.mode = spec.mode;
    auto poly = [&](int coord, const std::string& k) {
        return PolynomialPotential{coord, 0.5 * spec.param(k + ".lin"),
                                   0.25 * spec.param(k + ".cub")};
    };
    switch (spec.family) {
        case SystemFamily::MassSpringForced:
        case SystemFamily::MassSpringBoundary: {
            const bool forced = spec.family == SystemFamily::MassSpringForced;
            for (int i = 0; i < 3; ++i) m.layout.storage.push_back({spec.obs_names[i], Domain::MechPotential});
            for (int i = 0; i < 3; ++i) m.layout.storage.push_back({"p" + std::to_string(i + 1), Domain::MechKinetic});
            const std::vector<int> dampers = forced ? std::vector<int>{1, 3} : std::vector<int>{1, 2, 3};
            for (int idx : dampers) m.layout.resistive.push_back({"d" + std::to_string(idx), PortKind::Velocity});
            const int wall = 6 + static_cast<int>(dampers.size());
            m.layout.external.push_back(forced ? ExternalPort{"F", PortKind::Force}
                                               : ExternalPort{"b", PortKind::Velocity});
            m.bivector = Bivector(m.layout.n_total());
            m.obs_map = ObservationMap::identity(6);

            if (spec.mode == CoordinateMode::Relative) {
                for (int i = 0; i < 3; ++i) {
                    m.energy.push_back(poly(i, "k" + std::to_string(i + 1)));
                }
            } else {
                throw UsageError("truth model for absolute coordinates is not provided");
            }
            for (int i = 0; i < 3; ++i) {
                const double mi = spec.param("m" + std::to_string(i + 1));
                m.obs_map.scales[3 + i] = PositiveScalar::constant(mi);
                m.energy.push_back(QuadraticStorage{3 + i, PositiveScalar::constant(mi)});
            }
            // Chain couplings dp_i ^ dq_i - dp_i ^ dq_{i+1}.
            for (int i = 0; i < 3; ++i) {
                m.bivector.couple_fixed(3 + i, i, 1.0);
                if (i + 1 < 3) m.bivector.couple_fixed(3 + i, i + 1, -1.0);
            }
            if (forced) {
                // Dampers parallel to springs 1 (wall side) and 3.
                m.resistors.push_back(SignedPowerDamper{spec.param("d1")});
                m.resistors.push_back(SignedPowerDamper{spec.param("d3")});
                m.bivector.couple_fixed(3 + 0, 6, 1.0);   // dp1 ^ xi_d1
                m.bivector.couple_fixed(3 + 2, 7, 1.0);   // (dp3 - dp2) ^ xi_d3
                m.bivector.couple_fixed(3 + 1, 7, -1.0);
                m.bivector.couple_fixed(3 + 2, wall, -1.0);  // force enters dp3 positively
            } else {
                for (int i = 0; i < 3; ++i) {
                    m.resistors.push_back(SignedPowerDamper{spec.param("d" + std::to_string(i + 1))});
                    m.bivector.couple_fixed(3 + i, 6 + i, 1.0);
                    if (i > 0) m.bivector.couple_fixed(3 + i - 1, 6 + i, -1.0);
                }
                // The wall's velocity effort feeds spring 1 and damper 1.
                m.bivector.couple_fixed(wall, 0, -1.0);
                m.bivector.couple_fixed(wall, 6, -1.0);
            }
            break;
        }
        case SystemFamily::FitzHughNagumo: {
            m.layout.storage.push_back({"C", Domain::Electric});
            m.layout.storage.push_back({"L", Domain::Magnetic});
            m.layout.resistive.push_back({"R1", PortKind::Voltage});  // tunnel diode
            m.layout.resistive.push_back({"R2", PortKind::Current});  // resistor + source E
            m.layout.external.push_back({"J", PortKind::Current});
            m.bivector = Bivector(5);
            m.obs_map = ObservationMap::identity(2);
            m.obs_map.scales[0] = PositiveScalar::constant(spec.param("C"));
            m.obs_map.scales[1] = PositiveScalar::constant(spec.param("L"));
            m.energy.push_back(QuadraticStorage{0, PositiveScalar::constant(spec.param("C"))});
            m.energy.push_back(QuadraticStorage{1, PositiveScalar::constant(spec.param("L"))});
            m.resistors.push_back(TunnelDiodeCubic{});
            m.resistors.push_back(LinearResistive{FreeScalar::constant(spec.param("R2")),
                                                  spec.param("E")});
            m.bivector.couple_fixed(1, 0, -1.0);  // - dphi ^ dQ
            m.bivector.couple_fixed(2, 0, 1.0);   // diode on the capacitor node
            m.bivector.couple_fixed(3, 1, -1.0);  // resistor+source in the inductor loop
            m.bivector.couple_fixed(4, 0, 1.0);   // external current into the node
            break;
        }
        case SystemFamily::DcMotor: {
            m.layout.storage.push_back({"theta", Domain::RotPotential});
            m.layout.storage.push_back({"p", Domain::RotKinetic});
            m.layout.storage.push_back({"phi", Domain::Magnetic});
            m.layout.resistive.push_back({"fric", PortKind::AngularVelocity});
            m.layout.resistive.push_back({"R", PortKind::Current});
            m.layout.external.push_back({"E", PortKind::Voltage});
            m.bivector = Bivector(6);
            const double mm = spec.param("m"), l = spec.param("l"), g = spec.param("g");
            const double L = spec.param("L"), K = spec.param("K");
            m.obs_map = ObservationMap::identity(3);
            m.obs_map.scales[1] = PositiveScalar::constant(mm * l * l);
            m.obs_map.scales[2] = PositiveScalar::constant(L);
            m.energy.push_back(CosinePotential{0, mm * g * l});
            m.energy.push_back(QuadraticStorage{1, PositiveScalar::constant(mm * l * l)});
            m.energy.push_back(QuadraticStorage{2, PositiveScalar::constant(L)});
            m.resistors.push_back(SignedPowerDamper{spec.param("d")});
            m.resistors.push_back(CubicResistor{spec.param("R")});
            m.bivector.couple_fixed(1, 0, 1.0);  // dp ^ dtheta
            m.bivector.couple_fixed(2, 1, K);    // K dphi ^ dp
            m.bivector.couple_fixed(1, 3, 1.0);  // friction
            m.bivector.couple_fixed(2, 4, 1.0);  // armature resistance
            m.bivector.couple_fixed(5, 2, 1.0);  // voltage source
            break;
        }
        case SystemFamily::HydraulicTank: {
            m.layout.storage.push_back({"V", Domain::Hydraulic});
            m.layout.storage.push_back({"q1", Domain::MechPotential});
            m.layout.storage.push_back({"q2", Domain::MechPotential});
            m.layout.storage.push_back({"p1", Domain::MechKinetic});
            m.layout.storage.push_back({"p2", Domain::MechKinetic});
            m.layout.resistive.push_back({"d1", PortKind::Velocity});
            m.layout.resistive.push_back({"d2", PortKind::Velocity});
            m.layout.external.push_back({"F", PortKind::Force});
            m.bivector = Bivector(8);
            const double A = spec.param("A"), rho = spec.param("rho"), g = spec.param("g");
            m.obs_map = ObservationMap::identity(5);
            m.obs_map.scales[3] = PositiveScalar::constant(spec.param("m1"));
            m.obs_map.scales[4] = PositiveScalar::constant(spec.param("m2"));
            m.energy.push_back(QuadraticStorage{0, PositiveScalar::constant(A / (rho * g))});
            m.energy.push_back(poly(1, "k"));
            m.energy.push_back(poly(2, "k"));
            m.energy.push_back(QuadraticStorage{3, PositiveScalar::constant(spec.param("m1"))});
            m.energy.push_back(QuadraticStorage{4, PositiveScalar::constant(spec.param("m2"))});
            m.resistors.push_back(SignedPowerDamper{spec.param("d1")});
            m.resistors.push_back(SignedPowerDamper{spec.param("d2")});
            m.bivector.couple_fixed(3, 0, spec.param("a1"));   // a1 dp1 ^ dV
            m.bivector.couple_fixed(4, 0, -spec.param("a2"));  // -a2 dp2 ^ dV
            m.bivector.couple_fixed(3, 1, 1.0);
            m.bivector.couple_fixed(4, 2, 1.0);
            m.bivector.couple_fixed(3, 5, 1.0);   // dp1 ^ xi_d1
            m.bivector.couple_fixed(4, 6, 1.0);   // dp2 ^ xi_d2
            m.bivector.couple_fixed(4, 7, -1.0);  // - dp2 ^ xi_F
            break;
        }
        case SystemFamily::Redundant2D:
        case SystemFamily::Chua:
            throw UsageError("no analytic truth model for system " + spec.id);
    }
    (void)params;
    m.finalize();
    return m;
}

}  // namespace podinn
