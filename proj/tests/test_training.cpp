#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "podinn/checkpoint.hpp"
#include "podinn/training.hpp"
#include "toy_support.hpp"

using namespace podinn;

namespace {

/// Zero-field model over `dim` observations (flat energy, no couplings).
PoissonDiracModel zero_field_model(int dim) {
    PoissonDiracModel m;
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        m.layout.storage.push_back({"q" + std::to_string(i), Domain::MechPotential});
    }
    for (int i = half; i < dim; ++i) {
        m.layout.storage.push_back({"p" + std::to_string(i), Domain::MechKinetic});
    }
    m.bivector = Bivector(dim);
    m.obs_map = ObservationMap::identity(dim);
    for (int i = 0; i < half; ++i) m.energy.push_back(PolynomialPotential{i, 0.0, 0.0});
    for (int i = half; i < dim; ++i) {
        m.energy.push_back(QuadraticStorage{i, PositiveScalar::constant(1.0)});
    }
    m.finalize();
    return m;
}

Dataset two_row_dataset(const std::vector<double>& first, const std::vector<double>& second,
                        const std::vector<double>& extra_row) {
    Dataset ds;
    ds.system = "hand";
    ds.dt = 0.1;
    ds.n_traj = 1;
    ds.n_steps = 3;
    ds.theta = 1e-4;
    const int dim = static_cast<int>(first.size());
    for (int k = 0; k < dim; ++k) ds.obs_names.push_back("y" + std::to_string(k));
    ds.allocate();
    std::copy(first.begin(), first.end(), ds.obs_at(0, 0).begin());
    std::copy(second.begin(), second.end(), ds.obs_at(0, 1).begin());
    std::copy(extra_row.begin(), extra_row.end(), ds.obs_at(0, 2).begin());
    return ds;
}

}  // namespace

TEST_CASE("adam: first step moves by ~lr in the gradient sign direction") {
    std::vector<double> p = {1.0, -2.0};
    std::vector<double> g = {0.3, -4.0};
    AdamState st(2);
    adam_step(p, g, st, 1e-3);
    CHECK(p[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(-2.0 + 1e-3).epsilon(1e-4));
}

TEST_CASE("adam: zero gradients never move the parameters") {
    std::vector<double> p = {0.7, -0.3};
    std::vector<double> g = {0.0, 0.0};
    AdamState st(2);
    for (int i = 0; i < 50; ++i) adam_step(p, g, st, 1e-2);
    CHECK(p[0] == 0.7);
    CHECK(p[1] == -0.3);
}

TEST_CASE("adam matches a hand-computed three-step scalar sequence") {
    // Oracle: the textbook update computed step by step with explicit
    // scalars, independent of the library implementation.
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double grads[3] = {2.0, -1.0, 0.5};
    double m = 0.0, v = 0.0, x = 1.0;
    for (int t = 1; t <= 3; ++t) {
        const double g = grads[t - 1];
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mhat = m / (1 - std::pow(b1, t));
        const double vhat = v / (1 - std::pow(b2, t));
        x -= lr * mhat / (std::sqrt(vhat) + eps);
    }

    std::vector<double> p = {1.0};
    AdamState st(1);
    for (int t = 0; t < 3; ++t) {
        std::vector<double> g = {grads[t]};
        adam_step(p, g, st, lr, b1, b2, eps);
    }
    CHECK(p[0] == doctest::Approx(x).epsilon(1e-15));
}

TEST_CASE("cosine schedule starts at lr0 and ends exactly at zero") {
    CHECK(cosine_lr(1e-3, 0, 1000) == doctest::Approx(1e-3));
    CHECK(cosine_lr(1e-3, 999, 1000) == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(cosine_lr(1e-3, 500, 1000) > 0.0);
}

TEST_CASE("one-step loss: exact prediction gives zero, sigma offset gives one") {
    auto model = zero_field_model(2);
    // Zero field predicts obs_n, so obs_{n+1} = obs_n gives loss 0 and
    // obs_{n+1} = obs_n + sigma gives exactly 1 after normalization.
    Dataset same = two_row_dataset({0.5, -1.0}, {0.5, -1.0}, {1.5, 1.0});
    auto td_same = prepare_training_data(same);
    std::vector<std::pair<int, int>> batch = {{0, 0}};
    CHECK(one_step_loss(AnyModel{model}, ParamSet{}, td_same, batch, 2) ==
          doctest::Approx(0.0).epsilon(1e-16));

    Dataset off = two_row_dataset({0.5, -1.0}, {0.5, -1.0}, {0.0, 0.0});
    auto td_off = prepare_training_data(off);
    auto sd = off.observation_stds();
    // Rewrite the second row as first + sigma.
    off.obs_at(0, 1)[0] = 0.5 + sd[0];
    off.obs_at(0, 1)[1] = -1.0 + sd[1];
    auto td2 = prepare_training_data(off);
    // stds changed after editing; recompute the expected value directly.
    auto sd2 = off.observation_stds();
    const double expected = 0.5 * (std::pow(sd[0] / sd2[0], 2) + std::pow(sd[1] / sd2[1], 2));
    CHECK(one_step_loss(AnyModel{model}, ParamSet{}, td2, batch, 2) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("one-step loss with the exact model on system (a) is below 1e-10") {
    auto spec = system_spec("a");
    auto ds = generate(spec, 2, 40, 17, 1e-12, 1e-12);
    ParamSet params;
    auto truth = build_truth_model(spec, params);
    auto td = prepare_training_data(ds);
    std::vector<std::pair<int, int>> batch;
    for (int st = 0; st < 30; st += 3) batch.push_back({st % 2, st});
    const double loss = one_step_loss(AnyModel{truth}, params, td, batch, 4);
    CHECK(loss < 1e-10);
}

TEST_CASE("a constant observation dimension is reported by name") {
    Dataset ds = two_row_dataset({0.5, 1.0}, {0.6, 1.0}, {0.7, 1.0});
    try {
        prepare_training_data(ds);
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("y1") != std::string::npos);
    }
}

TEST_CASE("loss gradients match finite differences for every parameter class") {
    toy::ChainSpec chain;
    auto ds = toy::generate(chain, 2, 30, 5);
    ParamSet params;
    auto model = toy::trainable_model(chain, 1, params, 3);
    auto td = prepare_training_data(ds);
    std::vector<std::pair<int, int>> batch = {{0, 3}, {1, 11}, {0, 20}};

    std::vector<double> grad;
    one_step_loss(AnyModel{model}, params, td, batch, 2, &grad);

    // Finite differences over every parameter: spring/mass log-thetas,
    // damper gains, and bivector couplings all at once.
    for (std::size_t slot = 0; slot < params.size(); ++slot) {
        ParamSet p2 = params;
        const double fd = oracle::fd_derivative(
            [&](double v) {
                p2[slot] = v;
                return one_step_loss(AnyModel{model}, p2, td, batch, 2);
            },
            params[slot]);
        const double scale = std::max({std::abs(fd), std::abs(grad[slot]), 1e-4});
        CHECK(std::abs(grad[slot] - fd) / scale < 1e-4);
    }
}

TEST_CASE("training the linear toy converges below 1e-4") {
    toy::ChainSpec chain;
    chain.n = 1;
    chain.k = {1.0};
    chain.mass = {1.0};
    chain.damper_spring = 0;
    chain.damper_coeff = 0.4;
    auto ds = toy::generate(chain, 2, 100, 7);  // 200 trajectory-steps
    ParamSet params;
    auto model = toy::trainable_model(chain, 1, params, 11);
    auto td = prepare_training_data(ds);

    TrainConfig cfg;
    cfg.iterations = 2000;
    cfg.batch_size = 32;
    cfg.substeps = 2;
    cfg.seed = 1;
    cfg.lr0 = 3e-3;
    auto result = train(AnyModel{model}, params, td, cfg);
    CHECK(result.final_loss < 1e-4);
    CHECK(result.history.lrs.back() == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("identical seeds give bit-identical trained parameters") {
    toy::ChainSpec chain;
    auto ds = toy::generate(chain, 2, 40, 3);
    auto run = [&]() {
        ParamSet params;
        auto model = toy::trainable_model(chain, 1, params, 5);
        auto td = prepare_training_data(ds);
        TrainConfig cfg;
        cfg.iterations = 60;
        cfg.batch_size = 16;
        cfg.substeps = 1;
        cfg.seed = 9;
        train(AnyModel{model}, params, td, cfg);
        return params.flatten();
    };
    CHECK(run() == run());
}

TEST_CASE("training never touches fixed bivector entries") {
    // Absolute-coordinate model: the storage-storage block is pinned to the
    // canonical form and everything masked stays exactly zero.
    auto spec = system_spec("b_abs");
    auto ds = generate(spec, 2, 30, 21);
    ParamSet params;
    ModelOptions opt;
    opt.hidden = 6;
    opt.init_seed = 2;
    auto model = build_model(spec, opt, params);
    auto td = prepare_training_data(ds);
    TrainConfig cfg;
    cfg.iterations = 40;
    cfg.batch_size = 8;
    cfg.substeps = 1;
    cfg.seed = 4;
    cfg.checkpoint_interval = 1;  // assert the structure after every update

    const auto& pd = std::get<PoissonDiracModel>(model);
    auto check_structure = [&](const ParamSet& p) {
        Matrix dense = pd.bivector.dense(p);
        for (int i = 0; i < 3; ++i) {
            CHECK(dense.at(i, 3 + i) == 1.0);  // canonical pairs stay pinned
            for (int j = 0; j < 3; ++j) {
                if (j != i) CHECK(dense.at(i, 3 + j) == 0.0);  // off-diagonal storage block
            }
            for (int j = 0; j < 3; ++j) CHECK(dense.at(i, j) == 0.0);  // q-q block
        }
    };
    check_structure(params);
    train(AnyModel{model}, params, td, cfg,
          [&](long, const ParamSet& p) { check_structure(p); });
    check_structure(params);
}

TEST_CASE("checkpoints round-trip the model and support resuming") {
    toy::ChainSpec chain;
    auto ds = toy::generate(chain, 2, 30, 13);
    auto spec = system_spec("b");  // checkpoint carries a known system id
    ParamSet params;
    ModelOptions opt;
    opt.hidden = 4;
    opt.init_seed = 8;
    auto model = build_model(spec, opt, params);

    auto path = std::filesystem::temp_directory_path() / "podinn_ckpt_test" / "model.json";
    save_checkpoint(path, spec, opt, model, params, 123, 0xabcd);
    auto loaded = load_checkpoint(path);
    CHECK(loaded.iteration == 123);
    CHECK(loaded.config_hash == 0xabcd);
    CHECK(loaded.params.flatten() == params.flatten());
    CHECK(loaded.spec.id == "b");

    // A field evaluation agrees exactly after the round trip.
    std::vector<double> obs = {0.1, -0.2, 0.3, 0.0, 0.1, -0.1};
    ExtInput ext{{0.25}, {}};
    auto r1 = model_field_value(model, params, obs, ext);
    auto r2 = model_field_value(loaded.model, loaded.params, obs, ext);
    CHECK(r1 == r2);

    std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("non-finite loss aborts with a numerical error") {
    toy::ChainSpec chain;
    auto ds = toy::generate(chain, 1, 10, 1);
    ParamSet params;
    auto model = toy::trainable_model(chain, 0, params, 1);
    // Poison one parameter so the first loss is NaN.
    params[0] = std::nan("");
    auto td = prepare_training_data(ds);
    TrainConfig cfg;
    cfg.iterations = 5;
    cfg.batch_size = 4;
    cfg.substeps = 1;
    CHECK_THROWS_AS(train(AnyModel{model}, params, td, cfg), NumericalError);
}
