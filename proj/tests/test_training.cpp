#include <doctest.h>

#include <cmath>

#include "sdbm/constructor.hpp"
#include "sdbm/evaluation.hpp"
#include "sdbm/training.hpp"

using namespace sdbm;

namespace {

Mat toy_examples() {
    Mat x(3, 4);
    x << 1, 0, 1, 0,
         1, 1, 0, 0,
         0, 1, 1, 0;
    return x;
}

}  // namespace

TEST_CASE("exact gradient matches finite differences of the exact likelihood") {
    Rng rng(7);
    Model m = Model::gaussian(NetworkSpec::sdbm({3, 2, 1}), 0.6, rng);
    const Mat x = toy_examples();
    const Gradient g = exact_gradient(m, x);
    const double h = 1e-6;

    Parameters p = m.params();
    for (std::size_t q = 0; q < p.weights.size(); ++q)
        for (Eigen::Index i = 0; i < p.weights[q].size(); ++i) {
            Parameters plus = p, minus = p;
            plus.weights[q](i) += h;
            minus.weights[q](i) -= h;
            const double fd = (exact_avg_log_likelihood(Model(m.spec(), plus), x) -
                               exact_avg_log_likelihood(Model(m.spec(), minus), x)) /
                              (2.0 * h);
            CHECK(g.weights[q](i) == doctest::Approx(fd).epsilon(1e-5));
        }
    for (std::size_t k = 0; k < p.biases.size(); ++k)
        for (Eigen::Index i = 0; i < p.biases[k].size(); ++i) {
            Parameters plus = p, minus = p;
            plus.biases[k](i) += h;
            minus.biases[k](i) -= h;
            const double fd = (exact_avg_log_likelihood(Model(m.spec(), plus), x) -
                               exact_avg_log_likelihood(Model(m.spec(), minus), x)) /
                              (2.0 * h);
            CHECK(g.biases[k](i) == doctest::Approx(fd).epsilon(1e-5));
        }
}

TEST_CASE("exact gradient with centering offsets still matches finite differences") {
    auto spec = NetworkSpec::rbm(3, 2);
    Rng rng(8);
    Parameters p = Parameters::gaussian(spec, 0.8, rng);
    p.offsets = {Vec::Constant(3, 0.4), Vec::Constant(2, 0.5)};
    const Model m(spec, p);
    const Mat x = toy_examples();
    const Gradient g = exact_gradient(m, x);
    const double h = 1e-6;
    Parameters plus = p, minus = p;
    plus.weights[0](0, 1) += h;
    minus.weights[0](0, 1) -= h;
    const double fd = (exact_avg_log_likelihood(Model(spec, plus), x) -
                       exact_avg_log_likelihood(Model(spec, minus), x)) /
                      (2.0 * h);
    CHECK(g.weights[0](0, 1) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("sml gradient is deterministic and approximates the exact gradient") {
    Rng rng(9);
    const Model m = Model::gaussian(NetworkSpec::rbm(3, 2), 0.5, rng);
    const Mat x = toy_examples();
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.batch_size = 4;
    cfg.pos_chain_steps = 2;
    cfg.neg_chain_steps = 2;

    TrainState s1 = init_train_state(m, x, cfg);
    TrainState s2 = init_train_state(m, x, cfg);
    const std::vector<long> cols = {0, 1, 2, 3};
    const Gradient g1 = sml_gradient(s1, x, cols, cfg);
    const Gradient g2 = sml_gradient(s2, x, cols, cfg);
    for (std::size_t q = 0; q < g1.weights.size(); ++q) CHECK(g1.weights[q] == g2.weights[q]);
    for (std::size_t k = 0; k < g1.biases.size(); ++k) CHECK(g1.biases[k] == g2.biases[k]);

    // averaged over many long-chain draws the stochastic gradient tracks the
    // exact one (loose statistical tolerance)
    TrainConfig longcfg = cfg;
    longcfg.pos_chain_steps = 20;
    longcfg.neg_chain_steps = 20;
    Gradient avg = Gradient::zeros(m.spec());
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        longcfg.seed = 100 + r;
        TrainState st = init_train_state(m, x, longcfg);
        const Gradient g = sml_gradient(st, x, cols, longcfg);
        for (std::size_t q = 0; q < avg.weights.size(); ++q) avg.weights[q] += g.weights[q] / reps;
        for (std::size_t k = 0; k < avg.biases.size(); ++k) avg.biases[k] += g.biases[k] / reps;
    }
    const Gradient exact = exact_gradient(m, x);
    for (std::size_t q = 0; q < avg.weights.size(); ++q)
        CHECK((avg.weights[q] - exact.weights[q]).cwiseAbs().maxCoeff() < 0.1);
    for (std::size_t k = 0; k < avg.biases.size(); ++k)
        CHECK((avg.biases[k] - exact.biases[k]).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("soft-deep regularization pulls weights toward zero") {
    Rng rng(10);
    const Model m = Model::gaussian(NetworkSpec::sdbm({2, 2, 2}), 1.0, rng);
    const Mat x = toy_examples().topRows(2);
    TrainConfig cfg;
    cfg.batch_size = 4;
    RegularizationConfig reg;
    reg.eta = 1.0;
    reg.base_strength = 10.0;  // exaggerated so the decay term dominates
    cfg.reg = reg;
    TrainState st = init_train_state(m, x, cfg);
    const Gradient with_reg = sml_gradient(st, x, {0, 1, 2, 3}, cfg);
    TrainConfig noreg = cfg;
    noreg.reg.reset();
    TrainState st2 = init_train_state(m, x, noreg);
    const Gradient without = sml_gradient(st2, x, {0, 1, 2, 3}, noreg);
    const auto lam = regularization_schedule(m.spec(), reg.eta, reg.base_strength);
    for (std::size_t q = 0; q < with_reg.weights.size(); ++q) {
        const auto [k, l] = m.spec().mask[q];
        const Mat diff = with_reg.weights[q] - without.weights[q];
        const Mat expected = -2.0 * lam.at({k, l}) * m.params().weights[q];
        CHECK((diff - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("offset updates leave the model distribution invariant") {
    auto spec = NetworkSpec::sdbm({3, 2, 1});
    Rng rng(11);
    Parameters p = Parameters::gaussian(spec, 1.0, rng);
    p.offsets = {Vec::Constant(3, 0.2), Vec::Constant(2, 0.5), Vec::Constant(1, 0.5)};
    const Model m(spec, p);
    const Mat x = toy_examples();
    const double before = exact_avg_log_likelihood(m, x);

    TrainConfig cfg;
    cfg.centering = CenteringConfig{0.3};
    TrainState st = init_train_state(m, x, cfg);
    update_offsets(st, x, {0, 1, 2, 3}, 0.3);
    const double after = exact_avg_log_likelihood(st.model(), x);
    CHECK(after == doctest::Approx(before).epsilon(1e-10));
    // offsets actually moved
    CHECK((st.params.offsets[0] - p.offsets[0]).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("training runs, logs, and is reproducible") {
    Rng rng(12);
    const Model init = Model::gaussian(NetworkSpec::rbm(3, 2), 0.1, rng);
    const Mat x = toy_examples();
    TrainConfig cfg;
    cfg.total_updates = 60;
    cfg.batch_size = 4;
    cfg.initial_lr = 0.05;
    cfg.log_interval = 20;
    cfg.seed = 5;
    cfg.centering = CenteringConfig{1e-2};
    cfg.reg = RegularizationConfig{1.0, 1e-6};

    const TrainResult a = train(init, x, cfg, &x);
    const TrainResult b = train(init, x, cfg, &x);
    REQUIRE(a.log.size() == 3);
    CHECK(a.log.back().update == 60);
    CHECK(a.log.back().exact_train_ll.has_value());
    CHECK(a.log.back().exact_test_ll.has_value());
    for (std::size_t q = 0; q < a.model.params().weights.size(); ++q)
        CHECK(a.model.params().weights[q] == b.model.params().weights[q]);
    CHECK(*a.log.back().exact_train_ll == *b.log.back().exact_train_ll);

    const std::string json = a.log.front().to_json();
    CHECK(json.find("\"update\"") != std::string::npos);
}

TEST_CASE("training improves the likelihood on a tiny problem") {
    Rng rng(13);
    const Model init = Model::gaussian(NetworkSpec::rbm(3, 3), 0.05, rng);
    Mat x(3, 2);
    x << 1, 0,
         1, 0,
         1, 0;
    TrainConfig cfg;
    cfg.total_updates = 800;
    cfg.batch_size = 16;
    cfg.initial_lr = 0.1;
    cfg.log_interval = 400;
    cfg.seed = 21;
    const TrainResult res = train(init, x, cfg);
    const double before = exact_avg_log_likelihood(init, x);
    const double after = exact_avg_log_likelihood(res.model, x);
    CHECK(after > before + 0.2);
}

TEST_CASE("hyperparameter draws respect the documented ranges") {
    HyperRanges ranges;
    for (std::uint64_t s = 0; s < 30; ++s) {
        const TrainConfig c = sample_hyperparams(ranges, s);
        CHECK(c.initial_lr >= 1e-4);
        CHECK(c.initial_lr <= 1e-2);
        REQUIRE(c.reg.has_value());
        CHECK(c.reg->base_strength >= 1e-7);
        CHECK(c.reg->base_strength <= 1e-4);
        CHECK(c.reg->eta >= 0.5);
        CHECK(c.reg->eta <= 3.5);
        REQUIRE(c.centering.has_value());
        CHECK(c.centering->offset_update_rate >= 1e-8);
        CHECK(c.centering->offset_update_rate <= 1e-5);
        CHECK(c.seed == s);
    }
    // deterministic per seed
    CHECK(sample_hyperparams(ranges, 4).initial_lr == sample_hyperparams(ranges, 4).initial_lr);
}

TEST_CASE("config validation rejects bad settings") {
    TrainConfig c;
    c.initial_lr = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.centering = CenteringConfig{0.0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.momentum = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
