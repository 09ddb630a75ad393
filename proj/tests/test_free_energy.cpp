#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sdbm/constructor.hpp"
#include "sdbm/free_energy.hpp"
#include "sdbm/model.hpp"

using namespace sdbm;

namespace {

// independent brute-force oracle: direct sum in long double
long double brute_force_f(const Model& m, const Vec& v) {
    LayerState s = m.zero_state();
    s[0] = v;
    long double z = 0.0L;
    for (std::uint64_t h = 0; h < num_hidden_configs(m.spec()); ++h) {
        hidden_from_index(m.spec(), h, s);
        z += std::exp(static_cast<long double>(-m.energy(s)));
    }
    return -std::log(z);
}

Model random_model(const NetworkSpec& spec, std::uint64_t seed, double sigma = 1.0) {
    Rng rng(seed);
    return Model::gaussian(spec, sigma, rng);
}

}  // namespace

TEST_CASE("exact free energy matches the direct sum and the RBM closed form") {
    const Model m = random_model(NetworkSpec::rbm(3, 4), 21);
    Vec v(3);
    for (int bits = 0; bits < 8; ++bits) {
        v << (bits & 1), ((bits >> 1) & 1), ((bits >> 2) & 1);
        const double f = exact_free_energy(m, v);
        CHECK(f == doctest::Approx(static_cast<double>(brute_force_f(m, v))).epsilon(1e-12));
        CHECK(f == doctest::Approx(rbm_free_energy_closed_form(m, v)).epsilon(1e-12));
    }
}

TEST_CASE("exact free energy handles real-valued visible input") {
    const Model m = random_model(NetworkSpec::sdbm({2, 2, 2}), 22);
    Vec v(2);
    v << -1.7, 2.3;
    CHECK(exact_free_energy(m, v) ==
          doctest::Approx(static_cast<double>(brute_force_f(m, v))).epsilon(1e-12));
}

TEST_CASE("hardmin equals the brute-force minimum with smallest-index ties") {
    const Model m = random_model(NetworkSpec::sdbm({1, 2, 2}), 23);
    Vec v(1);
    v << 0.4;
    LayerState s = m.zero_state();
    s[0] = v;
    double best = 1e300;
    std::uint64_t best_h = 0;
    for (std::uint64_t h = 0; h < num_hidden_configs(m.spec()); ++h) {
        hidden_from_index(m.spec(), h, s);
        const double e = m.energy(s);
        if (e < best) {
            best = e;
            best_h = h;
        }
    }
    const auto [fhat, argmin] = hardmin_free_energy(m, v);
    CHECK(fhat == doctest::Approx(best).epsilon(1e-15));
    CHECK(argmin == best_h);

    // all-zero model: every configuration ties at the visible bias term;
    // the reported argmin must be configuration 0
    const Model z = Model::zeros(NetworkSpec::rbm(2, 3));
    Vec v2(2);
    v2 << 1.0, 0.0;
    CHECK(hardmin_free_energy(z, v2).second == 0);
}

TEST_CASE("free energy sandwich holds on random models") {
    const std::vector<NetworkSpec> specs = {NetworkSpec::rbm(2, 4), NetworkSpec::dbm({2, 2, 2}),
                                            NetworkSpec::sdbm({3, 2, 2})};
    int idx = 0;
    for (const auto& spec : specs) {
        for (int trial = 0; trial < 10; ++trial) {
            const Model m = random_model(spec, 100 + 17 * idx + trial, 1.5);
            Rng vr(trial);
            Vec v(spec.num_visible());
            for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = vr.bernoulli(0.5) ? 1.0 : 0.0;
            const auto b = check_bounds(m, v);
            CHECK(b.bounds_ok);
            CHECK(b.exact <= b.meanfield + 1e-9);
            CHECK(b.meanfield <= b.hardmin + 1e-9);
            CHECK(b.hardmin - std::exp(b.hardmin - b.residual) <= b.exact + 1e-9);
        }
        ++idx;
    }
}

TEST_CASE("residual identity: F_hat - F = log(1 + exp(F_hat - E_res))") {
    for (int trial = 0; trial < 20; ++trial) {
        const Model m = random_model(NetworkSpec::sdbm({2, 2, 2}), 500 + trial, 1.2);
        Vec v(2);
        Rng vr(trial);
        v << vr.uniform() * 2.0 - 0.5, vr.uniform() * 2.0 - 0.5;
        const double f = exact_free_energy(m, v);
        const auto [fhat, argmin] = hardmin_free_energy(m, v);
        const double eres = residual_energy(m, v);
        CHECK(fhat - f == doctest::Approx(std::log1p(std::exp(fhat - eres))).epsilon(1e-10));
    }
}

TEST_CASE("residual of a single-configuration model is +infinity") {
    NetworkSpec spec;
    spec.layer_sizes = {2, 0};
    spec.mask = {};
    // zero hidden units: only the empty configuration exists
    CHECK_THROWS(spec.validate());
}

TEST_CASE("mean field converges and is tight for decoupled hidden units") {
    // no hidden-hidden couplings: mean field is exact for an RBM
    const Model m = random_model(NetworkSpec::rbm(3, 3), 31);
    Vec v(3);
    v << 1.0, 0.0, 1.0;
    const auto mf = meanfield_free_energy(m, v);
    CHECK(mf.converged);
    CHECK(mf.value == doctest::Approx(exact_free_energy(m, v)).epsilon(1e-8));
}

TEST_CASE("rescaling scales every energy by beta") {
    const Model m = random_model(NetworkSpec::sdbm({2, 2, 1}), 41);
    const Model hot = m.rescaled(2.5);
    LayerState s = m.zero_state();
    s[0] << 1.0, 0.0;
    for (std::uint64_t h = 0; h < num_hidden_configs(m.spec()); ++h) {
        hidden_from_index(m.spec(), h, s);
        CHECK(hot.energy(s) == doctest::Approx(2.5 * m.energy(s)).epsilon(1e-12));
    }
}

TEST_CASE("envelope export emits the documented CSV layout") {
    const Model m = gbm_model(2);
    std::stringstream out, members;
    std::vector<EnvelopeAxis> axes = {{0, -1.0, 4.0, 11}};
    export_envelope(m, axes, Vec::Zero(1), out, &members);

    std::string line;
    std::getline(out, line);
    CHECK(line == "v0,F,F_hat,F_mf,lower_bound,argmin_config");
    int rows = 0;
    while (std::getline(out, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 11);

    std::getline(members, line);
    CHECK(line == "config,slope,intercept");
    rows = 0;
    while (std::getline(members, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("enumeration cap is enforced") {
    const Model m = Model::zeros(NetworkSpec::rbm(1, 5));
    Vec v(1);
    v << 1.0;
    CHECK_THROWS_AS(exact_free_energy(m, v, 4), std::invalid_argument);
}
