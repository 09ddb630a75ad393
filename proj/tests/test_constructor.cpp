#include <doctest.h>

#include <cmath>

#include "sdbm/constructor.hpp"
#include "sdbm/mixtures.hpp"

using namespace sdbm;

TEST_CASE("chain construction closed forms") {
    const auto p = soft_deep_params(3);
    CHECK(p.depth == 3);
    CHECK(p.weight(1, 0) == 1.0);
    CHECK(p.weight(2, 0) == 2.0);
    CHECK(p.weight(3, 0) == 4.0);
    CHECK(p.weight(2, 1) == -2.0);
    CHECK(p.weight(3, 1) == -4.0);
    CHECK(p.weight(3, 2) == -8.0);
    CHECK(p.b[1] == 0.0);
    CHECK(p.b[2] == -1.0);   // 0.5 * 2 * (1 - 2)
    CHECK(p.b[3] == -6.0);   // 0.5 * 4 * (1 - 4)

    // deep closed forms: w^{k,0} = 2^{k-1}, w^{k,l} = -2^{k+l-2}
    const auto deep = soft_deep_params(20);
    CHECK(deep.weight(20, 0) == std::ldexp(1.0, 19));
    CHECK(deep.weight(20, 5) == -std::ldexp(1.0, 23));
    CHECK(deep.b[20] == 0.5 * std::ldexp(1.0, 19) * (1.0 - std::ldexp(1.0, 19)));
}

TEST_CASE("chain model energies at hand-checked points") {
    const Model m = gbm_model(2);
    LayerState s = {Vec(1), Vec(1), Vec(1)};
    s[0] << 1.0;
    s[1] << 1.0;
    s[2] << 0.0;
    CHECK(m.energy(s) == doctest::Approx(-1.0).epsilon(1e-15));
    s[1] << 1.0;
    s[2] << 1.0;
    // -v - 2v + 2 + 1 at v = 1
    CHECK(m.energy(s) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("tangency certificate holds for depths 1 through 8") {
    for (int L = 1; L <= 8; ++L) {
        const auto params = soft_deep_params(L);
        const auto cert = tangency_check(params, L, 1e-9);
        CHECK(cert.ok);
        CHECK(cert.entries.size() == (std::size_t{1} << L));
        for (const auto& e : cert.entries) {
            CHECK(e.ok);
            CHECK(e.above);
            CHECK(std::abs(e.residual) < 1e-9);
        }
    }
}

TEST_CASE("tangency points are distinct and ordered with the configs") {
    const auto cert = tangency_check(soft_deep_params(4), 4);
    // config h (layer-major bits) touches at sum_k x^k 2^{k-1} - 0.5 = h - 0.5
    for (std::size_t h = 0; h < cert.entries.size(); ++h)
        CHECK(cert.entries[h].tangency_point ==
              doctest::Approx(static_cast<double>(h) - 0.5).epsilon(1e-12));
}

TEST_CASE("perturbing a chain weight breaks the certificate") {
    auto p = soft_deep_params(3);
    p.w[3][1] += 0.25;
    const auto cert = tangency_check(p, 3, 1e-9);
    CHECK_FALSE(cert.ok);
}

TEST_CASE("chain model realizes all 2^L regions") {
    for (int L = 1; L <= 10; ++L) {
        const auto report = count_effective_mixtures(gbm_model(L));
        CHECK(report.count == (1LL << L));
    }
}

TEST_CASE("bundle construction replicates the chain per unit") {
    const Model m = bundle_sdbm(2, 2);
    CHECK(m.spec().topology() == Topology::sdbm);
    CHECK(m.spec().layer_sizes == std::vector<int>{2, 2, 2});
    const auto base = soft_deep_params(2);
    const Mat& w10 = *m.weight(1, 0);
    CHECK(w10(0, 0) == base.weight(1, 0));
    CHECK(w10(1, 1) == base.weight(1, 0));
    CHECK(w10(0, 1) == 0.0);
    const Mat& w21 = *m.weight(2, 1);
    CHECK(w21(0, 0) == base.weight(2, 1));
    CHECK(w21(1, 0) == 0.0);
    CHECK(m.bias(2)[0] == base.b[2]);

    // independent bundles: regions multiply to 2^{ML}
    const auto report = count_effective_mixtures(m);
    CHECK(report.count == 16);
}

TEST_CASE("rescale multiplies weights and biases") {
    const Model m = gbm_model(2);
    const Model r = rescale(m, 0.5);
    CHECK((*r.weight(2, 1))(0, 0) == doctest::Approx(-1.0));
    CHECK(r.bias(2)[0] == doctest::Approx(-0.5));
    CHECK_THROWS_AS(rescale(m, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rescale(m, -1.0), std::invalid_argument);
}

TEST_CASE("regularization schedule follows the chain magnitudes") {
    const auto spec = NetworkSpec::sdbm({4, 3, 3, 3});
    const double eta = 1.5, base = 1e-5;
    const auto lam = regularization_schedule(spec, eta, base);
    CHECK(lam.at({1, 0}) == doctest::Approx(base).epsilon(1e-12));
    CHECK(lam.at({2, 0}) == doctest::Approx(base / std::pow(2.0, eta)).epsilon(1e-12));
    CHECK(lam.at({3, 0}) == doctest::Approx(base / std::pow(4.0, eta)).epsilon(1e-12));
    CHECK(lam.at({2, 1}) == doctest::Approx(base / std::pow(2.0, eta)).epsilon(1e-12));
    CHECK(lam.at({3, 2}) == doctest::Approx(base / std::pow(8.0, eta)).epsilon(1e-12));
    // deep chains must not overflow to zero or infinity
    const auto deep = regularization_schedule(NetworkSpec::sdbm(std::vector<int>(41, 1)), 3.5, 1e-7);
    for (const auto& [pair, v] : deep) {
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }
}

TEST_CASE("constructor rejects invalid depths") {
    CHECK_THROWS_AS(soft_deep_params(-1), std::invalid_argument);
    CHECK_THROWS_AS(gbm_model(0), std::invalid_argument);
}
