#include <doctest.h>

#include <sstream>

#include "sdbm/model.hpp"
#include "sdbm/model_io.hpp"

using namespace sdbm;

TEST_CASE("network presets and topology") {
    const auto rbm = NetworkSpec::rbm(3, 2);
    CHECK(rbm.layer_sizes == std::vector<int>{3, 2});
    CHECK(rbm.mask == std::vector<std::pair<int, int>>{{1, 0}});
    CHECK(rbm.topology() == Topology::rbm);

    const auto dbm = NetworkSpec::dbm({2, 3, 2});
    CHECK(dbm.mask == std::vector<std::pair<int, int>>{{1, 0}, {2, 1}});
    CHECK(dbm.topology() == Topology::dbm);

    const auto sdbm_spec = NetworkSpec::sdbm({2, 2, 2});
    CHECK(sdbm_spec.mask == std::vector<std::pair<int, int>>{{1, 0}, {2, 0}, {2, 1}});
    CHECK(sdbm_spec.topology() == Topology::sdbm);
    CHECK(sdbm_spec.num_hidden() == 4);
    CHECK(sdbm_spec.num_units() == 6);
    CHECK(sdbm_spec.pair_index(2, 1) == 2);
    CHECK(sdbm_spec.pair_index(1, 2) == -1);

    NetworkSpec bad;
    bad.layer_sizes = {2, 2};
    bad.mask = {{1, 1}};  // within-layer connection
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("energy matches the explicit bilinear form") {
    auto spec = NetworkSpec::rbm(2, 2);
    Parameters p = Parameters::zeros(spec);
    p.weights[0] << 1.0, -2.0, 0.5, 3.0;  // w^{1,0}, hid x vis
    p.biases[0] << 0.25, -0.5;
    p.biases[1] << 1.5, -1.0;
    Model m(spec, p);

    LayerState s = {Vec(2), Vec(2)};
    s[0] << 1.0, 1.0;
    s[1] << 1.0, 0.0;
    // -h^T W v - b0.v - b1.h = -(1 - 2) - (0.25 - 0.5) - 1.5
    CHECK(m.energy(s) == doctest::Approx(1.0 + 0.25 - 1.5).epsilon(1e-14));

    s[1] << 0.0, 1.0;
    CHECK(m.energy(s) == doctest::Approx(-(0.5 + 3.0) + 0.25 + 1.0).epsilon(1e-14));
}

TEST_CASE("unmasked pairs contribute nothing") {
    auto dbm = NetworkSpec::dbm({1, 1, 1});
    auto sdbm_spec = NetworkSpec::sdbm({1, 1, 1});
    Rng rng(7);
    Parameters pd = Parameters::gaussian(dbm, 1.0, rng);
    Parameters ps = Parameters::zeros(sdbm_spec);
    // same parameters, sDBM with the skip weight w^{2,0} forced to zero
    ps.weights[sdbm_spec.pair_index(1, 0)] = pd.weights[dbm.pair_index(1, 0)];
    ps.weights[sdbm_spec.pair_index(2, 1)] = pd.weights[dbm.pair_index(2, 1)];
    ps.biases = pd.biases;
    Model md(dbm, pd), ms(sdbm_spec, ps);
    for (int bits = 0; bits < 8; ++bits) {
        LayerState s = {Vec(1), Vec(1), Vec(1)};
        for (int k = 0; k < 3; ++k) s[k][0] = (bits >> k) & 1;
        CHECK(md.energy(s) == doctest::Approx(ms.energy(s)).epsilon(1e-15));
    }
}

TEST_CASE("centered model equals uncentered equivalent up to a constant") {
    auto spec = NetworkSpec::sdbm({2, 2, 1});
    Rng rng(11);
    Parameters p = Parameters::gaussian(spec, 0.8, rng);
    p.offsets = {Vec(2), Vec(2), Vec(1)};
    p.offsets[0] << 0.3, 0.7;
    p.offsets[1] << 0.1, 0.9;
    p.offsets[2] << 0.5;
    Model centered(spec, p);
    Model flat = centered.uncentered_equivalent();
    CHECK_FALSE(flat.params().has_offsets());

    const double c = centered.energy(centered.zero_state());
    for (int bits = 0; bits < 32; ++bits) {
        LayerState s = {Vec(2), Vec(2), Vec(1)};
        s[0] << (bits & 1), ((bits >> 1) & 1);
        s[1] << ((bits >> 2) & 1), ((bits >> 3) & 1);
        s[2] << ((bits >> 4) & 1);
        CHECK(centered.energy(s) == doctest::Approx(flat.energy(s) + c).epsilon(1e-12));
    }
}

TEST_CASE("layer conditional is the sigmoid of the layer input") {
    auto spec = NetworkSpec::sdbm({2, 3, 2});
    Rng rng(3);
    Model m = Model::gaussian(spec, 1.0, rng);
    LayerState s = m.zero_state();
    s[0] << 1.0, 0.0;
    s[2] << 1.0, 1.0;
    const Vec in = m.layer_input(1, s);
    const Vec cond = m.layer_conditional(1, s);
    for (Eigen::Index i = 0; i < in.size(); ++i)
        CHECK(cond[i] == doctest::Approx(sigmoid(in[i])).epsilon(1e-15));
}

TEST_CASE("conditional flip identity: p/(1-p) = exp(-dE)") {
    auto spec = NetworkSpec::sdbm({2, 2, 2});
    Rng rng(5);
    Model m = Model::gaussian(spec, 1.2, rng);
    LayerState s = m.zero_state();
    s[0] << 1.0, 0.0;
    s[1] << 0.0, 1.0;
    s[2] << 1.0, 1.0;
    for (int k = 1; k <= 2; ++k)
        for (int i = 0; i < 2; ++i) {
            LayerState on = s, off = s;
            on[k][i] = 1.0;
            off[k][i] = 0.0;
            const double p = m.layer_conditional(k, s)[i];
            CHECK(std::log(p / (1.0 - p)) ==
                  doctest::Approx(m.energy(off) - m.energy(on)).epsilon(1e-10));
        }
}

TEST_CASE("gibbs sweeps are deterministic and batch matches sequential") {
    auto spec = NetworkSpec::sdbm({3, 2, 2});
    Rng prng(13);
    Model m = Model::gaussian(spec, 1.0, prng);

    Rng r1(42), r2(42);
    LayerState a = m.zero_state(), b = m.zero_state();
    for (int t = 0; t < 5; ++t) {
        a = gibbs_sweep(m, a, r1);
        b = gibbs_sweep(m, b, r2);
    }
    for (int k = 0; k <= 2; ++k) CHECK(a[k] == b[k]);

    // clamped sweep leaves the visible layer untouched
    LayerState c = m.zero_state();
    c[0] << 1.0, 0.0, 1.0;
    Rng r3(1);
    const LayerState after = gibbs_sweep(m, c, r3, true);
    CHECK(after[0] == c[0]);
}

TEST_CASE("hidden configuration indexing round-trips, layer-major") {
    auto spec = NetworkSpec::sdbm({1, 2, 2});
    CHECK(num_hidden_configs(spec) == 16);
    LayerState s = {Vec::Zero(1), Vec::Zero(2), Vec::Zero(2)};
    for (std::uint64_t h = 0; h < 16; ++h) {
        hidden_from_index(spec, h, s);
        CHECK(hidden_to_index(spec, s) == h);
    }
    // bit 0 is unit 1 of layer 1
    hidden_from_index(spec, 1, s);
    CHECK(s[1][0] == 1.0);
    CHECK(s[1][1] == 0.0);
    CHECK(s[2][0] == 0.0);
    hidden_from_index(spec, 4, s);
    CHECK(s[1][0] == 0.0);
    CHECK(s[2][0] == 1.0);
    CHECK(config_bitstring(spec, 1) == "1000");
    CHECK(config_bitstring(spec, 4) == "0010");
}

TEST_CASE("model json round-trip is bit-exact") {
    auto spec = NetworkSpec::sdbm({2, 2, 1});
    Rng rng(17);
    Parameters p = Parameters::gaussian(spec, 1.0, rng);
    p.biases[0][0] = 0.1 + 0.2;  // not exactly representable sums
    p.offsets = {Vec::Constant(2, 1.0 / 3.0), Vec::Constant(2, 0.7), Vec::Constant(1, 0.5)};
    Model m(spec, p);

    std::stringstream ss;
    save_model(m, ss, RealEncoding::binary);
    Model back = load_model(ss);
    CHECK(back.spec() == spec);
    for (std::size_t i = 0; i < p.weights.size(); ++i)
        CHECK(back.params().weights[i] == p.weights[i]);
    for (std::size_t k = 0; k < p.biases.size(); ++k) {
        CHECK(back.params().biases[k] == p.biases[k]);
        CHECK(back.params().offsets[k] == p.offsets[k]);
    }

    std::stringstream sd;
    save_model(m, sd, RealEncoding::decimal);
    Model dec = load_model(sd);
    CHECK(dec.params().biases[0][0] == doctest::Approx(p.biases[0][0]).epsilon(1e-15));
}

TEST_CASE("state validation rejects shape mismatches") {
    auto spec = NetworkSpec::rbm(2, 2);
    LayerState s = {Vec::Zero(2), Vec::Zero(3)};
    CHECK_THROWS_AS(validate_state(spec, s), std::invalid_argument);
    s = {Vec::Zero(2)};
    CHECK_THROWS_AS(validate_state(spec, s), std::invalid_argument);
    s = {Vec::Zero(2), Vec::Zero(2)};
    s[0][0] = 2.5;  // real-valued visible is fine
    CHECK_NOTHROW(validate_state(spec, s));
}
