import math

import numpy as np
import pytest

import sdbm_py as sp


def test_chain_model_regions():
    for depth in range(1, 9):
        report = sp.count_effective_mixtures(sp.gbm_model(depth))
        assert report["count"] == 2**depth
        assert report["exact"]


def test_tangency_certificate():
    ok, entries = sp.tangency_check(4)
    assert ok
    assert len(entries) == 16
    assert all(e["residual"] <= 1e-9 for e in entries)


def test_bundle_counts():
    report = sp.count_effective_mixtures(sp.bundle_sdbm(2, 2), method="lp")
    assert report["count"] == 16


def test_free_energy_bounds():
    m = sp.Model.gaussian(sp.NetworkSpec.sdbm([2, 2, 2]), 1.0, seed=3)
    b = sp.check_bounds(m, np.array([0.5, -1.0]))
    assert b["ok"]
    assert b["lower"] <= b["F"] <= b["F_mf"] <= b["F_hat"] + 1e-9


def test_exact_and_ais_log_z_agree():
    m = sp.Model.gaussian(sp.NetworkSpec.rbm(5, 4), 0.6, seed=9)
    exact = sp.exact_log_z(m)
    ais = sp.ais_log_z(m, betas=2000, runs=100, seed=1)
    assert abs(ais["log_z"] - exact) < 0.2


def test_rbm_region_bound_formula():
    assert sp.rbm_region_bound(2, 4) == str(1 + 4 + 6)


def test_model_save_load_roundtrip(tmp_path):
    m = sp.Model.gaussian(sp.NetworkSpec.rbm(3, 2), 1.0, seed=5)
    path = str(tmp_path / "model.json")
    m.save(path)
    back = sp.Model.load(path)
    v = np.array([1.0, 0.0, 1.0])
    assert sp.exact_free_energy(back, v) == sp.exact_free_energy(m, v)


def test_training_improves_likelihood():
    data = sp.bars_and_stripes(2, 2)
    init = sp.Model.gaussian(sp.NetworkSpec.rbm(4, 4), 0.01, seed=2)
    model, log = sp.train(init, data, lr=0.2, updates=5000, batch=32, seed=4,
                          center_rate=1e-2, log_interval=50)
    assert log[-1]["exact_train_ll"] > log[0]["exact_train_ll"] + 0.5
    assert log[-1]["exact_train_ll"] > sp.bernoulli_baseline_ll(data) + 0.5


def test_toy_datasets():
    bas = sp.bars_and_stripes(3, 3)
    assert np.asarray(bas).shape == (9, 14)
    assert np.asarray(sp.parity_patterns(3)).shape == (3, 4)
    assert math.isclose(sp.bernoulli_baseline_ll(bas), 9 * math.log(0.5), rel_tol=1e-9)


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        sp.count_effective_mixtures(sp.gbm_model(2), method="bogus")
