import math

import numpy as np
import pytest

import adiabatic_lab as al


def test_catalog_and_defaults():
    assert "tanh_sweep" in al.catalog()
    assert al.parameter_defaults("landau_zener") == {"a": 1.0, "delta": 0.5}
    m = al.model("tanh_sweep", delta=0.25)
    assert m.dimension == 2
    assert m.params["delta"] == 0.25
    h = m.evaluate(0.0)
    assert np.allclose(h, h.conj().T)


def test_unknown_model_raises():
    with pytest.raises(ValueError):
        al.model("nope")


def test_propagate_is_unitary():
    r = al.propagate(al.model("tanh_sweep"), 0.05, -3.0, 3.0)
    u = r["U"]
    assert u.shape == (2, 2)
    assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-10


def test_landau_zener_probability():
    p = al.transition_probability(al.model("landau_zener"), 0.1)["probability"]
    assert p == pytest.approx(math.exp(-math.pi * 0.25 / 0.2), rel=0.03)


def test_crossing_loop_and_prefactor():
    m = al.model("landau_zener")
    (c,) = al.find_crossings(m)
    assert abs(c["location"] - 0.5j) < 1e-10
    loop = al.loop_integral(m)
    assert loop["exchanged"]
    assert loop["value"].imag == pytest.approx(-math.pi / 16, rel=1e-7)
    assert abs(al.geometric_prefactor(m)["theta"].imag) < 1e-6


def test_estimate_and_fit():
    m = al.model("complex_hermitian")
    eps = [0.1, 0.08, 0.06, 0.05]
    p = [al.transition_probability(m, e)["probability"] for e in eps]
    fit = al.fit_decay_rate(eps, p)
    est = al.asymptotic_estimate(m, 0.05)
    assert 2 * fit["gamma_fit"] == pytest.approx(-est["exponent_per_eps"], rel=0.03)
    assert fit["r_squared"] > 0.99


def test_run_returns_csv():
    csv = al.run('[model]\nname = "landau_zener"\n[run]\nepsilons = [0.1, 0.05]\n', "sweep")
    lines = [line for line in csv.splitlines() if not line.startswith("#")]
    assert lines[0].startswith("epsilon,P21")
    assert len(lines) == 3
    assert al.validate("[run]\nepsilons = []\n")
    assert al.validate(al.defaults()) == []
    with pytest.raises(ValueError):
        al.run("[run]\nepsilons = []\n", "sweep")


def test_optimal_truncation():
    r = al.optimal_truncation(al.model("tanh_sweep"), 0.05, 8, -3.0, 3.0)
    assert r["q_star"] >= 1
    assert not r["warning"]
