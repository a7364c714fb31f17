import math
from fractions import Fraction

import numpy as np
import pytest

import nmv


def test_models_registered():
    assert set(nmv.builtin_names()) >= {"example1", "example2", "linear"}
    info = nmv.model_info("example1")
    assert info["lags"] == ["0", "1/5", "1/4", "2/5", "1/2", "2"]
    assert nmv.model_info("example2")["dim_state"] == 2


def test_grid():
    g = nmv.grid("example1", T=4, delta=Fraction(1, 20), snap=False)
    assert (g["M"], g["M_T"]) == (40, 80)
    assert g["offsets"] == [0, 4, 5, 8, 10, 40]
    with pytest.raises(nmv.IncommensurableGrid):
        nmv.grid("linear", T=1, delta="1/16", params={"rho2": "1/5"})


def test_simulate_shapes_and_determinism():
    a = nmv.simulate("example2", T=5, delta="2^-6", N=16, seed=3, trace=2)
    b = nmv.simulate("example2", T=5, delta="2^-6", N=16, seed=3, workers=2)
    assert a["terminal"].shape == (16, 2)
    assert np.array_equal(a["terminal"], b["terminal"])
    assert a["traces"].shape == (2, 5 * 64 + 1, 2)
    assert np.all(np.isfinite(a["terminal"]))
    assert any("snapped" in w for w in a["warnings"])


def test_zero_model_is_constant():
    zero = {k: 0 for k in ("kappa", "a", "b", "c", "sigma1", "sigma2")}
    out = nmv.simulate("linear", T=1, delta="1/8", N=4, params={**zero, "xi0": 2.5})
    assert np.all(out["terminal"] == 2.5)


def test_config_errors():
    with pytest.raises(nmv.ConfigError):
        nmv.simulate("example1", T=1, delta="3/2")
    with pytest.raises(nmv.ConfigError):
        nmv.simulate("example1", T=1, delta="1e-3")
    with pytest.raises(nmv.ConfigError):
        nmv.simulate("linear", T=1, delta="1/8", params={"zeta": 1})
    with pytest.raises(nmv.ConfigError):
        nmv.simulate("example1", T=1, delta="1/64", gamma=0.7)


def test_untamed_blow_up():
    with pytest.raises(nmv.NonFiniteState):
        nmv.simulate("example1", T=8, delta="1/4", N=4, tamed=False)


def test_wasserstein():
    assert nmv.wasserstein_exact(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[1.0, 0.0], [0.0, 0.0]])) == 0.0
    assert nmv.wasserstein_1d(np.array([0.0, 2.0]), np.array([1.0, 3.0]), p=1) == pytest.approx(1.0)
    assert nmv.moment_norm(np.array([0.0, 2.0])) == pytest.approx(math.sqrt(2))
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=(50, 1)), rng.normal(size=(50, 1))
    assert nmv.wasserstein_1d(x, y, 2) == pytest.approx(nmv.wasserstein_exact(x, y, 2), abs=1e-10)
    value, err = nmv.wasserstein_sliced(rng.normal(size=(64, 3)), rng.normal(size=(64, 3)))
    assert value > 0 and err >= 0


def test_taming_and_noise():
    assert nmv.tame_drift(np.array([3.0]), 0.25, 0.5)[0] == pytest.approx(1.2)
    assert nmv.standard_normal(1, 2, 3) == nmv.standard_normal(1, 2, 3)


def test_experiment_reports(tmp_path):
    r = nmv.convergence_study("linear", T=1, N=32, finest=8, levels=(6, 5, 4))
    assert r.kind == "convergence" and r.slope is not None
    assert [int(x) for x in r.column("level_exponent")] == [6, 5, 4]
    assert r.rows[0]["wall_ms"] == ""
    path = r.write(tmp_path)
    assert open(path).read() == r.csv

    o = nmv.meanfield_oracle(N=200, delta="2^-6")
    assert o.meta["annotations"]["passed"] in (True, False)
    assert o.column("mean_ode")[0] == pytest.approx(1.0)

    f = nmv.fg_rate_check(n_list=(8, 16, 32), replications=2, reference_size=1000, sampler="point")
    assert f.column("wpp") == [0.0, 0.0, 0.0]

    c = nmv.chaos_study(n_list=(16, 32, 64), n_ref=128, probes=8)
    assert len(c.rows) == 3

    m = nmv.moment_sweep("linear", deltas=["2^-4", "2^-5"], seeds=[1, 2], T=1, N=8)
    assert "moment_ratio" in m.meta["annotations"]
