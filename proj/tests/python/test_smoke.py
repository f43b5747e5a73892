import math

import numpy as np
import pytest

import lnainfer


POPULATIONS = {"tau2": (3.675, 6.345), "delta2": (0.576, 0.005), "sigma_u2": (12.0, 3.0)}


def test_loglik_matches_filter():
    p = lnainfer.TranslationParams(tau2=3.675, delta2=0.576, phi2_0=500.0, sigma_u2=10.0)
    times = [i / 12 for i in range(30)]
    counts = lnainfer.simulate_trajectory(p, [500], times, seed=3)
    assert counts.shape == (30, 1)
    obs = counts[:, 0].astype(float).tolist()
    ll = lnainfer.lna_loglik(p, times, obs)
    kf = lnainfer.kalman_filter(p, times, obs)
    assert math.isfinite(ll)
    assert ll == pytest.approx(kf["loglik"], abs=1e-9)
    assert len(kf["standardized_residuals"]) == 30


def test_invalid_parameters_raise():
    with pytest.raises(ValueError):
        lnainfer.TranslationParams(tau2=-1.0, delta2=0.5, phi2_0=1.0, sigma_u2=1.0)


def test_simulate_and_fit(tmp_path):
    study = lnainfer.simulate_study("translation", cells=3, observations=20, populations=POPULATIONS,
                                    initial={"phi2_0": 500.0}, seed=5)
    data = study["data"]
    assert len(data) == 3
    assert len(study["truth"]) == 3
    path = tmp_path / "obs.csv"
    lnainfer.write_dataset(path, data)
    back = lnainfer.read_dataset(path)
    assert [c.values for c in back.cells] == [c.values for c in data.cells]

    a = lnainfer.fit("translation", back, iterations=400, burn_in=100, thin=5, seed=2)
    b = lnainfer.fit("translation", back, iterations=400, burn_in=100, thin=5, seed=2)
    assert not a.failed
    assert a.samples.shape == (60, len(a.names))
    assert np.array_equal(a.samples, b.samples)
    assert "kappa" in a.names
    assert all(np.isfinite(a.log_posterior))
    names = [row.name for row in a.summary]
    assert "mu_tau2_tilde" in names


def test_gamma_mode():
    assert lnainfer.gamma_mode(0.57, 0.004) == pytest.approx(0.57 * (1 - 0.004 / 0.57**2))
