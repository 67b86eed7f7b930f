import os
import pathlib

import numpy as np
import pytest

import fsfmb

DATA = pathlib.Path(os.environ.get("FSFMB_TEST_DATA_DIR", pathlib.Path(__file__).parents[2] / "tests" / "data"))


def linear_panel(seed, T=400, N=40, p=8, psi=None, noise=0.01):
    rng = np.random.default_rng(seed)
    f = rng.normal(0, 0.04, (T, p))
    B = 1.0 + rng.normal(0, 0.8, (N, p))
    psi = np.zeros(p) if psi is None else psi
    sigma = np.cov(f, rowvar=False, bias=True)
    mu = B @ sigma @ psi
    r = f @ B.T + mu + rng.normal(0, noise, (T, N))
    return r, f


def test_expand_counts_and_labels():
    labels = fsfmb.expand_terms(list("ABCDEF"), degree=3)
    assert len(labels) == 57
    assert labels[0] == "A2"
    values, names = fsfmb.expand(np.arange(12.0).reshape(6, 2), ["x", "y"], degree=2)
    assert names == ["x2", "y2", "x*y"]
    np.testing.assert_allclose(values[:, 2], np.arange(0, 12, 2) * np.arange(1, 12, 2))


def test_ols_matches_numpy():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(50, 3))
    y = X @ [1.0, -2.0, 0.5] + 0.3 + rng.normal(0, 0.1, 50)
    fit = fsfmb.ols(X, y)
    ref = np.linalg.lstsq(np.column_stack([np.ones(50), X]), y, rcond=None)[0]
    assert fit["intercept"] == pytest.approx(ref[0])
    np.testing.assert_allclose(fit["coefficients"], ref[1:], rtol=1e-10)


def test_covariances_and_estimate():
    r, f = linear_panel(2)
    C = fsfmb.sample_covariances(r, f)
    ref = (f - f.mean(0)).T @ r / r.shape[0]
    np.testing.assert_allclose(C, ref.T, atol=1e-14)
    est = fsfmb.estimate(r, f, [0, 2])
    assert est["psi"].shape == (8,)
    assert est["psi"][1] == 0.0
    assert est["equivalence_gap"] < 1e-8


def test_select_recovers_priced_factors():
    psi = np.zeros(8)
    psi[[2, 5]] = 15.0
    r, f = linear_panel(3, psi=psi)
    sel = fsfmb.select(r, f, stop_count=2, scan="incremental")
    assert sorted(sel["final_set"]) == [2, 5]
    assert sel["steps"][-1]["adj_r2"] > sel["base_adj_r2"]
    again = fsfmb.select(r, f, stop_count=2, threads=3)
    assert again["final_set"] == sel["final_set"]


def test_debias_returns_intervals():
    psi = np.zeros(8)
    psi[1] = 10.0
    r, f = linear_panel(4, psi=psi)
    out = fsfmb.debias(r, f, selected=[1], coordinates=[1, 3])
    assert [l["j"] for l in out["loadings"]] == [1, 3]
    lo, hi = out["loadings"][0]["ci95"]
    assert lo < out["loadings"][0]["psi_d"] < hi


def test_errors_carry_codes():
    with pytest.raises(fsfmb.FsfmbError) as info:
        fsfmb.expand_terms(["A", "B"], degree=5)
    assert info.value.code == "UnsupportedDegree"
    with pytest.raises(fsfmb.FsfmbError):
        fsfmb.select(np.zeros((10, 3)), np.zeros((10, 2)), stop_eps=0.1, stop_count=1)
    assert fsfmb.lemma_check(np.array([[2.0, -0.7], [-0.7, 1.5]]))


def test_run_stage_from_config():
    report = fsfmb.run("select", DATA / "fixture.toml")
    assert report["command"] == "select"
    assert len(report["result"]["selection"]["steps"]) >= 1
    assert "select" in fsfmb.commands
