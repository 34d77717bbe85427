import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specpert.ensemble import (LAWS, SampleConfig, build_diagonal, discrepancy_eta,
                               sample_perturbation)
from specpert.errors import ConfigError
from specpert.models import make_model

BAND = make_model("band:l=0.2,m=1")
TRI = make_model("triangular:m=1")


def test_build_diagonal_examples():
    assert np.allclose(build_diagonal(BAND, 4), [0.25, 0.5, 0.75, 1.0], atol=0)
    assert np.allclose(build_diagonal(TRI, 2), [0.0, 1.0], atol=1e-15)
    assert build_diagonal(TRI, 1).tolist() == [TRI.f(1.0)]


def test_diagonal_monotone():
    d = build_diagonal(make_model("parabolic"), 500)
    assert np.all(np.diff(d) > 0)


def test_config_validation():
    assert SampleConfig(n=100, c=2.0, alpha=0.5).eps == pytest.approx(0.2)
    for bad in (dict(n=0), dict(n=10, c=0.0), dict(n=10, alpha=-1), dict(n=10, law="cauchy"),
                dict(n=10, seed=-1), dict(n=2.5)):
        with pytest.raises(ConfigError):
            SampleConfig(**bad)


def test_config_json_roundtrip():
    cfg = SampleConfig(n=64, c=0.5, alpha=0.4, law="complex-gaussian", seed=7, model="triangular")
    assert SampleConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ConfigError):
        SampleConfig.from_json('{"n": 3, "bogus": 1}')
    with pytest.raises(ConfigError):
        SampleConfig.from_json("{nope")


def test_n1_sample():
    cfg = SampleConfig(n=1, seed=11)
    s = sample_perturbation(TRI, cfg)
    g = np.random.default_rng(11).standard_normal((1, 1))[0, 0]
    assert s.X.shape == (1, 1)
    assert s.X[0, 0] == pytest.approx(np.sqrt(TRI.sigma_d2(1.0)) * g, abs=0)


def test_band_zero_outside():
    s = sample_perturbation(BAND, SampleConfig(n=10, seed=3))
    # (1/10, 9/10) is further apart than 0.2
    assert s.X[0, 8] == 0.0 and s.X[8, 0] == 0.0
    i, j = np.nonzero(s.X)
    assert np.all(np.abs(i - j) <= 2)


@pytest.mark.slow
def test_entry_variance_monte_carlo():
    # sample variance of sqrt(n) X_{3,7} over 10^4 draws
    v = np.array([sample_perturbation(TRI, SampleConfig(n=100, seed=k)).X[2, 6]
                  for k in range(10_000)]) * 10.0
    assert abs(v.var() - 1.0) <= 0.05


@given(n=st.integers(1, 40), seed=st.integers(0, 2**64 - 1), law=st.sampled_from(LAWS),
       mid=st.sampled_from(["band:l=0.3,m=1", "triangular:m=2", "parabolic:m=0"]))
def test_exact_hermitian_and_deterministic(n, seed, law, mid):
    cfg = SampleConfig(n=n, seed=seed, law=law)
    a = sample_perturbation(mid, cfg)
    b = sample_perturbation(mid, cfg)
    assert np.array_equal(a.X, a.X.conj().T)
    assert np.array_equal(a.X, b.X)
    assert np.all(np.imag(np.diag(a.X)) == 0)


def test_profile_variances():
    # E|x_ij|^2 = sigma^2(i/n, j/n) off the diagonal, sigma_d^2 on it
    n, reps = 12, 3000
    model = make_model("band:l=0.25,m=2")
    acc = np.zeros((n, n))
    for k in range(reps):
        X = sample_perturbation(model, SampleConfig(n=n, seed=k, law="complex-gaussian")).X
        acc += np.abs(X) ** 2 * n
    emp = acc / reps
    x = np.arange(1, n + 1) / n
    target = model.sigma2(x[:, None], x[None, :]).astype(float)
    np.fill_diagonal(target, 4.0)
    assert np.max(np.abs(emp - target)) < 0.25
    assert np.all(emp[target == 0] == 0)


def test_fourth_moment_bounded():
    x = np.concatenate([sample_perturbation(TRI, SampleConfig(n=320, seed=k)).X.ravel()
                        for k in range(2)]) * np.sqrt(320)
    x = x[: 100_000 * 2]
    assert np.mean(x ** 4) <= 3.5


def test_bernoulli_entries():
    X = sample_perturbation(make_model("triangular:m=1"),
                            SampleConfig(n=30, law="symmetric-bernoulli")).X
    assert np.allclose(np.abs(X) * np.sqrt(30), 1.0)


def test_discrepancy_default_zero():
    s = sample_perturbation(BAND, SampleConfig(n=50, seed=1))
    assert discrepancy_eta(BAND, s) == 0.0


def test_discrepancy_eigenvalue_shift():
    n = 100
    cfg = SampleConfig(n=n, alpha=1.0)
    s = sample_perturbation(BAND, cfg, diag=build_diagonal(BAND, n) + 1.0 / n ** 2)
    assert discrepancy_eta(BAND, s) == pytest.approx(1e-4, rel=1e-12)


@given(delta=st.floats(0.0, 0.5), alpha=st.floats(0.0, 1.5))
def test_discrepancy_profile_jitter(delta, alpha):
    n = 20
    x = np.arange(1, n + 1) / n
    prof = BAND.sigma2(x[:, None], x[None, :]).astype(float) + delta
    cfg = SampleConfig(n=n, alpha=alpha)
    s = sample_perturbation(BAND, cfg, sigma2_n=prof)
    assert discrepancy_eta(BAND, s) == pytest.approx(max(n * cfg.eps, 1.0) * delta, abs=1e-12)


def test_perturbed_matrix():
    s = sample_perturbation(TRI, SampleConfig(n=8, alpha=0.5, seed=4))
    M = s.perturbed()
    assert np.allclose(M, np.diag(s.diag) + s.eps * s.X, atol=0)
    assert np.array_equal(s.perturbed(eps=0.0), np.diag(s.diag))
