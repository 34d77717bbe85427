import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specpert.errors import ConfigError, ModelError, ParameterRangeError
from specpert.models import (ExampleId, LimitModel, closed_form_F, density_cdf,
                             eval_quantile_f, make_model, parse_example_id)

# bisection on 3/4 (t - t^3/3) + 1/2 = 0.9, see oracles.parabolic_quantile
PARABOLIC_Q09 = 0.608399788681816565


def test_band_model_values():
    m = make_model(ExampleId("band", m=1, ell=0.2))
    assert m.rho(0.5) == 1.0
    assert m.sigma2(0.1, 0.25) == 1.0
    assert m.sigma2(0.1, 0.35) == 0.0
    assert np.all(m.sigma_d2(np.linspace(0, 1, 5)) == 1.0)


def test_triangular_density():
    m = make_model("triangular:m=1")
    assert m.rho(0.0) == 1.0
    assert m.rho(1.0) == 0.0 and m.rho(-1.0) == 0.0


def test_parabolic_m0():
    m = make_model("parabolic:m=0")
    assert np.all(m.sigma_d2(np.linspace(0, 1, 7)) == 0.0)
    assert m.rho(0.0) == 0.75


@pytest.mark.parametrize("bad", [dict(kind="band", ell=0.0), dict(kind="band", ell=1.5),
                                 dict(kind="triangular", m=-1.0), dict(kind="circle")])
def test_example_id_ranges(bad):
    with pytest.raises(ParameterRangeError):
        ExampleId(**bad)


def test_parse_ids():
    assert parse_example_id("band:l=0.2,m=1") == ExampleId("band", 1.0, 0.2)
    assert parse_example_id("Triangular:m=0") == ExampleId("triangular", 0.0)
    assert parse_example_id("parabolic") == ExampleId("parabolic", 1.0)
    assert str(parse_example_id("band:l=0.8,m=2")) == "band:l=0.8,m=2"
    for bad in ("", "band:x=1", "band:l=", "band:l=abc", "hexagon", "band:l=3"):
        with pytest.raises(ConfigError):
            parse_example_id(bad)


@pytest.mark.parametrize("mid", ["band:l=0.2", "band:l=0.8", "triangular", "parabolic"])
def test_model_invariants(mid):
    make_model(mid).check()


def test_check_rejects_unnormalized_density():
    good = make_model("triangular")
    from dataclasses import replace
    bad = replace(good, rho=lambda s: 2 * good.rho(s))
    with pytest.raises(ModelError):
        bad.check()
    with pytest.raises(ModelError):
        eval_quantile_f(bad, 0.5)


def test_closed_form_spot_values():
    assert closed_form_F("band:l=0.2", 0.5) == 0.0
    assert closed_form_F("triangular", 0.0) == 0.0
    assert closed_form_F("parabolic", 2.0) == 0.0
    # -rho H[tau rho] at s = 0.1: log((0.2 ^ 0.9)/(0.2 ^ 0.1)) = log 2
    assert closed_form_F("band:l=0.2", 0.1) == pytest.approx(math.log(2), abs=1e-15)
    assert closed_form_F("triangular", 0.5) == pytest.approx(-0.823959216501082269, abs=1e-15)


def test_closed_form_edges_are_finite():
    for mid, pts in [("triangular", [-1, 0, 1]), ("parabolic", [-1, 1])]:
        v = closed_form_F(mid, np.array(pts, dtype=float))
        assert np.all(np.isfinite(v)) and np.all(v == 0)


@pytest.mark.parametrize("mid", ["triangular:m=1", "parabolic:m=0"])
def test_closed_form_is_odd(mid):
    s = np.linspace(-1.2, 1.2, 241)
    assert np.max(np.abs(closed_form_F(mid, -s) + closed_form_F(mid, s))) <= 1e-12


def test_quantile_examples():
    assert eval_quantile_f(make_model("triangular"), 0.5) == pytest.approx(0.0, abs=1e-12)
    assert eval_quantile_f(make_model("band:l=0.2"), 0.25) == pytest.approx(0.25, abs=1e-12)
    assert eval_quantile_f(make_model("parabolic"), 0.9) == pytest.approx(PARABOLIC_Q09, abs=1e-12)
    with pytest.raises(ParameterRangeError):
        eval_quantile_f(make_model("parabolic"), 1.5)


def test_oracle_value_is_reproducible():
    from oracles import parabolic_quantile
    assert float(parabolic_quantile("0.9")) == pytest.approx(PARABOLIC_Q09, abs=1e-15)


@pytest.mark.parametrize("mid", ["triangular", "parabolic", "band:l=0.5"])
def test_quantile_inverts_cdf(mid):
    m = make_model(mid)
    for x in np.linspace(0.02, 0.98, 17):
        t = eval_quantile_f(m, x)
        assert density_cdf(m, t) == pytest.approx(x, abs=1e-8)
        # the catalog f is the same quantile in closed form
        assert m.f(x) == pytest.approx(t, abs=1e-8)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_quantile_monotone(x, y):
    m = make_model("parabolic")
    lo, hi = sorted((x, y))
    assert eval_quantile_f(m, lo) <= eval_quantile_f(m, hi) + 1e-12


@given(ell=st.floats(0.01, 1.0), m=st.floats(0.0, 3.0))
def test_band_family_invariants(ell, m):
    model = make_model(ExampleId("band", m, ell))
    x = np.linspace(0.0, 1.0, 23)
    X, Y = np.meshgrid(x, x, indexing="ij")
    assert np.array_equal(model.sigma2(X, Y), model.sigma2(Y, X))
    assert np.max(np.abs(model.tau(model.f(X), model.f(Y)) - model.sigma2(X, Y))) <= 1e-12
    assert np.all(model.sigma_d2(x) == m * m)


def test_holder_constants():
    eta0, a, C = make_model("parabolic").holder
    assert (eta0, a) == (0.05, 1.0)
    # |d/dt (3/4)(1 - t^2)| <= 3/2 on [-1, 1]
    assert 1.0 < C <= 1.5 + 1e-9
    assert make_model("triangular").holder[2] == pytest.approx(1.0, abs=1e-9)


def test_limit_model_is_frozen():
    m = make_model("triangular")
    assert isinstance(m, LimitModel)
    with pytest.raises(Exception):
        m.name = "x"
