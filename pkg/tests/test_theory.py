import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specpert.errors import (ConvergenceError, DomainError, ParameterRangeError,
                             PreconditionError)
from specpert.models import closed_form_F, make_model
from specpert.quadrature import QuadratureConfig
from specpert.testfunctions import bump, cauchy_kernel, gaussian, polynomial
from specpert.theory import (B_from_model_F, B_quadrature, B_via_F, Cutoff, F_numeric,
                             FieldCovariance, free_fixed_point, hilbert_pv,
                             hilbert_pv_with_error, hs_reconstruct, sobolev_norm,
                             z_covariance)

# mpmath references, see oracles.band_B / oracles.wigner_B
BAND_B_2_1 = complex(-0.0199019784738218868, -0.0611748358110281194)
BAND08_B = complex(0.0, 3.03729780814804960)
TRI_B_1_1 = complex(-0.297129960423939544, -0.150518601428783109)
TRI_B_2I = complex(0.0, 0.107333859075329356)
PARA_B = complex(-1.50807868610121027, 0.393463126048337002)

TRI = make_model("triangular:m=1")


def unit_indicator(t):
    t = np.asarray(t, dtype=float)
    return ((t >= 0) & (t <= 1)).astype(float)


def semicircle(t):
    t = np.asarray(t, dtype=float)
    return 2 / np.pi * np.sqrt(np.clip(1 - t * t, 0, None))


def test_hilbert_examples():
    assert hilbert_pv(unit_indicator, 0.5) == pytest.approx(0.0, abs=1e-12)
    assert hilbert_pv(unit_indicator, 0.25) == pytest.approx(-math.log(3), abs=1e-10)
    assert hilbert_pv(semicircle, 0.3, support=(-1, 1)) == pytest.approx(0.6, abs=1e-8)


@given(s=st.floats(0.02, 0.98))
def test_hilbert_indicator_antiderivative(s):
    v, err = hilbert_pv_with_error(unit_indicator, s)
    assert v == pytest.approx(math.log(s / (1 - s)), abs=1e-9)
    assert err <= 1e-9


def test_hilbert_outside_and_bad_eta():
    assert hilbert_pv(unit_indicator, 2.0) == pytest.approx(math.log(2), abs=1e-12)
    with pytest.raises(ParameterRangeError):
        hilbert_pv(unit_indicator, 0.5, QuadratureConfig(pv_eta=0.3))
    with pytest.raises(DomainError):
        hilbert_pv(unit_indicator, 0.0)


def test_F_examples():
    assert F_numeric(make_model("band:l=0.2"), 0.1) == pytest.approx(math.log(2), abs=1e-3)
    assert F_numeric(TRI, 0.5) == pytest.approx(-0.823959216501082269, abs=1e-3)
    for mid in ("band:l=0.2", "triangular", "parabolic"):
        assert F_numeric(make_model(mid), 3.0) == 0.0


@pytest.mark.parametrize("mid", ["band:l=0.2", "band:l=0.8", "triangular", "parabolic"])
def test_F_matches_closed_form(mid):
    m = make_model(mid)
    a, b = m.support
    s = np.linspace(a + 0.05, b - 0.05, 23)
    assert np.max(np.abs(F_numeric(m, s) - closed_form_F(mid, s))) <= 1e-6


def test_F_total_integral_vanishes():
    # int F = 0 because B(z) = O(z^-3)
    from specpert.quadrature import integrate
    val = integrate(lambda s: F_numeric(TRI, s), -1, 1, (0.0,), QuadratureConfig(panels=16))
    assert abs(val) <= 1e-8


@pytest.mark.parametrize("mid,z,ref", [
    ("band:l=0.2", 2 + 1j, BAND_B_2_1),
    ("band:l=0.8", 0.5 + 0.5j, BAND08_B),
    ("triangular", 1 + 1j, TRI_B_1_1),
    ("triangular", 2j, TRI_B_2I),
    ("parabolic", 0.5 + 0.5j, PARA_B),
])
def test_B_against_oracle(mid, z, ref):
    m = make_model(mid)
    assert abs(B_quadrature(m, z) - ref) <= 1e-9
    assert abs(B_from_model_F(m, z) - ref) <= 1e-8


def test_B_trivial():
    m = replace(TRI, sigma2=lambda x, y: np.zeros(np.broadcast(x, y).shape))
    assert B_quadrature(m, 1j) == 0
    assert B_via_F(lambda s: np.zeros_like(s), 1 + 1j) == 0
    flat = replace(TRI, f=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                   sigma2=lambda x, y: np.ones(np.broadcast(x, y).shape))
    for z in (1j, 2 - 1j, 0.3 + 0.1j):
        assert B_quadrature(flat, z) == pytest.approx(1 / z ** 3, rel=1e-12)
    with pytest.raises(DomainError):
        B_quadrature(TRI, 0.5)


def test_B_identity_small_grid():
    z = np.array([0.5j, -0.3 + 1j, 1.4 + 2j])
    for mid in ("band:l=0.2", "triangular"):
        m = make_model(mid)
        assert np.max(np.abs(B_quadrature(m, z) - B_from_model_F(m, z))) <= 1e-6


def test_B_decay():
    rs = np.array([25.0, 50.0, 100.0])
    z = rs * np.exp(0.7j)
    B = B_quadrature(make_model("band:l=0.2"), z)
    slope = np.polyfit(np.log(rs), np.log(np.abs(B)), 1)[0]
    assert slope == pytest.approx(-3, abs=0.05)
    assert np.all(np.abs(B) * rs ** 3 <= 2.0)


def test_covariance_examples():
    band1 = make_model("band:l=0.2,m=1")
    sq = polynomial([0.0, 0.0, 1.0], (-2, 2))
    assert z_covariance(band1, sq, sq) == pytest.approx(4 / 3, rel=1e-13)
    assert z_covariance(make_model("parabolic:m=0"), sq, sq) == 0
    z = 2j
    phi = cauchy_kernel(z)
    exact = ((z - 1) ** -3 - z ** -3) / 3
    assert z_covariance(band1, phi, phi) == pytest.approx(exact, rel=1e-12)
    assert exact == pytest.approx(complex(0.0293333333333333, -0.0363333333333333), abs=1e-15)
    band2 = make_model("band:l=0.2,m=2")
    assert z_covariance(band2, phi, phi) == pytest.approx(4 * exact, rel=1e-12)


def test_real_imag_split():
    cov = FieldCovariance(TRI)
    phi = cauchy_kernel(0.3 + 1j)
    vr, vi, c = cov.real_imag(phi)
    m2 = cov.sesquilinear(phi, phi)
    assert abs(m2.imag) <= 1e-15
    assert vr + vi == pytest.approx(m2.real, rel=1e-13)
    assert vr >= 0 and vi >= 0 and c * c <= vr * vi * (1 + 1e-12)


@given(zs=st.lists(st.tuples(st.floats(-2, 2), st.floats(0.2, 2), st.booleans()),
                   min_size=5, max_size=5),
       mid=st.sampled_from(["band:l=0.3,m=1", "triangular:m=2", "parabolic:m=1"]))
def test_gram_hermitian_psd(zs, mid):
    funcs = [cauchy_kernel(complex(x, y if up else -y)) for x, y, up in zs]
    G = FieldCovariance(make_model(mid)).gram(funcs)
    assert np.allclose(G, G.conj().T, atol=1e-14)
    assert np.min(np.linalg.eigvalsh(G)) >= -1e-10


def test_fixed_point_t0_and_no_noise():
    z = 0.2 + 1j
    r0 = free_fixed_point(TRI, 0.0, z)
    assert np.array_equal(r0.C, 1 / (z - TRI.f(r0.x)))
    assert r0.iterations == 0
    quiet = replace(TRI, sigma2=lambda x, y: np.zeros(np.broadcast(x, y).shape))
    r1 = free_fixed_point(quiet, 0.3, z)
    assert np.max(np.abs(r1.C - r0.C)) <= 1e-15
    assert r1.S == pytest.approx(r0.S, abs=1e-15)


def test_fixed_point_derivative_is_B():
    z = 2j
    S0 = free_fixed_point(TRI, 0.0, z).S
    err = [abs((free_fixed_point(TRI, t, z).S - S0) / t - TRI_B_2I) for t in (1e-2, 1e-3)]
    # linear in t
    assert 0.08 <= err[1] / err[0] <= 0.12


def test_fixed_point_bounded_and_callable():
    z = 0.1 + 0.5j
    res = free_fixed_point(make_model("band:l=0.2"), 0.2, z)
    assert np.max(np.abs(res.C)) <= 1 / z.imag
    assert res(res.x[:5]) == pytest.approx(res.C[:5], abs=1e-12)
    with pytest.raises(ConvergenceError):
        free_fixed_point(TRI, 0.5, 0.5j)
    with pytest.raises(DomainError):
        free_fixed_point(TRI, 0.1, 1.0)


@pytest.fixture(scope="module")
def bump01():
    return bump(0.0, 1.0)


def test_hs_examples(bump01):
    e5 = abs(hs_reconstruct(bump01, 5, 0.0) - bump01(0.0))
    e1 = abs(hs_reconstruct(bump01, 1, 0.0) - bump01(0.0))
    assert e5 <= 1e-4
    assert e5 < e1
    assert abs(hs_reconstruct(bump01, 5, 1.1)) <= 1e-4


def test_hs_preconditions(bump01):
    with pytest.raises(PreconditionError):
        hs_reconstruct(bump01, 5, 0.0, chi=Cutoff(-0.5, 0.5))
    with pytest.raises(PreconditionError):
        hs_reconstruct(bump01, 5, 2.0)
    with pytest.raises(ParameterRangeError):
        hs_reconstruct(bump01, 6, 0.0)


def test_hs_strip_vanishing_rate(bump01):
    # leaving out |y| < delta changes the result by O(delta^(p+1)); p = 5
    full = hs_reconstruct(bump01, 5, 0.2)
    gaps = [abs(hs_reconstruct(bump01, 5, 0.2, strip=d) - full) for d in (0.08, 0.04, 0.02)]
    assert gaps[0] / gaps[1] >= 100
    assert gaps[1] / gaps[2] >= 100


def test_sobolev_zero():
    zero = polynomial([0.0], (-1, 1))
    assert sobolev_norm(zero, 1.0).value == 0.0


def test_sobolev_plancherel():
    g = gaussian(0.0, 1.0)
    # ||phi-hat||^2 = 2 pi ||phi||^2 = 2 pi sqrt(pi)
    assert sobolev_norm(g, 0.0).value == pytest.approx(math.sqrt(2 * math.pi ** 1.5), rel=1e-8)


def test_sobolev_s1_and_scaling():
    # phi-hat(k) = sqrt(2 pi) e^{-k^2/2}
    rp = math.sqrt(math.pi)
    g1 = sobolev_norm(gaussian(0.0, 1.0), 1.0).value
    assert g1 == pytest.approx(math.sqrt(2 * math.pi * (3 * rp + 4)), rel=1e-8)
    # psi(x) = phi(x/2): psi-hat(k) = 2 phi-hat(2k), so the weight becomes (1 + |u|)^2
    g2 = sobolev_norm(gaussian(0.0, 2.0), 1.0).value
    assert g2 == pytest.approx(math.sqrt(4 * math.pi * (1.5 * rp + 2)), rel=1e-2)


def test_sobolev_bump_tail_reported(bump01):
    res = sobolev_norm(bump01, 1.0, QuadratureConfig(tol=1e-3))
    assert res.value > 0 and 0 <= res.tail_bound <= 1e-3
