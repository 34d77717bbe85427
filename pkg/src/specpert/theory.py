"""Deterministic side: Hilbert transform, F, B(z), the covariance of Z,
the free-convolution fixed point, Helffer-Sjostrand reconstruction and
Sobolev norms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ConvergenceError, DomainError, ParameterRangeError,
                     PreconditionError, ToleranceError)
from .models import LimitModel
from .quadrature import (QuadratureConfig, composite_rule, gauss_legendre, nodes_weights,
                         panel_edges)
from .testfunctions import TestFunction


# --- Hilbert transform and F -------------------------------------------------

def _pv_once(u, s, a, b, eta, breaks, q):
    """p.v. int_a^b u(t)/(s-t) dt for a < s < b with exclusion radius eta.

    Outside the ball the subtracted integrand (u(t) - u(s))/(s - t) is used
    and u(s) int dt/(s-t) = u(s) log((s-a)/(b-s)) is added back exactly.
    Inside the ball the symmetric pairing int_0^eta (u(s-r) - u(s+r))/r dr
    removes the singularity.
    """
    us = float(u(np.array([s]))[0])
    total = us * math.log((s - a) / (b - s))
    for lo, hi in ((a, s - eta), (s + eta, b)):
        if hi > lo:
            t, w = composite_rule(lo, hi, breaks, q)
            total += float(np.sum(w * (u(t) - us) / (s - t)))
    rb = [abs(p - s) for p in breaks if 0 < abs(p - s) < eta]
    r, w = composite_rule(0.0, eta, rb, q)
    total += float(np.sum(w * (u(s - r) - u(s + r)) / r))
    return total


def hilbert_pv_with_error(u, s: float, q: QuadratureConfig | None = None,
                          support: tuple[float, float] = (0.0, 1.0), breaks=()):
    """H[u](s) = p.v. int u(t)/(s - t) dt and an error estimate.

    ``u`` is vectorized and vanishes outside ``support``; ``breaks`` lists
    points where u is not smooth.  The exclusion radius is ``q.pv_eta``
    (shrunk near the support edges); the estimate is the gap between the
    results for eta and eta/2, which agree up to quadrature error.  The gap
    must be below ``q.tol`` relative to max(1, |H|).
    """
    q = q or QuadratureConfig()
    a, b = map(float, support)
    if not q.pv_eta < (b - a) / 4:
        raise ParameterRangeError("pv_eta must be below a quarter of the support width")
    breaks = tuple(p for p in breaks if a < p < b)
    if s < a or s > b:
        t, w = composite_rule(a, b, breaks, q)
        return float(np.sum(w * u(t) / (s - t))), 0.0
    if s == a or s == b:
        if float(u(np.array([s]))[0]) != 0.0:
            raise DomainError("p.v. integral diverges at a support edge where u != 0")
        inner = (a + 1e-300, b) if s == a else (a, b - 1e-300)
        t, w = composite_rule(*inner, breaks, q)
        return float(np.sum(w * u(t) / (s - t))), 0.0
    eta = min(q.pv_eta, 0.5 * (s - a), 0.5 * (b - s))
    for _ in range(q.max_refine + 1):
        v1 = _pv_once(u, s, a, b, eta, breaks, q)
        v2 = _pv_once(u, s, a, b, eta / 2, breaks, q)
        if abs(v1 - v2) <= q.tol * max(1.0, abs(v2)):
            return v2, abs(v1 - v2)
        q = q.refined()
    raise ToleranceError(f"p.v. integral at s={s} did not reach tol (gap {abs(v1 - v2):.3g})")


def hilbert_pv(u, s: float, q: QuadratureConfig | None = None,
               support: tuple[float, float] = (0.0, 1.0), breaks=()) -> float:
    return hilbert_pv_with_error(u, s, q, support, breaks)[0]


def F_numeric(model: LimitModel, s, q: QuadratureConfig | None = None):
    """F(s) = -rho(s) H[tau(s, .) rho](s); zero where rho vanishes."""
    q = q or QuadratureConfig()
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    a, b = model.support
    out = np.zeros(s_arr.shape)
    for i, si in enumerate(s_arr):
        rs = float(model.rho(np.array([si]))[0])
        if rs == 0.0 or not a < si < b:
            continue

        def u(t, si=si):
            return model.tau(si, t) * model.rho(t)

        br = set(model.singular_points) | set(model.tau_breaks(si))
        out[i] = -rs * hilbert_pv(u, si, q, (a, b), sorted(br))
    return out if np.ndim(s) else float(out[0])


# --- B(z) --------------------------------------------------------------------

def _dist_to_support(model: LimitModel, z: np.ndarray) -> np.ndarray:
    a, b = model.support
    dx = np.maximum(np.maximum(a - z.real, z.real - b), 0.0)
    return np.hypot(dx, z.imag)


def _refine_until(fn, q: QuadratureConfig, what: str):
    prev = fn(q)
    for _ in range(q.max_refine):
        q = q.refined()
        cur = fn(q)
        gap = float(np.max(np.abs(cur - prev)))
        if gap <= q.tol:
            return cur
        prev = cur
    raise ToleranceError(f"{what}: refinements still differ by {gap:.3g}")


def B_quadrature(model: LimitModel, z, q: QuadratureConfig | None = None):
    """int int sigma^2(x,y) / ((z - f(x))^2 (z - f(y))) dx dy.

    Iterated rule: outer composite Gauss-Legendre in x, inner rule in y split
    at the kinks of sigma^2(x, .) so discontinuous profiles (bands) are
    integrated exactly piecewise.
    """
    q = q or QuadratureConfig(tol=1e-9)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(_dist_to_support(model, zz) == 0):
        raise DomainError("z lies on the support")

    def once(qq):
        x, wx = composite_rule(0.0, 1.0, model.x_breaks, qq)
        fx = model.f(x)
        outer = wx[:, None] / (zz[None, :] - fx[:, None]) ** 2
        moving = model.sigma2_breaks(0.5) != ()
        if not moving:
            y, wy = x, wx
            kern = wy[:, None] / (zz[None, :] - fx[:, None])
            total = np.zeros(zz.shape, dtype=complex)
            for c in range(0, x.size, 512):
                S = model.sigma2(x[c:c + 512, None], y[None, :])
                total += np.sum(outer[c:c + 512] * (S @ kern), axis=0)
            return total
        total = np.zeros(zz.shape, dtype=complex)
        for i, xi in enumerate(x):
            br = set(model.x_breaks) | {p for p in model.sigma2_breaks(xi) if 0 < p < 1}
            y, wy = composite_rule(0.0, 1.0, sorted(br), qq)
            sw = model.sigma2(xi, y) * wy
            inner = sw @ (1.0 / (zz[None, :] - model.f(y)[:, None]))
            total += outer[i] * inner
        return total

    out = _refine_until(once, q, "B_quadrature")
    return out if np.ndim(z) else complex(out[0])


def B_via_F(F, z, q: QuadratureConfig | None = None,
            support: tuple[float, float] = (0.0, 1.0), breaks=()):
    """-int F(s) / (z - s)^2 ds over ``support``; ``F`` vectorized."""
    q = q or QuadratureConfig(tol=1e-9)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    a, b = support
    dx = np.maximum(np.maximum(a - zz.real, zz.real - b), 0.0)
    if np.any(np.hypot(dx, zz.imag) == 0):
        raise DomainError("z lies on the support of F")

    def once(qq):
        s, w = composite_rule(a, b, breaks, qq)
        Fs = np.asarray(F(s), dtype=float)
        return -np.sum((w * Fs)[:, None] / (zz[None, :] - s[:, None]) ** 2, axis=0)

    out = _refine_until(once, q, "B_via_F")
    return out if np.ndim(z) else complex(out[0])


def model_F(model: LimitModel, q: QuadratureConfig | None = None):
    """F_numeric of ``model`` as a vectorized callable."""
    return lambda s: F_numeric(model, s, q)


def F_breaks(model: LimitModel) -> tuple[float, ...]:
    """Points where F may fail to be smooth: singular points and tau kinks."""
    a, b = model.support
    pts = set(model.singular_points)
    for p in model.singular_points:
        pts.update(model.tau_breaks(p))
    return tuple(sorted(p for p in pts if a <= p <= b))


def B_from_model_F(model: LimitModel, z, q: QuadratureConfig | None = None,
                   qF: QuadratureConfig | None = None):
    """B(z) through -int F(s)/(z-s)^2 ds with F computed by F_numeric."""
    return B_via_F(model_F(model, qF), z, q, model.support, F_breaks(model))


# --- fluctuation field -------------------------------------------------------

@dataclass(frozen=True)
class FieldCovariance:
    """Covariances of the centered Gaussian field Z.

    ``bilinear(phi, psi)`` is E Z_phi Z_psi = int_0^1 sigma_d^2 phi'(f) psi'(f);
    the sesquilinear form uses Z-bar_psi = Z_{psi-bar}.
    """

    model: LimitModel
    q: QuadratureConfig | None = None

    def _rule(self):
        return composite_rule(0.0, 1.0, self.model.x_breaks, self.q)

    def bilinear(self, phi: TestFunction, psi: TestFunction) -> complex:
        x, w = self._rule()
        fx = self.model.f(x)
        sd2 = np.broadcast_to(self.model.sigma_d2(x), x.shape)
        return complex(np.sum(w * sd2 * phi.d(1, fx) * psi.d(1, fx)))

    def sesquilinear(self, phi: TestFunction, psi: TestFunction) -> complex:
        return self.bilinear(phi, psi.conj())

    def gram(self, funcs) -> np.ndarray:
        k = len(funcs)
        G = np.empty((k, k), dtype=complex)
        for i in range(k):
            for j in range(k):
                G[i, j] = self.sesquilinear(funcs[i], funcs[j])
        return G

    def real_imag(self, phi: TestFunction) -> tuple[float, float, float]:
        """(Var Re Z_phi, Var Im Z_phi, Cov(Re, Im))."""
        m2 = self.sesquilinear(phi, phi).real
        zz = self.bilinear(phi, phi)
        return (m2 + zz.real) / 2, (m2 - zz.real) / 2, zz.imag / 2


def z_covariance(model: LimitModel, phi: TestFunction, psi: TestFunction,
                 q: QuadratureConfig | None = None) -> complex:
    """E Z_phi Z_psi (bilinear, no conjugation)."""
    return FieldCovariance(model, q).bilinear(phi, psi)


# --- free-convolution fixed point --------------------------------------------

def _panel_interp(edges: np.ndarray, order: int, y: np.ndarray):
    """Panel indices and Lagrange weights so that g(y) ~ sum_k L[:, k] g(nodes[idx, k])."""
    xg, _ = gauss_legendre(order)
    idx = np.clip(np.searchsorted(edges, y, side="right") - 1, 0, edges.size - 2)
    a = edges[idx]
    b = edges[idx + 1]
    u = (2 * y - a - b) / (b - a)
    # barycentric weights of Gauss-Legendre nodes
    bw = np.array([1.0 / np.prod([xg[j] - xg[k] for k in range(order) if k != j])
                   for j in range(order)])
    diff = u[:, None] - xg[None, :]
    exact = diff == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = bw[None, :] / diff
        L = t / t.sum(axis=1, keepdims=True)
    rows = np.any(exact, axis=1)
    L[rows] = exact[rows].astype(float)
    return idx, L


@dataclass(frozen=True)
class FixedPointResult:
    x: np.ndarray
    C: np.ndarray
    S: complex
    iterations: int
    edges: np.ndarray
    order: int

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx, L = _panel_interp(self.edges, self.order, x)
        vals = self.C.reshape(-1, self.order)[idx]
        return np.sum(L * vals, axis=1)


def _nystrom_kernel(model: LimitModel, edges, order, x, q):
    """K with (K c)_i ~ int sigma^2(x_i, y) c(y) dy, c interpolated panelwise."""
    N = x.size
    K = np.zeros((N, N))
    if model.sigma2_breaks(0.5) == ():
        _, w = composite_rule(0.0, 1.0, model.x_breaks, q)
        return model.sigma2(x[:, None], x[None, :]) * w[None, :]
    for i, xi in enumerate(x):
        br = set(edges.tolist()) | {p for p in model.sigma2_breaks(xi) if 0 < p < 1}
        e = np.array(sorted(br))
        y, wy = nodes_weights(e, order)
        sw = model.sigma2(xi, y) * wy
        idx, L = _panel_interp(edges, order, y)
        cols = idx[:, None] * order + np.arange(order)[None, :]
        np.add.at(K[i], cols.ravel(), (sw[:, None] * L).ravel())
    return K


def free_fixed_point(model: LimitModel, t: float, z: complex,
                     q: QuadratureConfig | None = None,
                     max_iter: int = 500) -> FixedPointResult:
    """Solve C = 1/(z - f(x) - t int sigma^2(x,y) C(y) dy) by iteration from t = 0.

    Returns the nodal solution (callable by panel interpolation) and
    S = int_0^1 C dx.
    """
    q = q or QuadratureConfig(tol=1e-14)
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must be nonreal")
    if t < 0:
        raise ParameterRangeError("t must be >= 0")
    if abs(t) * model.sigma2_max / z.imag ** 2 >= 1:
        raise ConvergenceError(
            f"t={t} outside the contraction region t*max(sigma^2)/Im(z)^2 < 1")
    edges = panel_edges(0.0, 1.0, model.x_breaks, q.panels, q.grade_levels, q.grade_ratio)
    order = q.nodes_per_panel
    x, w = nodes_weights(edges, order)
    base = z - model.f(x)
    C = 1.0 / base
    if t == 0:
        return FixedPointResult(x, C, complex(np.sum(w * C)), 0, edges, order)
    K = _nystrom_kernel(model, edges, order, x, q)
    bound = 1.0 / abs(z.imag)
    for it in range(1, max_iter + 1):
        new = 1.0 / (base - t * (K @ C))
        if np.max(np.abs(new)) > bound * (1 + 1e-9):
            raise ConvergenceError(f"iterate left the bound 1/|Im z| at step {it}")
        change = float(np.max(np.abs(new - C)))
        C = new
        if change <= q.tol:
            return FixedPointResult(x, C, complex(np.sum(w * C)), it, edges, order)
    raise ConvergenceError(f"no convergence after {max_iter} iterations (last change {change:.3g})")


# --- Helffer-Sjostrand --------------------------------------------------------

@dataclass(frozen=True)
class Cutoff:
    """chi(x + iy) = chi_x(x) chi_y(y); chi_x = 1 on [lo, hi], chi_y = 1 for |y| <= height.

    Both factors fall to 0 smoothly over ``ramp`` (x) and ``height`` (y).
    """

    lo: float
    hi: float
    height: float = 1.0
    ramp: float = 0.5

    def _step(self, u):
        # smooth 1 -> 0 on u in [0, 1]
        u = np.clip(u, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            a = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1 - u, 1)), 0.0)
            b = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1)), 0.0)
        return a / (a + b)

    def _dstep(self, u, h=1e-6):
        return (self._step(u + h) - self._step(u - h)) / (2 * h)

    def chi_y(self, y):
        return self._step((np.abs(y) - self.height) / self.height)

    def dchi_y(self, y):
        return np.sign(y) * self._dstep((np.abs(y) - self.height) / self.height) / self.height

    def chi_x(self, x):
        d = np.maximum(self.lo - x, x - self.hi)
        return self._step(d / self.ramp)

    def is_one(self, x) -> bool:
        return self.lo <= x <= self.hi


def hs_reconstruct(phi: TestFunction, p: int, lam: float, chi: Cutoff | None = None,
                   q: QuadratureConfig | None = None, strip: float = 0.0) -> float:
    """phi(lam) from (1/pi) int int dbar(phi_p chi)(z) / (lam - z) d^2z.

    phi_p(x+iy) = sum_{k<=p} phi^(k)(x)(iy)^k/k!, so where chi = 1 the
    integrand is (iy)^p phi^(p+1)(x) / (2 p!) / (lam - z).  ``strip`` > 0
    leaves out the band |y| < strip (used to measure how fast that band's
    contribution vanishes).
    """
    if not 0 <= p <= phi.order - 1:
        raise ParameterRangeError(f"p must lie in [0, {phi.order - 1}]")
    a, b = phi.support
    if not (math.isfinite(a) and math.isfinite(b)):
        raise PreconditionError("reconstruction needs a compactly supported phi")
    chi = chi or Cutoff(a - 0.25, b + 0.25, height=0.1)
    if not (chi.is_one(lam) and chi.lo <= a and b <= chi.hi):
        raise PreconditionError("cutoff must equal 1 at lam and on supp(phi)")
    # ungraded on purpose: the p-dependence of the error comes from how smooth
    # the integrand is at z = lam
    q = q or QuadratureConfig(panels=64, nodes_per_panel=16, grade_levels=0)
    H = chi.height
    # x: supp(phi) split at lam; phi_p vanishes off supp(phi), so chi_x plays no role
    xb = [lam] if a < lam < b else []
    x, wx = composite_rule(a, b, xb, q)
    yb = [strip] if strip > 0 else []
    y, wy = composite_rule(strip, 2 * H, [H, *yb], q)
    # both half planes: the integrand at -y is the one at y with (iy)^k -> (-iy)^k
    X = x[:, None]
    Y = y[None, :]
    derivs = [phi.d(k, x)[:, None] for k in range(p + 2)]
    total = 0.0
    for sgn in (1.0, -1.0):
        iy = 1j * sgn * Y
        # dbar phi_p = (iy)^p phi^(p+1) / (2 p!)
        dbar = (iy ** p) * derivs[p + 1] / (2 * math.factorial(p))
        chiy = chi.chi_y(Y)
        phip = sum(derivs[k] * iy ** k / math.factorial(k) for k in range(p + 1))
        # dbar chi = (i/2) d chi/dy for chi depending on y only (here)
        dbar_total = chiy * dbar + phip * (0.5j * sgn * chi.dchi_y(Y))
        integrand = dbar_total / (lam - (X + 1j * sgn * Y))
        total += np.sum(wx[:, None] * wy[None, :] * integrand)
    return float((total / math.pi).real)


# --- Sobolev norm -------------------------------------------------------------

@dataclass(frozen=True)
class SobolevResult:
    value: float
    tail_bound: float
    k_max: float


def _fourier_rule(a: float, b: float, k_max: float, order: int, factor: int = 1):
    # panels short enough that e^{ikx} is resolved up to |k| = k_max
    panels = factor * max(4, int(math.ceil((b - a) * max(k_max, 1.0) / 8)))
    return nodes_weights(np.linspace(a, b, panels + 1), order)


def fourier_transform(phi: TestFunction, k, q: QuadratureConfig | None = None,
                      factor: int = 1):
    """phi-hat(k) = int e^{ikx} phi(x) dx over supp(phi)."""
    q = q or QuadratureConfig()
    a, b = phi.support
    k = np.atleast_1d(np.asarray(k, dtype=float))
    kmax = float(np.max(np.abs(k))) if k.size else 0.0
    x, w = _fourier_rule(a, b, kmax, q.nodes_per_panel, factor)
    wf = w * phi(x)
    out = np.empty(k.shape, dtype=complex)
    for c in range(0, k.size, 512):
        out[c:c + 512] = np.exp(1j * k[c:c + 512, None] * x[None, :]) @ wf
    return out


def sobolev_norm(phi: TestFunction, s: float, q: QuadratureConfig | None = None,
                 k_max: float | None = None) -> SobolevResult:
    """|| (1 + 2|k|)^s phi-hat(k) ||_{L^2(dk)} on |k| <= k_max plus a tail bound.

    The tail uses |phi-hat(k)| <= ||phi^(6)||_1 / |k|^6, so it is finite for
    s < 5.5.  The truncated integral is computed twice (k and x rules
    doubled) and the two must agree within ``q.tol``.
    """
    if not s >= 0:
        raise ParameterRangeError("s must be >= 0")
    q = q or QuadratureConfig(tol=1e-8)
    a, b = phi.support
    if not (math.isfinite(a) and math.isfinite(b)):
        raise PreconditionError("sobolev_norm needs a compactly supported phi")
    x, w = composite_rule(a, b, (), q)
    l1 = float(np.sum(w * np.abs(phi.d(6, x))))
    if l1 == 0.0 and float(np.sum(w * np.abs(phi(x)))) == 0.0:
        return SobolevResult(0.0, 0.0, 0.0)
    if s >= 5.5:
        raise ToleranceError("tail bound needs s < 5.5")

    def tail(K):
        # 2 int_K^inf (3k)^{2s} l1^2 k^{-12} dk, using 1 + 2k <= 3k for k >= 1
        return 2 * 9.0 ** s * l1 ** 2 * K ** (2 * s - 11) / (11 - 2 * s)

    if k_max is None:
        K = 8.0
        while tail(K) > q.tol and K < 1e5:
            K *= 1.25
    else:
        K = float(k_max)
    half = max(abs(a), abs(b))

    def truncated(factor):
        # phi-hat oscillates in k on the scale 1/max|x|
        panels = factor * max(8, int(math.ceil(K * half / 8)))
        kk, wk = nodes_weights(np.linspace(0.0, K, panels + 1), q.nodes_per_panel)
        ks = np.concatenate([-kk, kk])
        ws = np.concatenate([wk, wk])
        ft = fourier_transform(phi, ks, q, factor)
        return float(np.sum(ws * (1 + 2 * np.abs(ks)) ** (2 * s) * np.abs(ft) ** 2))

    v1, v2 = truncated(1), truncated(2)
    value = math.sqrt(v2)
    if abs(math.sqrt(v1) - value) > q.tol:
        raise ToleranceError(f"Fourier quadrature unresolved (gap {abs(math.sqrt(v1) - value):.3g})")
    tb = math.sqrt(v2 + tail(max(K, 1.0))) - value
    if tb > q.tol:
        raise ToleranceError(f"Fourier tail bound {tb:.3g} exceeds tol {q.tol:g}")
    return SobolevResult(value, tb, K)
