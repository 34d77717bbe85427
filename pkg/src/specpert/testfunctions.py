"""Test functions carrying their first six derivatives."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .errors import DomainError, ParameterRangeError

ORDER = 6


@dataclass(frozen=True)
class TestFunction:
    """phi together with phi', ..., phi^(6), all vectorized.

    ``kind`` is ``"generic"`` (compactly supported on ``support``, or at
    least only ever used on it) or ``"cauchy"`` for phi_z(x) = 1/(z - x).
    """

    __test__ = False  # keep pytest from collecting this class

    derivs: tuple
    support: tuple[float, float]
    kind: str = "generic"
    z: complex | None = None
    name: str = ""

    def __call__(self, x):
        return self.derivs[0](np.asarray(x, dtype=float))

    def d(self, k: int, x):
        if not 0 <= k < len(self.derivs):
            raise ParameterRangeError(f"derivative order {k} not available")
        return self.derivs[k](np.asarray(x, dtype=float))

    @property
    def order(self) -> int:
        return len(self.derivs) - 1

    def conj(self) -> "TestFunction":
        if self.kind == "cauchy":
            return cauchy_kernel(np.conj(self.z))
        ds = tuple(_conj_of(f) for f in self.derivs)
        return TestFunction(ds, self.support, self.kind, None, f"conj({self.name})")


def _conj_of(f):
    return lambda x: np.conj(f(x))


def cauchy_kernel(z: complex) -> TestFunction:
    """phi_z(x) = 1/(z - x); its k-th derivative is k!/(z - x)^(k+1)."""
    z = complex(z)
    if z.imag == 0:
        raise DomainError("phi_z needs a nonreal z")

    def make(k):
        c = math.factorial(k)
        return lambda x: c / (z - x) ** (k + 1)

    return TestFunction(tuple(make(k) for k in range(ORDER + 1)),
                        (-math.inf, math.inf), "cauchy", z, f"phi_z({z})")


def poisson_kernel(E: float, eta: float) -> TestFunction:
    """(1/pi) eta / ((x - E)^2 + eta^2) = -(1/pi) Im phi_{E + i eta}."""
    if not eta > 0:
        raise ParameterRangeError("eta must be > 0")
    ck = cauchy_kernel(complex(E, eta))
    ds = tuple((lambda f: (lambda x: -np.imag(f(x)) / np.pi))(f) for f in ck.derivs)
    return TestFunction(ds, (-math.inf, math.inf), "generic", None, f"poisson({E},{eta})")


def from_sympy(expr, var: sp.Symbol, support: tuple[float, float],
               name: str = "", inside=None) -> TestFunction:
    """Lambdify ``expr`` and its derivatives.  ``inside(x)`` masks the support."""
    ds = []
    e = expr
    for _ in range(ORDER + 1):
        ds.append(_masked(sp.lambdify(var, e, "numpy"), inside))
        e = sp.diff(e, var)
    return TestFunction(tuple(ds), tuple(map(float, support)), "generic", None,
                        name or str(expr))


def _masked(f, inside):
    if inside is None:
        return lambda x: np.asarray(f(x)) + np.zeros(np.shape(x))

    def g(x):
        x = np.asarray(x, dtype=float)
        m = inside(x)
        out = np.zeros(x.shape)
        if np.any(m):
            out[m] = f(x[m])
        return out
    return g


def bump(center: float = 0.0, radius: float = 1.0, height: float = 1.0) -> TestFunction:
    """height * exp(1 - 1/(1 - u^2)), u = (x - center)/radius, zero for |u| >= 1."""
    if not radius > 0:
        raise ParameterRangeError("radius must be > 0")
    x = sp.Symbol("x", real=True)
    u = (x - center) / radius
    expr = height * sp.exp(1 - 1 / (1 - u ** 2))
    lo, hi = center - radius, center + radius
    return from_sympy(expr, x, (lo, hi), f"bump({center},{radius})",
                      inside=lambda t: (t > lo) & (t < hi))


def polynomial(coeffs, support: tuple[float, float]) -> TestFunction:
    """sum_k coeffs[k] x^k, used on the window ``support``."""
    x = sp.Symbol("x", real=True)
    expr = sum(sp.nsimplify(c) * x ** k for k, c in enumerate(coeffs))
    return from_sympy(sp.sympify(expr), x, support, f"poly{tuple(coeffs)}")


def gaussian(mu: float = 0.0, s: float = 1.0, half_width: float = 12.0) -> TestFunction:
    """exp(-(x - mu)^2 / (2 s^2)), treated as supported on mu +- half_width * s."""
    x = sp.Symbol("x", real=True)
    expr = sp.exp(-(x - mu) ** 2 / (2 * s ** 2))
    return from_sympy(expr, x, (mu - half_width * s, mu + half_width * s), f"gauss({mu},{s})")


def derivative_mismatch(phi: TestFunction, grid, h: float = 1e-5) -> float:
    """Largest relative mismatch between central differences of phi^(k) and phi^(k+1)."""
    grid = np.asarray(grid, dtype=float)
    worst = 0.0
    for k in range(phi.order):
        fd = (phi.d(k, grid + h) - phi.d(k, grid - h)) / (2 * h)
        ex = phi.d(k + 1, grid)
        scale = max(np.max(np.abs(ex)), 1e-300)
        worst = max(worst, float(np.max(np.abs(fd - ex)) / scale))
    return worst
