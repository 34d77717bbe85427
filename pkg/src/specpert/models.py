"""Limit models (f, rho, sigma, sigma_d, tau) and the closed-form catalog."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, ModelError, ParameterRangeError
from .quadrature import QuadratureConfig, composite_rule


def _no_breaks(_):
    return ()


@dataclass(frozen=True)
class LimitModel:
    """Limiting data of an ensemble family.

    All callables are vectorized over numpy arrays.  ``sigma2(x, y)`` is the
    off-diagonal variance profile on [0,1]^2, ``sigma_d2(x)`` the diagonal
    one, ``f`` the eigenvalue profile, ``rho`` the density of the push-forward
    of the uniform law by ``f``, and ``tau`` the kernel with
    ``sigma2(x, y) == tau(f(x), f(y))``.

    The ``*_breaks`` fields only help quadrature: points where the
    corresponding function is not smooth.
    """

    name: str
    f: Callable
    rho: Callable
    sigma2: Callable
    sigma_d2: Callable
    tau: Callable
    support: tuple[float, float]
    holder: tuple[float, float, float] = (0.05, 1.0, 0.0)
    singular_points: tuple[float, ...] = ()
    x_breaks: tuple[float, ...] = ()
    tau_breaks: Callable = field(default=_no_breaks)
    sigma2_breaks: Callable = field(default=_no_breaks)
    sigma2_max: float = 1.0

    @property
    def value_breaks(self) -> tuple[float, ...]:
        a, b = self.support
        return tuple(sorted({a, b, *self.singular_points}))

    def check(self, grid: int = 41, q: QuadratureConfig | None = None) -> None:
        """Raise ModelError if symmetry, compatibility or normalization fail."""
        x = (np.arange(grid) + 0.5) / grid
        X, Y = np.meshgrid(x, x, indexing="ij")
        s2 = self.sigma2(X, Y)
        if np.max(np.abs(s2 - s2.T)) > 0:
            raise ModelError(f"{self.name}: sigma2 is not symmetric")
        off = ~np.eye(grid, dtype=bool)
        t = self.tau(self.f(X), self.f(Y))
        if np.max(np.abs(t - s2)[off]) > 1e-12:
            raise ModelError(f"{self.name}: tau(f(x), f(y)) != sigma2(x, y)")
        mass = density_mass(self, q)
        if abs(mass - 1.0) > 1e-8:
            raise ModelError(f"{self.name}: rho integrates to {mass!r}, not 1")


def density_mass(model: LimitModel, q: QuadratureConfig | None = None) -> float:
    a, b = model.support
    x, w = composite_rule(a, b, model.singular_points, q)
    return float(np.sum(w * model.rho(x)))


@dataclass(frozen=True)
class ExampleId:
    """Catalog entry: ``kind`` in {band, triangular, parabolic}."""

    kind: str
    m: float = 1.0
    ell: float = 0.2

    def __post_init__(self):
        if self.kind not in ("band", "triangular", "parabolic"):
            raise ParameterRangeError(f"unknown example kind {self.kind!r}")
        if not self.m >= 0:
            raise ParameterRangeError(f"m must be >= 0, got {self.m}")
        if self.kind == "band" and not 0 < self.ell <= 1:
            raise ParameterRangeError(f"band half-width must lie in (0, 1], got {self.ell}")

    def __str__(self):
        if self.kind == "band":
            return f"band:l={self.ell:g},m={self.m:g}"
        return f"{self.kind}:m={self.m:g}"


_ALIASES = {
    "band": "band", "uniformband": "band", "uniform-band": "band",
    "triangular": "triangular", "triangularwigner": "triangular", "tri": "triangular",
    "parabolic": "parabolic", "parabolicwigner": "parabolic", "para": "parabolic",
}


def parse_example_id(text: str | ExampleId) -> ExampleId:
    """Parse ``"band:l=0.2,m=1"``, ``"triangular:m=0"``, ``"parabolic"``."""
    if isinstance(text, ExampleId):
        return text
    m = re.fullmatch(r"\s*([A-Za-z\-]+)\s*(?::(.*))?", text)
    if not m:
        raise ConfigError(f"cannot parse model id {text!r}")
    kind = _ALIASES.get(m.group(1).lower())
    if kind is None:
        raise ConfigError(f"unknown model {m.group(1)!r}")
    kw = {}
    for part in filter(None, (m.group(2) or "").split(",")):
        key, _, val = part.partition("=")
        key = key.strip().lower()
        key = {"l": "ell", "ell": "ell", "m": "m"}.get(key)
        if key is None or not val:
            raise ConfigError(f"bad parameter {part!r} in model id {text!r}")
        try:
            kw[key] = float(val)
        except ValueError:
            raise ConfigError(f"bad value in {part!r}") from None
    try:
        return ExampleId(kind, **kw)
    except ParameterRangeError as exc:
        raise ConfigError(str(exc)) from None


# --- catalog -----------------------------------------------------------------

def _tri_quantile(x):
    x = np.asarray(x, dtype=float)
    lo = -1.0 + np.sqrt(2.0 * np.clip(x, 0.0, 0.5))
    hi = 1.0 - np.sqrt(2.0 * np.clip(1.0 - x, 0.0, 0.5))
    return np.where(x <= 0.5, lo, hi)


def _para_quantile(x):
    # root in [-1, 1] of t^3 - 3t + (4x - 2) = 0
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return 2.0 * np.cos((np.arccos(1.0 - 2.0 * x) - 2.0 * np.pi) / 3.0)


def _indicator(s, a, b):
    s = np.asarray(s, dtype=float)
    return ((s >= a) & (s <= b)).astype(float)


def make_model(example: ExampleId | str) -> LimitModel:
    """Build the LimitModel of a catalog example."""
    ex = parse_example_id(example)
    m2 = ex.m ** 2

    def sigma_d2(x):
        return np.full(np.shape(x), m2)

    if ex.kind == "band":
        ell = ex.ell

        def sigma2(x, y):
            return (np.abs(np.asarray(x) - np.asarray(y)) <= ell).astype(float)

        model = LimitModel(
            name=str(ex),
            f=lambda x: np.asarray(x, dtype=float),
            rho=lambda s: ((np.asarray(s) >= 0) & (np.asarray(s) <= 1)).astype(float),
            sigma2=sigma2,
            sigma_d2=sigma_d2,
            tau=sigma2,
            support=(0.0, 1.0),
            singular_points=tuple(sorted({0.0, 1.0, *(p for p in (ell, 1 - ell) if 0 < p < 1)})),
            x_breaks=tuple(sorted({0.0, 1.0, *(p for p in (ell, 1 - ell) if 0 < p < 1)})),
            tau_breaks=lambda s: (s - ell, s + ell),
            sigma2_breaks=lambda x: (x - ell, x + ell),
        )
    elif ex.kind == "triangular":
        model = LimitModel(
            name=str(ex),
            f=_tri_quantile,
            rho=lambda s: np.clip(1.0 - np.abs(np.asarray(s, dtype=float)), 0.0, None),
            sigma2=lambda x, y: np.ones(np.broadcast(x, y).shape),
            sigma_d2=sigma_d2,
            tau=lambda s, t: np.ones(np.broadcast(s, t).shape),
            support=(-1.0, 1.0),
            singular_points=(-1.0, 0.0, 1.0),
            x_breaks=(0.0, 0.5, 1.0),
        )
    else:
        model = LimitModel(
            name=str(ex),
            f=_para_quantile,
            rho=lambda s: 0.75 * np.clip(1.0 - np.asarray(s, dtype=float) ** 2, 0.0, None),
            sigma2=lambda x, y: np.ones(np.broadcast(x, y).shape),
            sigma_d2=sigma_d2,
            tau=lambda s, t: np.ones(np.broadcast(s, t).shape),
            support=(-1.0, 1.0),
            singular_points=(-1.0, 1.0),
            x_breaks=(0.0, 1.0),
        )
    eta0 = 0.05
    C = lipschitz_estimate(model, eta0)
    return _replace(model, holder=(eta0, 1.0, C))


def _replace(model: LimitModel, **kw) -> LimitModel:
    from dataclasses import replace
    return replace(model, **kw)


def lipschitz_estimate(model: LimitModel, eta0: float, grid: int = 401) -> float:
    """Largest observed |tau(s,t)rho(t) - tau(s,s)rho(s)| / |t-s| for |t-s| <= eta0.

    Pairs straddling a singular point of the model are skipped; the result only
    feeds diagnostics.
    """
    a, b = model.support
    s = np.linspace(a, b, grid)[1:-1]
    offs = np.linspace(-eta0, eta0, 41)
    offs = offs[offs != 0]
    S = s[:, None]
    T = S + offs[None, :]
    vals = model.tau(S, T) * model.rho(T) - model.tau(S, S) * model.rho(S)
    ratio = np.abs(vals) / np.abs(T - S)
    bps = np.array(sorted(set(model.singular_points)
                          | {p for x in s for p in model.tau_breaks(x)}), dtype=float) \
        if model.tau_breaks is not _no_breaks else np.array(model.singular_points, dtype=float)
    lo = np.minimum(S, T)
    hi = np.maximum(S, T)
    ok = np.ones_like(ratio, dtype=bool)
    for p in bps:
        ok &= ~((lo <= p) & (p <= hi))
    # band-type kernels move their breaks with s
    for i, x in enumerate(s):
        for p in model.tau_breaks(x):
            ok[i] &= ~((lo[i] <= p) & (p <= hi[i]))
    return float(np.max(ratio[ok])) if np.any(ok) else 0.0


def closed_form_F(example: ExampleId | str, s):
    """Closed-form deterministic correction F for the catalog examples.

    Uses ``0 log 0 = 0``; vanishes outside the support.  Band sign convention:
    F(s) = log[(l ^ (1-s)) / (l ^ s)] on (0, 1), i.e. F = -rho H[tau rho]
    with H[u](s) = p.v. int u(t)/(s-t) dt.
    """
    ex = parse_example_id(example)
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if ex.kind == "band":
            inside = (s > 0) & (s < 1)
            ss = np.where(inside, s, 0.5)
            val = np.log(np.minimum(ex.ell, 1 - ss) / np.minimum(ex.ell, ss))
            out = np.where(inside, val, 0.0)
        elif ex.kind == "triangular":
            inside = (s >= -1) & (s <= 1)
            ss = np.where(inside, s, 0.0)
            out = np.where(
                inside,
                (1 - np.abs(ss)) * (_xlogx(1 - ss) - _xlogx(1 + ss) + 2 * _xlogx(np.abs(ss))
                                    * np.sign(ss)),
                0.0,
            )
        else:
            inside = (s >= -1) & (s <= 1)
            ss = np.where(inside, s, 0.0)
            w = 1 - ss ** 2
            # (1-s^2) log|(s-1)/(s+1)| with the removable endpoint singularities
            lg = np.where(w > 0, w * np.log(np.abs((ss - 1) / np.where(ss == -1, 1, ss + 1))), 0.0)
            out = np.where(inside, -(9.0 / 16.0) * w * (2 * ss - lg), 0.0)
    return out if out.ndim else float(out)


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def density_cdf(model: LimitModel, t, q: QuadratureConfig | None = None) -> float:
    a, b = model.support
    t = float(t)
    if t <= a:
        return 0.0
    if t >= b:
        return density_mass(model, q)
    x, w = composite_rule(a, t, model.singular_points, q)
    return float(np.sum(w * model.rho(x)))


def eval_quantile_f(model: LimitModel, x: float, q: QuadratureConfig | None = None) -> float:
    """inf{t : int_{-inf}^t rho = x}, by root finding on the numerical CDF."""
    if not 0.0 <= x <= 1.0:
        raise ParameterRangeError(f"x must lie in [0, 1], got {x}")
    mass = density_mass(model, q)
    if abs(mass - 1.0) > 1e-8:
        raise ModelError(f"{model.name}: rho integrates to {mass!r}, not 1")
    a, b = model.support
    if x == 0.0:
        return a
    if x == 1.0:
        return b
    return float(brentq(lambda t: density_cdf(model, t, q) - x, a, b, xtol=1e-14, rtol=1e-15))
