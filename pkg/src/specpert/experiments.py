"""Monte Carlo drivers: regimes, figure datasets, local law, sub-regime order probe."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .eigensolve import Spectrum, eig_hermitian, eig_sym
from .ensemble import SampleConfig, sample_perturbation
from .errors import ConfigError, NumericError, SizeError
from .models import LimitModel, closed_form_F, density_cdf, make_model, parse_example_id
from .spectral import (SignedSpectralDiff, delta_G, resolvent_terms,
                       signed_cdf_diff)
from .testfunctions import cauchy_kernel
from .theory import B_from_model_F, FieldCovariance

REGIMES = ("perturbative", "critical", "semi", "semi-fine")


def regime_of(alpha: float) -> str:
    if alpha > 1:
        return "perturbative"
    if alpha == 1:
        return "critical"
    if alpha > 0:
        return "semi"
    raise ConfigError("alpha must be > 0")


@dataclass(frozen=True)
class RegimeSpec:
    regime: str
    model: str
    n_list: tuple[int, ...]
    c: float = 1.0
    alpha: float = 0.5
    trials: int = 100
    z_grid: tuple[complex, ...] = (1j,)
    seed: int = 0
    law: str = "real-gaussian"
    se_cap: float | None = None  # cells whose variance s.e. exceeds this are flagged

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"unknown regime {self.regime!r}")
        a = self.alpha
        ok = {
            "perturbative": a > 1,
            "critical": a == 1,
            "semi": 0 < a < 1,
            "semi-fine": 1 / 3 < a < 1,
        }[self.regime]
        if not ok:
            raise ConfigError(f"regime {self.regime!r} is inconsistent with alpha={a}")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if not self.n_list or any(int(n) != n or n < 1 for n in self.n_list):
            raise ConfigError("n_list must hold positive integers")
        if any(complex(z).imag == 0 for z in self.z_grid):
            raise ConfigError("z_grid points must be nonreal")
        parse_example_id(self.model)
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "z_grid", tuple(complex(z) for z in self.z_grid))

    @classmethod
    def from_dict(cls, d: dict) -> "RegimeSpec":
        d = dict(d)
        if "z_grid" in d:
            d["z_grid"] = tuple(_parse_complex(z) for z in d["z_grid"])
        if "n_list" in d:
            d["n_list"] = tuple(d["n_list"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "RegimeSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON: {exc}") from None


def _parse_complex(z):
    if isinstance(z, (list, tuple)) and len(z) == 2:
        return complex(z[0], z[1])
    if isinstance(z, str):
        return complex(z.replace(" ", "").replace("i", "j"))
    return complex(z)


@dataclass
class ExperimentReport:
    kind: str
    params: dict
    cells: list = field(default_factory=list)
    runtime: float = 0.0

    def to_json(self, **kw) -> str:
        return json.dumps(_jsonable(asdict(self)), **kw)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, np.generic):
        return _jsonable(o.item())
    return o


# --- shared sampling ----------------------------------------------------------

def base_spectrum(diag: np.ndarray) -> Spectrum:
    # D_n is diagonal: its spectrum is its sorted diagonal
    return Spectrum(np.sort(diag))


def sample_spectra(model: LimitModel, cfg: SampleConfig, eps: float | None = None):
    """One draw: (SignedSpectralDiff, sample).  The perturbed matrix reuses X's buffer."""
    s = sample_perturbation(model, cfg)
    eps = cfg.eps if eps is None else eps
    base = base_spectrum(s.diag)
    if eps == 0:
        return SignedSpectralDiff(base, base, 0.0), s
    M = s.perturbed(eps, overwrite=True)
    pert = eig_hermitian(M) if np.iscomplexobj(M) else eig_sym(M, overwrite=True)
    return SignedSpectralDiff(base, pert, eps), s


def fsum_c(values) -> complex:
    v = np.asarray(values, dtype=complex)
    return complex(math.fsum(v.real), math.fsum(v.imag))


def _moments(x: np.ndarray) -> dict:
    """Mean, variance and their standard errors for a real sample."""
    N = x.size
    mean = math.fsum(x) / N
    d = x - mean
    var = math.fsum(d * d) / (N - 1) if N > 1 else float("nan")
    m4 = math.fsum(d ** 4) / N
    se_mean = math.sqrt(var / N) if N > 1 else float("nan")
    se_var = math.sqrt(max(m4 - var * var, 0.0) / N) if N > 1 else float("nan")
    return {"mean": mean, "var": var, "se_mean": se_mean, "se_var": se_var}


def regime_statistic(regime: str, dG: np.ndarray, n: int, eps: float, B: np.ndarray):
    if regime in ("perturbative", "critical"):
        return n / eps * dG
    if regime == "semi":
        return dG / eps ** 2
    return n / eps * (dG - eps ** 2 * B)


def regime_theory(regime: str, n: int, eps: float, B: complex, var: tuple):
    """(mean, Var Re, Var Im) the regime's statistic should approach."""
    vr, vi, _ = var
    if regime == "perturbative":
        return 0j, vr, vi
    if regime == "critical":
        return n * eps * B, vr, vi
    if regime == "semi":
        return B, vr / (n * eps) ** 2, vi / (n * eps) ** 2
    return 0j, vr, vi


def run_regime(spec: RegimeSpec, keep_samples: bool = False) -> ExperimentReport:
    t0 = time.time()
    report = ExperimentReport("regime", _jsonable(asdict(spec)))
    if spec.trials == 0:
        return report
    model = make_model(spec.model)
    zs = np.array(spec.z_grid)
    B = np.atleast_1d(B_from_model_F(model, zs))
    cov = FieldCovariance(model)
    var = [cov.real_imag(cauchy_kernel(z)) for z in zs]
    for n in spec.n_list:
        base_cfg = SampleConfig(n=n, c=spec.c, alpha=spec.alpha, law=spec.law, seed=spec.seed)
        eps = base_cfg.eps
        stats_ = np.full((spec.trials, zs.size), np.nan, dtype=complex)
        errors = []
        for k in range(spec.trials):
            cfg = base_cfg.with_trial(k)
            try:
                diff, _ = sample_spectra(model, cfg)
                dG = np.atleast_1d(delta_G(diff, zs))
                stats_[k] = regime_statistic(spec.regime, dG, n, eps, B)
            except NumericError as exc:
                errors.append({"trial": k, "seed": cfg.seed, "error": str(exc)})
        ok = ~np.isnan(stats_[:, 0].real)
        for j, z in enumerate(zs):
            v = stats_[ok, j]
            mean_t, vr_t, vi_t = regime_theory(spec.regime, n, eps, complex(B[j]), var[j])
            re, im = _moments(v.real), _moments(v.imag)
            cell = {
                "n": n, "z": complex(z), "eps": eps, "trials": int(ok.sum()),
                "mean": complex(re["mean"], im["mean"]),
                "se_mean": [re["se_mean"], im["se_mean"]],
                "var_re": re["var"], "var_im": im["var"],
                "se_var": [re["se_var"], im["se_var"]],
                "theory_mean": mean_t, "theory_var_re": vr_t, "theory_var_im": vi_t,
                "B": complex(B[j]), "errors": errors,
                "flagged": bool(spec.se_cap is not None
                                and not max(re["se_var"], im["se_var"]) <= spec.se_cap),
            }
            if keep_samples:
                cell["samples"] = v
            report.cells.append(cell)
    report.runtime = time.time() - t0
    return report


# --- figures ------------------------------------------------------------------

FIGURE_DEFAULTS = {
    "fig1": "band:l=0.2,m=1",
    "fig2": "triangular:m=1",
    "fig3": "triangular:m=0",
    "fig4": "parabolic:m=1",
}


@dataclass
class FigureData:
    figure: str
    model: str
    n: int
    alpha: float
    eps: float
    seed: int
    curves: dict  # name -> (columns, rows)

    def csv(self, name: str) -> str:
        cols, rows = self.curves[name]
        lines = [",".join(cols)]
        lines += [",".join(f"{v:.12g}" for v in r) for r in rows]
        return "\n".join(lines) + "\n"


def figure_dataset(figure: str, n: int = 10_000, alpha: float = 0.4, seed: int = 0,
                   model: str | None = None, eps: float | None = None,
                   s_points: int = 401, bins: int = 100, e_points: int = 81,
                   diff: SignedSpectralDiff | None = None) -> FigureData:
    """Empirical and theory columns of one figure for a single sampled matrix.

    fig1/fig2/fig4: CDF of eps^-2 (mu^eps - mu) against F on ``s_points``
    points of the support; fig2/fig4 also get a ``density`` curve comparing
    the histogram of the perturbed eigenvalues (``bins`` bins) with the bin
    averages of rho + eps^2 F'.  fig3: Im of the Stieltjes transform of
    eps^-2 (mu^eps - mu) at E + i against Im B(E + i), E on ``e_points``
    points of the support widened by 1.
    """
    if figure not in FIGURE_DEFAULTS:
        raise ConfigError(f"unknown figure {figure!r}")
    mid = model or FIGURE_DEFAULTS[figure]
    lm = make_model(mid)
    cfg = SampleConfig(n=n, alpha=alpha, seed=seed)
    if diff is None:
        diff, _ = sample_spectra(lm, cfg, eps)
    e = diff.eps
    a, b = lm.support
    ex = parse_example_id(mid)
    curves = {}
    if figure in ("fig1", "fig2", "fig4"):
        s = np.linspace(a, b, s_points)
        emp = signed_cdf_diff(diff, s)
        th = closed_form_F(ex, s)
        curves["cdf"] = (("s", "empirical", "theory"), np.column_stack([s, emp, th]))
    if figure in ("fig2", "fig4"):
        edges = np.linspace(a, b, bins + 1)
        h = edges[1] - edges[0]
        counts, _ = np.histogram(diff.pert.values, bins=edges)
        emp = counts / (diff.n * h)
        cdf = np.array([density_cdf(lm, t) for t in edges])
        Fe = closed_form_F(ex, edges)
        th = (np.diff(cdf) + e ** 2 * np.diff(Fe)) / h
        centers = 0.5 * (edges[1:] + edges[:-1])
        curves["density"] = (("s", "empirical", "theory"), np.column_stack([centers, emp, th]))
    if figure == "fig3":
        E = np.linspace(a - 1, b + 1, e_points)
        zs = E + 1j
        dG = np.atleast_1d(delta_G(diff, zs))
        emp = (dG / e ** 2).imag if e else np.zeros(E.size)
        th = np.atleast_1d(B_from_model_F(lm, zs)).imag
        curves["stieltjes"] = (("E", "empirical", "theory"), np.column_stack([E, emp, th]))
    return FigureData(figure, mid, diff.n, alpha, e, seed, curves)


def sup_error(fig: FigureData, curve: str, lo: float | None = None, hi: float | None = None) -> float:
    """sup |empirical - theory| over rows with lo <= first column <= hi."""
    _, rows = fig.curves[curve]
    m = np.ones(len(rows), dtype=bool)
    if lo is not None:
        m &= rows[:, 0] >= lo
    if hi is not None:
        m &= rows[:, 0] <= hi
    return float(np.max(np.abs(rows[m, 1] - rows[m, 2])))


# --- local law ----------------------------------------------------------------

def local_law_allowed(alpha: float, beta: float, eta_n: float = 0.0) -> bool:
    """Im z_n = n^-beta against max{(n eps)^-1/2, eps^(2/5)} (eta_n = 0)."""
    return beta < min((1 - alpha) / 2, 2 * alpha / 5)


def local_law_probe(model: str, n_list, alpha: float, betas, trials: int = 20,
                    seed: int = 0, E: float | None = None) -> ExperimentReport:
    """|eps^-2 Delta G(z_n) - B(z_n)| with z_n = E + i n^-beta, averaged over trials.

    One eigensolve per (n, trial) serves every beta.
    """
    t0 = time.time()
    lm = make_model(model)
    a, b = lm.support
    E = a + 0.35 * (b - a) if E is None else E
    betas = tuple(float(x) for x in betas)
    report = ExperimentReport("locallaw", {"model": model, "n_list": list(n_list), "alpha": alpha,
                                           "betas": list(betas), "trials": trials,
                                           "seed": seed, "E": E})
    dev = {bt: [] for bt in betas}
    for n in n_list:
        zs = np.array([E + 1j * n ** (-bt) for bt in betas])
        B = np.atleast_1d(B_from_model_F(lm, zs))
        vals = np.empty((trials, len(betas)))
        for k in range(trials):
            cfg = SampleConfig(n=n, alpha=alpha, seed=seed).with_trial(k)
            diff, _ = sample_spectra(lm, cfg)
            dG = np.atleast_1d(delta_G(diff, zs))
            vals[k] = np.abs(dG / diff.eps ** 2 - B)
        for j, bt in enumerate(betas):
            mo = _moments(vals[:, j]) if trials > 1 else {"mean": float(vals[0, j]), "se_mean": float("nan")}
            dev[bt].append(mo["mean"])
            report.cells.append({"n": n, "beta": bt, "z": complex(zs[j]), "mean_abs_dev": mo["mean"],
                                 "se": mo["se_mean"], "trials": trials})
    summary = {}
    for bt in betas:
        y = np.log(dev[bt])
        slope = float(np.polyfit(np.log(n_list), y, 1)[0]) if len(n_list) > 1 else float("nan")
        summary[bt] = {"allowed": local_law_allowed(alpha, bt), "slope": slope,
                       "decays": bool(slope < 0 and dev[bt][-1] < dev[bt][0])}
    report.params["summary"] = summary
    report.runtime = time.time() - t0
    return report


# --- sub-regime order probe ---------------------------------------------------

def unit_eps_terms(model: LimitModel, n: int, z: complex, seed: int, law: str = "real-gaussian"):
    """(A, D4) at eps = 1; A scales as eps and D4 as eps^4."""
    s = sample_perturbation(model, SampleConfig(n=n, alpha=0.0, law=law, seed=seed))
    t = resolvent_terms(s.diag, s.X, 1.0, z, with_D4=True, with_R=False)
    return t.A, t.D4


def subregime_probe(model: str, n_list, alphas, trials: int = 50, z: complex = 1j,
                    seed: int = 0) -> ExperimentReport:
    """Mean |D4| and |A| per (n, alpha) and the log-log slopes against eps."""
    t0 = time.time()
    lm = make_model(model)
    alphas = tuple(float(a) for a in alphas)
    report = ExperimentReport("subregime", {"model": model, "n_list": list(n_list),
                                            "alphas": list(alphas), "trials": trials,
                                            "z": complex(z), "seed": seed})
    unit = {}
    for n in n_list:
        A1 = np.empty(trials)
        D1 = np.empty(trials)
        for k in range(trials):
            a1, d1 = unit_eps_terms(lm, n, z, (seed + k) % 2**64)
            A1[k], D1[k] = abs(a1), abs(d1)
        unit[n] = (math.fsum(A1) / trials, math.fsum(D1) / trials)
        for al in alphas:
            eps = n ** (-al)
            mA, mD = eps * unit[n][0], eps ** 4 * unit[n][1]
            report.cells.append({"n": n, "alpha": al, "eps": eps, "mean_abs_A": mA,
                                 "mean_abs_D4": mD, "ratio": mD / mA if mA else math.inf})
    slopes = {}
    if len(n_list) > 1:
        for al in alphas:
            eps = np.array([n ** (-al) for n in n_list])
            d4 = np.array([eps[i] ** 4 * unit[n][1] for i, n in enumerate(n_list)])
            aa = np.array([eps[i] * unit[n][0] for i, n in enumerate(n_list)])
            slopes[al] = {"D4_vs_eps": float(np.polyfit(np.log(eps), np.log(d4), 1)[0]),
                          "A_vs_eps": float(np.polyfit(np.log(eps), np.log(aa), 1)[0])}
    report.params["slopes"] = slopes
    report.params["crossover_alpha"] = {n: crossover_alpha(n, *unit[n]) for n in n_list}
    report.runtime = time.time() - t0
    return report


def crossover_alpha(n: int, mean_A1: float, mean_D1: float) -> float:
    """alpha where eps^4 mean|D4(1)| = eps mean|A(1)| with eps = n^-alpha."""
    return math.log(mean_D1 / mean_A1) / (3 * math.log(n))


# --- normality ----------------------------------------------------------------

def _normality(x: np.ndarray) -> dict:
    sd = np.std(x, ddof=1)
    zx = (x - np.mean(x)) / sd if sd > 0 else np.zeros_like(x)
    ks = stats.kstest(zx, "norm").statistic
    return {"ks": float(ks), "skew": float(stats.skew(zx)) if sd > 0 else 0.0,
            "excess_kurtosis": float(stats.kurtosis(zx)) if sd > 0 else 0.0}


def clt_normality_check(samples, min_samples: int = 200) -> dict:
    """KS distance to N(0,1) of the standardized real and imaginary parts."""
    x = np.asarray(samples)
    if x.size < min_samples:
        raise SizeError(f"need at least {min_samples} samples, got {x.size}")
    parts = {"re": _normality(np.real(x).astype(float))}
    if np.iscomplexobj(x):
        parts["im"] = _normality(np.imag(x).astype(float))
    ks = max(p["ks"] for p in parts.values())
    crit = 1.36 / math.sqrt(x.size)
    return {**parts, "n": int(x.size), "ks_max": ks, "ks_critical_5pct": crit,
            "normal": bool(ks < crit)}


__all__ = [
    "RegimeSpec", "ExperimentReport", "run_regime", "figure_dataset", "FigureData",
    "local_law_probe", "subregime_probe", "clt_normality_check", "crossover_alpha",
    "sample_spectra", "base_spectrum", "sup_error", "local_law_allowed", "regime_of",
]
