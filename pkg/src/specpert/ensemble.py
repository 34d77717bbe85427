"""Finite-n ensemble: diagonal D_n, variance-profiled Hermitian X_n, eps_n."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .models import LimitModel, make_model

LAWS = ("real-gaussian", "complex-gaussian", "symmetric-bernoulli")


@dataclass(frozen=True)
class SampleConfig:
    """n, eps_n = c * n**(-alpha), entry law and seed."""

    n: int
    c: float = 1.0
    alpha: float = 0.5
    law: str = "real-gaussian"
    seed: int = 0
    model: str | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not self.c > 0:
            raise ConfigError(f"c must be > 0, got {self.c!r}")
        if not self.alpha >= 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha!r}")
        if self.law not in LAWS:
            raise ConfigError(f"unknown entry law {self.law!r}; expected one of {LAWS}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def eps(self) -> float:
        return self.c * self.n ** (-self.alpha)

    def with_trial(self, trial: int) -> "SampleConfig":
        """Config for trial ``trial``: seeds are ``seed + trial``."""
        return replace(self, seed=(self.seed + trial) % 2**64)

    @classmethod
    def from_dict(cls, d: dict) -> "SampleConfig":
        known = {"n", "c", "alpha", "law", "seed", "model"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if "n" not in d:
            raise ConfigError("config needs 'n'")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "SampleConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass
class PerturbationSample:
    diag: np.ndarray
    X: np.ndarray
    config: SampleConfig
    model: LimitModel
    sigma2_n: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def eps(self) -> float:
        return self.config.eps

    def perturbed(self, eps: float | None = None, overwrite: bool = False) -> np.ndarray:
        """Dense D + eps X.  ``overwrite=True`` reuses the X buffer."""
        eps = self.eps if eps is None else eps
        M = self.X if overwrite else self.X.copy()
        M *= eps
        idx = np.arange(self.n)
        M[idx, idx] += self.diag
        if overwrite:
            self.X = None
        return M


def build_diagonal(model: LimitModel, n: int) -> np.ndarray:
    """lambda_n(i) = f(i/n), i = 1..n."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    return np.asarray(model.f(np.arange(1, n + 1) / n), dtype=float)


def _profile_block(model: LimitModel, rows: np.ndarray, n: int) -> np.ndarray:
    x = rows[:, None] / n
    y = np.arange(1, n + 1)[None, :] / n
    return np.asarray(model.sigma2(x, y), dtype=float)


def sample_perturbation(model: LimitModel | str, cfg: SampleConfig,
                        diag: np.ndarray | None = None,
                        sigma2_n: np.ndarray | None = None,
                        block: int = 1024) -> PerturbationSample:
    """Draw X_n with E|x_ij|^2 = sigma^2(i/n, j/n) off the diagonal.

    The upper triangle (diagonal included) is drawn and mirrored, so the
    result is exactly Hermitian.  ``diag`` and ``sigma2_n`` override the
    default lambda_n(i) = f(i/n) and sigma_n^2(i,j) = sigma^2(i/n, j/n).
    """
    if isinstance(model, str):
        model = make_model(model)
    n = cfg.n
    rng = np.random.default_rng(cfg.seed)

    if cfg.law == "real-gaussian":
        X = rng.standard_normal((n, n))
    elif cfg.law == "symmetric-bernoulli":
        X = rng.integers(0, 2, size=(n, n), dtype=np.int8).astype(np.float64)
        X *= 2.0
        X -= 1.0
    else:
        X = np.empty((n, n), dtype=np.complex128)
        X.real = rng.standard_normal((n, n))
        X.imag = rng.standard_normal((n, n))
        X *= np.sqrt(0.5)
        # diagonal entries are real with unit variance
        d = np.arange(n)
        X[d, d] = np.sqrt(2.0) * X[d, d].real

    if sigma2_n is not None:
        sigma2_n = np.asarray(sigma2_n, dtype=float)
        if sigma2_n.shape != (n, n) or np.any(sigma2_n < 0):
            raise ConfigError("sigma2_n must be a nonnegative n x n array")

    scale = 1.0 / np.sqrt(n)
    idx = np.arange(1, n + 1)
    d = np.arange(n)
    g_diag = X[d, d].real.copy()
    for b in range(0, n, block):
        e = min(n, b + block)
        prof = sigma2_n[b:e] if sigma2_n is not None else _profile_block(model, idx[b:e], n)
        X[b:e] *= np.sqrt(prof) * scale
    sd = np.sqrt(np.broadcast_to(np.asarray(model.sigma_d2(idx / n), dtype=float), (n,)))
    X[d, d] = sd * g_diag * scale
    _mirror_upper(X, block)
    D = build_diagonal(model, n) if diag is None else np.asarray(diag, dtype=float)
    if D.shape != (n,):
        raise ConfigError(f"diag must have length {n}")
    return PerturbationSample(diag=D, X=X, config=cfg, model=model, sigma2_n=sigma2_n)


def _mirror_upper(X: np.ndarray, block: int) -> None:
    """Overwrite the strict lower triangle with the conjugate of the upper one."""
    n = X.shape[0]
    cplx = np.iscomplexobj(X)
    for b in range(0, n, block):
        e = min(n, b + block)
        up = X[:b, b:e]
        X[b:e, :b] = up.conj().T if cplx else up.T
        blk = X[b:e, b:e]
        low = np.tril_indices(e - b, -1)
        blk[low] = blk.T.conj()[low] if cplx else blk.T[low]


def discrepancy_eta(model: LimitModel, sample: PerturbationSample) -> float:
    """max{n eps, 1} * sup_{i != j} (|sigma_n^2(i,j) - sigma^2(i/n,j/n)| + |lambda_n(i) - f(i/n)|)."""
    n = sample.n
    lam_err = np.abs(sample.diag - build_diagonal(model, n))
    if n == 1:
        # no off-diagonal pair; the sup over an empty set is taken as the eigenvalue term
        return float(max(n * sample.eps, 1.0) * lam_err[0])
    worst = 0.0
    idx = np.arange(1, n + 1)
    for b in range(0, n, 1024):
        e = min(n, b + 1024)
        if sample.sigma2_n is None:
            dev = np.zeros((e - b, n))
        else:
            dev = np.abs(sample.sigma2_n[b:e] - _profile_block(model, idx[b:e], n))
        r = np.arange(e - b)
        dev[r, r + b] = -np.inf
        worst = max(worst, float(np.max(dev.max(axis=1) + lam_err[b:e])))
    return float(max(n * sample.eps, 1.0) * worst)
