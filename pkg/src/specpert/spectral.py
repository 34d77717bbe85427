"""Empirical spectral statistics and the resolvent expansion terms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigensolve import Spectrum
from .errors import DomainError, SizeError
from .testfunctions import TestFunction


def _check_z(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise DomainError("z must be nonreal")
    return z


def _values(spec) -> np.ndarray:
    return spec.values if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)


def stieltjes(spec, z):
    """(1/n) sum_i 1/(z - lambda_i); ``z`` may be an array."""
    z = _check_z(z)
    lam = _values(spec)
    out = np.array([np.mean(1.0 / (zz - lam)) for zz in z.ravel()]).reshape(z.shape)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class SignedSpectralDiff:
    """mu_n^eps - mu_n from the two spectra, with the eps used to build them."""

    base: Spectrum
    pert: Spectrum
    eps: float

    def __post_init__(self):
        if len(self.base) != len(self.pert):
            raise SizeError("spectra must have equal length")

    @property
    def n(self) -> int:
        return len(self.base)

    def total_mass(self) -> float:
        # (mu^eps - mu)(1) = (n - n)/n
        return (len(self.pert) - len(self.base)) / self.n


def delta_G(diff: SignedSpectralDiff, z):
    """Delta G_n(z) = (mu^eps - mu)(phi_z), summed as paired differences."""
    z = _check_z(z)
    a = np.sort(diff.pert.values)
    b = np.sort(diff.base.values)
    out = np.array([np.mean(1.0 / (zz - a) - 1.0 / (zz - b)) for zz in z.ravel()]).reshape(z.shape)
    return out if out.ndim else complex(out)


def counting_diff(diff: SignedSpectralDiff, s) -> np.ndarray:
    """(#{lambda^eps <= s} - #{lambda <= s}) / n, unscaled."""
    s = np.asarray(s, dtype=float)
    cp = np.searchsorted(np.sort(diff.pert.values), s, side="right")
    cb = np.searchsorted(np.sort(diff.base.values), s, side="right")
    return (cp - cb) / diff.n


def signed_cdf_diff(diff: SignedSpectralDiff, s):
    """eps^-2 (#{lambda^eps <= s} - #{lambda <= s}) / n."""
    raw = counting_diff(diff, s)
    if diff.eps == 0:
        if np.any(raw != 0):
            raise DomainError("eps = 0 but the spectra differ")
        out = raw.astype(float)
    else:
        out = raw / diff.eps ** 2
    return out if np.ndim(out) else float(out)


def _sum(v):
    if np.iscomplexobj(v):
        return complex(math.fsum(v.real), math.fsum(v.imag))
    return math.fsum(v)


def pair_test_function(diff: SignedSpectralDiff, phi: TestFunction):
    """(1/n) [sum phi(lambda^eps_i) - sum phi(lambda_i)]."""
    a = np.sort(diff.pert.values)
    b = np.sort(diff.base.values)
    return _sum(phi(a) - phi(b)) / diff.n


def cdf_pairing(diff: SignedSpectralDiff, phi: TestFunction):
    """(mu^eps - mu)(phi) rebuilt from the counting difference by summation by parts.

    The counting difference N is constant between consecutive atoms
    t_0 < t_1 < ..., so -int phi' N = -sum_k N(t_k) (phi(t_{k+1}) - phi(t_k)).
    """
    t = np.unique(np.concatenate([diff.base.values, diff.pert.values]))
    N = counting_diff(diff, t[:-1])
    v = phi(t)
    return -_sum(N * np.diff(v))


@dataclass(frozen=True)
class ResolventTerms:
    z: complex
    A: complex
    B: complex
    C: complex
    R: complex | None = None
    D4: complex | None = None

    def total(self) -> complex:
        return self.A + self.B + self.C + (self.R if self.R is not None else 0)


def _y_squared_over_r(X: np.ndarray, r: np.ndarray) -> np.ndarray:
    """X diag(r) X; real X uses two real products."""
    if np.isrealobj(X):
        P = X @ (r.real[:, None] * X)
        Q = X @ (r.imag[:, None] * X)
        return P + 1j * Q
    return X @ (r[:, None] * X)


def resolvent_terms(D, X, eps: float, z: complex, with_D4: bool = False,
                    with_R: bool = True) -> ResolventTerms:
    """Terms of (1/n)Tr[(z - D - eps X)^-1 - (z - D)^-1] = A + B + C + R.

    With G = (z - D)^-1 = diag(r) and Y = G X:
    A = (eps/n) Tr(YG), B = (eps^2/n) Tr(Y^2 G), C = (eps^3/n) Tr(Y^3 G),
    D4 = (eps^4/n) Tr(Y^4 G) and R = (eps^4/n) Tr(Y^4 (z - D - eps X)^-1),
    the last one from a single dense solve.
    """
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must be nonreal")
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    r = 1.0 / (z - D)
    dX = np.diag(X)
    A = eps / n * np.sum(r * r * dX)
    absX2 = (X * X.conj()).real if np.iscomplexobj(X) else X * X
    B = eps ** 2 / n * np.sum((r * r)[:, None] * absX2 * r[None, :])
    # Y^2 = diag(r) X diag(r) X
    Y2 = r[:, None] * _y_squared_over_r(X, r)
    # Tr(Y^3 G) = sum_ik (Y^2)_ik Y_ki r_i,   Y_ki = r_k X_ki
    C = eps ** 3 / n * np.sum(Y2 * (r[:, None] * X).T * r[:, None])
    D4 = None
    if with_D4:
        D4 = eps ** 4 / n * np.sum(Y2 * Y2.T * r[:, None])
    R = None
    if with_R:
        M = -eps * X.astype(complex)
        M[np.diag_indices(n)] += z - D
        # (Y^2 G^eps)^T = (G^eps)^T (Y^2)^T  ->  solve M^T W = (Y^2)^T
        W = np.linalg.solve(M.T, Y2.T)
        R = eps ** 4 / n * np.sum(Y2 * W)
    return ResolventTerms(z, complex(A), complex(B), complex(C),
                          None if R is None else complex(R),
                          None if D4 is None else complex(D4))
