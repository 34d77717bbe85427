"""Eigenvalues of real symmetric and complex Hermitian matrices.

The dense path is a blocked Householder reduction to tridiagonal form
(trailing updates done as matrix products) followed by implicit QL with a
Wilkinson shift on the tridiagonal matrix.  Only eigenvalues are computed.

``eig_oracle_small`` is an independent exact-arithmetic route (characteristic
polynomial by cofactor expansion, Sturm bisection) used to cross-check the
dense path on small matrices.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numba
import numpy as np

from .errors import DomainError, NumericError, SizeError

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n


def _fingerprint(M: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(M).tobytes()).hexdigest()[:12]


def tridiagonalize(A: np.ndarray, block: int = 48, overwrite: bool = False):
    """Reduce a real symmetric matrix to tridiagonal form.

    Returns ``(d, e)``: the diagonal (length n) and sub-diagonal (length n-1)
    of ``Q^T A Q``.  Only the lower triangle of ``A`` is trusted; the working
    copy is symmetrized from it.  With ``overwrite=True`` the input buffer is
    reused as workspace and destroyed.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if overwrite and A.dtype == np.float64 and A.flags.c_contiguous:
        W = A
    else:
        W = np.array(A, dtype=np.float64, order="C", copy=True)
    _symmetrize_from_lower(W)

    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    if n == 1:
        d[0] = W[0, 0]
        return d, e

    for j in range(0, n - 1, block):
        nb = min(block, n - 1 - j)
        m = n - j
        V = np.zeros((m, nb))
        Wp = np.zeros((m, nb))
        for i in range(nb):
            k = j + i
            col = W[k:, k].copy()
            if i > 0:
                # bring column k up to date with the reflectors of this panel
                col -= V[i:, :i] @ Wp[i, :i] + Wp[i:, :i] @ V[i, :i]
                W[k:, k] = col
            d[k] = col[0]
            x = col[1:]
            alpha = x[0]
            sigma = np.linalg.norm(x[1:]) if x.shape[0] > 1 else 0.0
            if sigma == 0.0:
                e[k] = alpha
                continue  # identity reflector; V/W columns stay zero
            beta = -np.copysign(np.hypot(alpha, sigma), alpha)
            tau = (beta - alpha) / beta
            v = x / (alpha - beta)
            v[0] = 1.0
            e[k] = beta
            w = W[k + 1:, k + 1:] @ v
            if i > 0:
                Vt = V[i + 1:, :i]
                Wt = Wp[i + 1:, :i]
                w -= Vt @ (Wt.T @ v) + Wt @ (Vt.T @ v)
            w *= tau
            w -= (0.5 * tau * (w @ v)) * v
            V[i + 1:, i] = v
            Wp[i + 1:, i] = w
        s = j + nb
        if s < n:
            L = np.hstack([V[nb:], Wp[nb:]])
            Rm = np.hstack([Wp[nb:], V[nb:]])
            rows = n - s
            step = 1024
            for r0 in range(0, rows, step):
                r1 = min(rows, r0 + step)
                W[s + r0:s + r1, s:] -= L[r0:r1] @ Rm.T
    d[n - 1] = W[n - 1, n - 1]
    return d, e


def _symmetrize_from_lower(W: np.ndarray, step: int = 512) -> None:
    n = W.shape[0]
    for r0 in range(0, n, step):
        r1 = min(n, r0 + step)
        # upper part of rows r0:r1 copied from the lower part of columns r0:r1
        blk = W[r0:r1, r0:].copy()
        low = W[r0:, r0:r1].T
        iu = np.triu(np.ones((r1 - r0, n - r0), dtype=bool), 1)
        blk[iu] = low[iu]
        W[r0:r1, r0:] = blk


@numba.njit(cache=True)
def _ql_implicit(d, e, max_sweeps):
    """Implicit-shift QL on a symmetric tridiagonal matrix, eigenvalues only.

    ``e[i]`` couples ``d[i]`` and ``d[i+1]``; ``e`` has length n with e[n-1]=0.
    Returns the index of a non-converged eigenvalue, or -1 on success.
    """
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_sweeps:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tridiagonal_eigenvalues(d, e, max_sweeps: int = 50) -> np.ndarray:
    d = np.array(d, dtype=np.float64, copy=True)
    ee = np.zeros(d.shape[0])
    ee[: d.shape[0] - 1] = e
    bad = _ql_implicit(d, ee, max_sweeps)
    if bad >= 0:
        raise NumericError(
            f"QL iteration did not converge for eigenvalue {bad} after {max_sweeps} sweeps "
            f"(tridiagonal fingerprint {_fingerprint(np.concatenate([d, ee]))})"
        )
    d.sort()
    return d


def eig_sym(M, overwrite: bool = False, check: bool = True) -> Spectrum:
    """Ascending eigenvalues of a real symmetric matrix.

    Asymmetry up to ``1e-12`` (relative to the largest entry) is tolerated and
    removed by using the lower triangle.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    if np.iscomplexobj(M):
        if np.any(M.imag != 0):
            raise DomainError("eig_sym needs a real matrix; use eig_hermitian")
        M = M.real
    n = M.shape[0]
    if n == 0:
        return Spectrum(np.empty(0))
    if check:
        scale = max(1.0, float(np.max(np.abs(M))))
        if _max_asymmetry(M) > 1e-12 * scale:
            raise DomainError("matrix is not symmetric within 1e-12")
    d, e = tridiagonalize(M, overwrite=overwrite)
    try:
        vals = tridiagonal_eigenvalues(d, e)
    except NumericError as exc:
        raise NumericError(f"{exc}; matrix fingerprint {_fingerprint(M)}") from None
    return Spectrum(vals)


def _max_asymmetry(M: np.ndarray, step: int = 512) -> float:
    n = M.shape[0]
    worst = 0.0
    for r0 in range(0, n, step):
        r1 = min(n, r0 + step)
        diff = M[r0:r1, :] - M[:, r0:r1].T
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def eig_hermitian(M) -> Spectrum:
    """Ascending eigenvalues of a complex Hermitian matrix.

    Uses the real embedding [[A, -B], [B, A]] of M = A + iB, whose spectrum is
    that of M with every eigenvalue doubled.
    """
    M = np.asarray(M)
    if not np.iscomplexobj(M) or not np.any(M.imag != 0):
        return eig_sym(np.real(M))
    n = M.shape[0]
    scale = max(1.0, float(np.max(np.abs(M))))
    if float(np.max(np.abs(M - M.conj().T))) > 1e-12 * scale:
        raise DomainError("matrix is not Hermitian within 1e-12")
    A = M.real
    B = M.imag
    E = np.empty((2 * n, 2 * n))
    E[:n, :n] = A
    E[n:, n:] = A
    E[:n, n:] = -B
    E[n:, :n] = B
    doubled = eig_sym(E, overwrite=True, check=False).values
    lo, hi = doubled[0::2], doubled[1::2]
    gap = np.max(np.abs(hi - lo)) if n else 0.0
    spread = max(1.0, float(np.max(np.abs(doubled))))
    if gap > 1e-8 * spread:
        raise NumericError(
            f"embedded spectrum not paired (max gap {gap:.3g}); fingerprint {_fingerprint(M)}"
        )
    return Spectrum(lo)


# --- exact small-matrix oracle -------------------------------------------------

def _cadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _padd(p, q):
    out = [(Fraction(0), Fraction(0))] * max(len(p), len(q))
    for i, c in enumerate(p):
        out[i] = _cadd(out[i], c)
    for i, c in enumerate(q):
        out[i] = _cadd(out[i], c)
    return out


def _pmul(p, q):
    out = [(Fraction(0), Fraction(0))] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = _cadd(out[i + j], _cmul(a, b))
    return out


def _charpoly_exact(M) -> list[Fraction]:
    """Coefficients (lowest degree first) of det(M - x I), computed exactly."""
    n = M.shape[0]
    Mc = np.asarray(M, dtype=complex)
    # polynomial entries of M - xI
    ent = [
        [
            [(Fraction(float(Mc[i, j].real)), Fraction(float(Mc[i, j].imag)))]
            + ([(Fraction(-1), Fraction(0))] if i == j else [])
            for j in range(n)
        ]
        for i in range(n)
    ]

    @lru_cache(maxsize=None)
    def minor(row: int, cols: frozenset):
        # Laplace expansion along `row` over the remaining columns
        if row == n:
            return ((Fraction(1), Fraction(0)),)
        total = [(Fraction(0), Fraction(0))]
        sign = 1
        for c in sorted(cols):
            sub = minor(row + 1, cols - {c})
            term = _pmul(ent[row][c], list(sub))
            if sign < 0:
                term = [(-a, -b) for a, b in term]
            total = _padd(total, term)
            sign = -sign
        return tuple(total)

    coeffs = minor(0, frozenset(range(n)))
    if any(c[1] != 0 for c in coeffs):
        raise DomainError("characteristic polynomial is not real; input is not Hermitian")
    return [c[0] for c in coeffs]


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _deriv(p):
    return _trim([i * p[i] for i in range(1, len(p))] or [Fraction(0)])


def _divmod(a, b):
    a = _trim(a)
    b = _trim(b)
    if len(a) < len(b):
        return [Fraction(0)], a
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    r = list(a)
    lead = b[-1]
    for k in range(len(a) - len(b), -1, -1):
        coef = r[k + len(b) - 1] / lead
        q[k] = coef
        for j, bj in enumerate(b):
            r[k + j] -= coef * bj
    r = _trim(r[: len(b) - 1] or [Fraction(0)])
    return _trim(q), r


def _gcd(a, b):
    a, b = _trim(a), _trim(b)
    while not (len(b) == 1 and b[0] == 0):
        _, r = _divmod(a, b)
        a, b = b, r
    return [c / a[-1] for c in a]


def _is_const(p):
    return len(_trim(p)) == 1


def _squarefree_parts(p):
    """Yun's algorithm: p = c * prod_k q_k^k with q_k square-free and coprime."""
    parts = []
    a = _gcd(p, _deriv(p))
    b, _ = _divmod(p, a)
    c, _ = _divmod(_deriv(p), a)
    d = _padd_f(c, [-x for x in _deriv(b)])
    k = 1
    while not _is_const(b):
        a = _gcd(b, d)
        b, _ = _divmod(b, a)
        c, _ = _divmod(d, a)
        d = _padd_f(c, [-x for x in _deriv(b)])
        if not _is_const(a):
            parts.append((a, k))
        k += 1
    return parts


def _padd_f(p, q):
    out = [Fraction(0)] * max(len(p), len(q))
    for i, c in enumerate(p):
        out[i] += c
    for i, c in enumerate(q):
        out[i] += c
    return _trim(out)


def _peval(p, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sturm_chain(p):
    chain = [_trim(p), _deriv(p)]
    while not _is_const(chain[-1]):
        _, r = _divmod(chain[-2], chain[-1])
        r = [-c for c in r]
        if len(r) == 1 and r[0] == 0:
            break
        chain.append(r)
    return chain


def _variations(chain, x: Fraction) -> int:
    signs = [s for s in (_peval(q, x) for q in chain) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def _isolate_roots(p, lo: Fraction, hi: Fraction, tol: float) -> list[float]:
    chain = _sturm_chain(p)
    roots = []

    def count(a, b):
        return _variations(chain, a) - _variations(chain, b)

    stack = [(lo, hi, count(lo, hi))]
    while stack:
        a, b, k = stack.pop()
        if k == 0:
            continue
        if k == 1 or (b - a) < Fraction(tol):
            # a root of multiplicity-free p in (a, b]; bisect down to adjacent floats
            while True:
                mid = Fraction((float(a) + float(b)) / 2)
                if not (a < mid < b):
                    break
                if _peval(p, mid) == 0:
                    a = b = mid
                    break
                if count(a, mid) > 0:
                    b = mid
                else:
                    a = mid
            roots.extend([float(b) if _peval(p, b) == 0 else float((a + b) / 2)] * k)
            continue
        mid = Fraction((float(a) + float(b)) / 2)
        stack.append((a, mid, count(a, mid)))
        stack.append((mid, b, count(mid, b)))
    return roots


def eig_oracle_small(M, tol: float = 1e-14) -> Spectrum:
    """Eigenvalues of a small symmetric/Hermitian matrix via exact arithmetic.

    The characteristic polynomial is expanded exactly over the rationals, split
    into square-free factors, and each factor's real roots are isolated by
    bisection on Sturm-sequence sign changes.  Independent of ``eig_sym``.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n > 8:
        raise SizeError(f"eig_oracle_small supports n <= 8, got {n}")
    p = _charpoly_exact(M)
    # Gershgorin-type bound on the spectrum
    bound = Fraction(float(np.max(np.sum(np.abs(M), axis=1)))) + 1
    lo, hi = -bound, bound
    vals = []
    for q, mult in _squarefree_parts(p):
        for r in _isolate_roots(q, lo, hi, tol):
            vals.extend([r] * mult)
    if len(vals) != n:
        raise NumericError(f"oracle found {len(vals)} roots for n={n}")
    return Spectrum(np.sort(np.array(vals)))
