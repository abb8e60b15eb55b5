"""Jacobi coefficients of a discrete measure.

Two independent routes compute the recurrence coefficients: the
Stieltjes procedure (fast path, with one reorthogonalization pass) and a
Hankel-determinant oracle evaluated in extended precision.  A hand-rolled
implicit-shift QL solver extracts orthogonal-polynomial roots from the
tridiagonal matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from . import kernels
from .measures import ContinuousRef, DiscreteMeasure, quantile_discretize

BREAKDOWN_REL_TOL = 1e-12
# Hankel determinants decay like exp(-Theta(k^2)); past k ~ 10 even
# extended precision cannot rescue the conditioning of the moment map.
HANKEL_MAX_K = 10
HANKEL_DPS = 60

QL_REL_TOL = 1e-14
QL_MAX_SWEEPS = 50


class DegenerateHankelError(ArithmeticError):
    """A Hankel determinant came out <= 0: fewer support points than requested."""


class ConditioningGuardError(ValueError):
    """Requested Hankel order beyond the conditioning guard."""


@dataclass(frozen=True)
class JacobiMatrix:
    """Symmetric tridiagonal: diagonal alpha (k,), off-diagonal beta (k-1,) all positive."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        if alpha.ndim != 1 or beta.ndim != 1:
            raise ValueError("alpha and beta must be 1-d")
        if alpha.size == 0:
            raise ValueError("empty Jacobi matrix")
        if beta.size != alpha.size - 1:
            raise ValueError("beta must have one fewer entry than alpha")
        if np.any(beta <= 0):
            raise ValueError("all beta must be positive (zero beta means truncation)")

    @property
    def k(self) -> int:
        return int(self.alpha.size)

    @property
    def norm_bound(self) -> float:
        """Cheap operator-norm bound max|alpha| + 2 max beta."""
        b = float(self.beta.max()) if self.beta.size else 0.0
        return float(np.abs(self.alpha).max()) + 2.0 * b

    def to_dense(self) -> np.ndarray:
        j = np.diag(self.alpha)
        if self.beta.size:
            j += np.diag(self.beta, 1) + np.diag(self.beta, -1)
        return j

    def truncate(self, k: int) -> "JacobiMatrix":
        if not 1 <= k <= self.k:
            raise ValueError("truncation size out of range")
        return JacobiMatrix(self.alpha[:k].copy(), self.beta[: k - 1].copy())


@dataclass(frozen=True)
class HankelData:
    """Moment-matrix determinants D_0..D_k (extended precision, reported as floats)."""

    dets: np.ndarray

    @property
    def k(self) -> int:
        return int(self.dets.size - 1)


def stieltjes(m: DiscreteMeasure, k: int, return_table: bool = False):
    """Jacobi matrix of the measure by the discrete Stieltjes recurrence.

    One reorthogonalization pass against the stored table of polynomial
    values keeps the computed polynomials orthogonal to working accuracy.
    Truncates when beta_j falls below 1e-12 * max|support| (which is
    guaranteed to happen at j = number of atoms).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lam = m.support
    w = m.weights
    tol = BREAKDOWN_REL_TOL * max(m.norm, 1e-300)
    alpha = np.zeros(k)
    beta = np.zeros(k)
    ptable = np.zeros((lam.size, k))
    count, truncated = kernels.stieltjes_fill(lam, w, alpha, beta, ptable, tol)
    count = int(count)
    jac = JacobiMatrix(alpha[:count].copy(), beta[: count - 1].copy())
    if return_table:
        return jac, ptable[:, :count].copy()
    return jac


def _mp_moments(m: DiscreteMeasure, order: int) -> list:
    lam = [mpmath.mpf(x) for x in m.support]
    w = [mpmath.mpf(x) for x in m.weights]
    moms = []
    cur = list(w)
    moms.append(mpmath.fsum(cur))
    for _ in range(order):
        cur = [c * x for c, x in zip(cur, lam)]
        moms.append(mpmath.fsum(cur))
    return moms


def hankel_dets(m: DiscreteMeasure, k: int) -> HankelData:
    """Determinants D_0..D_k of the moment matrices, in extended precision."""
    if k > HANKEL_MAX_K:
        raise ConditioningGuardError(f"Hankel route limited to k <= {HANKEL_MAX_K}")
    if k < 0:
        raise ValueError("k must be >= 0")
    with mpmath.workdps(HANKEL_DPS):
        moms = _mp_moments(m, 2 * k)
        dets = []
        for j in range(k + 1):
            mat = mpmath.matrix(j + 1, j + 1)
            for r in range(j + 1):
                for c in range(j + 1):
                    mat[r, c] = moms[r + c]
            dets.append(mpmath.det(mat))
        out = np.array([float(d) for d in dets])
    return HankelData(out)


def jacobi_from_hankel(m: DiscreteMeasure, k: int) -> JacobiMatrix:
    """Independent oracle for :func:`stieltjes` via Hankel determinants.

    beta_j = sqrt(D_{j-1} D_{j+1}) / D_j, and alpha_j comes from the
    determinantal coefficients of p_j: alpha_j = sum a_r a_s m_{r+s+1}.
    Everything is evaluated at 60 significant digits.  Raises when some
    D_j <= 0, which signals fewer support points than requested.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > HANKEL_MAX_K:
        raise ConditioningGuardError(f"Hankel route limited to k <= {HANKEL_MAX_K}")
    if m.natoms < k:
        raise DegenerateHankelError(
            f"measure has {m.natoms} atoms; J_{k} needs at least {k}"
        )
    with mpmath.workdps(HANKEL_DPS):
        moms = _mp_moments(m, 2 * k)

        def det_hankel(j: int):
            if j < 0:
                return mpmath.mpf(1)
            mat = mpmath.matrix(j + 1, j + 1)
            for r in range(j + 1):
                for c in range(j + 1):
                    mat[r, c] = moms[r + c]
            return mpmath.det(mat)

        # J_k only needs D_{-1}..D_{k-1}; D_j <= 0 signals fewer support
        # points than requested
        dets = [det_hankel(j) for j in range(-1, k)]
        for j, d in enumerate(dets[1:]):
            if d <= 0:
                raise DegenerateHankelError(f"D_{j} <= 0: degenerate moment matrix")

        def dget(j: int):
            return dets[j + 1]

        beta = [mpmath.sqrt(dget(j - 1) * dget(j + 1)) / dget(j) for j in range(k - 1)]

        def poly_coeffs(j: int) -> list:
            # coefficients a_0..a_j of p_j from the moment matrix with its
            # last row replaced by the monomial row (cofactor expansion)
            if j == 0:
                return [1 / mpmath.sqrt(dget(-1) * dget(0))]
            scale = 1 / mpmath.sqrt(dget(j - 1) * dget(j))
            coeffs = []
            for i in range(j + 1):
                mat = mpmath.matrix(j, j)
                for r in range(j):
                    cc = 0
                    for c in range(j + 1):
                        if c == i:
                            continue
                        mat[r, cc] = moms[r + c]
                        cc += 1
                sign = mpmath.mpf(-1) ** (j + i)
                coeffs.append(sign * mpmath.det(mat) * scale)
            return coeffs

        alpha = []
        for j in range(k):
            a = poly_coeffs(j)
            acc = mpmath.mpf(0)
            for r in range(j + 1):
                for s in range(j + 1):
                    acc += a[r] * a[s] * moms[r + s + 1]
            alpha.append(acc)

        alpha_f = np.array([float(x) for x in alpha])
        beta_f = np.array([float(x) for x in beta])
    return JacobiMatrix(alpha_f, beta_f)


def leading_coeffs(j: JacobiMatrix) -> np.ndarray:
    """Leading coefficients gamma_0..gamma_K: gamma_i = 1 / prod_{l<i} beta_l."""
    out = np.empty(j.beta.size + 1)
    out[0] = 1.0
    if j.beta.size:
        out[1:] = 1.0 / np.cumprod(j.beta)
    return out


def eval_orthonormal(j: JacobiMatrix, x) -> np.ndarray:
    """Values p_0(x)..p_K(x) of the orthonormal polynomials (K = len(beta)).

    Three-term recurrence: p_{i+1} = ((x - alpha_i) p_i - beta_{i-1} p_{i-1}) / beta_i.
    Returns shape (len(x), K+1); p_0 = 1 since the measure is normalized.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nterms = j.beta.size + 1
    out = np.empty((x.size, nterms))
    out[:, 0] = 1.0
    for i in range(j.beta.size):
        prev = out[:, i - 1] if i > 0 else 0.0
        bprev = j.beta[i - 1] if i > 0 else 0.0
        out[:, i + 1] = ((x - j.alpha[i]) * out[:, i] - bprev * prev) / j.beta[i]
    return out


def tridiag_eigh(j: JacobiMatrix, vectors: bool = False):
    """Eigenvalues (ascending) of the Jacobi matrix by implicit-shift QL.

    With ``vectors`` also returns the orthonormal eigenvector columns.
    """
    k = j.k
    d = j.alpha.copy()
    e = np.zeros(k)
    e[: k - 1] = j.beta
    z = np.eye(k) if vectors else np.zeros((1, 1))
    thresh = QL_REL_TOL * max(j.norm_bound, 1e-300)
    status = kernels.tridiag_ql(d, e, z, thresh, QL_MAX_SWEEPS, vectors)
    if status != 0:
        raise ArithmeticError("QL iteration failed to converge in 50 sweeps")
    order = np.argsort(d, kind="stable")
    if vectors:
        # the kernel accumulates eigenvectors as rows
        return d[order], z[order].T.copy()
    return d[order]


def poly_roots(j: JacobiMatrix) -> np.ndarray:
    """Roots of p_k, i.e. the eigenvalues of J_k, sorted decreasing."""
    return tridiag_eigh(j)[::-1].copy()


def monic_values(m_support: np.ndarray, j: JacobiMatrix, k: int) -> np.ndarray:
    """Values of the monic orthogonal polynomial pi_k on the given points."""
    if k > j.alpha.size:
        raise ValueError("need at least k diagonal entries")
    x = np.asarray(m_support, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for i in range(k):
        bsq = j.beta[i - 1] ** 2 if i > 0 else 0.0
        cur, prev = (x - j.alpha[i]) * cur - bsq * prev, cur
    return cur


def monic_l2_norm(m: DiscreteMeasure, j: JacobiMatrix, k: int) -> float:
    """Minimal L2 norm int pi_k^2 dmu, equal to gamma_k^{-2} = prod beta_i^2.

    Computed both by direct summation and (when beta_{k-1} is available)
    via the product identity; the two must agree to 1e-8 relative.
    """
    if k < 0 or k > j.alpha.size:
        raise ValueError("k out of range for this Jacobi matrix")
    vals = monic_values(m.support, j, k)
    direct = float(np.sum(m.weights * vals * vals))
    if k <= j.beta.size:
        via_prod = float(np.prod(j.beta[:k] ** 2)) if k > 0 else 1.0
        scale = max(abs(via_prod), abs(direct), 1e-300)
        if abs(direct - via_prod) > 1e-8 * scale:
            raise ArithmeticError(
                f"monic norm mismatch: direct={direct!r} product={via_prod!r}"
            )
    return direct


_REFERENCE_NPOINTS = 10**6
_reference_cache: dict = {}


def reference_jacobi(ref: ContinuousRef, k: int, npoints: int = _REFERENCE_NPOINTS) -> JacobiMatrix:
    """Jacobi matrix of a reference density.

    The semicircle family is exact in closed form (alpha_i = center,
    beta_i = radius/2).  The uniform family runs Stieltjes on an
    ``npoints`` quantile discretization; that carries an O(k/npoints)
    coefficient error from the Kolmogorov-Lipschitz machinery.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if ref.kind == "semicircle":
        c, r = ref.params
        return JacobiMatrix(np.full(k, c), np.full(k - 1, r / 2.0))
    if ref.kind != "uniform":
        raise ValueError(f"unsupported reference kind: {ref.kind}")
    key = (ref.kind, ref.params, npoints)
    cached = _reference_cache.get(key)
    if cached is None or cached.k < k:
        disc = quantile_discretize(ref, npoints)
        cached = stieltjes(disc, k)
        _reference_cache[key] = cached
    return cached.truncate(k)


def read_jacobi_csv(path) -> JacobiMatrix:
    """Read the ``i,alpha,beta`` CSV (beta empty on the last row)."""
    alphas = []
    betas = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "i,alpha,beta":
            raise ValueError(f"{path}: expected header 'i,alpha,beta'")
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}: malformed row {line!r}")
            alphas.append(float(parts[1]))
            if parts[2] != "":
                betas.append(float(parts[2]))
    return JacobiMatrix(np.array(alphas), np.array(betas))


def write_jacobi_csv(j: JacobiMatrix, fh) -> None:
    fh.write("i,alpha,beta\n")
    for i in range(j.k):
        b = repr(float(j.beta[i])) if i < j.k - 1 else ""
        fh.write(f"{i},{float(j.alpha[i])!r},{b}\n")
