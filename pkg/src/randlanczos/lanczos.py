"""The Lanczos iteration on an explicit Hermitian operator.

Full reorthogonalization (two classical Gram-Schmidt passes against the
stored basis, the accepted emulation of exact arithmetic) is the
default; ``reorth="none"`` runs the bare three-term recurrence so its
loss of orthogonality can be observed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .measures import Spectrum
from .orthopoly import JacobiMatrix, poly_roots, tridiag_eigh
from .randomness import gaussians

BREAKDOWN_REL_TOL = 1e-12
BASIS_MANDATORY_K = 256
_SYMMETRY_SAMPLES = 64


@dataclass(frozen=True)
class LinearOperator:
    """Hermitian operator given as dense matrix, diagonal spectrum, or callback."""

    n: int
    kind: str  # "dense" | "diagonal" | "callback"
    apply: Callable[[np.ndarray], np.ndarray]
    matrix: Optional[np.ndarray] = None
    diag: Optional[np.ndarray] = None

    def norm_estimate(self) -> float:
        """Cheap operator-norm estimate used to scale the breakdown threshold.

        Max row sum for dense, max |eigenvalue| for diagonal, 20 power
        iterations for callbacks.
        """
        if self.kind == "dense":
            return float(np.abs(self.matrix).sum(axis=1).max())
        if self.kind == "diagonal":
            return float(np.abs(self.diag).max())
        v = np.full(self.n, 1.0 / np.sqrt(self.n))
        est = 1.0
        for _ in range(20):
            w = self.apply(v)
            est = float(np.linalg.norm(w))
            if est == 0.0:
                return 0.0
            v = w / est
        return est


def dense_operator(a: np.ndarray, check_symmetry: bool = True, rng=None) -> LinearOperator:
    """Wrap a dense symmetric matrix; symmetry is spot-checked on random index pairs."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if check_symmetry and n > 1:
        rng = rng if rng is not None else np.random.Generator(np.random.Philox(key=np.array([0, 0], dtype=np.uint64)))
        scale = max(float(np.abs(a).max()), 1e-300)
        rows = rng.integers(0, n, size=_SYMMETRY_SAMPLES)
        cols = rng.integers(0, n, size=_SYMMETRY_SAMPLES)
        gap = np.abs(a[rows, cols] - a[cols, rows]).max()
        if gap > 1e-12 * scale:
            raise ValueError("matrix is not symmetric (sampled entries differ)")
    return LinearOperator(n=n, kind="dense", apply=lambda v: a @ v, matrix=a)


def diagonal_operator(spectrum) -> LinearOperator:
    """Operator diag(spectrum)."""
    if isinstance(spectrum, Spectrum):
        d = spectrum.eigenvalues.copy()
    else:
        d = np.asarray(spectrum, dtype=float).ravel().copy()
    if d.size == 0:
        raise ValueError("empty spectrum")
    return LinearOperator(n=d.size, kind="diagonal", apply=lambda v: d * v, diag=d)


def callback_operator(n: int, apply: Callable[[np.ndarray], np.ndarray]) -> LinearOperator:
    return LinearOperator(n=int(n), kind="callback", apply=apply)


@dataclass
class LanczosOutput:
    """Jacobi matrix, Krylov basis, Ritz values, and breakdown bookkeeping."""

    jacobi: JacobiMatrix
    ritz_values: np.ndarray  # sorted decreasing, the roots of p_k
    basis: Optional[np.ndarray]  # (count, n) rows v_0..v_{count-1}
    residuals: np.ndarray  # per-step reorthogonalization correction norms
    breakdown_at: Optional[int]
    tail_beta: Optional[float]  # beta_{count-1} when the iteration continued
    tail_vector: Optional[np.ndarray]  # v_count when the iteration continued

    @property
    def k(self) -> int:
        return self.jacobi.k


def lanczos_run(
    op: LinearOperator,
    u: np.ndarray,
    k: int,
    reorth: str = "full",
    store_basis: Optional[bool] = None,
) -> LanczosOutput:
    """Run k Lanczos iterations from the unit vector u.

    ``reorth="full"`` projects the residual against all stored basis
    vectors twice per step; ``"none"`` keeps the bare three-term update.
    Truncates at breakdown (beta_j below 1e-12 times a norm estimate).
    """
    u = np.asarray(u, dtype=float).ravel()
    if u.size != op.n:
        raise ValueError(f"dimension mismatch: |u|={u.size}, operator n={op.n}")
    if not 1 <= k <= op.n:
        raise ValueError("k must satisfy 1 <= k <= n")
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("u must be a unit vector (within 1e-12)")
    if reorth not in ("full", "none"):
        raise ValueError("reorth must be 'full' or 'none'")
    if store_basis is None:
        store_basis = k <= BASIS_MANDATORY_K

    passes = 2 if reorth == "full" else 0
    tol = BREAKDOWN_REL_TOL * max(op.norm_estimate(), 1e-300)
    alpha = np.zeros(k)
    beta = np.zeros(k)
    resid = np.zeros(k)
    v = np.zeros((k + 1, op.n))

    if op.kind == "dense":
        count, truncated = kernels.lanczos_dense_fill(op.matrix, u, v, alpha, beta, resid, tol, passes)
    elif op.kind == "diagonal":
        count, truncated = kernels.lanczos_diag_fill(op.diag, u, v, alpha, beta, resid, tol, passes)
    else:
        count, truncated = _lanczos_callback(op.apply, u, v, alpha, beta, resid, tol, passes)
    count = int(count)

    if np.any(~np.isfinite(alpha[:count])) or np.any(~np.isfinite(beta[:count])):
        raise ArithmeticError("NaN in Lanczos recurrence: operator is likely not symmetric")

    jac = JacobiMatrix(alpha[:count].copy(), beta[: count - 1].copy())
    out = LanczosOutput(
        jacobi=jac,
        ritz_values=poly_roots(jac),
        basis=v[:count].copy() if store_basis else None,
        residuals=resid[:count].copy(),
        breakdown_at=(count - 1) if truncated else None,
        tail_beta=float(beta[count - 1]),
        tail_vector=(v[count].copy() if (store_basis and not truncated) else None),
    )
    return out


def _lanczos_callback(apply, u, v, alpha, beta, resid, tol, passes):
    # mirror of the kernel fills for callback operators
    kmax = alpha.shape[0]
    v[0] = u
    for j in range(kmax):
        w = np.asarray(apply(v[j]), dtype=float)
        aj = float(np.dot(w, v[j]))
        alpha[j] = aj
        w = w - aj * v[j]
        if j > 0:
            w = w - beta[j - 1] * v[j - 1]
        corr = np.zeros(j + 1)
        for _ in range(passes):
            c = v[: j + 1] @ w
            w = w - v[: j + 1].T @ c
            corr += c
        resid[j] = float(np.linalg.norm(corr))
        b = float(np.linalg.norm(w))
        beta[j] = b
        if b <= tol:
            return j + 1, 1
        v[j + 1] = w / b
    return kmax, 0


def ritz_vectors(out: LanczosOutput) -> np.ndarray:
    """Ritz vectors lifted from the eigenvectors of J_k through the stored basis.

    Rows are ordered to match ``out.ritz_values`` (decreasing); each
    J_k-eigenvector is sign-fixed so its first nonzero coordinate is
    positive.
    """
    if out.basis is None:
        raise ValueError("basis was not stored; rerun with store_basis=True")
    vals, vecs = tridiag_eigh(out.jacobi, vectors=True)
    # ascending -> decreasing to match ritz_values
    vecs = vecs[:, ::-1]
    for col in range(vecs.shape[1]):
        column = vecs[:, col]
        nz = np.nonzero(column)[0]
        if nz.size and column[nz[0]] < 0:
            vecs[:, col] = -column
    lifted = out.basis.T @ vecs  # (n, k)
    return lifted.T.copy()


def recurrence_residual(op: LinearOperator, out: LanczosOutput) -> float:
    """max_j || A v_j - (beta_{j-1} v_{j-1} + alpha_j v_j + beta_j v_{j+1}) ||.

    Validates the three-term structure of the stored output against a
    fresh application of the operator.
    """
    if out.basis is None:
        raise ValueError("basis was not stored; rerun with store_basis=True")
    jac = out.jacobi
    count = jac.k
    worst = 0.0
    for j in range(count):
        r = np.asarray(op.apply(out.basis[j]), dtype=float) - jac.alpha[j] * out.basis[j]
        if j > 0:
            r = r - jac.beta[j - 1] * out.basis[j - 1]
        if j < count - 1:
            r = r - jac.beta[j] * out.basis[j + 1]
        elif out.tail_vector is not None and out.tail_beta is not None:
            r = r - out.tail_beta * out.tail_vector
        worst = max(worst, float(np.linalg.norm(r)))
    return worst


def orthogonality_defect(out: LanczosOutput) -> float:
    """max |<v_i, v_j> - delta_ij| over the stored basis."""
    if out.basis is None:
        raise ValueError("basis was not stored; rerun with store_basis=True")
    gram = out.basis @ out.basis.T
    return float(np.abs(gram - np.eye(gram.shape[0])).max())


def goe_sample(n: int, rng: np.random.Generator) -> LinearOperator:
    """Dense GOE matrix: off-diagonal variance 1/n, diagonal variance 2/n.

    With this convention the empirical spectrum converges to the
    semicircle law on [-2, 2].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    count = n * (n + 1) // 2
    z = gaussians(rng, count)
    a = np.zeros((n, n))
    iu = np.triu_indices(n)
    a[iu] = z
    a = a + np.triu(a, 1).T
    scale = np.full((n, n), 1.0 / np.sqrt(n))
    np.fill_diagonal(scale, np.sqrt(2.0 / n))
    a *= scale
    return dense_operator(a, check_symmetry=False)


def read_operator(path) -> LinearOperator:
    """Read the text operator format: 'diag'|'dense' header, n, then values."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError(f"{path}: empty operator file")
    kind = tokens[0]
    if kind not in ("diag", "dense"):
        raise ValueError(f"{path}: header must be 'diag' or 'dense'")
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing dimension")
    n = int(tokens[1])
    vals = np.array([float(t) for t in tokens[2:]])
    if kind == "diag":
        if vals.size != n:
            raise ValueError(f"{path}: expected {n} eigenvalues, found {vals.size}")
        return diagonal_operator(vals)
    if vals.size != n * n:
        raise ValueError(f"{path}: expected {n * n} entries, found {vals.size}")
    return dense_operator(vals.reshape(n, n))


def write_operator(op: LinearOperator, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if op.kind == "diagonal":
            fh.write(f"diag\n{op.n}\n")
            fh.write("\n".join(repr(float(x)) for x in op.diag))
        elif op.kind == "dense":
            fh.write(f"dense\n{op.n}\n")
            fh.write("\n".join(repr(float(x)) for x in op.matrix.ravel()))
        else:
            raise ValueError("callback operators cannot be serialized")
        fh.write("\n")
