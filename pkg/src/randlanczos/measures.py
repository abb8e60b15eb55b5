"""Finite atomic measures, reference densities, moments, Kolmogorov distance.

The two continuous reference families (uniform and semicircle, closed
under affine maps) carry analytic CDFs so that discretization introduces
no quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

WEIGHT_SUM_TOL = 1e-12
# Atoms closer than this fraction of the spectral diameter are merged.
MERGE_REL_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite atomic probability measure: strictly increasing support, weights summing to 1."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        if support.ndim != 1 or weights.shape != support.shape:
            raise ValueError("support and weights must be 1-d arrays of equal length")
        if support.size == 0:
            raise ValueError("empty measure")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("weights must sum to 1 within 1e-12")

    @classmethod
    def from_atoms(cls, support, weights=None, normalize: bool = True) -> "DiscreteMeasure":
        """Build a measure from raw atoms: sort, merge near-coincident atoms, drop zero weights.

        Weights default to uniform.  Atoms closer than 1e-12 times the
        diameter are merged by summing weights.
        """
        support = np.asarray(support, dtype=float).ravel()
        if support.size == 0:
            raise ValueError("empty measure")
        if weights is None:
            weights = np.full(support.size, 1.0 / support.size)
        else:
            weights = np.asarray(weights, dtype=float).ravel()
            if weights.shape != support.shape:
                raise ValueError("support and weights must have equal length")
            if np.any(weights < 0):
                raise ValueError("weights must be nonnegative")
        order = np.argsort(support, kind="stable")
        support = support[order]
        weights = weights[order]
        diameter = support[-1] - support[0]
        tol = MERGE_REL_TOL * diameter
        merged_sup = [support[0]]
        merged_w = [weights[0]]
        for x, w in zip(support[1:], weights[1:]):
            if x - merged_sup[-1] <= tol:
                merged_w[-1] += w
            else:
                merged_sup.append(x)
                merged_w.append(w)
        support = np.array(merged_sup)
        weights = np.array(merged_w)
        keep = weights > 0.0
        if not np.any(keep):
            raise ValueError("measure has no mass")
        support = support[keep]
        weights = weights[keep]
        if normalize:
            weights = weights / weights.sum()
        return cls(support, weights)

    @property
    def natoms(self) -> int:
        return int(self.support.size)

    @property
    def norm(self) -> float:
        """max |x| over the support."""
        return float(max(abs(self.support[0]), abs(self.support[-1])))

    @property
    def diameter(self) -> float:
        return float(self.support[-1] - self.support[0])

    def cdf(self, t) -> np.ndarray:
        """Right-continuous CDF evaluated at t (scalar or array)."""
        cum = np.concatenate(([0.0], np.cumsum(self.weights)))
        idx = np.searchsorted(self.support, np.asarray(t, dtype=float), side="right")
        return cum[idx]

    def cdf_left(self, t) -> np.ndarray:
        """Left limit of the CDF at t."""
        cum = np.concatenate(([0.0], np.cumsum(self.weights)))
        idx = np.searchsorted(self.support, np.asarray(t, dtype=float), side="left")
        return cum[idx]


@dataclass(frozen=True)
class ContinuousRef:
    """Reference density: uniform(a, b) or semicircle(center, radius).

    Both families are closed under affine maps, so affine images stay in
    kind.  CDFs are analytic; the semicircle quantile is solved by
    bisection to 1e-12.
    """

    kind: str
    params: tuple

    @classmethod
    def uniform(cls, a: float, b: float) -> "ContinuousRef":
        if not b > a:
            raise ValueError("uniform requires b > a")
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def semicircle(cls, center: float = 0.0, radius: float = 2.0) -> "ContinuousRef":
        if not radius > 0:
            raise ValueError("semicircle requires radius > 0")
        return cls("semicircle", (float(center), float(radius)))

    @property
    def support_interval(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return self.params
        c, r = self.params
        return (c - r, c + r)

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.support_interval
        if self.kind == "uniform":
            inside = (x >= lo) & (x <= hi)
            return np.where(inside, 1.0 / (hi - lo), 0.0)
        c, r = self.params
        y = x - c
        inside = np.abs(y) <= r
        vals = np.zeros_like(y)
        vals[inside] = 2.0 * np.sqrt(r * r - y[inside] ** 2) / (math.pi * r * r)
        return vals

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.support_interval
        if self.kind == "uniform":
            return np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        c, r = self.params
        y = np.clip((x - c) / r, -1.0, 1.0)
        # standard semicircle on [-1, 1]: F(y) = 1/2 + (y sqrt(1-y^2) + asin y)/pi
        return 0.5 + (y * np.sqrt(1.0 - y * y) + np.arcsin(y)) / math.pi

    def quantile(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise ValueError("quantile argument must lie in [0, 1]")
        lo, hi = self.support_interval
        if self.kind == "uniform":
            return lo + q * (hi - lo)
        # bisection on the analytic CDF, to 1e-12 in x
        lo_arr = np.full(q.shape, lo, dtype=float)
        hi_arr = np.full(q.shape, hi, dtype=float)
        while np.max(hi_arr - lo_arr) > 1e-12:
            mid = 0.5 * (lo_arr + hi_arr)
            below = self.cdf(mid) < q
            lo_arr = np.where(below, mid, lo_arr)
            hi_arr = np.where(below, hi_arr, mid)
        return 0.5 * (lo_arr + hi_arr)

    def affine(self, a: float, b: float) -> "ContinuousRef":
        """Pushforward under x -> a*x + b."""
        if a == 0:
            raise ValueError("affine map must have a != 0")
        if self.kind == "uniform":
            lo, hi = self.params
            pts = sorted((a * lo + b, a * hi + b))
            return ContinuousRef.uniform(*pts)
        c, r = self.params
        return ContinuousRef.semicircle(a * c + b, abs(a) * r)

    def check_normalization(self, npoints: int = 2_000_001) -> float:
        """Quadrature check that the density integrates to 1 (trapezoid)."""
        lo, hi = self.support_interval
        xs = np.linspace(lo, hi, npoints)
        total = float(np.trapezoid(self.density(xs), xs))
        return total


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues of a Hermitian operator."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        eigs = np.sort(np.asarray(self.eigenvalues, dtype=float).ravel())
        if eigs.size == 0:
            raise ValueError("empty spectrum")
        object.__setattr__(self, "eigenvalues", eigs)

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def norm(self) -> float:
        return float(max(abs(self.eigenvalues[0]), abs(self.eigenvalues[-1])))

    @property
    def diameter(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def empirical_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure.from_atoms(self.eigenvalues)


def spectral_measure(spec: Spectrum, u: np.ndarray) -> DiscreteMeasure:
    """Measure with atoms at the eigenvalues and weights u_i^2.

    Repeated eigenvalues aggregate their weight; its expectation over
    uniform u is the empirical spectral distribution.
    """
    u = np.asarray(u, dtype=float).ravel()
    if u.size != spec.n:
        raise ValueError(f"dimension mismatch: |u|={u.size} but spectrum has n={spec.n}")
    nrm = np.linalg.norm(u)
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError("u must be a unit vector (within 1e-12)")
    return DiscreteMeasure.from_atoms(spec.eigenvalues, u * u)


def quantile_discretize(ref: ContinuousRef, n: int) -> DiscreteMeasure:
    """n atoms of weight 1/n at the midpoint quantiles (i-1/2)/n.

    Midpoint placement halves the Kolmogorov discretization error:
    Kol(result, ref) <= 1/(2n) <= 1/n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    q = (np.arange(n) + 0.5) / n
    atoms = ref.quantile(q)
    return DiscreteMeasure.from_atoms(atoms, np.full(n, 1.0 / n))


def moments(m: DiscreteMeasure, k: int) -> np.ndarray:
    """Raw moments m_0..m_k by direct summation."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = np.empty(k + 1)
    cur = m.weights.copy()
    out[0] = cur.sum()
    for j in range(1, k + 1):
        cur = cur * m.support
        out[j] = cur.sum()
    return out


def moments_via_cdf(m: DiscreteMeasure, k: int) -> np.ndarray:
    """Raw moments via the tail-integral identity m_k = k * int x^{k-1} mu(x, inf) dx.

    The measure splits into its parts on [0, inf) and (reflected)
    (-inf, 0); each tail integral is evaluated exactly because the tail
    function is piecewise constant between atoms.
    """
    if k < 0:
        raise ValueError("k must be >= 0")

    def positive_part_moments(atoms: np.ndarray, w: np.ndarray, kmax: int) -> np.ndarray:
        # atoms >= 0 strictly increasing; returns m_1..m_kmax of the part
        res = np.zeros(kmax)
        if atoms.size == 0 or kmax == 0:
            return res
        # the tail mu(x, inf) is constant on [cut_j, cut_{j+1}), cuts = (0, atoms...)
        cuts = np.concatenate(([0.0], atoms))
        total = w.sum()
        cum = np.concatenate(([0.0], np.cumsum(w)))
        idx = np.searchsorted(atoms, cuts, side="right")
        strictly_above = total - cum[idx]
        for kk in range(1, kmax + 1):
            # integral of kk*x^{kk-1} over [cuts[j], cuts[j+1]) is cuts[j+1]^kk - cuts[j]^kk
            seg = strictly_above[:-1] * (cuts[1:] ** kk - cuts[:-1] ** kk)
            res[kk - 1] = seg.sum()
        return res

    pos = m.support >= 0
    neg = ~pos
    mp = positive_part_moments(m.support[pos], m.weights[pos], k)
    mn = positive_part_moments(-m.support[neg][::-1], m.weights[neg][::-1], k)
    out = np.empty(k + 1)
    out[0] = m.weights.sum()
    for kk in range(1, k + 1):
        out[kk] = mp[kk - 1] + ((-1.0) ** kk) * mn[kk - 1]
    return out


def kolmogorov(a: DiscreteMeasure, b) -> float:
    """Kolmogorov distance sup_t |F_a(t) - F_b(t)|.

    For two atomic measures the sup is attained at an atom (checking both
    one-sided limits); against a continuous reference it is attained at
    the atoms of ``a`` or the reference support endpoints, because the
    discrete CDF is piecewise constant.
    """
    if isinstance(b, DiscreteMeasure):
        pts = np.union1d(a.support, b.support)
        right = np.abs(a.cdf(pts) - b.cdf(pts))
        left = np.abs(a.cdf_left(pts) - b.cdf_left(pts))
    elif isinstance(b, ContinuousRef):
        lo, hi = b.support_interval
        pts = np.concatenate((a.support, [lo, hi]))
        fb = b.cdf(pts)
        right = np.abs(a.cdf(pts) - fb)
        left = np.abs(a.cdf_left(pts) - fb)
    else:
        raise TypeError("second argument must be DiscreteMeasure or ContinuousRef")
    # cumulative sums can drift an ulp past 1
    return float(min(max(right.max(), left.max()), 1.0))


def affine_pushforward(m: DiscreteMeasure, a: float, b: float) -> DiscreteMeasure:
    """Pushforward of the measure under x -> a*x + b (a != 0)."""
    if a == 0:
        raise ValueError("affine map must have a != 0")
    atoms = a * m.support + b
    return DiscreteMeasure.from_atoms(atoms, m.weights.copy(), normalize=False)


def read_measure(path) -> DiscreteMeasure:
    """Read the text measure format: one ``x weight`` pair per line.

    ``#`` starts a comment; weights are optional and default to uniform
    (then the column is normalized).
    """
    atoms = []
    weights = []
    saw_weight = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (1, 2):
                raise ValueError(f"{path}:{lineno}: expected 'x [weight]'")
            atoms.append(float(parts[0]))
            if len(parts) == 2:
                saw_weight = True
                weights.append(float(parts[1]))
            else:
                weights.append(1.0)
    if not atoms:
        raise ValueError(f"{path}: no atoms")
    if not saw_weight:
        weights = None
    return DiscreteMeasure.from_atoms(np.array(atoms), None if weights is None else np.array(weights))


def write_measure(m: DiscreteMeasure, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# x weight\n")
        for x, w in zip(m.support, m.weights):
            fh.write(f"{float(x)!r} {float(w)!r}\n")
