"""Seeded randomness: counter-based streams, polar-method Gaussians, sphere sampling.

Every Monte Carlo repetition owns a stream derived from
(master_seed, repetition_index, stream_tag) through a Philox counter-based
generator, so results are reproducible regardless of scheduling.
Gaussians come from the Marsaglia polar method applied to the raw
uniform stream; the exact procedure is documented in the README.
"""

from __future__ import annotations

import math

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a64(tag: str) -> int:
    h = _FNV_OFFSET
    for byte in tag.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_rng(master_seed: int, rep_index: int = 0, stream_tag: str = "") -> np.random.Generator:
    """Philox generator keyed on (master_seed, rep_index, FNV-1a(stream_tag)).

    Philox is counter-based, so streams with distinct keys are
    independent and the derivation is order-free.
    """
    key = np.array(
        [
            int(master_seed) & _MASK64,
            ((int(rep_index) & _MASK64) * 0x9E3779B97F4A7C15 ^ _fnv1a64(stream_tag)) & _MASK64,
        ],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def gaussians(rng: np.random.Generator, n: int) -> np.ndarray:
    """n standard Gaussians by the Marsaglia polar method.

    Uniform pairs (2u-1, 2v-1) are drawn from the generator in fixed
    order; pairs with s = x^2 + y^2 in (0, 1) are accepted and yield the
    two deviates (x f, y f) with f = sqrt(-2 log s / s), consumed in
    pair-interleaved order.  The output for a fixed (stream, n) is
    deterministic across platforms.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    out = np.empty(n)
    filled = 0
    while filled < n:
        want = n - filled
        # acceptance rate is pi/4; draw with headroom
        npairs = max(32, int(want * 0.7) + 16)
        u = rng.random(2 * npairs)
        x = 2.0 * u[0::2] - 1.0
        y = 2.0 * u[1::2] - 1.0
        s = x * x + y * y
        ok = (s > 0.0) & (s < 1.0)
        xs = x[ok]
        ys = y[ok]
        f = np.sqrt(-2.0 * np.log(s[ok]) / s[ok])
        z = np.empty(2 * xs.size)
        z[0::2] = xs * f
        z[1::2] = ys * f
        take = min(z.size, want)
        out[filled : filled + take] = z[:take]
        filled += take
    return out


def sample_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the unit sphere in R^n (normalized Gaussian vector)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = gaussians(rng, n)
    u = g / np.linalg.norm(g)
    if abs(np.linalg.norm(u) - 1.0) > 1e-13:
        u = u / np.linalg.norm(u)
    return u


def is_unit(u: np.ndarray, tol: float = 1e-12) -> bool:
    return abs(float(np.linalg.norm(u)) - 1.0) <= tol


def smallest_mass(u: np.ndarray, delta: float) -> float:
    """Mass of the ceil(delta*n) smallest squared coordinates.

    u is (delta, eps)-incompressible iff this exceeds eps: the minimum
    over qualifying coordinate sets is attained at the smallest squares,
    and adding coordinates only adds mass.
    """
    u = np.asarray(u, dtype=float).ravel()
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    count = math.ceil(delta * u.size)
    if count < 1:
        raise ValueError("ceil(delta*n) must be >= 1")
    sq = np.sort(u * u)
    return float(sq[:count].sum())


def head_mass(u: np.ndarray, m: int) -> float:
    """Sum of the first m squared coordinates (eigenbasis ordering)."""
    u = np.asarray(u, dtype=float).ravel()
    if not 0 <= m <= u.size:
        raise ValueError("m must lie in [0, n]")
    return float(np.sum(u[:m] ** 2))


def chi2_tail_points(k: int, t: float) -> tuple[float, float, float]:
    """Chi-square(k) tail thresholds at budget t: both tails have probability <= e^{-t}.

    Lower threshold k - 2 sqrt(kt) (floored at 0), upper k + 2 sqrt(kt) + 2t.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if k < 1:
        raise ValueError("k must be >= 1")
    root = 2.0 * math.sqrt(k * t)
    return (max(0.0, k - root), k + root + 2.0 * t, math.exp(-t))
