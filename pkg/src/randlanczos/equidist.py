"""Equidistribution certificates and their adversarial falsifier.

A spectrum is (delta, omega, j)-equidistributed when, for every set T of
at most j reals, at least delta*n eigenvalues keep geometric-mean
distance at least omega from T.  Certificates come from closed-form
potentials (absolutely continuous references), cluster geometry, or
Kolmogorov transfer; the falsifier searches for witness sets T that
drive the fraction down, producing upper bounds on delta, never
certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .measures import ContinuousRef, Spectrum
from .randomness import derive_rng

# Closed-form potential constants for the standard family members:
# max_t int -log|x-t| d(ref) is attained at the symmetry point.
UNIFORM01_POTENTIAL = 1.0 + math.log(2.0)  # uniform(0,1), at t = 1/2
SEMICIRCLE_POTENTIAL = 0.5  # semicircle(0,2), at t = 0
UNIFORM01_OMEGA = math.exp(-2.0 * UNIFORM01_POTENTIAL)  # = e^{-2}/4
SEMICIRCLE_OMEGA = math.exp(-2.0 * SEMICIRCLE_POTENTIAL)  # = e^{-1}

FALSIFY_STARTS = 32
FALSIFY_SWEEPS = 200


class TransferExhaustedError(ArithmeticError):
    """Kolmogorov transfer would drive delta to zero or below."""


@dataclass(frozen=True)
class EquidistCert:
    """(delta, omega, j) certificate with provenance.

    ``j`` is None when the certificate holds for every witness size.
    """

    delta: float
    omega: float
    j: Optional[int]
    method: str  # potential | cluster | transfer | witnessed
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.j is not None and self.j < 1:
            raise ValueError("j must be >= 1 (witness sets are nonempty)")

    def covers(self, j: int) -> bool:
        return self.j is None or self.j >= j


def check_witness(spec: Spectrum, t, omega: float) -> float:
    """Fraction of eigenvalues with mean log-distance to T at least log omega.

    An eigenvalue landing exactly on some t in T contributes -inf and
    fails the test.
    """
    t = np.asarray(t, dtype=float).ravel()
    if t.size == 0:
        raise ValueError("witness set T must be nonempty")
    if omega <= 0:
        raise ValueError("omega must be positive")
    with np.errstate(divide="ignore"):
        count = kernels.witness_count(spec.eigenvalues, t, math.log(omega))
    return float(count) / spec.n


def falsify(
    spec: Spectrum,
    omega: float,
    j: int,
    budget: int = 20000,
    rng: Optional[np.random.Generator] = None,
    seed: int = 0,
    starts: int = FALSIFY_STARTS,
    sweeps: int = FALSIFY_SWEEPS,
) -> tuple[np.ndarray, float]:
    """Adversarial search for a witness set T minimizing :func:`check_witness`.

    Multistart coordinate descent over T in the box padded by one
    diameter; starts are seeded at cluster centers and random atoms.
    Returns (worst T found, fraction) -- an upper bound on the true
    delta for this (omega, j), never a certificate.  ``budget`` caps the
    total number of witness evaluations.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    lams = spec.eigenvalues
    n = spec.n
    diam = max(spec.diameter, 1e-12)
    lo = lams[0] - diam
    hi = lams[-1] + diam
    log_omega = math.log(omega)

    # crude cluster centers: midpoints of the largest gaps
    gaps = np.diff(lams)
    centers = []
    if gaps.size:
        order = np.argsort(gaps)[::-1]
        split_idx = sorted(order[: min(8, gaps.size)])
        blocks = np.split(lams, [i + 1 for i in split_idx])
        centers = [float(b.mean()) for b in blocks if b.size]
    if not centers:
        centers = [float(lams.mean())]
    centers = np.array(centers)

    best_frac = 1.0 + 1.0 / n
    best_t = None
    evals = 0
    ncand = 16

    with np.errstate(divide="ignore"):
        for s in range(starts):
            if evals >= budget:
                break
            rng_s = rng if (rng is not None and starts == 1) else derive_rng(seed, s, "falsify")
            t = np.empty(j)
            for q in range(j):
                mode = int(rng_s.integers(0, 3))
                if mode == 0:
                    t[q] = centers[int(rng_s.integers(0, centers.size))]
                elif mode == 1:
                    t[q] = lams[int(rng_s.integers(0, n))]
                else:
                    t[q] = lo + (hi - lo) * rng_s.random()
            cur = kernels.witness_count(lams, t, log_omega)
            evals += 1
            step = diam
            for _ in range(sweeps):
                improved = False
                for q in range(j):
                    others = np.delete(t, q)
                    base = np.zeros(n)
                    for o in others:
                        base += np.log(np.abs(lams - o))
                    cands = np.empty(ncand)
                    cands[0] = t[q]
                    third = (ncand - 1) // 3
                    for c in range(third):
                        cands[1 + c] = lams[int(rng_s.integers(0, n))]
                    for c in range(third):
                        cands[1 + third + c] = lo + (hi - lo) * rng_s.random()
                    rest = ncand - 1 - 2 * third
                    for c in range(rest):
                        cands[1 + 2 * third + c] = t[q] + step * (2.0 * rng_s.random() - 1.0)
                    np.clip(cands, lo, hi, out=cands)
                    bi, bc = kernels.witness_coord_scan(lams, base, float(j), cands, log_omega)
                    evals += ncand
                    if bc < cur:
                        cur = bc
                        t[q] = cands[bi]
                        improved = True
                    if evals >= budget:
                        break
                step *= 0.7
                if not improved or cur == 0 or evals >= budget:
                    break
            frac = cur / n
            if frac < best_frac:
                best_frac = frac
                best_t = t.copy()
            if best_frac == 0.0:
                break
    return best_t, float(min(best_frac, 1.0))


def potential_cert(ref: ContinuousRef) -> EquidistCert:
    """Certificate for a reference density from its closed-form log potential.

    The Markov argument gives delta = 1/2 and omega = e^{-2a} with
    a = max_t int -log|x-t| d(ref), evaluated on the standard family
    member and transported linearly to affine images (omega scales with
    the map).  Holds for every witness size j.
    """
    if ref.kind == "uniform":
        a_lo, a_hi = ref.params
        scale = a_hi - a_lo
        omega = scale * UNIFORM01_OMEGA
        detail = {
            "base": "uniform(0,1)",
            "potential_a": UNIFORM01_POTENTIAL,
            "base_omega": UNIFORM01_OMEGA,
            "affine_scale": scale,
        }
    elif ref.kind == "semicircle":
        center, radius = ref.params
        scale = radius / 2.0
        omega = scale * SEMICIRCLE_OMEGA
        detail = {
            "base": "semicircle(0,2)",
            "potential_a": SEMICIRCLE_POTENTIAL,
            "base_omega": SEMICIRCLE_OMEGA,
            "affine_scale": scale,
        }
    else:
        raise ValueError(f"unsupported reference kind: {ref.kind}")
    return EquidistCert(delta=0.5, omega=omega, j=None, method="potential", detail=detail)


def kol_transfer(cert: EquidistCert, j: int, kol: float) -> EquidistCert:
    """Transport a certificate across Kolmogorov distance: delta loses 4*j*kol.

    Level sets of |prod (x - t)| are unions of at most 2j intervals, so
    the measure of the good set moves by at most 4j * Kol.
    """
    if j < 1:
        raise ValueError("j must be >= 1 (witness sets are nonempty)")
    if kol < 0:
        raise ValueError("kol must be >= 0")
    if not cert.covers(j):
        raise ValueError(f"certificate only covers witness sizes up to {cert.j}")
    loss = 4.0 * j * kol
    if loss >= cert.delta:
        raise TransferExhaustedError(
            f"transfer exhausted: 4*j*kol = {loss:.6g} >= delta = {cert.delta:.6g}"
        )
    return EquidistCert(
        delta=cert.delta - loss,
        omega=cert.omega,
        j=j,
        method="transfer",
        detail={"from": cert.method, "kol": kol, "loss": loss, "parent": cert.detail},
    )


def cluster_cert(spec: Spectrum, gap_threshold: float) -> list[EquidistCert]:
    """Certificates from cluster geometry, one per witness size j < #clusters.

    Clusters are maximal runs with consecutive gaps below the threshold;
    with g the minimal inter-cluster gap and k_j the total population
    outside the j largest clusters, the spectrum is
    (k_j/n, g/2, j)-equidistributed.
    """
    if gap_threshold <= 0:
        raise ValueError("gap_threshold must be positive")
    lams = spec.eigenvalues
    n = spec.n
    gaps = np.diff(lams)
    split = np.nonzero(gaps >= gap_threshold)[0]
    sizes = np.diff(np.concatenate(([0], split + 1, [n])))
    m = sizes.size
    if m < 2:
        raise ValueError("single cluster: inter-cluster gap undefined, no certificate")
    g = float(gaps[split].min())
    sizes_desc = np.sort(sizes)[::-1]
    certs = []
    detail_base = {
        "clusters": int(m),
        "sizes": [int(s) for s in sizes],
        "min_gap": g,
        "omega_convention": "g/2 (safe); the equal-cluster example quotes g",
    }
    for j in range(1, m):
        k_j = int(n - sizes_desc[:j].sum())
        if k_j <= 0:
            break
        certs.append(
            EquidistCert(
                delta=k_j / n,
                omega=g / 2.0,
                j=j,
                method="cluster",
                detail=dict(detail_base),
            )
        )
    return certs
