"""Reproducible Monte Carlo runners for the concentration, outlier,
location, Kolmogorov, incompressibility, and Ritz-vector studies.

Every repetition owns an RNG stream derived from (master_seed, rep,
tag), so outputs are identical regardless of thread count or completion
order.  Per-rep rows can be cached on disk and resumed after a crash;
the cache is keyed by a digest of the config and seed.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import bounds, kernels
from .equidist import TransferExhaustedError, kol_transfer, potential_cert
from .lanczos import (
    diagonal_operator,
    goe_sample,
    lanczos_run,
    read_operator,
    ritz_vectors,
)
from .measures import ContinuousRef, DiscreteMeasure, Spectrum, kolmogorov, spectral_measure
from .orthopoly import poly_roots, reference_jacobi, stieltjes
from .randomness import derive_rng, sample_sphere, smallest_mass

KINDS = ("concentration", "outlier", "location", "kolmogorov", "incompressibility", "ritzvec")

CSV_HEADERS = {
    "concentration": "rep,i,alpha,beta",
    "outlier": "rep,k,top_ritz",
    "location": "rep,i,ritz",
    "kolmogorov": "rep,kol",
    "incompressibility": "rep,n,smallest_mass",
    "ritzvec": "pair,i,sin_theta,gap",
}


@dataclass
class ExperimentConfig:
    """Reproducible Monte Carlo specification."""

    kind: str
    n: int
    reps: int
    master_seed: int
    spectrum: dict = field(default_factory=dict)
    k: Optional[int] = None
    k_list: Optional[list] = None
    reference: Optional[dict] = None
    thresholds: dict = field(default_factory=dict)
    out_dir: Optional[str] = None
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        for kk in self.k_values():
            if kk > self.n:
                raise ValueError("k must not exceed n")
        for key, val in self.thresholds.items():
            if isinstance(val, (int, float)) and not np.isfinite(val):
                raise ValueError(f"threshold {key!r} must be finite")

    def k_values(self) -> list:
        if self.k_list is not None:
            return [int(x) for x in self.k_list]
        if self.k is not None:
            return [int(self.k)]
        return []

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "spectrum": self.spectrum,
            "k": self.k,
            "k_list": self.k_list,
            "reference": self.reference,
            "thresholds": self.thresholds,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class RunSummary:
    """Aggregated statistics, bound overlays, and the rep-level rows."""

    kind: str
    config: dict
    seed: int
    statistics: dict
    bound_overlays: list
    rows: list  # formatted CSV rows, rep-major order
    csv_header: str
    notes: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "seed": self.seed,
            "backend": kernels.BACKEND,
            "statistics": self.statistics,
            "bounds": self.bound_overlays,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# spectrum construction


def build_spectrum(cfg: ExperimentConfig):
    """Instantiate the configured spectrum.

    Returns (operator or None, eigenvalues or None).  GOE and file-dense
    spectra yield a dense operator (matrix path); grid spectra yield
    their eigenvalue vector (measure-side path).
    """
    spec = dict(cfg.spectrum)
    kind = spec.get("kind", "uniform-grid")
    if kind == "goe":
        op = goe_sample(cfg.n, derive_rng(cfg.master_seed, 0, "goe"))
        return op, None
    if kind == "uniform-grid":
        a = float(spec.get("a", 0.0))
        b = float(spec.get("b", 1.0))
        return None, np.linspace(a, b, cfg.n)
    if kind == "grid-plus-outliers":
        a = float(spec.get("a", 0.0))
        b = float(spec.get("b", (cfg.n - 1) / cfg.n))
        outliers = [float(x) for x in spec.get("outliers", [])]
        return None, np.concatenate((np.linspace(a, b, cfg.n), outliers))
    if kind == "file":
        op = read_operator(spec["path"])
        if op.kind == "diagonal":
            return None, op.diag.copy()
        return op, None
    raise ValueError(f"unknown spectrum kind {kind!r}")


def _certificate_for(cfg: ExperimentConfig, eigenvalues: Optional[np.ndarray], op, j: int):
    """Equidistribution certificate for the configured spectrum at witness size j.

    GOE transfers the semicircle potential certificate across the sampled
    matrix's exact Kolmogorov distance; grids transfer the uniform one.
    Returns (cert or None, normA, note).
    """
    if op is not None and op.kind == "dense":
        eigs = np.linalg.eigvalsh(op.matrix)
        ref = ContinuousRef.semicircle(0.0, 2.0)
    else:
        eigs = eigenvalues
        # the reference covers the bulk grid; outliers only cost Kol mass
        spec_cfg = dict(cfg.spectrum)
        if spec_cfg.get("kind") in ("uniform-grid", "grid-plus-outliers"):
            lo = float(spec_cfg.get("a", 0.0))
            hi = float(spec_cfg.get("b", (cfg.n - 1) / cfg.n))
        else:
            lo, hi = float(eigs.min()), float(eigs.max())
        ref = ContinuousRef.uniform(lo, hi if hi > lo else lo + 1.0)
    kol = kolmogorov(DiscreteMeasure.from_atoms(eigs), ref)
    base = potential_cert(ref)
    norm_a = float(np.abs(eigs).max())
    try:
        cert = kol_transfer(base, j=j, kol=kol)
        note = f"transfer from {base.detail['base']} potential, kol={kol:.3e}"
    except TransferExhaustedError as exc:
        cert = None
        note = f"transfer exhausted: {exc}"
    return cert, norm_a, note


# ---------------------------------------------------------------------------
# per-rep persistence (resume support)


class RepStore:
    """Per-rep row cache under <out_dir>/reps, keyed by the config digest."""

    def __init__(self, out_dir: str, digest: str):
        self.dir = os.path.join(out_dir, "reps")
        os.makedirs(self.dir, exist_ok=True)
        marker = os.path.join(self.dir, "config.digest")
        if os.path.exists(marker):
            with open(marker, "r", encoding="utf-8") as fh:
                found = fh.read().strip()
            if found != digest:
                raise ValueError(
                    f"rep cache at {self.dir} belongs to a different config "
                    f"(digest {found} != {digest}); remove it to rerun"
                )
        else:
            _atomic_write(marker, digest + "\n")
        self.digest = digest

    def path(self, rep: int) -> str:
        return os.path.join(self.dir, f"rep_{rep:06d}.csv")

    def load(self, rep: int) -> Optional[list]:
        p = self.path(rep)
        if not os.path.exists(p):
            return None
        with open(p, "r", encoding="utf-8") as fh:
            return [line.rstrip("\n") for line in fh if line.strip()]

    def save(self, rep: int, rows: list) -> None:
        _atomic_write(self.path(rep), "".join(r + "\n" for r in rows))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_reps(
    cfg: ExperimentConfig,
    rep_fn: Callable[[int], list],
    fault_hook: Optional[Callable[[int], None]] = None,
) -> list:
    """Execute rep_fn over all repetitions, honoring the cache and thread count.

    Returns the concatenated rows in rep order.  ``fault_hook(done)`` is
    called after each newly computed rep (used by crash-injection tests).
    """
    store = RepStore(cfg.out_dir, cfg.digest()) if cfg.out_dir else None
    rows_by_rep: dict = {}
    todo = []
    for rep in range(cfg.reps):
        cached = store.load(rep) if store else None
        if cached is not None:
            rows_by_rep[rep] = cached
        else:
            todo.append(rep)

    done = 0
    if cfg.threads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            for rep, rows in zip(todo, pool.map(rep_fn, todo)):
                rows_by_rep[rep] = rows
                if store:
                    store.save(rep, rows)
                done += 1
                if fault_hook:
                    fault_hook(done)
    else:
        for rep in todo:
            rows = rep_fn(rep)
            rows_by_rep[rep] = rows
            if store:
                store.save(rep, rows)
            done += 1
            if fault_hook:
                fault_hook(done)

    out = []
    for rep in range(cfg.reps):
        out.extend(rows_by_rep[rep])
    return out


def _mc_stderr(p: float, reps: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / reps))


def _overlay(name: str, params: dict, result, empirical: float, reps: int) -> dict:
    se = _mc_stderr(empirical, reps)
    entry = {
        "name": name,
        "params": params,
        "value": float(result.value),
        "raw": float(result.raw),
        "vacuous": bool(result.clamped),
        "empirical": float(empirical),
        "stderr": se,
        "satisfied": bool(empirical <= result.value + 3.0 * se),
    }
    return entry


# ---------------------------------------------------------------------------
# runners


def run_concentration(cfg: ExperimentConfig, fault_hook=None) -> RunSummary:
    """Repeated Lanczos from fresh unit vectors; per-coefficient medians and deviations."""
    if cfg.kind != "concentration":
        raise ValueError("config kind must be 'concentration'")
    (k,) = cfg.k_values() or (None,)
    if k is None:
        raise ValueError("concentration requires k")
    op, eigs = build_spectrum(cfg)
    dim = op.n if op is not None else eigs.size
    spectrum = Spectrum(eigs) if eigs is not None else None

    def rep_fn(rep: int) -> list:
        u = sample_sphere(dim, derive_rng(cfg.master_seed, rep, "u"))
        if op is not None:
            jac = lanczos_run(op, u, k, reorth="full", store_basis=False).jacobi
        else:
            jac = stieltjes(spectral_measure(spectrum, u), k)
        rows = []
        for i in range(jac.k):
            beta_txt = repr(float(jac.beta[i])) if i < jac.k - 1 else ""
            rows.append(f"{rep},{i},{float(jac.alpha[i])!r},{beta_txt}")
        return rows

    rows = _run_reps(cfg, rep_fn, fault_hook)

    alphas = np.full((cfg.reps, k), np.nan)
    betas = np.full((cfg.reps, k - 1), np.nan)
    for row in rows:
        rep_s, i_s, a_s, b_s = row.split(",")
        rep_i, i_i = int(rep_s), int(i_s)
        alphas[rep_i, i_i] = float(a_s)
        if b_s:
            betas[rep_i, i_i] = float(b_s)

    cert, norm_a, cert_note = _certificate_for(cfg, eigs, op, j=k)
    med_a = np.median(alphas, axis=0)
    med_b = np.median(betas, axis=0)
    q1_a, q3_a = np.percentile(alphas, [25, 75], axis=0)
    q1_b, q3_b = np.percentile(betas, [25, 75], axis=0)

    t_grid = [float(t) for t in cfg.thresholds.get("deviation_grid", [0.01, 0.05, 0.1])]
    overlays = []
    dev_stats = []
    for i in range(k - 1):
        for t in t_grid:
            freq_b = float(np.mean(np.abs(betas[:, i] - med_b[i]) > t * norm_a))
            freq_a = float(np.mean(np.abs(alphas[:, i] - med_a[i]) > t * norm_a))
            dev_stats.append({"i": i, "t": t, "freq_alpha": freq_a, "freq_beta": freq_b})
            if cert is not None:
                res = bounds.jacobi_conc_bound(cert.delta, cert.omega, i, t, dim, norm_a)
                overlays.append(
                    _overlay(
                        "jacobi_conc",
                        {"i": i, "t": t, "delta": cert.delta, "omega": cert.omega, "normA": norm_a},
                        res,
                        max(freq_a, freq_b),
                        cfg.reps,
                    )
                )

    stats = {
        "normA": norm_a,
        "median_alpha": [float(x) for x in med_a],
        "median_beta": [float(x) for x in med_b],
        "iqr_alpha": [float(x) for x in (q3_a - q1_a)],
        "iqr_beta": [float(x) for x in (q3_b - q1_b)],
        "deviation_frequencies": dev_stats,
        "certificate": None if cert is None else {"delta": cert.delta, "omega": cert.omega, "j": cert.j},
    }
    notes = {
        "certificate": cert_note,
        "goe_convention": "offdiagonal variance 1/n, diagonal variance 2/n; spectrum edge near +/-2",
    }
    return RunSummary(
        kind=cfg.kind,
        config=cfg.to_dict(),
        seed=cfg.master_seed,
        statistics=stats,
        bound_overlays=overlays,
        rows=rows,
        csv_header=CSV_HEADERS["concentration"],
        notes=notes,
    )


def run_outlier(cfg: ExperimentConfig, fault_hook=None) -> RunSummary:
    """Detection rate of the spectrum's outlier as a function of iteration count."""
    if cfg.kind != "outlier":
        raise ValueError("config kind must be 'outlier'")
    if cfg.spectrum.get("kind") != "grid-plus-outliers":
        raise ValueError("outlier experiment requires a grid-plus-outliers spectrum")
    ks = cfg.k_values()
    if not ks:
        raise ValueError("outlier requires k or k_list")
    _, eigs = build_spectrum(cfg)
    spectrum = Spectrum(eigs)
    dim = eigs.size
    level = float(cfg.thresholds["level"])

    def rep_fn(rep: int) -> list:
        u = sample_sphere(dim, derive_rng(cfg.master_seed, rep, "u"))
        mu = spectral_measure(spectrum, u)
        rows = []
        for kk in ks:
            jac = stieltjes(mu, kk)
            top = float(poly_roots(jac)[0])
            rows.append(f"{rep},{kk},{top!r}")
        return rows

    rows = _run_reps(cfg, rep_fn, fault_hook)

    tops: dict = {kk: [] for kk in ks}
    for row in rows:
        rep_s, k_s, top_s = row.split(",")
        tops[int(k_s)].append(float(top_s))
    rates = {kk: float(np.mean(np.array(v) > level)) for kk, v in tops.items()}

    grid_top = float(np.max(eigs[eigs <= min(cfg.spectrum.get("outliers", [np.inf]))]))
    r_level = float(cfg.thresholds.get("R", grid_top))
    m = int(np.sum(eigs > r_level))
    g = float(np.max(eigs) - r_level)
    kappa = level - r_level
    c = float(cfg.thresholds.get("c", 0.25))
    cert, norm_a, cert_note = _certificate_for(cfg, eigs, None, j=max(ks))
    overlays = []
    refvals = {}
    if cert is not None and kappa > 0:
        diam = float(eigs.max() - eigs.min())
        ref_iters = bounds.outlier_max_iters(
            j=cert.j, M=diam, omega=cert.omega, c=c, n=dim, kappa=kappa, delta=cert.delta, m=m, g=g
        )
        refvals["outlier_max_iters"] = ref_iters.as_dict()
        fail = bounds.outlier_fail_prob(cert.delta, c, dim)
        refvals["outlier_fail_prob"] = fail.as_dict()
        for kk in ks:
            if kk <= ref_iters.value:
                overlays.append(
                    _overlay(
                        "outlier_fail",
                        {"k": kk, "delta": cert.delta, "c": c},
                        fail,
                        rates[kk],
                        cfg.reps,
                    )
                )

    stats = {
        "detection_rate": {str(kk): rates[kk] for kk in ks},
        "level": level,
        "R": r_level,
        "kappa": kappa,
        "m": m,
        "g": g,
        "normA": norm_a,
        "certificate": None if cert is None else {"delta": cert.delta, "omega": cert.omega, "j": cert.j},
        "reference_values": refvals,
    }
    return RunSummary(
        kind=cfg.kind,
        config=cfg.to_dict(),
        seed=cfg.master_seed,
        statistics=stats,
        bound_overlays=overlays,
        rows=rows,
        csv_header=CSV_HEADERS["outlier"],
        notes={"certificate": cert_note},
    )


def run_location(cfg: ExperimentConfig, fault_hook=None) -> RunSummary:
    """Ritz values against the roots for the limiting measure's Jacobi matrix."""
    if cfg.kind != "location":
        raise ValueError("config kind must be 'location'")
    (k,) = cfg.k_values() or (None,)
    if k is None:
        raise ValueError("location requires k")
    op, eigs = build_spectrum(cfg)
    dim = op.n if op is not None else eigs.size
    spectrum = Spectrum(eigs) if eigs is not None else None

    ref_cfg = cfg.reference or {"kind": "semicircle", "center": 0.0, "radius": 2.0}
    if ref_cfg["kind"] == "semicircle":
        ref = ContinuousRef.semicircle(float(ref_cfg.get("center", 0.0)), float(ref_cfg.get("radius", 2.0)))
    elif ref_cfg["kind"] == "uniform":
        ref = ContinuousRef.uniform(float(ref_cfg["a"]), float(ref_cfg["b"]))
    else:
        raise ValueError(f"unsupported reference kind {ref_cfg['kind']!r}")
    jac_ref = reference_jacobi(ref, k)
    ref_roots = poly_roots(jac_ref)

    def rep_fn(rep: int) -> list:
        u = sample_sphere(dim, derive_rng(cfg.master_seed, rep, "u"))
        if op is not None:
            jac = lanczos_run(op, u, k, reorth="full", store_basis=False).jacobi
        else:
            jac = stieltjes(spectral_measure(spectrum, u), k)
        ritz = poly_roots(jac)
        return [f"{rep},{i},{float(ritz[i])!r}" for i in range(ritz.size)]

    rows = _run_reps(cfg, rep_fn, fault_hook)

    ritz = np.full((cfg.reps, k), np.nan)
    for row in rows:
        rep_s, i_s, r_s = row.split(",")
        ritz[int(rep_s), int(i_s)] = float(r_s)

    mean_r = np.nanmean(ritz, axis=0)
    std_r = np.nanstd(ritz, axis=0)
    # tridiagonal split bound on ||J_k(u) - J_k(mu)||: max|da| + 2 max|db|
    # recomputed per rep against the reference matrix
    cert, norm_a, cert_note = _certificate_for(cfg, eigs, op, j=k)
    jdiff = []
    for rep in range(cfg.reps):
        u = sample_sphere(dim, derive_rng(cfg.master_seed, rep, "u"))
        if op is not None:
            jac = lanczos_run(op, u, k, reorth="full", store_basis=False).jacobi
        else:
            jac = stieltjes(spectral_measure(spectrum, u), k)
        da = np.abs(jac.alpha - jac_ref.alpha[: jac.k]).max()
        db = np.abs(jac.beta - jac_ref.beta[: jac.k - 1]).max() if jac.k > 1 else 0.0
        jdiff.append(float(da + 2.0 * db))
    jdiff = np.array(jdiff)

    root_err = float(np.abs(mean_r - ref_roots[: mean_r.size]).max())
    overlays = []
    if cert is not None:
        for t in [float(t) for t in cfg.thresholds.get("deviation_grid", [0.05, 0.1])]:
            dev = np.abs(ritz - np.median(ritz, axis=0)).max(axis=1)
            freq = float(np.mean(dev > t * norm_a))
            res = bounds.ritz_conc_bound(cert.delta, cert.omega, k, t, dim, norm_a)
            overlays.append(
                _overlay(
                    "ritz_conc",
                    {"k": k, "t": t, "delta": cert.delta, "omega": cert.omega, "normA": norm_a},
                    res,
                    freq,
                    cfg.reps,
                )
            )

    stats = {
        "normA": norm_a,
        "mean_ritz": [float(x) for x in mean_r],
        "std_ritz": [float(x) for x in std_r],
        "reference_roots": [float(x) for x in ref_roots],
        "max_mean_root_error": root_err,
        "jacobi_diff_split_quantiles": {
            "q50": float(np.median(jdiff)),
            "q90": float(np.quantile(jdiff, 0.9)),
            "max": float(jdiff.max()),
        },
        "certificate": None if cert is None else {"delta": cert.delta, "omega": cert.omega, "j": cert.j},
    }
    return RunSummary(
        kind=cfg.kind,
        config=cfg.to_dict(),
        seed=cfg.master_seed,
        statistics=stats,
        bound_overlays=overlays,
        rows=rows,
        csv_header=CSV_HEADERS["location"],
        notes={"certificate": cert_note},
    )


def run_kolmogorov(cfg: ExperimentConfig, fault_hook=None) -> RunSummary:
    """Distribution of Kol(mu^u, mu_n) over repetitions."""
    if cfg.kind != "kolmogorov":
        raise ValueError("config kind must be 'kolmogorov'")
    _, eigs = build_spectrum(cfg)
    if eigs is None:
        raise ValueError("kolmogorov experiment needs an explicit spectrum")
    spectrum = Spectrum(eigs)
    empirical = spectrum.empirical_measure()
    dim = eigs.size

    def rep_fn(rep: int) -> list:
        u = sample_sphere(dim, derive_rng(cfg.master_seed, rep, "u"))
        kol = kolmogorov(spectral_measure(spectrum, u), empirical)
        return [f"{rep},{kol!r}"]

    rows = _run_reps(cfg, rep_fn, fault_hook)
    kols = np.array([float(r.split(",")[1]) for r in rows])
    threshold = dim ** (-0.25)
    exceed = float(np.mean(kols > threshold))
    bound_raw = float(np.exp(-(dim**0.25) / 8.0))
    res = bounds.BoundResult(value=min(bound_raw, 1.0), raw=bound_raw, clamped=bool(bound_raw > 1.0), terms={})
    overlays = [
        _overlay("kol_exceedance", {"threshold": threshold, "n": dim}, res, exceed, cfg.reps)
    ]
    stats = {
        "threshold": threshold,
        "exceedance_frequency": exceed,
        "kol_quantiles": {
            "q50": float(np.median(kols)),
            "q90": float(np.quantile(kols, 0.9)),
            "max": float(kols.max()),
        },
    }
    return RunSummary(
        kind=cfg.kind,
        config=cfg.to_dict(),
        seed=cfg.master_seed,
        statistics=stats,
        bound_overlays=overlays,
        rows=rows,
        csv_header=CSV_HEADERS["kolmogorov"],
        notes={},
    )


def run_incompressibility(cfg: ExperimentConfig, fault_hook=None) -> RunSummary:
    """Monte Carlo frequency of (delta, delta/2)-compressibility versus the closed form."""
    if cfg.kind != "incompressibility":
        raise ValueError("config kind must be 'incompressibility'")
    delta = float(cfg.thresholds.get("delta", 1.0 / 50.0))
    n_list = [int(x) for x in cfg.thresholds.get("n_list", [cfg.n])]

    def rep_fn(rep: int) -> list:
        rows = []
        for nn in n_list:
            u = sample_sphere(nn, derive_rng(cfg.master_seed, rep, f"u{nn}"))
            rows.append(f"{rep},{nn},{smallest_mass(u, delta)!r}")
        return rows

    rows = _run_reps(cfg, rep_fn, fault_hook)
    masses: dict = {nn: [] for nn in n_list}
    for row in rows:
        _, n_s, m_s = row.split(",")
        masses[int(n_s)].append(float(m_s))

    overlays = []
    freq = {}
    for nn in n_list:
        arr = np.array(masses[nn])
        compressible = float(np.mean(arr <= delta / 2.0))
        freq[str(nn)] = compressible
        raw = 2.0 * np.exp(-delta * delta * nn / 32.0)
        res = bounds.BoundResult(value=float(min(raw, 1.0)), raw=float(raw), clamped=bool(raw > 1.0), terms={})
        overlays.append(
            _overlay("compressibility", {"n": nn, "delta": delta, "eps": delta / 2.0}, res, compressible, cfg.reps)
        )
    stats = {"delta": delta, "compressible_frequency": freq}
    return RunSummary(
        kind=cfg.kind,
        config=cfg.to_dict(),
        seed=cfg.master_seed,
        statistics=stats,
        bound_overlays=overlays,
        rows=rows,
        csv_header=CSV_HEADERS["incompressibility"],
        notes={},
    )


def run_ritzvec(cfg: ExperimentConfig, fault_hook=None) -> RunSummary:
    """Angles between Ritz vectors from paired independent runs."""
    if cfg.kind != "ritzvec":
        raise ValueError("config kind must be 'ritzvec'")
    (k,) = cfg.k_values() or (None,)
    if k is None:
        raise ValueError("ritzvec requires k")
    op, eigs = build_spectrum(cfg)
    if op is None:
        op = diagonal_operator(eigs)
    dim = op.n

    def one(pair: int, tag: str):
        u = sample_sphere(dim, derive_rng(cfg.master_seed, pair, tag))
        out = lanczos_run(op, u, k, reorth="full", store_basis=True)
        return out.ritz_values, ritz_vectors(out)

    def rep_fn(pair: int) -> list:
        ra, va = one(pair, "ua")
        rb, vb = one(pair, "ub")
        kk = min(ra.size, rb.size)
        rows = []
        for i in range(kk):
            cos = abs(float(np.dot(va[i], vb[i])))
            cos = min(cos, 1.0)
            sin_theta = float(np.sqrt(max(0.0, 1.0 - cos * cos)))
            mean_r = 0.5 * (ra[:kk] + rb[:kk])
            gaps = np.abs(mean_r - mean_r[i])
            gaps[i] = np.inf
            gap = float(gaps.min())
            rows.append(f"{pair},{i},{sin_theta!r},{gap!r}")
        return rows

    rows = _run_reps(cfg, rep_fn, fault_hook)
    per_index: dict = {}
    for row in rows:
        pair_s, i_s, s_s, g_s = row.split(",")
        per_index.setdefault(int(i_s), []).append((float(s_s), float(g_s)))

    c = float(cfg.thresholds.get("c", 0.25))
    cert, norm_a, cert_note = _certificate_for(cfg, eigs, op if op.kind == "dense" else None, j=k)
    overlays = []
    stats_idx = {}
    for i, vals in sorted(per_index.items()):
        sins = np.array([v[0] for v in vals])
        gaps = np.array([v[1] for v in vals])
        med_gap = float(np.median(gaps))
        entry = {
            "median_sin": float(np.median(sins)),
            "q90_sin": float(np.quantile(sins, 0.9)),
            "median_gap": med_gap,
        }
        if cert is not None and med_gap > 0:
            res = bounds.ritz_vector_bound(cert.delta, cert.omega, k, med_gap, c, dim, norm_a)
            threshold = res.terms["sin_threshold"]
            freq = float(np.mean(sins >= threshold)) if threshold <= 1.0 else 0.0
            overlays.append(
                _overlay(
                    "ritz_vector",
                    {"i": i, "k": k, "c": c, "gap_eps": med_gap, "sin_threshold": threshold},
                    res,
                    freq,
                    len(vals),
                )
            )
            entry["sin_threshold"] = threshold
        elif med_gap <= 0:
            entry["degenerate_gap"] = True
        stats_idx[str(i)] = entry

    stats = {"per_index": stats_idx, "normA": norm_a,
             "certificate": None if cert is None else {"delta": cert.delta, "omega": cert.omega, "j": cert.j}}
    return RunSummary(
        kind=cfg.kind,
        config=cfg.to_dict(),
        seed=cfg.master_seed,
        statistics=stats,
        bound_overlays=overlays,
        rows=rows,
        csv_header=CSV_HEADERS["ritzvec"],
        notes={"certificate": cert_note},
    )


RUNNERS = {
    "concentration": run_concentration,
    "outlier": run_outlier,
    "location": run_location,
    "kolmogorov": run_kolmogorov,
    "incompressibility": run_incompressibility,
    "ritzvec": run_ritzvec,
}


def run(cfg: ExperimentConfig, fault_hook=None) -> RunSummary:
    return RUNNERS[cfg.kind](cfg, fault_hook=fault_hook)


def persist(summary: RunSummary, out_dir: str, svg: bool = False) -> dict:
    """Write runs.csv and summary.json (and optional histogram SVGs) atomically.

    Rerunning with the same config and seed reproduces byte-identical
    CSVs.  Returns the written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "runs.csv")
    _atomic_write(csv_path, summary.csv_header + "\n" + "".join(r + "\n" for r in summary.rows))
    json_path = os.path.join(out_dir, "summary.json")
    _atomic_write(json_path, json.dumps(summary.to_json_dict(), sort_keys=True, indent=2) + "\n")
    written = {"runs": csv_path, "summary": json_path, "svg": []}
    if svg:
        from .svg import emit_svg

        for name, values in _histogram_series(summary):
            path = os.path.join(out_dir, f"hist_{name}.svg")
            emit_svg(values, path, title=name)
            written["svg"].append(path)
    return written


def _histogram_series(summary: RunSummary):
    """Column picks worth plotting, per experiment kind."""
    rows = [r.split(",") for r in summary.rows]
    if summary.kind == "concentration":
        indices = {int(r[1]) for r in rows}
        for i in sorted(indices):
            vals = [float(r[3]) for r in rows if int(r[1]) == i and r[3] != ""]
            if vals:
                yield f"beta_{i}", np.array(vals)
    elif summary.kind == "outlier":
        ks = sorted({int(r[1]) for r in rows})
        for kk in ks:
            yield f"top_ritz_k{kk}", np.array([float(r[2]) for r in rows if int(r[1]) == kk])
    elif summary.kind == "location":
        yield "ritz_values", np.array([float(r[2]) for r in rows])
    elif summary.kind == "kolmogorov":
        yield "kol", np.array([float(r[1]) for r in rows])
    elif summary.kind == "incompressibility":
        yield "smallest_mass", np.array([float(r[2]) for r in rows])
    elif summary.kind == "ritzvec":
        yield "sin_theta", np.array([float(r[2]) for r in rows])
