"""Closed-form evaluators for the concentration and location inequalities.

Probability bounds clamp into [0, 1] and keep the raw value: at desk
scale several of them are vacuous (raw > 1), and experiments must
distinguish "bound vacuous" from "bound violated".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class BoundResult:
    """Evaluated bound: clamped value, raw value, and a component breakdown."""

    value: float
    raw: float
    clamped: bool
    terms: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"value": self.value, "raw": self.raw, "clamped": self.clamped, "terms": self.terms}


def _exp(x: float) -> float:
    """exp that saturates to inf instead of raising on overflow."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _probability(raw: float, terms: dict) -> BoundResult:
    clamped = raw > 1.0
    return BoundResult(value=min(raw, 1.0), raw=raw, clamped=clamped, terms=terms)


def _base_term(delta: float, n: float) -> float:
    return math.exp(-(min(delta, 1.0 / 50.0) ** 2) * n / 32.0)


def jacobi_conc_bound(delta: float, omega: float, i: int, t: float, n: float, normA: float) -> BoundResult:
    """Deviation bound for a single Jacobi coefficient after i iterations.

    P[|coef - median| > t*normA] <= 2 exp{-min(delta,1/50)^2 n/32}
                                   + 2 exp{-(1/64)(omega/4normA)^{2i} delta^2 t^2 n}.
    """
    _check_common(delta, omega, normA, t)
    sphere = 2.0 * _base_term(delta, n)
    ratio = omega / (4.0 * normA)
    lipschitz = 2.0 * math.exp(-(ratio ** (2 * i)) * delta * delta * t * t * n / 64.0)
    raw = sphere + lipschitz
    return _probability(raw, {"sphere": sphere, "lipschitz": lipschitz, "omega_ratio": ratio})


def ritz_conc_bound(delta: float, omega: float, k: int, t: float, n: float, normA: float) -> BoundResult:
    """Deviation bound for the whole Ritz-value vector after k iterations.

    P[||r(u) - r~||_inf >= t*normA] <= 4k[exp{-min(delta,1/50)^2 n/32}
                                    + exp{-(1/192)(omega/4normA)^{2k} delta^2 t^2 n}].
    """
    _check_common(delta, omega, normA, t)
    sphere = _base_term(delta, n)
    ratio = omega / (4.0 * normA)
    lipschitz = math.exp(-(ratio ** (2 * k)) * delta * delta * t * t * n / 192.0)
    raw = 4.0 * k * (sphere + lipschitz)
    return _probability(raw, {"sphere": sphere, "lipschitz": lipschitz, "prefactor": 4.0 * k})


def ritz_vector_bound(
    delta: float, omega: float, k: int, gap_eps: float, c: float, n: float, normA: float
) -> BoundResult:
    """Angle bound for a Ritz vector against the median Jacobi matrix's.

    Bounds P[sin theta >= 2*normA/(gap_eps * n^c)] by the Ritz-value
    bound with the substitution t = n^{-c}:
    4k[exp{-min(delta,1/50)^2 n/32} + exp{-(1/192)(omega/4normA)^{2k} delta^2 n^{1-2c}}].
    """
    if not 0 <= c < 0.5:
        raise ValueError("c must lie in [0, 1/2)")
    if gap_eps <= 0:
        raise ValueError("gap_eps must be positive")
    _check_common(delta, omega, normA, 0.0)
    sphere = _base_term(delta, n)
    ratio = omega / (4.0 * normA)
    lipschitz = math.exp(-(ratio ** (2 * k)) * delta * delta * (n ** (1.0 - 2.0 * c)) / 192.0)
    raw = 4.0 * k * (sphere + lipschitz)
    threshold = 2.0 * normA / (gap_eps * n**c)
    return _probability(
        raw,
        {"sphere": sphere, "lipschitz": lipschitz, "prefactor": 4.0 * k, "sin_threshold": threshold},
    )


def gamma_bound(omega: float, eps: float, k: int) -> float:
    """Leading-coefficient bound gamma_k(u) <= 1/(omega^k sqrt(eps))."""
    if omega <= 0 or eps <= 0:
        raise ValueError("omega and eps must be positive")
    return 1.0 / (omega**k * math.sqrt(eps))


def lipschitz_bound(i: int, eps: float, omega: float, normA: float) -> float:
    """Global Lipschitz constant of the Jacobi coefficients on the incompressible set.

    L <= 4^{i+2} normA^{i+1} / (omega^i eps).
    """
    if omega <= 0 or eps <= 0 or normA <= 0:
        raise ValueError("omega, eps, normA must be positive")
    return 4.0 ** (i + 2) * normA ** (i + 1) / (omega**i * eps)


def outlier_max_iters(
    j: int, M: float, omega: float, c: float, n: float, kappa: float, delta: float, m: int, g: float
) -> BoundResult:
    """Iteration count below which the top Ritz value misses the outliers.

    k = min{ j, (1/(2 log(M/omega))) (c log n + log(kappa*delta/(2mg))) },
    floored and clamped at 0.  The regime requires n > e^{1/(1-c-alpha)}
    with alpha = log_n(m); outside it the result is flagged.
    """
    if not 0 < c < 0.5:
        raise ValueError("c must lie in (0, 1/2)")
    if M <= omega:
        raise ValueError("need M > omega (diameter above equidistribution scale)")
    if min(kappa, delta, g) <= 0 or m <= 0:
        raise ValueError("kappa, delta, m, g must be positive")
    formula = (c * math.log(n) + math.log(kappa * delta / (2.0 * m * g))) / (2.0 * math.log(M / omega))
    k = max(0, math.floor(min(float(j), formula)))
    alpha = math.log(max(m, 1)) / math.log(n) if n > 1 else float("inf")
    out_of_regime = not (alpha < 1.0 - c and n > math.exp(1.0 / (1.0 - c - alpha)))
    return BoundResult(
        value=float(k),
        raw=formula,
        clamped=formula < 0 or formula > j,
        terms={"formula": formula, "j_cap": j, "alpha": alpha, "out_of_regime": out_of_regime},
    )


def outlier_fail_prob(delta: float, c: float, n: float) -> BoundResult:
    """Failure probability for the outlier-miss statement.

    2 exp{-min(delta,1/50)^2 n/32} + 2 exp{-n^{1-2c}/16}.
    """
    if not 0 < c < 0.5:
        raise ValueError("c must lie in (0, 1/2)")
    if delta <= 0:
        raise ValueError("delta must be positive")
    sphere = 2.0 * _base_term(delta, n)
    tail = 2.0 * math.exp(-(n ** (1.0 - 2.0 * c)) / 16.0)
    return _probability(sphere + tail, {"sphere": sphere, "tail": tail})


def head_mass_bound(alpha: float, c: float, n: float) -> BoundResult:
    """Probability that the first m = n^alpha squared coordinates carry n^{-c} mass.

    exp{-(1/16)(4 n^alpha - 4 sqrt2 n^{(1-c+alpha)/2} + 2 n^{1-c})} + exp{-n^{1-2c}/16},
    valid for alpha < 1 - c.
    """
    if not 0 < c < 0.5:
        raise ValueError("c must lie in (0, 1/2)")
    if alpha >= 1.0 - c:
        raise ValueError("requires alpha < 1 - c")
    first = math.exp(
        -(4.0 * n**alpha - 4.0 * math.sqrt(2.0) * n ** ((1.0 - c + alpha) / 2.0) + 2.0 * n ** (1.0 - c)) / 16.0
    )
    second = math.exp(-(n ** (1.0 - 2.0 * c)) / 16.0)
    return _probability(first + second, {"gaussian": first, "coupling": second})


def incompressibility_bound(delta: float, eps: float, n: float) -> BoundResult:
    """Probability that a uniform unit vector is (delta, eps)-compressible.

    exp{2 delta (1 + log 1/delta) n - (eps/delta - 1)^2 n} + exp{-eps^2 n/8},
    for 0 < eps < delta.
    """
    if not 0 < eps < delta:
        raise ValueError("requires 0 < eps < delta")
    entropy = _exp((2.0 * delta * (1.0 + math.log(1.0 / delta)) - (eps / delta - 1.0) ** 2) * n)
    coupling = math.exp(-eps * eps * n / 8.0)
    return _probability(entropy + coupling, {"entropy": entropy, "coupling": coupling})


def det_perturb_bound(C: float, eps: float, k: int) -> float:
    """Determinant perturbation under column changes: |det A - det B| <= eps k (C+eps)^{k-1}."""
    if C < 0 or eps < 0 or k < 1:
        raise ValueError("need C >= 0, eps >= 0, k >= 1")
    return eps * k * (C + eps) ** (k - 1)


def moment_lipschitz_bound(C: float, k: int, kol: float) -> float:
    """Moment stability across Kolmogorov distance: |m_k(mu) - m_k(nu)| <= 2 C^k Kol."""
    if C < 0 or kol < 0 or k < 0:
        raise ValueError("need C >= 0, kol >= 0, k >= 0")
    return 2.0 * C**k * kol


def _check_common(delta: float, omega: float, normA: float, t: float) -> None:
    if delta <= 0 or omega <= 0 or normA <= 0:
        raise ValueError("delta, omega, normA must be positive")
    if t < 0:
        raise ValueError("t must be >= 0")
    if omega > normA:
        import warnings

        warnings.warn("omega exceeds normA; certificates normally satisfy omega <= ||A||", stacklevel=3)


# registry used by the CLI `bounds eval <name>` subcommand
EVALUATORS = {
    "jacobi_conc": (jacobi_conc_bound, ("delta", "omega", "i", "t", "n", "normA")),
    "ritz_conc": (ritz_conc_bound, ("delta", "omega", "k", "t", "n", "normA")),
    "ritz_vector": (ritz_vector_bound, ("delta", "omega", "k", "gap_eps", "c", "n", "normA")),
    "gamma": (gamma_bound, ("omega", "eps", "k")),
    "lipschitz": (lipschitz_bound, ("i", "eps", "omega", "normA")),
    "outlier_max_iters": (outlier_max_iters, ("j", "M", "omega", "c", "n", "kappa", "delta", "m", "g")),
    "outlier_fail": (outlier_fail_prob, ("delta", "c", "n")),
    "head_mass": (head_mass_bound, ("alpha", "c", "n")),
    "incompressibility": (incompressibility_bound, ("delta", "eps", "n")),
    "det_perturb": (det_perturb_bound, ("C", "eps", "k")),
    "moment_lipschitz": (moment_lipschitz_bound, ("C", "k", "kol")),
}
