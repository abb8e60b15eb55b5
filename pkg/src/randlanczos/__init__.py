"""Randomized Lanczos toolkit.

Spectral measures and Jacobi coefficients of discrete measures, the
Lanczos iteration with configurable reorthogonalization,
equidistribution/incompressibility certificates, closed-form
concentration bounds, and reproducible Monte Carlo experiments.
"""

from .bounds import BoundResult
from .equidist import EquidistCert, check_witness, cluster_cert, falsify, kol_transfer, potential_cert
from .experiments import ExperimentConfig, RunSummary, persist, run
from .lanczos import (
    LanczosOutput,
    LinearOperator,
    callback_operator,
    dense_operator,
    diagonal_operator,
    goe_sample,
    lanczos_run,
    recurrence_residual,
    ritz_vectors,
)
from .measures import (
    ContinuousRef,
    DiscreteMeasure,
    Spectrum,
    affine_pushforward,
    kolmogorov,
    moments,
    moments_via_cdf,
    quantile_discretize,
    spectral_measure,
)
from .orthopoly import (
    HankelData,
    JacobiMatrix,
    eval_orthonormal,
    hankel_dets,
    jacobi_from_hankel,
    leading_coeffs,
    monic_l2_norm,
    poly_roots,
    reference_jacobi,
    stieltjes,
)
from .randomness import chi2_tail_points, derive_rng, head_mass, sample_sphere, smallest_mass

__version__ = "0.1.0"
