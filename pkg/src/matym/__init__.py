"""Gauge fields over matrix algebras with the derivation-based calculus.

Layers, bottom up: matforms (graded differential *-algebra), qriemann
(metric, Hodge star, codifferential, Laplacian, spectra), qbundle
(charged sections and covariant calculus on the trivial U(1) bundle),
fields (actions, field equations, stationary-point solver), cli/verify
(front end and named-check suite).
"""

from .exact import GaussianRational
from .fields import (
    FieldConfiguration,
    FieldReport,
    PolynomialPotential,
    SolverAbort,
    SolverOptions,
    VariationDirection,
    action_gradient_fd,
    analytic_gradient,
    continuity_residual,
    flat_potential,
    gsm_action,
    random_configuration,
    sm_action,
    sm_residuals,
    solve_stationary,
    ym_action,
    ym_residual,
    ymsm_action,
    ymsm_connection_residual,
    ymsm_section_residuals,
)
from .matforms import (
    CONVENTIONS,
    CONVENTIONS_ID,
    DerivationCalculus,
    DiffForm,
    DimensionError,
    dagger,
    differential,
    sort_sign,
    star_involution,
    wedge,
)
from .qbundle import (
    ChargedSection,
    ChargeMismatchError,
    ConnectionDisplacement,
    GaugeConnection,
    QvbForm,
    cov_codifferential,
    cov_derivative,
    cov_laplacian,
    displacement_K,
    qvb_inner,
    s_omega,
    section_inner,
    upsilon,
    upsilon_inv,
)
from .qriemann import (
    GradeError,
    codifferential,
    gram_matrices,
    hodge,
    hodge_inner,
    hodge_inv,
    integral,
    laplacian,
    metric,
    spectrum,
    state,
    write_spectrum_csv,
)
from .verify import run_verification

__version__ = "0.1.0"

__all__ = [
    "CONVENTIONS",
    "CONVENTIONS_ID",
    "ChargeMismatchError",
    "ChargedSection",
    "ConnectionDisplacement",
    "DerivationCalculus",
    "DiffForm",
    "DimensionError",
    "FieldConfiguration",
    "FieldReport",
    "GaugeConnection",
    "GaussianRational",
    "GradeError",
    "PolynomialPotential",
    "QvbForm",
    "SolverAbort",
    "SolverOptions",
    "VariationDirection",
    "action_gradient_fd",
    "analytic_gradient",
    "codifferential",
    "continuity_residual",
    "cov_codifferential",
    "cov_derivative",
    "cov_laplacian",
    "dagger",
    "differential",
    "displacement_K",
    "flat_potential",
    "gram_matrices",
    "gsm_action",
    "hodge",
    "hodge_inner",
    "hodge_inv",
    "integral",
    "laplacian",
    "metric",
    "qvb_inner",
    "random_configuration",
    "run_verification",
    "s_omega",
    "section_inner",
    "sm_action",
    "sm_residuals",
    "solve_stationary",
    "sort_sign",
    "spectrum",
    "star_involution",
    "state",
    "upsilon",
    "upsilon_inv",
    "wedge",
    "write_spectrum_csv",
    "ym_action",
    "ym_residual",
    "ymsm_action",
    "ymsm_connection_residual",
    "ymsm_section_residuals",
]
