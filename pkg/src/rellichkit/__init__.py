"""Numerical verification of curvature-improved Hardy and Rellich inequalities.

The package works on Finsler-Hadamard model spaces: flat Minkowski spaces over
a small catalog of norms and hyperbolic spaces of constant curvature. Radial
test functions reduce every functional to a one-dimensional integral, which
makes the inequalities, their remainder terms and the sharp constants
checkable to quadrature accuracy.
"""

__version__ = "0.1.0"

from .duality import (
    DualNorm,
    ProbeResult,
    k_deflection,
    legendre,
    legendre_dual,
    polar_transform,
    riemannian_probe,
)
from .errors import (
    ConvergenceError,
    DegenerateTensorError,
    DomainError,
    HypothesisError,
    QuadratureError,
    RellichError,
)
from .inequalities import (
    InequalityInstance,
    InequalityReport,
    Which,
    annulus_ratio,
    chain_consistency,
    chain_identity_check,
    constants,
    green_deflection,
    hardy_report,
    rellich1_report,
    rellich2_report,
    report,
)
from .model_spaces import (
    ModelSpace,
    RadialProfile,
    ct,
    d_remainder,
    radial_gradient_norm,
    radial_laplacian,
    remainder_lower_bound,
    sphere_area,
)
from .norms import (
    MinkowskiNorm,
    NormKind,
    bh_normalization,
    evaluate_norm,
    fundamental_tensor,
    norm_derivative,
    unit_ball_volume,
)
from .quadrature import QuadratureResult, QuadratureSpec, integrate, integrate_radial
from .sharpness import SharpnessSweep, extrapolate, extremal_profile, i_tilde, rayleigh_sweep

__all__ = [name for name in dir() if not name.startswith("_")]
