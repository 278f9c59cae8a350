"""Hyperbolic dynamics for non-stationary families of torus maps."""

from .bracket import BracketParams, bracket, calibrate_delta
from .errors import HyplabError, SolverError, ValidationError
from .family import (
    FamilySpec,
    LinearToral,
    PerturbedLinear,
    cat_family,
    compose,
    identity_family,
    orbit,
    perturbed_cat_family,
    shear_family,
)
from .hyperbolicity import c2_certificate, estimate_constants, splitting_at
from .manifolds import local_manifold
from .markov import build_partition, check_markov, dense_set, eigen_partition, theta, transition_matrices
from .shadowing import choose_params, noisy_orbit, shadow, shadow_oracle_linear, validate_pseudo_orbit
from .torus import TorusPoint, TorusVector, distance

__all__ = [
    "BracketParams",
    "FamilySpec",
    "HyplabError",
    "LinearToral",
    "PerturbedLinear",
    "SolverError",
    "TorusPoint",
    "TorusVector",
    "ValidationError",
    "bracket",
    "build_partition",
    "c2_certificate",
    "calibrate_delta",
    "cat_family",
    "check_markov",
    "choose_params",
    "compose",
    "dense_set",
    "distance",
    "eigen_partition",
    "estimate_constants",
    "identity_family",
    "local_manifold",
    "orbit",
    "perturbed_cat_family",
    "noisy_orbit",
    "shadow",
    "shadow_oracle_linear",
    "shear_family",
    "splitting_at",
    "theta",
    "transition_matrices",
    "validate_pseudo_orbit",
]
