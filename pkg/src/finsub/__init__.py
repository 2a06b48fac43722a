"""Homogeneous nonlinear lifts, subduced Minkowski norms and Finsler submersions."""

from .errors import (
    DimensionMismatch,
    FinsubError,
    InvalidNorm,
    MaxIterations,
    NonConvexEncountered,
    NotInGroup,
    NotInvariant,
    RankDeficient,
    SingularKilling,
    TangencyViolated,
    ZeroVector,
)
from .minksub import (
    LiftSolution,
    LinearSurjection,
    SolverConfig,
    SubducedNorm,
    brute_force_subduced,
    homogeneity_defect,
    lift,
    make_surjection,
    projection_surjection,
    subduced_norm,
    verify_submersion,
)
from .norms import NormSpec, VerificationReport, fundamental_defect, verify_minkowski

__version__ = "0.1.0"
