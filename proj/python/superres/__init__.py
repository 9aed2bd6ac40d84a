"""Gridless line-spectral estimation.

Complex data are numpy arrays; observed rows (``omega``) are 1-based.
"""

from ._core import (
    DegenerateWeight,
    FullRank,
    InfeasibleDomain,
    InfeasibleSeparation,
    InvalidArgument,
    NonConvergence,
    ReconstructionFailure,
    SuperresError,
    anm,
    atomic_norm,
    draw_mixture,
    draw_sampling_pattern,
    match,
    music,
    noise_ball_radius,
    ram,
    sparse_metric,
    steering_vector,
    synthesize,
    toeplitz,
    vandermonde,
    wrap_distance,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateWeight",
    "FullRank",
    "InfeasibleDomain",
    "InfeasibleSeparation",
    "InvalidArgument",
    "NonConvergence",
    "ReconstructionFailure",
    "SuperresError",
    "anm",
    "atomic_norm",
    "draw_mixture",
    "draw_sampling_pattern",
    "match",
    "music",
    "noise_ball_radius",
    "ram",
    "sparse_metric",
    "steering_vector",
    "synthesize",
    "toeplitz",
    "vandermonde",
    "wrap_distance",
]
