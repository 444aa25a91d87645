"""Decomposition of truncated multivariate moment sequences.

Given the moments sigma_alpha, |alpha| <= d, of an unknown sum of
weighted exponentials, the package recovers the number of terms, the
complex frequency vectors and the complex weights through truncated
Hankel matrices, their SVD, and the eigenstructure of the induced
multiplication operators, with optional geometric rescaling and Newton
refinement around the spectral estimate.
"""

__version__ = "0.1.0"

from .decompose import (
    DecomposeOptions,
    DecomposeResult,
    decompose,
    joint_eigenvectors,
    multiplication_matrices,
    numerical_rank,
    recover_weights,
)
from .errors import MultipronyError, NumericFailure, UsageError
from .hankel import (
    HankelMatrix,
    build_hankel,
    build_shifted_hankel,
    degree_split,
    dump_matrix,
    moment_matrix,
)
from .kernels import EigResult, SvdResult, eig, svd
from .metrics import ErrorReport, match_and_score
from .model import (
    InstanceSpec,
    PerturbationSpec,
    PolyExpModel,
    eval_moment,
    generate_moments,
    load_model,
    perturb,
    sample_instance,
    sort_terms,
    store_model,
)
from .moments import (
    MomentSequence,
    MonomialSet,
    enumerate_monomials,
    load_moments,
    simplex_size,
    store_moments,
)
from .newton import (
    NewtonState,
    RefineResult,
    gradient_and_jacobian,
    make_state,
    pack,
    refine,
    residual,
    unpack,
)
from .pipeline import PipelineResult, resolve_scale, run_pipeline
from .rescale import RescaleFactor, scale_factor, scale_moments, unscale_model

__all__ = [
    "DecomposeOptions",
    "DecomposeResult",
    "EigResult",
    "ErrorReport",
    "HankelMatrix",
    "InstanceSpec",
    "MomentSequence",
    "MonomialSet",
    "MultipronyError",
    "NewtonState",
    "NumericFailure",
    "PerturbationSpec",
    "PipelineResult",
    "PolyExpModel",
    "RefineResult",
    "RescaleFactor",
    "SvdResult",
    "UsageError",
    "build_hankel",
    "build_shifted_hankel",
    "decompose",
    "degree_split",
    "dump_matrix",
    "eig",
    "enumerate_monomials",
    "eval_moment",
    "generate_moments",
    "gradient_and_jacobian",
    "joint_eigenvectors",
    "load_model",
    "load_moments",
    "make_state",
    "match_and_score",
    "moment_matrix",
    "multiplication_matrices",
    "numerical_rank",
    "pack",
    "perturb",
    "recover_weights",
    "refine",
    "residual",
    "resolve_scale",
    "run_pipeline",
    "sample_instance",
    "scale_factor",
    "scale_moments",
    "simplex_size",
    "sort_terms",
    "store_model",
    "store_moments",
    "svd",
    "unpack",
    "unscale_model",
]
