"""End-to-end decomposition pipeline: rescale, decompose, refine, unscale.

This is the one entry point the CLI, the HTTP service and the
experiment harness all share, so every surface applies the stages in
the same order: estimate (or accept) a scale factor, decompose the
scaled sequence, optionally Newton-refine against the same scaled data,
then map the frequencies back to the original scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .decompose import DecomposeOptions, DecomposeResult, decompose
from .errors import ScaleEstimateError, UsageError
from .model import PolyExpModel, sort_terms
from .moments import MomentSequence
from .newton import RefineResult, refine
from .rescale import scale_factor, scale_moments, unscale_model


@dataclass(frozen=True)
class PipelineResult:
    """Everything one decomposition run produced.

    model is the final estimate (refined when Newton ran); model_raw is
    the plain spectral estimate before refinement, always present.
    """

    model: PolyExpModel
    model_raw: PolyExpModel
    model_refined: PolyExpModel | None
    lam: float
    rank: int
    decomposition: DecomposeResult
    refinement: RefineResult | None


def resolve_scale(seq: MomentSequence, rescale) -> float:
    """Turn a rescale request ('auto', 'off' or a number) into lambda."""
    if rescale == "auto":
        try:
            return scale_factor(seq).lam
        except ScaleEstimateError:
            return 1.0
    if rescale == "off":
        return 1.0
    try:
        lam = float(rescale)
    except (TypeError, ValueError):
        raise UsageError(
            f"rescale must be 'auto', 'off' or a number, got {rescale!r}"
        ) from None
    if lam == 0 or not math.isfinite(lam):
        raise UsageError(f"explicit scale factor must be finite and non-zero, got {lam}")
    return lam


def run_pipeline(
    seq: MomentSequence,
    *,
    epsilon: float = 1e-6,
    seed: int = 0,
    rescale="auto",
    newton_iters: int = 0,
    newton_damping: bool = True,
    d1: int | None = None,
    d2: int | None = None,
    rank: int | None = None,
) -> PipelineResult:
    """Run the full decomposition pipeline on a moment sequence."""
    if newton_iters < 0:
        raise UsageError(f"newton iterations must be non-negative, got {newton_iters}")
    lam = resolve_scale(seq, rescale)
    work = scale_moments(seq, lam)
    dec = decompose(
        work,
        DecomposeOptions(epsilon=epsilon, seed=seed, d1=d1, d2=d2, rank_override=rank),
    )
    model_raw = unscale_model(dec.model, lam)
    refinement = None
    model_refined = None
    if newton_iters > 0:
        refinement = refine(
            dec.model, work, max_iters=newton_iters, damping=newton_damping
        )
        model_refined = sort_terms(unscale_model(refinement.model, lam))
    return PipelineResult(
        model=model_refined if model_refined is not None else model_raw,
        model_raw=model_raw,
        model_refined=model_refined,
        lam=lam,
        rank=dec.rank,
        decomposition=dec,
        refinement=refinement,
    )
