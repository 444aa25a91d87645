"""Geometric rescaling of moment sequences.

Frequencies of large modulus make the top-degree moments dominate the
Hankel matrix and destroy its numerical rank.  The cure is to estimate
the typical frequency modulus m from the ratio of the two highest
degree slices, substitute y -> lambda * y with lambda = 1/m (which maps
sigma_alpha to lambda^|alpha| sigma_alpha), decompose the well-scaled
sequence, and divide the recovered frequencies by lambda.  Weights are
unchanged by the substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ScaleEstimateError, UsageError
from .model import PolyExpModel
from .moments import MomentSequence, degree

# Denominator slices below this are treated as numerically zero.
_ZERO_SLICE = 1e-300


@dataclass(frozen=True)
class RescaleFactor:
    """Estimated modulus m and the substitution factor lambda = 1/m."""

    m: float
    lam: float


def scale_factor(seq: MomentSequence) -> RescaleFactor:
    """Estimate the frequency modulus from the top two degree slices.

    m = max_{|alpha| = d} |sigma_alpha| / max_{|alpha| = d-1} |sigma_alpha|.

    Raises ScaleEstimateError when the denominator slice is numerically
    zero or the ratio is not a usable positive float; callers fall back
    to lambda = 1 in that case.
    """
    if seq.d < 1:
        raise UsageError(f"scale estimation needs degree at least 1, got d={seq.d}")
    top = 0.0
    below = 0.0
    for alpha, value in seq.items():
        k = degree(alpha)
        if k == seq.d:
            top = max(top, abs(value))
        elif k == seq.d - 1:
            below = max(below, abs(value))
    if below < _ZERO_SLICE:
        raise ScaleEstimateError(
            f"degree {seq.d - 1} slice is numerically zero ({below:.3e})"
        )
    m = top / below
    if not (math.isfinite(m) and m > 0):
        raise ScaleEstimateError(f"modulus estimate {m} is not a positive float")
    return RescaleFactor(m=m, lam=1.0 / m)


def scale_moments(seq: MomentSequence, lam: float) -> MomentSequence:
    """Substituted sequence lambda^|alpha| * sigma_alpha."""
    if lam == 0 or not math.isfinite(lam):
        raise UsageError(f"scale factor must be finite and non-zero, got {lam}")
    if lam == 1.0:
        return seq
    powers = np.array([lam**k for k in range(seq.d + 1)])
    values = {alpha: powers[degree(alpha)] * v for alpha, v in seq.items()}
    return seq.with_values(values)


def unscale_model(model: PolyExpModel, lam: float) -> PolyExpModel:
    """Undo the substitution on a recovered model: xi -> xi / lambda."""
    if lam == 0 or not math.isfinite(lam):
        raise UsageError(f"scale factor must be finite and non-zero, got {lam}")
    if lam == 1.0:
        return model
    return PolyExpModel(model.n, model.weights.copy(), model.frequencies / lam)
