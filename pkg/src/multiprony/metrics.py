"""Error metrics between a reference model and a recovered one.

Recovered terms come in arbitrary order, so the comparison first
matches terms by solving the assignment problem that minimizes the
total frequency distance, then reports the worst matched frequency and
weight errors.  A term-count mismatch short-circuits to an infinite
sentinel rather than comparing unlike models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatchError
from .model import PolyExpModel


@dataclass(frozen=True)
class ErrorReport:
    """Matched errors between a truth model and an estimate.

    err is the larger of the worst frequency distance and the worst
    absolute weight error; rel_err divides each frequency distance by
    the norm of the true frequency first.  permutation[i] is the index
    of the estimated term matched to truth term i (None on a rank
    mismatch, where both errors are +inf).
    """

    err: float
    rel_err: float
    permutation: tuple[int, ...] | None
    freq_errors: tuple[float, ...]
    weight_errors: tuple[float, ...]
    rank_mismatch: bool


def match_and_score(truth: PolyExpModel, estimate: PolyExpModel) -> ErrorReport:
    """Match terms by minimal total frequency distance and score them."""
    if truth.n != estimate.n:
        raise DimensionMismatchError(
            f"models live in different dimensions: {truth.n} vs {estimate.n}"
        )
    if truth.r != estimate.r:
        return ErrorReport(
            err=np.inf,
            rel_err=np.inf,
            permutation=None,
            freq_errors=(),
            weight_errors=(),
            rank_mismatch=True,
        )
    cost = np.linalg.norm(
        truth.frequencies[:, None, :] - estimate.frequencies[None, :, :], axis=2
    )
    _, cols = linear_sum_assignment(cost)  # row indices come back as arange
    perm = tuple(int(c) for c in cols)
    freq_err = np.array([cost[i, perm[i]] for i in range(truth.r)])
    weight_err = np.abs(truth.weights - estimate.weights[list(perm)])
    truth_norms = np.linalg.norm(truth.frequencies, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_freq = np.where(truth_norms > 0, freq_err / truth_norms, np.inf)
        rel_freq = np.where((truth_norms == 0) & (freq_err == 0), 0.0, rel_freq)
    err = float(max(freq_err.max(), weight_err.max()))
    rel_err = float(max(rel_freq.max(), weight_err.max()))
    return ErrorReport(
        err=err,
        rel_err=rel_err,
        permutation=perm,
        freq_errors=tuple(float(x) for x in freq_err),
        weight_errors=tuple(float(x) for x in weight_err),
        rank_mismatch=False,
    )
