"""Thin wrappers around the dense SVD and eigendecomposition.

The wrappers pin down the conventions the decomposition relies on:
singular values sorted non-increasing, V returned as V* (so rows of
Vstar are right singular vectors), eigenvector columns normalized to
unit length with a deterministic phase, and an explicit eigengap so
callers can react to clustered spectra.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SvdConvergenceError, UsageError

# Relative eigengap below which a matrix is flagged as near defective.
DEFECT_GAP = 1e-8


@dataclass(frozen=True)
class SvdResult:
    """Full SVD A = U @ diag(S) @ Vstar with rectangular diag."""

    U: np.ndarray
    S: np.ndarray
    Vstar: np.ndarray

    def left_basis(self, r: int) -> np.ndarray:
        """First r left singular vectors as columns."""
        return self.U[:, :r]

    def right_basis(self, r: int) -> np.ndarray:
        """First r right singular vectors as columns (conjugated rows of Vstar)."""
        return self.Vstar[:r, :].conj().T


def svd(matrix: np.ndarray) -> SvdResult:
    """Full singular value decomposition of a 2-d complex array."""
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.size == 0:
        raise UsageError(f"svd needs a non-empty 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise UsageError("svd input contains non-finite entries")
    try:
        u, s, vstar = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(f"svd did not converge: {exc}") from exc
    return SvdResult(U=u, S=s, Vstar=vstar)


@dataclass(frozen=True)
class EigResult:
    """Eigendecomposition with unit, phase-fixed eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray
    eigengap: float


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    out = np.empty_like(vectors)
    for j in range(vectors.shape[1]):
        v = vectors[:, j]
        nrm = np.linalg.norm(v)
        if nrm == 0:
            out[:, j] = v
            continue
        v = v / nrm
        k = int(np.argmax(np.abs(v)))
        phase = v[k] / abs(v[k])
        out[:, j] = v * phase.conjugate()
    return out


def eig(matrix: np.ndarray) -> EigResult:
    """Eigendecomposition of a square complex matrix.

    Columns of `vectors` have unit 2-norm and their largest-modulus
    component made real positive, so repeated calls agree bit for bit.
    A RuntimeWarning is issued when the minimal eigenvalue gap falls
    below DEFECT_GAP relative to the Frobenius norm.
    """
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.size == 0:
        raise UsageError(f"eig needs a non-empty square array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise UsageError("eig input contains non-finite entries")
    values, vectors = np.linalg.eig(a)
    vectors = _fix_phase(vectors)
    m = len(values)
    if m == 1:
        gap = np.inf
    else:
        diffs = np.abs(values[:, None] - values[None, :])
        gap = float(np.min(diffs[~np.eye(m, dtype=bool)]))
    scale = float(np.linalg.norm(a))
    if scale > 0 and gap < DEFECT_GAP * scale:
        warnings.warn(
            f"eigenvalue gap {gap:.3e} below {DEFECT_GAP:.0e} of matrix norm "
            f"{scale:.3e}; matrix may be defective",
            RuntimeWarning,
            stacklevel=2,
        )
    return EigResult(values=values, vectors=vectors, eigengap=gap)
