"""Truncated Hankel matrices of a moment sequence.

The matrix of the Hankel operator restricted to monomials of degree
d1 (rows) and d2 (columns) has entries sigma_{alpha + beta}.  Shifted
variants multiply the column monomial by one variable first, giving
entries sigma_{alpha + beta + e_i}; those are the raw material for the
multiplication operators of the underlying quotient algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDegreeError, UsageError
from .moments import MomentSequence, MonomialSet, degree, enumerate_monomials


def degree_split(d: int) -> tuple[int, int]:
    """Split d - 1 into the default (rows, columns) degree pair.

    Returns (ceil((d-1)/2), floor((d-1)/2)), so one degree of the data
    is kept in reserve for the shifted matrices.
    """
    if d < 1:
        raise UsageError(f"need degree at least 1 to split, got d={d}")
    return (d // 2, (d - 1) // 2)


@dataclass(frozen=True)
class HankelMatrix:
    """A moment matrix together with its row and column monomials.

    shift is 0 for the plain matrix and the 1-based variable index for
    a shifted one.
    """

    rows: MonomialSet
    cols: MonomialSet
    values: np.ndarray
    shift: int = 0


def moment_matrix(seq: MomentSequence, rows, cols, shift_var: int = 0) -> np.ndarray:
    """Matrix [sigma_{alpha + beta (+ e_shift)}] over explicit index lists.

    Parameters
    ----------
    seq : MomentSequence
    rows, cols : iterables of multi-indices
    shift_var : int
        0 for no shift, else the 1-based variable whose unit index is
        added to every entry.
    """
    rows = [tuple(a) for a in rows]
    cols = [tuple(b) for b in cols]
    if shift_var < 0 or shift_var > seq.n:
        raise UsageError(f"shift variable must be in 0..{seq.n}, got {shift_var}")
    offset = tuple(int(k == shift_var - 1) for k in range(seq.n)) if shift_var else None
    need = max((degree(a) for a in rows), default=0) + max(
        (degree(b) for b in cols), default=0
    ) + (1 if shift_var else 0)
    if need > seq.d:
        raise InsufficientDegreeError(
            f"matrix needs moments of degree {need}, sequence stops at {seq.d}"
        )
    out = np.empty((len(rows), len(cols)), dtype=np.complex128)
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            idx = tuple(x + y for x, y in zip(a, b))
            if offset is not None:
                idx = tuple(x + y for x, y in zip(idx, offset))
            out[i, j] = seq[idx]
    return out


def build_hankel(seq: MomentSequence, d1: int, d2: int) -> HankelMatrix:
    """Hankel matrix over the full monomial simplices of degrees d1, d2."""
    if d1 < 0 or d2 < 0:
        raise UsageError(f"degrees must be non-negative, got ({d1}, {d2})")
    if d1 + d2 > seq.d:
        raise InsufficientDegreeError(
            f"Hankel block of degrees ({d1}, {d2}) needs moments up to "
            f"{d1 + d2}, sequence stops at {seq.d}"
        )
    rows = enumerate_monomials(seq.n, d1)
    cols = enumerate_monomials(seq.n, d2)
    values = moment_matrix(seq, rows, cols)
    return HankelMatrix(rows=rows, cols=cols, values=values, shift=0)


def build_shifted_hankel(seq: MomentSequence, d1: int, d2: int, var: int) -> HankelMatrix:
    """Hankel matrix of the sequence shifted by variable `var` (1-based)."""
    if var < 1 or var > seq.n:
        raise UsageError(f"variable index must be in 1..{seq.n}, got {var}")
    if d1 < 0 or d2 < 0:
        raise UsageError(f"degrees must be non-negative, got ({d1}, {d2})")
    if d1 + d2 + 1 > seq.d:
        raise InsufficientDegreeError(
            f"shifted Hankel block of degrees ({d1}, {d2}) needs moments up "
            f"to {d1 + d2 + 1}, sequence stops at {seq.d}"
        )
    rows = enumerate_monomials(seq.n, d1)
    cols = enumerate_monomials(seq.n, d2)
    values = moment_matrix(seq, rows, cols, shift_var=var)
    return HankelMatrix(rows=rows, cols=cols, values=values, shift=var)


def dump_matrix(matrix: HankelMatrix, path) -> None:
    """Write a matrix as text, one row per line, entries as re:im pairs."""
    with open(path, "w") as fh:
        fh.write(
            f"# rows={len(matrix.rows)} cols={len(matrix.cols)} "
            f"shift={matrix.shift}\n"
        )
        for row in matrix.values:
            fh.write(
                "\t".join(f"{z.real:.16e}:{z.imag:.16e}" for z in row) + "\n"
            )
