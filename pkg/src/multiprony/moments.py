"""Multi-index enumeration and truncated moment sequences.

A truncated moment sequence stores one complex coefficient sigma_alpha
for every multi-index alpha with |alpha| <= d in n variables.  Every
matrix built downstream indexes its rows and columns by the canonical
monomial order fixed here: ascending total degree, and within a degree
lexicographic with the leading variable dominant, so for two variables
degree two reads x1^2, x1*x2, x2^2.  The constant monomial always sits
at position 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .errors import (
    CompletenessError,
    DimensionMismatchError,
    LineDimensionError,
    ParseError,
    UsageError,
)

MultiIndex = tuple[int, ...]


def degree(alpha) -> int:
    """Total degree |alpha| of a multi-index."""
    return int(sum(alpha))


def _compositions(total: int, n: int) -> Iterator[MultiIndex]:
    # Yields all n-tuples of non-negative ints summing to `total`,
    # in lexicographic order with the first coordinate dominant.
    if n == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, n - 1):
            yield (head,) + tail


@dataclass(frozen=True)
class MonomialSet:
    """All monomials of degree <= d in n variables, canonically ordered."""

    n: int
    d: int
    indices: tuple[MultiIndex, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "_positions", {a: k for k, a in enumerate(self.indices)}
        )
        object.__setattr__(self, "_exponents", None)

    def position(self, alpha) -> int:
        """Position of a multi-index in the canonical order."""
        try:
            return self._positions[tuple(alpha)]
        except KeyError:
            raise UsageError(f"monomial {tuple(alpha)} not in set") from None

    def exponents(self) -> np.ndarray:
        """Exponent matrix of shape (len(self), n), rows in canonical order."""
        if self._exponents is None:
            arr = np.array(self.indices, dtype=np.int64).reshape(len(self.indices), self.n)
            object.__setattr__(self, "_exponents", arr)
        return self._exponents

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.indices)

    def __getitem__(self, k: int) -> MultiIndex:
        return self.indices[k]


def simplex_size(n: int, d: int) -> int:
    """Number of monomials of degree <= d in n variables."""
    return math.comb(n + d, n)


def enumerate_monomials(n: int, d: int) -> MonomialSet:
    """Enumerate all multi-indices with |alpha| <= d in canonical order.

    Parameters
    ----------
    n : int
        Number of variables, n >= 1.
    d : int
        Degree bound, d >= 0.

    Returns
    -------
    MonomialSet
        Contains binomial(n + d, n) indices, constant monomial first.
    """
    if n < 1:
        raise UsageError(f"need at least one variable, got n={n}")
    if d < 0:
        raise UsageError(f"degree bound must be non-negative, got d={d}")
    indices = []
    for k in range(d + 1):
        indices.extend(_compositions(k, n))
    return MonomialSet(n=n, d=d, indices=tuple(indices))


class MomentSequence:
    """Truncated moment sequence: one complex value per |alpha| <= d.

    Immutable after construction.  Construction checks that the index
    set is exactly the full simplex of degree d.
    """

    def __init__(self, n: int, d: int, values: Mapping[MultiIndex, complex]):
        if n < 1:
            raise UsageError(f"need at least one variable, got n={n}")
        if d < 0:
            raise UsageError(f"degree bound must be non-negative, got d={d}")
        self.n = n
        self.d = d
        monomials = enumerate_monomials(n, d)
        store = {}
        for alpha, value in values.items():
            key = tuple(int(a) for a in alpha)
            if len(key) != n:
                raise DimensionMismatchError(
                    f"index {key} has {len(key)} entries, expected {n}"
                )
            if any(a < 0 for a in key):
                raise UsageError(f"negative exponent in index {key}")
            if degree(key) > d:
                raise UsageError(f"index {key} exceeds degree bound {d}")
            store[key] = complex(value)
        missing = [a for a in monomials if a not in store]
        if missing:
            raise CompletenessError(
                f"missing {len(missing)} moments up to degree {d}, "
                f"first missing index {missing[0]}"
            )
        self._monomials = monomials
        self._values = store

    def __getitem__(self, alpha) -> complex:
        key = tuple(int(a) for a in alpha)
        if len(key) != self.n:
            raise DimensionMismatchError(
                f"index {key} has {len(key)} entries, expected {self.n}"
            )
        try:
            return self._values[key]
        except KeyError:
            raise UsageError(f"moment {key} outside degree bound {self.d}") from None

    def __eq__(self, other) -> bool:
        if not isinstance(other, MomentSequence):
            return NotImplemented
        return (
            self.n == other.n
            and self.d == other.d
            and self._values == other._values
        )

    def __repr__(self) -> str:
        return f"MomentSequence(n={self.n}, d={self.d}, {len(self._values)} values)"

    @property
    def monomials(self) -> MonomialSet:
        return self._monomials

    def items(self):
        """Pairs (alpha, value) in canonical order."""
        for alpha in self._monomials:
            yield alpha, self._values[alpha]

    def vector(self, indices) -> np.ndarray:
        """Values at the given multi-indices as a complex vector."""
        return np.array([self[alpha] for alpha in indices], dtype=np.complex128)

    def with_values(self, values: Mapping[MultiIndex, complex]) -> "MomentSequence":
        """New sequence with the same shape and replaced values."""
        return MomentSequence(self.n, self.d, values)


_HEADER = re.compile(r"#\s*n\s*=\s*(\d+)\s+d\s*=\s*(\d+)\s*$")


def store_moments(seq: MomentSequence, path) -> None:
    """Write a moment sequence as plain text.

    The first line is ``# n=<n> d=<d>``; each following line holds the
    multi-index entries, the real part and the imaginary part, all
    whitespace separated.  Floats carry 17 significant digits so the
    round trip through text is exact.
    """
    lines = [f"# n={seq.n} d={seq.d}"]
    for alpha, value in seq.items():
        idx = " ".join(str(a) for a in alpha)
        lines.append(f"{idx} {value.real:.16e} {value.imag:.16e}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_moments(path) -> MomentSequence:
    """Read a moment sequence written by :func:`store_moments`.

    Comment lines (leading ``#``) after the header and blank lines are
    ignored.  Raises ParseError for malformed content,
    LineDimensionError for a wrong field count and CompletenessError
    when moments below the declared degree are missing.
    """
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = [ln.strip() for ln in raw]
    body = [ln for ln in lines if ln]
    if not body:
        raise ParseError(f"{path}: empty moment file")
    header = _HEADER.match(body[0])
    if header is None:
        raise ParseError(f"{path}: malformed header {body[0]!r}")
    n, d = int(header.group(1)), int(header.group(2))
    values = {}
    for ln in body[1:]:
        if ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != n + 2:
            raise LineDimensionError(
                f"{path}: expected {n + 2} fields for n={n}, got {len(parts)}: {ln!r}"
            )
        try:
            alpha = tuple(int(p) for p in parts[:n])
            re_part = float(parts[n])
            im_part = float(parts[n + 1])
        except ValueError as exc:
            raise ParseError(f"{path}: malformed line {ln!r}") from exc
        if any(a < 0 for a in alpha):
            raise ParseError(f"{path}: negative exponent in {ln!r}")
        if degree(alpha) > d:
            raise ParseError(f"{path}: index {alpha} exceeds declared degree {d}")
        if alpha in values:
            raise ParseError(f"{path}: duplicate moment for index {alpha}")
        values[alpha] = complex(re_part, im_part)
    return MomentSequence(n, d, values)
