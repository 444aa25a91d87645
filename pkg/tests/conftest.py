"""Shared helpers for the test suite."""

import numpy as np

from multiprony import MomentSequence, enumerate_monomials


def seq_from_values(n, d, values):
    """Moment sequence from a flat value list in canonical monomial order."""
    monomials = enumerate_monomials(n, d)
    assert len(values) == len(monomials)
    return MomentSequence(n, d, dict(zip(monomials.indices, values)))


def ulp_close(a, b, ulps):
    """True when |a - b| is within `ulps` spacings of the larger magnitude."""
    a = complex(a)
    b = complex(b)
    scale = max(abs(a), abs(b), np.finfo(float).tiny)
    return abs(a - b) <= ulps * np.spacing(scale)
