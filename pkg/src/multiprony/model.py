"""Weighted exponential sums and the moment sequences they generate.

A model is a finite sum  sum_i  w_i * exp(<xi_i, y>)  with complex
weights w_i and frequency vectors xi_i in C^n.  Its moment of
multi-index alpha is  sigma_alpha = sum_i w_i * xi_i^alpha,  i.e. the
alpha-th Taylor coefficient of the sum taken against y^alpha/alpha!.
This module evaluates and generates such moments, draws random test
instances, and applies the standard componentwise random perturbation
used in the accuracy experiments.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    LineDimensionError,
    ParseError,
    UsageError,
)
from .moments import MomentSequence, enumerate_monomials

# Disjoint seeding domains, so one integer seed can drive instance
# sampling, noise and eigenvector combinations without stream overlap.
MODEL_STREAM = 0
NOISE_STREAM = 1
COMBO_STREAM = 2


@dataclass(frozen=True)
class PolyExpModel:
    """A sum of r weighted exponentials in n variables.

    Attributes
    ----------
    n : int
        Number of variables.
    weights : ndarray, shape (r,)
        Non-zero complex weights.
    frequencies : ndarray, shape (r, n)
        Pairwise distinct complex frequency vectors, one row per term.
    """

    n: int
    weights: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=np.complex128))
        f = np.asarray(self.frequencies, dtype=np.complex128)
        if f.ndim == 1:
            f = f.reshape(len(w), -1)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "frequencies", f)
        if self.n < 1:
            raise UsageError(f"need at least one variable, got n={self.n}")
        if w.ndim != 1 or len(w) < 1:
            raise UsageError("need at least one term")
        if f.shape != (len(w), self.n):
            raise DimensionMismatchError(
                f"frequency array has shape {f.shape}, expected {(len(w), self.n)}"
            )
        if np.any(w == 0):
            raise UsageError("zero weight in model")
        rows = {tuple(row) for row in f}
        if len(rows) != len(w):
            raise UsageError("frequency vectors must be pairwise distinct")

    @property
    def r(self) -> int:
        return len(self.weights)


def sort_terms(model: PolyExpModel) -> PolyExpModel:
    """Reorder terms lexicographically by (Re xi_1, Im xi_1, Re xi_2, ...)."""
    keys = []
    for j in range(model.n - 1, -1, -1):
        keys.append(model.frequencies[:, j].imag)
        keys.append(model.frequencies[:, j].real)
    order = np.lexsort(tuple(keys))
    return PolyExpModel(model.n, model.weights[order], model.frequencies[order])


def eval_moment(model: PolyExpModel, alpha) -> complex:
    """Single moment sum_i w_i * xi_i^alpha (0^0 = 1)."""
    key = tuple(int(a) for a in alpha)
    if len(key) != model.n:
        raise DimensionMismatchError(
            f"index {key} has {len(key)} entries, expected {model.n}"
        )
    if any(a < 0 for a in key):
        raise UsageError(f"negative exponent in index {key}")
    powers = model.frequencies ** np.array(key, dtype=np.int64)
    return complex(model.weights @ np.prod(powers, axis=1))


def _power_table(frequencies: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    # T[a, i] = xi_i ** alpha_a for every index alpha_a in `exponents`.
    pw = frequencies[None, :, :] ** exponents[:, None, :]
    return np.prod(pw, axis=2)


def generate_moments(model: PolyExpModel, d: int) -> MomentSequence:
    """All moments of the model up to total degree d."""
    if d < 0:
        raise UsageError(f"degree bound must be non-negative, got d={d}")
    monomials = enumerate_monomials(model.n, d)
    table = _power_table(model.frequencies, monomials.exponents())
    vals = table @ model.weights
    return MomentSequence(
        model.n, d, {alpha: vals[k] for k, alpha in enumerate(monomials)}
    )


@dataclass(frozen=True)
class InstanceSpec:
    """Parameters of a random test instance."""

    n: int
    r: int
    d: int
    M: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.r < 1 or self.d < 1:
            raise UsageError("n, r and d must all be at least 1")
        if not (self.M > 0 and math.isfinite(self.M)):
            raise UsageError(f"magnitude M must be positive and finite, got {self.M}")
        if self.seed < 0:
            raise UsageError("seed must be non-negative")


def sample_instance(spec: InstanceSpec) -> PolyExpModel:
    """Draw a random model with moduli |xi| in [M/2, 3M/2], |w| in [1/2, 1].

    Frequencies and weights are sampled in polar form with uniform
    modulus and uniform argument in (-pi, pi].  One child stream per
    term keeps the draw for term i independent of r.
    """
    root = np.random.SeedSequence([spec.seed, MODEL_STREAM])
    weights = np.empty(spec.r, dtype=np.complex128)
    freqs = np.empty((spec.r, spec.n), dtype=np.complex128)
    for i, child in enumerate(root.spawn(spec.r)):
        rng = np.random.default_rng(child)
        mod = rng.uniform(0.5 * spec.M, 1.5 * spec.M, spec.n)
        arg = rng.uniform(-np.pi, np.pi, spec.n)
        freqs[i] = mod * np.exp(1j * arg)
        wmod = rng.uniform(0.5, 1.0)
        warg = rng.uniform(-np.pi, np.pi)
        weights[i] = wmod * np.exp(1j * warg)
    return PolyExpModel(spec.n, weights, freqs)


@dataclass(frozen=True)
class PerturbationSpec:
    """Componentwise uniform noise of magnitude 10**(-e).

    e = inf is allowed and gives epsilon = 0, the identity perturbation.
    """

    e: float
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.e) or self.e < 0:
            raise UsageError(f"noise exponent must be >= 0, got {self.e}")
        if self.seed < 0:
            raise UsageError("seed must be non-negative")

    @property
    def epsilon(self) -> float:
        return 10.0 ** (-self.e)


def perturb(seq: MomentSequence, spec: PerturbationSpec) -> MomentSequence:
    """Add eps*(p + i q) to every moment, p, q i.i.d. uniform on [-1, 1].

    One child stream per multi-index, spawned in canonical order, so the
    noise hitting a given moment depends only on the seed and the index.
    """
    eps = spec.epsilon
    root = np.random.SeedSequence([spec.seed, NOISE_STREAM])
    children = root.spawn(len(seq.monomials))
    values = {}
    for child, (alpha, value) in zip(children, seq.items()):
        rng = np.random.default_rng(child)
        p, q = rng.uniform(-1.0, 1.0, 2)
        values[alpha] = value + eps * complex(p, q)
    return seq.with_values(values)


_MODEL_HEADER = re.compile(r"#\s*n\s*=\s*(\d+)\s+r\s*=\s*(\d+)\s*$")


def store_model(model: PolyExpModel, path) -> None:
    """Write a model as plain text, one term per line.

    The first line is ``# n=<n> r=<r>``; each term line holds
    re(w), im(w), then re and im of each frequency coordinate.
    """
    lines = [f"# n={model.n} r={model.r}"]
    for i in range(model.r):
        fields = [f"{model.weights[i].real:.16e}", f"{model.weights[i].imag:.16e}"]
        for j in range(model.n):
            z = model.frequencies[i, j]
            fields.append(f"{z.real:.16e}")
            fields.append(f"{z.imag:.16e}")
        lines.append(" ".join(fields))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> PolyExpModel:
    """Read a model written by :func:`store_model`."""
    with open(path) as fh:
        body = [ln.strip() for ln in fh.read().splitlines() if ln.strip()]
    if not body:
        raise ParseError(f"{path}: empty model file")
    header = _MODEL_HEADER.match(body[0])
    if header is None:
        raise ParseError(f"{path}: malformed header {body[0]!r}")
    n, r = int(header.group(1)), int(header.group(2))
    terms = [ln for ln in body[1:] if not ln.startswith("#")]
    if len(terms) != r:
        raise ParseError(f"{path}: expected {r} term lines, found {len(terms)}")
    weights = np.empty(r, dtype=np.complex128)
    freqs = np.empty((r, n), dtype=np.complex128)
    for i, ln in enumerate(terms):
        parts = ln.split()
        if len(parts) != 2 * (n + 1):
            raise LineDimensionError(
                f"{path}: expected {2 * (n + 1)} fields for n={n}, "
                f"got {len(parts)}: {ln!r}"
            )
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(f"{path}: malformed line {ln!r}") from exc
        weights[i] = complex(vals[0], vals[1])
        for j in range(n):
            freqs[i, j] = complex(vals[2 + 2 * j], vals[3 + 2 * j])
    return PolyExpModel(n, weights, freqs)
