"""Newton refinement of a recovered exponential sum.

The refinement treats the weights and frequency coordinates as one
complex parameter matrix Xi of shape (r, n+1), column 0 holding the
weights, and minimizes the moment misfit

    E(Xi) = 1/2 * sum_{alpha in A} |F_alpha(Xi)|^2,
    F_alpha(Xi) = sum_i w_i * xi_i^alpha - sigma_alpha,

over a support set A of multi-indices (all |alpha| <= d by default).
Because E is real and F is holomorphic in Xi, the stationarity system
grad E = 0 is posed in the 2N real coordinates (Re, Im of each
parameter).  With c_k = sum_alpha conj(F_alpha) dF_alpha/dz_k the real
gradient is (Re c_k, -Im c_k), and the real Hessian splits into the
Gauss-Newton part, built from the holomorphic first derivatives alone,
plus a second-order part contracted against the residual that vanishes
at an exact fit.  Each iteration solves the Hessian system and accepts
the step only when E decreases (halving it a bounded number of times),
or runs the bare update when damping is off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .model import PolyExpModel
from .moments import MomentSequence, MonomialSet, enumerate_monomials

# Step-size halvings allowed per damped iteration.
MAX_HALVINGS = 10

# Consecutive misfit increases tolerated in the undamped loop.
MAX_GROWTH = 3

# Relative Tikhonov level used when the Hessian solve fails.
REGULARIZATION = 1e-10

# Step norm (relative to the parameter norm) treated as a fixed point.
STEP_TOL = 1e-14


def pack(model: PolyExpModel) -> np.ndarray:
    """Parameter matrix (r, n+1): column 0 weights, then frequencies."""
    out = np.empty((model.r, model.n + 1), dtype=np.complex128)
    out[:, 0] = model.weights
    out[:, 1:] = model.frequencies
    return out


def unpack(n: int, params: np.ndarray) -> PolyExpModel:
    """Model from a parameter matrix produced by :func:`pack`."""
    return PolyExpModel(n, params[:, 0].copy(), params[:, 1:].copy())


@dataclass(frozen=True)
class NewtonState:
    """A refinement iterate: parameters, support, residual and misfit."""

    params: np.ndarray
    support: MonomialSet
    targets: np.ndarray
    F: np.ndarray
    E: float
    iteration: int = 0


def residual(params: np.ndarray, seq: MomentSequence, support: MonomialSet) -> np.ndarray:
    """Residual vector F_alpha over the support, in canonical order."""
    targets = seq.vector(support)
    return _residual(params, targets, support.exponents())


def make_state(
    model_or_params, seq: MomentSequence, support: MonomialSet | None = None
) -> NewtonState:
    """Build a NewtonState for a model (or packed parameter matrix)."""
    if isinstance(model_or_params, PolyExpModel):
        params = pack(model_or_params)
    else:
        params = np.asarray(model_or_params, dtype=np.complex128)
        if params.ndim != 2 or params.shape[1] != seq.n + 1:
            raise UsageError(
                f"parameter matrix must have shape (r, {seq.n + 1}), got {params.shape}"
            )
    support = support or enumerate_monomials(seq.n, seq.d)
    targets = seq.vector(support)
    f = _residual(params, targets, support.exponents())
    return NewtonState(
        params=params,
        support=support,
        targets=targets,
        F=f,
        E=_misfit(f),
        iteration=0,
    )


def _misfit(f: np.ndarray) -> float:
    return 0.5 * float(np.real(np.vdot(f, f)))


def _residual(params, targets, expo) -> np.ndarray:
    xi = params[:, 1:]
    table = np.prod(xi[None, :, :] ** expo[:, None, :], axis=2)
    return table @ params[:, 0] - targets


def _power_derivative(base: complex, expo_col: np.ndarray, order: int) -> np.ndarray:
    # order-th derivative of base**k, vectorized over the exponent column;
    # exponents below the order contribute zero (0**0 = 1 handled by numpy).
    coeff = np.ones_like(expo_col, dtype=np.float64)
    for shift in range(order):
        coeff = coeff * (expo_col - shift)
    out = np.zeros(len(expo_col), dtype=np.complex128)
    mask = expo_col >= order
    if np.any(mask):
        out[mask] = coeff[mask] * base ** (expo_col[mask] - order)
    return out


def _derivatives(params: np.ndarray, expo: np.ndarray):
    """Holomorphic residual derivatives.

    Returns the power table T (m, r), the first-derivative matrix D of
    shape (m, N) with N = r*(n+1) and parameter k = i*(n+1) + j, and a
    per-variable power cache for the second-order assembly.
    """
    m, _ = expo.shape
    r, cols = params.shape
    n = cols - 1
    xi = params[:, 1:]
    pw = xi[None, :, :] ** expo[:, None, :]
    table = np.prod(pw, axis=2)
    d = np.empty((m, r * (n + 1)), dtype=np.complex128)
    for i in range(r):
        d[:, i * (n + 1)] = table[:, i]
        for j in range(1, n + 1):
            others = np.prod(pw[:, i, np.arange(n) != (j - 1)], axis=1)
            d[:, i * (n + 1) + j] = (
                params[i, 0] * _power_derivative(xi[i, j - 1], expo[:, j - 1], 1) * others
            )
    return table, d, pw


def gradient_and_jacobian(
    params: np.ndarray, seq: MomentSequence, support: MonomialSet
) -> tuple[np.ndarray, np.ndarray]:
    """Real gradient and Hessian of E at the given parameters.

    Coordinates interleave as (Re z_0, Im z_0, Re z_1, ...), z running
    over the packed parameters row by row.  The returned matrix is the
    exact Hessian of E: the Gauss-Newton term plus the second-order
    term contracted with the residual.
    """
    expo = support.exponents()
    targets = seq.vector(support)
    f = _residual(params, targets, expo)
    _, d, pw = _derivatives(params, expo)
    r, cols = params.shape
    n = cols - 1
    nn = r * (n + 1)

    c = f.conj() @ d
    grad = np.empty(2 * nn)
    grad[0::2] = c.real
    grad[1::2] = -c.imag

    gram = d.conj().T @ d

    # q[k, l] = sum_alpha conj(F_alpha) * d^2 F_alpha / dz_k dz_l.
    # Second derivatives couple parameters of one term only.
    q = np.zeros((nn, nn), dtype=np.complex128)
    fbar = f.conj()
    for i in range(r):
        base = i * (n + 1)
        w = params[i, 0]
        for j in range(1, n + 1):
            others = np.prod(pw[:, i, np.arange(n) != (j - 1)], axis=1)
            dj = _power_derivative(params[i, j], expo[:, j - 1], 1) * others
            # mixed weight and frequency derivative
            val = complex(fbar @ dj)
            q[base, base + j] += val
            q[base + j, base] += val
            # pure second derivative in one frequency coordinate
            ddj = _power_derivative(params[i, j], expo[:, j - 1], 2) * others
            q[base + j, base + j] += complex(fbar @ (w * ddj))
            # mixed frequency derivatives within the same term
            for jp in range(j + 1, n + 1):
                keep = (np.arange(n) != (j - 1)) & (np.arange(n) != (jp - 1))
                rest = np.prod(pw[:, i, keep], axis=1)
                cross = (
                    w
                    * _power_derivative(params[i, j], expo[:, j - 1], 1)
                    * _power_derivative(params[i, jp], expo[:, jp - 1], 1)
                    * rest
                )
                val = complex(fbar @ cross)
                q[base + j, base + jp] += val
                q[base + jp, base + j] += val

    jac = np.empty((2 * nn, 2 * nn))
    jac[0::2, 0::2] = gram.real + q.real
    jac[0::2, 1::2] = -gram.imag - q.imag
    jac[1::2, 0::2] = gram.imag - q.imag
    jac[1::2, 1::2] = gram.real - q.real
    return grad, jac


@dataclass(frozen=True)
class RefineResult:
    """Outcome of a refinement run."""

    model: PolyExpModel
    trace: tuple[float, ...]
    reason: str


def _solve_step(jac: np.ndarray, grad: np.ndarray) -> np.ndarray | None:
    try:
        step = np.linalg.solve(jac, grad)
        if np.all(np.isfinite(step)):
            return step
    except np.linalg.LinAlgError:
        pass
    dim = jac.shape[0]
    tau = REGULARIZATION * max(np.trace(jac) / dim, np.finfo(float).tiny)
    try:
        step = np.linalg.solve(jac + tau * np.eye(dim), grad)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(step)):
        return None
    return step


def refine(
    model: PolyExpModel,
    seq: MomentSequence,
    support: MonomialSet | None = None,
    max_iters: int = 5,
    damping: bool = True,
) -> RefineResult:
    """Newton-refine a model against a moment sequence.

    Runs at most max_iters Newton steps on grad E = 0 and returns the
    iterate with the lowest misfit seen.  With damping on, a step is
    halved until E decreases (up to MAX_HALVINGS times) and the run
    stops when no decreasing step exists; with damping off the bare
    Newton update is applied and the run aborts after MAX_GROWTH
    consecutive increases of E.
    """
    if model.n != seq.n:
        raise UsageError(f"model has n={model.n}, sequence has n={seq.n}")
    if max_iters < 0:
        raise UsageError(f"iteration count must be non-negative, got {max_iters}")
    support = support or enumerate_monomials(seq.n, seq.d)
    expo = support.exponents()
    targets = seq.vector(support)

    params = pack(model)
    energy = _misfit(_residual(params, targets, expo))
    trace = [energy]
    best_params, best_energy = params, energy
    reason = "iteration-limit"
    growth = 0

    for _ in range(max_iters):
        grad, jac = gradient_and_jacobian(params, seq, support)
        step = _solve_step(jac, grad)
        if step is None:
            reason = "singular-hessian"
            break
        delta = (step[0::2] + 1j * step[1::2]).reshape(params.shape)
        if np.linalg.norm(delta) <= STEP_TOL * max(1.0, np.linalg.norm(params)):
            reason = "fixed-point"
            break
        if damping:
            scale = 1.0
            accepted = False
            for _ in range(MAX_HALVINGS + 1):
                candidate = params - scale * delta
                cand_energy = _misfit(_residual(candidate, targets, expo))
                if np.isfinite(cand_energy) and cand_energy < energy:
                    accepted = True
                    break
                scale *= 0.5
            if not accepted:
                reason = "no-decrease"
                break
            params, energy = candidate, cand_energy
            trace.append(energy)
            if energy < best_energy:
                best_params, best_energy = params, energy
        else:
            params = params - delta
            new_energy = _misfit(_residual(params, targets, expo))
            if not np.isfinite(new_energy):
                reason = "diverged"
                break
            trace.append(new_energy)
            if new_energy >= energy:
                growth += 1
                if growth >= MAX_GROWTH:
                    energy = new_energy
                    reason = "diverged"
                    break
            else:
                growth = 0
            energy = new_energy
            if energy < best_energy:
                best_params, best_energy = params, energy

    return RefineResult(
        model=unpack(model.n, best_params),
        trace=tuple(trace),
        reason=reason,
    )
