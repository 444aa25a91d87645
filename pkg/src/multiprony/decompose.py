"""Recovery of weights and frequencies from a truncated moment sequence.

The pipeline follows the multivariate generalization of Prony's method.
A truncated Hankel matrix H of the sequence is factored by SVD; its
numerical rank r fixes the number of terms.  Truncated factors turn the
shifted Hankel matrices into r x r multiplication operators

    M_i = diag(1/s_1..s_r) @ U_r^H @ H_{x_i} @ Vbar_r,

which commute and share eigenvectors whenever the sequence really is a
sum of r exponentials.  Eigenvectors of a random real combination of
the M_i give the frequencies as joint eigenvalues, and an explicit
rational formula in the same eigenvectors gives the weights.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    NearDefectiveError,
    RankZeroError,
    SingularTruncationError,
    UnstableWeightError,
    UsageError,
)
from .hankel import HankelMatrix, build_hankel, build_shifted_hankel, degree_split
from .kernels import DEFECT_GAP, SvdResult, eig, svd
from .model import COMBO_STREAM, PolyExpModel, sort_terms
from .moments import MomentSequence, MonomialSet

# Residual level (relative to the operator norm) above which the
# Rayleigh quotient is cross-checked against a componentwise ratio.
EIG_RESIDUAL_TOL = 1e-6

# Attempts at drawing a random combination with separated eigenvalues.
MAX_COMBINATIONS = 3

# A weight denominator smaller than this times its input norms is
# treated as numerically zero.
WEIGHT_DENOM_TOL = 1e-12


@dataclass(frozen=True)
class DecomposeOptions:
    """Tuning knobs for :func:`decompose`."""

    epsilon: float = 1e-6
    seed: int = 0
    d1: int | None = None
    d2: int | None = None
    rank_override: int | None = None

    def __post_init__(self):
        if not (0 < self.epsilon < 1):
            raise UsageError(
                f"rank threshold must lie strictly between 0 and 1, got {self.epsilon}"
            )
        if self.seed < 0:
            raise UsageError("seed must be non-negative")
        if (self.d1 is None) != (self.d2 is None):
            raise UsageError("d1 and d2 must be given together")
        if self.d1 is not None and (self.d1 < 0 or self.d2 < 0):
            raise UsageError(f"degrees must be non-negative, got ({self.d1}, {self.d2})")
        if self.rank_override is not None and self.rank_override < 1:
            raise UsageError(f"rank override must be >= 1, got {self.rank_override}")


def numerical_rank(singular_values: np.ndarray, epsilon: float) -> int:
    """Largest k with s_k >= epsilon * s_1.

    Raises RankZeroError when the spectrum vanishes entirely.
    """
    s = np.asarray(singular_values, dtype=np.float64)
    if s.size == 0 or s[0] <= 0:
        raise RankZeroError("all singular values are zero")
    if not (0 < epsilon < 1):
        raise UsageError(
            f"rank threshold must lie strictly between 0 and 1, got {epsilon}"
        )
    return int(np.count_nonzero(s >= epsilon * s[0]))


def multiplication_matrices(
    svd_result: SvdResult, shifted: list[np.ndarray], r: int
) -> list[np.ndarray]:
    """Operators of multiplication by each variable on the rank-r quotient.

    Parameters
    ----------
    svd_result : SvdResult
        Full SVD of the unshifted Hankel matrix.
    shifted : list of ndarray
        The shifted Hankel matrices, same shape as the unshifted one.
    r : int
        Truncation rank; s_r must be non-zero.
    """
    s = svd_result.S
    if r < 1 or r > len(s):
        raise UsageError(f"rank {r} outside 1..{len(s)}")
    if s[r - 1] <= 0:
        raise SingularTruncationError(
            f"singular value s_{r} is zero; cannot invert the truncation"
        )
    ur = svd_result.left_basis(r)
    vr = svd_result.right_basis(r)
    inv_s = 1.0 / s[:r]
    out = []
    for h in shifted:
        if h.shape != (svd_result.U.shape[0], svd_result.Vstar.shape[0]):
            raise UsageError(
                f"shifted matrix has shape {h.shape}, expected "
                f"{(svd_result.U.shape[0], svd_result.Vstar.shape[0])}"
            )
        out.append(inv_s[:, None] * (ur.conj().T @ h @ vr))
    return out


@dataclass(frozen=True)
class JointEigen:
    """Joint eigenvectors of the multiplication operators.

    xi[j, i] is the eigenvalue of M_i on eigenvector column j, i.e. the
    i-th coordinate of the j-th recovered frequency.  residuals holds
    ||M_i v - xi v|| relative to ||M_i||_F for each pair.
    """

    vectors: np.ndarray
    xi: np.ndarray
    residuals: np.ndarray
    eigengap: float
    combination: np.ndarray
    attempts: int


def joint_eigenvectors(mats: list[np.ndarray], seed: int = 0) -> JointEigen:
    """Diagonalize a random real combination of commuting operators.

    Draws l uniform on [-1, 1]^n, eigendecomposes sum_i l_i M_i and
    reads each frequency coordinate off as a Rayleigh quotient of the
    corresponding operator.  Combinations whose eigenvalues nearly
    collide are redrawn up to MAX_COMBINATIONS times before failing.
    """
    if not mats:
        raise UsageError("need at least one multiplication matrix")
    r = mats[0].shape[0]
    rng = np.random.default_rng(np.random.SeedSequence([seed, COMBO_STREAM]))
    result = None
    combo = None
    attempts = 0
    for attempts in range(1, MAX_COMBINATIONS + 1):
        combo = rng.uniform(-1.0, 1.0, len(mats))
        k = sum(c * m for c, m in zip(combo, mats))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            candidate = eig(k)
        scale = float(np.linalg.norm(k))
        if r == 1 or candidate.eigengap >= DEFECT_GAP * max(scale, 1e-300):
            result = candidate
            break
    if result is None:
        raise NearDefectiveError(
            f"no combination separated the spectrum after {attempts} draws; "
            f"last eigengap {candidate.eigengap:.3e}"
        )
    xi = np.empty((r, len(mats)), dtype=np.complex128)
    residuals = np.empty((r, len(mats)), dtype=np.float64)
    for i, m in enumerate(mats):
        norm_m = float(np.linalg.norm(m))
        floor = max(norm_m, 1e-300)
        for j in range(r):
            v = result.vectors[:, j]
            mv = m @ v
            value = complex(v.conj() @ mv)  # unit-norm v, plain Rayleigh quotient
            resid = float(np.linalg.norm(mv - value * v))
            if resid > EIG_RESIDUAL_TOL * floor:
                kmax = int(np.argmax(np.abs(v)))
                alt = complex(mv[kmax] / v[kmax])
                alt_resid = float(np.linalg.norm(mv - alt * v))
                if alt_resid < resid:
                    value, resid = alt, alt_resid
            xi[j, i] = value
            residuals[j, i] = resid / floor
    return JointEigen(
        vectors=result.vectors,
        xi=xi,
        residuals=residuals,
        eigengap=result.eigengap,
        combination=combo,
        attempts=attempts,
    )


def recover_weights(
    hankel_values: np.ndarray,
    right_basis: np.ndarray,
    vectors: np.ndarray,
    xi: np.ndarray,
    cols: MonomialSet,
) -> np.ndarray:
    """Weights from the eigenvectors via the evaluation-vector formula.

    For eigenvector v_j with frequency xi_j the weight is

        w_j = (H[0, :] @ Vbar_r v_j) / ([xi_j^beta]_beta @ Vbar_r v_j),

    the numerator pairing against the constant row monomial and the
    denominator against the evaluation vector of xi_j over the column
    monomials.  Scale-invariant in v_j.
    """
    r = vectors.shape[1]
    expo = cols.exponents()
    weights = np.empty(r, dtype=np.complex128)
    h0 = hankel_values[0, :]
    for j in range(r):
        t = right_basis @ vectors[:, j]
        ev = np.prod(xi[j][None, :] ** expo, axis=1)
        den = complex(ev @ t)
        scale = float(np.linalg.norm(h0) * np.linalg.norm(t))
        if abs(den) <= WEIGHT_DENOM_TOL * max(scale, 1e-300):
            raise UnstableWeightError(
                f"weight denominator {abs(den):.3e} vanishes against input "
                f"scale {scale:.3e} for term {j}"
            )
        weights[j] = complex(h0 @ t) / den
    return weights


@dataclass(frozen=True)
class Diagnostics:
    """Numerical evidence collected during a decomposition."""

    singular_values: np.ndarray
    d1: int
    d2: int
    eigengap: float
    combination_attempts: int
    max_eigen_residual: float
    commutator_norms: tuple[float, ...]
    rank_possibly_truncated: bool


@dataclass(frozen=True)
class DecomposeResult:
    rank: int
    model: PolyExpModel
    hankel: HankelMatrix
    mult_matrices: list[np.ndarray]
    eigenvectors: np.ndarray
    diagnostics: Diagnostics


def _commutator_norms(mats: list[np.ndarray]) -> tuple[float, ...]:
    out = []
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            num = float(np.linalg.norm(mats[i] @ mats[j] - mats[j] @ mats[i]))
            den = float(np.linalg.norm(mats[i]) * np.linalg.norm(mats[j]))
            out.append(num / den if den > 0 else 0.0)
    return tuple(out)


def decompose(seq: MomentSequence, options: DecomposeOptions | None = None) -> DecomposeResult:
    """Decompose a truncated moment sequence into weighted exponentials.

    Builds the Hankel matrices at the requested (or default) degree
    split, estimates the rank from the singular value profile unless a
    rank override is given, and recovers one weight and frequency
    vector per rank.  Output terms are sorted lexicographically by
    frequency coordinates so equal inputs give identical output order.
    """
    opts = options or DecomposeOptions()
    if seq.d < 1:
        raise UsageError(f"decomposition needs degree at least 1, got d={seq.d}")
    if opts.d1 is not None:
        d1, d2 = opts.d1, opts.d2
    else:
        d1, d2 = degree_split(seq.d)
    hank = build_hankel(seq, d1, d2)
    shifted = [
        build_shifted_hankel(seq, d1, d2, var).values for var in range(1, seq.n + 1)
    ]
    sv = svd(hank.values)
    max_rank = min(hank.values.shape)
    if opts.rank_override is not None:
        if opts.rank_override > max_rank:
            raise UsageError(
                f"rank override {opts.rank_override} exceeds matrix rank bound {max_rank}"
            )
        rank = opts.rank_override
        if sv.S[rank - 1] <= 0:
            raise SingularTruncationError(
                f"forced rank {rank} reaches into the zero spectrum"
            )
    else:
        rank = numerical_rank(sv.S, opts.epsilon)
    mats = multiplication_matrices(sv, shifted, rank)
    joint = joint_eigenvectors(mats, seed=opts.seed)
    weights = recover_weights(
        hank.values, sv.right_basis(rank), joint.vectors, joint.xi, hank.cols
    )
    model = sort_terms(PolyExpModel(seq.n, weights, joint.xi))
    diag = Diagnostics(
        singular_values=sv.S.copy(),
        d1=d1,
        d2=d2,
        eigengap=joint.eigengap,
        combination_attempts=joint.attempts,
        max_eigen_residual=float(np.max(joint.residuals)) if joint.residuals.size else 0.0,
        commutator_norms=_commutator_norms(mats),
        rank_possibly_truncated=(rank == max_rank),
    )
    return DecomposeResult(
        rank=rank,
        model=model,
        hankel=hank,
        mult_matrices=mats,
        eigenvectors=joint.vectors,
        diagnostics=diag,
    )
