"""Request and response models for the HTTP service.

Complex numbers travel as {re, im} pairs, moment sequences as explicit
(alpha, value) lists, and models as term lists, so every payload is
plain JSON.  The converters at the bottom translate between these
wire shapes and the core types.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

from ..model import PolyExpModel
from ..moments import MomentSequence


class ComplexValue(BaseModel):
    re: float
    im: float = 0.0

    @classmethod
    def wrap(cls, z: complex) -> "ComplexValue":
        return cls(re=float(z.real), im=float(z.imag))

    def unwrap(self) -> complex:
        return complex(self.re, self.im)


class MomentEntry(BaseModel):
    alpha: list[int]
    re: float
    im: float = 0.0


class MomentsPayload(BaseModel):
    n: int = Field(ge=1)
    d: int = Field(ge=0)
    values: list[MomentEntry]


class TermPayload(BaseModel):
    weight: ComplexValue
    frequency: list[ComplexValue]


class ModelPayload(BaseModel):
    n: int = Field(ge=1)
    terms: list[TermPayload]


class GenerateRequest(BaseModel):
    n: int = Field(ge=1)
    r: int = Field(ge=1)
    d: int = Field(ge=1)
    M: float = 1.0
    seed: int = Field(default=0, ge=0)


class GenerateResponse(BaseModel):
    model: ModelPayload
    moments: MomentsPayload


class PerturbRequest(BaseModel):
    moments: MomentsPayload
    e: float = Field(ge=0)
    seed: int = Field(default=0, ge=0)


class PerturbResponse(BaseModel):
    moments: MomentsPayload


class DecomposeRequest(BaseModel):
    moments: MomentsPayload
    epsilon: float = 1e-6
    seed: int = Field(default=0, ge=0)
    rescale: Union[Literal["auto", "off"], float] = "auto"
    newton_iters: int = Field(default=0, ge=0)
    newton_damping: bool = True
    d1: Optional[int] = None
    d2: Optional[int] = None
    rank: Optional[int] = None


class DiagnosticsPayload(BaseModel):
    singular_values: list[float]
    d1: int
    d2: int
    eigengap: float
    combination_attempts: int
    max_eigen_residual: float
    commutator_norms: list[float]
    rank_possibly_truncated: bool


class DecomposeResponse(BaseModel):
    r_est: int
    scale: float = Field(description="applied substitution factor lambda")
    model: ModelPayload
    model_refined: Optional[ModelPayload] = None
    newton_trace: Optional[list[float]] = None
    diagnostics: DiagnosticsPayload


class RefineRequest(BaseModel):
    moments: MomentsPayload
    model: ModelPayload
    newton_iters: int = Field(default=5, ge=0)
    newton_damping: bool = True


class RefineResponse(BaseModel):
    model: ModelPayload
    trace: list[float]
    reason: str


class ScoreRequest(BaseModel):
    truth: ModelPayload
    estimate: ModelPayload


class ScoreResponse(BaseModel):
    err: Optional[float]
    rel_err: Optional[float]
    permutation: Optional[list[int]]
    freq_errors: list[float]
    weight_errors: list[float]
    rank_mismatch: bool


class ErrorResponse(BaseModel):
    error_class: str
    detail: str


def moments_to_core(payload: MomentsPayload) -> MomentSequence:
    values = {
        tuple(entry.alpha): complex(entry.re, entry.im) for entry in payload.values
    }
    return MomentSequence(payload.n, payload.d, values)


def moments_from_core(seq: MomentSequence) -> MomentsPayload:
    return MomentsPayload(
        n=seq.n,
        d=seq.d,
        values=[
            MomentEntry(alpha=list(alpha), re=value.real, im=value.imag)
            for alpha, value in seq.items()
        ],
    )


def model_to_core(payload: ModelPayload) -> PolyExpModel:
    weights = [term.weight.unwrap() for term in payload.terms]
    freqs = [[z.unwrap() for z in term.frequency] for term in payload.terms]
    return PolyExpModel(payload.n, weights, freqs)


def model_from_core(model: PolyExpModel) -> ModelPayload:
    terms = [
        TermPayload(
            weight=ComplexValue.wrap(complex(model.weights[i])),
            frequency=[
                ComplexValue.wrap(complex(z)) for z in model.frequencies[i]
            ],
        )
        for i in range(model.r)
    ]
    return ModelPayload(n=model.n, terms=terms)
