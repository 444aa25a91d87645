"""FastAPI service exposing the decomposition pipeline.

Stateless JSON endpoints over the same core functions the CLI uses.
Domain errors surface as HTTP 422 with the stable error class string;
malformed payloads are rejected by pydantic before the core runs.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import MultipronyError
from ..metrics import match_and_score
from ..model import (
    InstanceSpec,
    PerturbationSpec,
    generate_moments,
    perturb,
    sample_instance,
)
from ..newton import refine
from ..pipeline import run_pipeline
from .schemas import (
    DecomposeRequest,
    DecomposeResponse,
    DiagnosticsPayload,
    ErrorResponse,
    GenerateRequest,
    GenerateResponse,
    ModelPayload,
    MomentsPayload,
    PerturbRequest,
    PerturbResponse,
    RefineRequest,
    RefineResponse,
    ScoreRequest,
    ScoreResponse,
    model_from_core,
    model_to_core,
    moments_from_core,
    moments_to_core,
)

app = FastAPI(
    title="multiprony",
    version=__version__,
    description="Decomposition of truncated moment sequences into weighted exponentials.",
)


@app.exception_handler(MultipronyError)
async def domain_error_handler(request: Request, exc: MultipronyError) -> JSONResponse:
    payload = ErrorResponse(error_class=exc.error_class, detail=str(exc))
    return JSONResponse(status_code=422, content=payload.model_dump())


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/generate", response_model=GenerateResponse)
def generate(req: GenerateRequest) -> GenerateResponse:
    model = sample_instance(InstanceSpec(n=req.n, r=req.r, d=req.d, M=req.M, seed=req.seed))
    seq = generate_moments(model, req.d)
    return GenerateResponse(model=model_from_core(model), moments=moments_from_core(seq))


@app.post("/perturb", response_model=PerturbResponse)
def perturb_endpoint(req: PerturbRequest) -> PerturbResponse:
    seq = moments_to_core(req.moments)
    noisy = perturb(seq, PerturbationSpec(e=req.e, seed=req.seed))
    return PerturbResponse(moments=moments_from_core(noisy))


@app.post("/decompose", response_model=DecomposeResponse)
def decompose_endpoint(req: DecomposeRequest) -> DecomposeResponse:
    seq = moments_to_core(req.moments)
    result = run_pipeline(
        seq,
        epsilon=req.epsilon,
        seed=req.seed,
        rescale=req.rescale,
        newton_iters=req.newton_iters,
        newton_damping=req.newton_damping,
        d1=req.d1,
        d2=req.d2,
        rank=req.rank,
    )
    diag = result.decomposition.diagnostics
    return DecomposeResponse(
        r_est=result.rank,
        scale=result.lam,
        model=model_from_core(result.model_raw),
        model_refined=(
            model_from_core(result.model_refined)
            if result.model_refined is not None
            else None
        ),
        newton_trace=(
            list(result.refinement.trace) if result.refinement is not None else None
        ),
        diagnostics=DiagnosticsPayload(
            singular_values=[float(s) for s in diag.singular_values],
            d1=diag.d1,
            d2=diag.d2,
            eigengap=diag.eigengap if math.isfinite(diag.eigengap) else -1.0,
            combination_attempts=diag.combination_attempts,
            max_eigen_residual=diag.max_eigen_residual,
            commutator_norms=list(diag.commutator_norms),
            rank_possibly_truncated=diag.rank_possibly_truncated,
        ),
    )


@app.post("/refine", response_model=RefineResponse)
def refine_endpoint(req: RefineRequest) -> RefineResponse:
    seq = moments_to_core(req.moments)
    model = model_to_core(req.model)
    result = refine(
        model, seq, max_iters=req.newton_iters, damping=req.newton_damping
    )
    return RefineResponse(
        model=model_from_core(result.model),
        trace=list(result.trace),
        reason=result.reason,
    )


@app.post("/score", response_model=ScoreResponse)
def score(req: ScoreRequest) -> ScoreResponse:
    report = match_and_score(model_to_core(req.truth), model_to_core(req.estimate))
    # +inf is not valid JSON, so a rank mismatch reports null errors
    # with the rank_mismatch flag set.
    return ScoreResponse(
        err=None if report.rank_mismatch else report.err,
        rel_err=None if report.rank_mismatch else report.rel_err,
        permutation=list(report.permutation) if report.permutation else None,
        freq_errors=list(report.freq_errors),
        weight_errors=list(report.weight_errors),
        rank_mismatch=report.rank_mismatch,
    )
