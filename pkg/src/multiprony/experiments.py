"""Seeded perturbation sweeps over random instances, reported as CSV.

Each sweep fixes an instance family (n, d, r, M) and a noise level e,
varies one of those parameters over a value list, and runs a batch of
trials per value: draw a random model, generate its moments, perturb
them, run the pipeline, and score the estimate against the truth.  The
CSV gets one row per trial plus one aggregate row per sweep value with
means over the successful trials and the failure count.
"""

from __future__ import annotations

import csv
import hashlib
import math
import time
from dataclasses import dataclass

from .errors import MultipronyError, UsageError
from .metrics import match_and_score
from .model import InstanceSpec, PerturbationSpec, generate_moments, perturb, sample_instance
from .pipeline import run_pipeline

SWEEP_PARAMETERS = ("e", "M", "d", "n", "r")

CSV_HEADER = [
    "trial",
    "n",
    "d",
    "r_true",
    "M",
    "e",
    "rescale",
    "lambda",
    "r_est",
    "err",
    "rel_err",
    "err_after_newton",
    "newton_iters",
    "failure_class",
    "wall_ms",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """A sweep definition: what varies, what stays fixed, how many trials."""

    sweep: str
    values: tuple
    n: int = 3
    d: int = 10
    r: int = 5
    M: float = 1.0
    e: float = 6.0
    trials: int = 10
    base_seed: int = 0
    epsilon: float = 1e-6
    rescale: str | float = "auto"
    newton_iters: int = 0
    newton_damping: bool = True
    rank: int | None = None

    def __post_init__(self):
        if self.sweep not in SWEEP_PARAMETERS:
            raise UsageError(
                f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {self.sweep!r}"
            )
        if not self.values:
            raise UsageError("sweep needs at least one value")
        if self.trials < 1:
            raise UsageError(f"trials must be at least 1, got {self.trials}")
        object.__setattr__(self, "values", tuple(self.values))


def stable_value_hash(value) -> int:
    """Deterministic 32-bit hash of a sweep value, stable across runs."""
    text = repr(float(value)).encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:4], "big")


def trial_seed(base_seed: int, trial: int, value) -> int:
    """Seed for one trial: base plus trial index plus the value hash."""
    return (base_seed + trial + stable_value_hash(value)) % (2**63)


def _point_parameters(spec: ExperimentSpec, value):
    params = {"n": spec.n, "d": spec.d, "r": spec.r, "M": spec.M, "e": spec.e}
    if spec.sweep in ("n", "d", "r"):
        cast = int(value)
        if cast != value:
            raise UsageError(f"sweep over {spec.sweep} needs integer values, got {value}")
        params[spec.sweep] = cast
    else:
        params[spec.sweep] = float(value)
    return params


def run_trial(spec: ExperimentSpec, value, trial: int) -> dict:
    """One trial at one sweep value; returns a CSV row dict."""
    p = _point_parameters(spec, value)
    seed = trial_seed(spec.base_seed, trial, value)
    row = {
        "trial": trial,
        "n": p["n"],
        "d": p["d"],
        "r_true": p["r"],
        "M": p["M"],
        "e": p["e"],
        "rescale": spec.rescale,
        "lambda": "",
        "r_est": "",
        "err": "",
        "rel_err": "",
        "err_after_newton": "",
        "newton_iters": spec.newton_iters,
        "failure_class": "",
        "wall_ms": "",
    }
    start = time.perf_counter()
    try:
        truth = sample_instance(
            InstanceSpec(n=p["n"], r=p["r"], d=p["d"], M=p["M"], seed=seed)
        )
        seq = generate_moments(truth, p["d"])
        noisy = perturb(seq, PerturbationSpec(e=p["e"], seed=seed))
        result = run_pipeline(
            noisy,
            epsilon=spec.epsilon,
            seed=seed,
            rescale=spec.rescale,
            newton_iters=spec.newton_iters,
            newton_damping=spec.newton_damping,
            rank=spec.rank,
        )
    except MultipronyError as exc:
        row["failure_class"] = exc.error_class
        row["wall_ms"] = (time.perf_counter() - start) * 1e3
        return row
    row["wall_ms"] = (time.perf_counter() - start) * 1e3
    row["lambda"] = result.lam
    row["r_est"] = result.rank
    score = match_and_score(truth, result.model_raw)
    row["err"] = score.err
    row["rel_err"] = score.rel_err
    if score.rank_mismatch:
        row["failure_class"] = "rank-mismatch"
        return row
    if result.model_refined is not None:
        row["err_after_newton"] = match_and_score(truth, result.model_refined).err
    return row


def _aggregate(value_rows: list[dict]) -> dict:
    successes = [r for r in value_rows if r["failure_class"] == ""]
    failures = len(value_rows) - len(successes)
    first = value_rows[0]
    agg = {
        "trial": "mean",
        "n": first["n"],
        "d": first["d"],
        "r_true": first["r_true"],
        "M": first["M"],
        "e": first["e"],
        "rescale": first["rescale"],
        "lambda": "",
        "r_est": "",
        "err": "",
        "rel_err": "",
        "err_after_newton": "",
        "newton_iters": first["newton_iters"],
        "failure_class": failures,
        "wall_ms": "",
    }
    if successes:
        for key in ("lambda", "err", "rel_err", "wall_ms"):
            agg[key] = math.fsum(r[key] for r in successes) / len(successes)
        agg["r_est"] = math.fsum(r["r_est"] for r in successes) / len(successes)
        after = [
            r["err_after_newton"] for r in successes if r["err_after_newton"] != ""
        ]
        if after:
            agg["err_after_newton"] = math.fsum(after) / len(after)
    else:
        agg["wall_ms"] = math.fsum(r["wall_ms"] for r in value_rows) / len(value_rows)
    return agg


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """All trial rows plus one aggregate row per sweep value, in order."""
    rows = []
    for value in spec.values:
        value_rows = [run_trial(spec, value, t) for t in range(spec.trials)]
        rows.extend(value_rows)
        rows.append(_aggregate(value_rows))
    return rows


def _format_cell(key: str, value) -> str:
    if value == "":
        return ""
    if key in ("err", "rel_err", "err_after_newton", "lambda"):
        return f"{float(value):.10e}"
    if key == "wall_ms":
        return f"{float(value):.3f}"
    if key == "M" or key == "e":
        return repr(float(value))
    if key == "r_est" and isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[dict], path) -> None:
    """Write experiment rows under the fixed header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_format_cell(k, row[k]) for k in CSV_HEADER])
