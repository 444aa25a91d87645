"""Command line front end.

Thin wrappers over the library: each subcommand parses flags, loads or
stores the plain-text moment and model files, and calls the same
pipeline the HTTP service uses.  Exit codes: 0 success, 2 usage error,
3 numeric failure, 4 file I/O or format error; the stable error class
string is printed on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .errors import MultipronyError
from .experiments import SWEEP_PARAMETERS, ExperimentSpec, run_experiment, write_csv
from .hankel import dump_matrix
from .model import (
    InstanceSpec,
    PerturbationSpec,
    generate_moments,
    load_model,
    perturb,
    sample_instance,
    store_model,
)
from .moments import load_moments, store_moments
from .newton import refine
from .pipeline import run_pipeline


def _rescale_value(text: str):
    if text in ("auto", "off"):
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'auto', 'off' or a number, got {text!r}"
        ) from None


def _values_list(text: str):
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed value list {text!r}") from None


def _add_pipeline_flags(parser, newton_default: int):
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument(
        "--epsilon", type=float, default=1e-6, help="relative rank threshold"
    )
    parser.add_argument(
        "--rescale",
        type=_rescale_value,
        default="auto",
        help="'auto', 'off' or an explicit scale factor",
    )
    parser.add_argument(
        "--newton-iters", type=int, default=newton_default, help="refinement steps"
    )
    parser.add_argument(
        "--newton-damping",
        choices=("on", "off"),
        default="on",
        help="halve steps until the misfit decreases",
    )
    parser.add_argument("--d1", type=int, default=None, help="row degree override")
    parser.add_argument("--d2", type=int, default=None, help="column degree override")
    parser.add_argument(
        "--rank", type=int, default=None, help="force the rank instead of estimating it"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiprony",
        description="Decompose truncated moment sequences into weighted exponentials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a random instance and its moments")
    p.add_argument("--n", type=int, required=True, help="number of variables")
    p.add_argument("--r", type=int, required=True, help="number of terms")
    p.add_argument("--d", type=int, required=True, help="moment degree bound")
    p.add_argument("--M", type=float, default=1.0, help="frequency modulus scale")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--model-out", default="model.txt", help="model file to write")
    p.add_argument("--moments-out", default="moments.txt", help="moment file to write")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("perturb", help="add componentwise uniform noise to moments")
    p.add_argument("moments", help="moment file to read")
    p.add_argument("--e", type=float, required=True, help="noise exponent, eps = 10^-e")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="moment file to write")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("decompose", help="recover weights and frequencies from moments")
    p.add_argument("moments", help="moment file to read")
    p.add_argument("--out", default=None, help="model file to write")
    p.add_argument(
        "--json", default=None, help="write diagnostics JSON here instead of stdout"
    )
    p.add_argument(
        "--dump-hankel", default=None, help="write the assembled Hankel matrix here"
    )
    _add_pipeline_flags(p, newton_default=0)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("refine", help="Newton-refine a model against moments")
    p.add_argument("moments", help="moment file to read")
    p.add_argument("--model", required=True, help="model file with the starting point")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--newton-iters", type=int, default=5, help="refinement steps")
    p.add_argument(
        "--newton-damping",
        choices=("on", "off"),
        default="on",
        help="halve steps until the misfit decreases",
    )
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("experiment", help="run a seeded perturbation sweep to CSV")
    p.add_argument(
        "--sweep", choices=SWEEP_PARAMETERS, required=True, help="parameter to vary"
    )
    p.add_argument(
        "--values", type=_values_list, required=True, help="comma separated values"
    )
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--r", type=int, default=5)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--e", type=float, default=6.0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--out", required=True, help="CSV file to write")
    _add_pipeline_flags(p, newton_default=0)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def cmd_generate(args) -> int:
    spec = InstanceSpec(n=args.n, r=args.r, d=args.d, M=args.M, seed=args.seed)
    model = sample_instance(spec)
    seq = generate_moments(model, args.d)
    store_model(model, args.model_out)
    store_moments(seq, args.moments_out)
    return 0


def cmd_perturb(args) -> int:
    seq = load_moments(args.moments)
    noisy = perturb(seq, PerturbationSpec(e=args.e, seed=args.seed))
    store_moments(noisy, args.out)
    return 0


def cmd_decompose(args) -> int:
    seq = load_moments(args.moments)
    start = time.perf_counter()
    result = run_pipeline(
        seq,
        epsilon=args.epsilon,
        seed=args.seed,
        rescale=args.rescale,
        newton_iters=args.newton_iters,
        newton_damping=(args.newton_damping == "on"),
        d1=args.d1,
        d2=args.d2,
        rank=args.rank,
    )
    wall_ms = (time.perf_counter() - start) * 1e3
    if args.out:
        store_model(result.model, args.out)
    if args.dump_hankel:
        dump_matrix(result.decomposition.hankel, args.dump_hankel)
    diag = result.decomposition.diagnostics
    payload = {
        "r_est": result.rank,
        "lambda": result.lam,
        "rescale": args.rescale,
        "d1": diag.d1,
        "d2": diag.d2,
        "singular_values": [float(s) for s in diag.singular_values],
        "rank_possibly_truncated": diag.rank_possibly_truncated,
        "eigengap": diag.eigengap,
        "combination_attempts": diag.combination_attempts,
        "max_eigen_residual": diag.max_eigen_residual,
        "commutator_norms": list(diag.commutator_norms),
        "newton": None,
        "wall_ms": wall_ms,
    }
    if result.refinement is not None:
        payload["newton"] = {
            "iters": args.newton_iters,
            "damping": args.newton_damping,
            "trace": list(result.refinement.trace),
            "reason": result.refinement.reason,
        }
    text = json.dumps(payload, indent=2)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_refine(args) -> int:
    seq = load_moments(args.moments)
    model = load_model(args.model)
    result = refine(
        model,
        seq,
        max_iters=args.newton_iters,
        damping=(args.newton_damping == "on"),
    )
    store_model(result.model, args.out)
    print(
        json.dumps(
            {"trace": list(result.trace), "reason": result.reason}, indent=2
        )
    )
    return 0


def cmd_experiment(args) -> int:
    spec = ExperimentSpec(
        sweep=args.sweep,
        values=args.values,
        n=args.n,
        d=args.d,
        r=args.r,
        M=args.M,
        e=args.e,
        trials=args.trials,
        base_seed=args.seed,
        epsilon=args.epsilon,
        rescale=args.rescale,
        newton_iters=args.newton_iters,
        newton_damping=(args.newton_damping == "on"),
        rank=args.rank,
    )
    rows = run_experiment(spec)
    write_csv(rows, args.out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MultipronyError as exc:
        print(f"{exc.error_class}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"io-error: {exc}", file=sys.stderr)
        return 4


def entrypoint() -> None:
    sys.exit(main())
