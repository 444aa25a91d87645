"""Newton refinement: residual, derivatives, iteration behavior."""

import numpy as np
import pytest

from multiprony import (
    InstanceSpec,
    PerturbationSpec,
    PolyExpModel,
    enumerate_monomials,
    generate_moments,
    gradient_and_jacobian,
    make_state,
    pack,
    perturb,
    refine,
    residual,
    sample_instance,
    unpack,
)
from multiprony.errors import UsageError

from conftest import seq_from_values


def misfit(f):
    return 0.5 * float(np.real(np.vdot(f, f)))


def random_state(rng, n, r):
    params = np.empty((r, n + 1), dtype=np.complex128)
    params[:, 0] = rng.uniform(0.5, 1.0, r) * np.exp(
        1j * rng.uniform(-np.pi, np.pi, r)
    )
    params[:, 1:] = rng.uniform(0.5, 1.5, (r, n)) * np.exp(
        1j * rng.uniform(-np.pi, np.pi, (r, n))
    )
    return params


def numeric_gradient(params, seq, support, h=1e-6):
    expo = support.exponents()
    targets = seq.vector(support)

    def energy(p):
        xi = p[:, 1:]
        table = np.prod(xi[None, :, :] ** expo[:, None, :], axis=2)
        f = table @ p[:, 0] - targets
        return misfit(f)

    flat = params.ravel()
    grad = np.empty(2 * flat.size)
    for k in range(flat.size):
        for part, slot in ((1.0, 2 * k), (1j, 2 * k + 1)):
            plus = flat.copy()
            plus[k] += part * h
            minus = flat.copy()
            minus[k] -= part * h
            grad[slot] = (
                energy(plus.reshape(params.shape)) - energy(minus.reshape(params.shape))
            ) / (2 * h)
    return grad


def test_residual_exact_fit_is_zero():
    model = sample_instance(InstanceSpec(n=2, r=3, d=5, seed=1))
    seq = generate_moments(model, 5)
    support = enumerate_monomials(2, 5)
    f = residual(pack(model), seq, support)
    assert np.all(f == 0)  # generation and residual share the power formula


def test_residual_known_values():
    # model w=1, xi=0 against data sigma = (0, 0): F = (1, 0), E = 1/2
    seq = seq_from_values(1, 1, [0.0, 0.0])
    support = enumerate_monomials(1, 1)
    params = np.array([[1.0, 0.0]], dtype=complex)
    f = residual(params, seq, support)
    assert f.tolist() == [1.0, 0.0]
    assert misfit(f) == 0.5
    doubled = np.array([[2.0, 0.0]], dtype=complex)
    assert residual(doubled, seq, support).tolist() == [2.0, 0.0]


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(42)
    for trial in range(10):
        n = int(rng.integers(1, 4))
        r = int(rng.integers(1, 4))
        d = 4 if n < 3 else 3
        truth = sample_instance(InstanceSpec(n=n, r=r, d=d, seed=trial))
        seq = generate_moments(truth, d)
        support = enumerate_monomials(n, d)
        params = random_state(rng, n, r)
        grad, _ = gradient_and_jacobian(params, seq, support)
        fd = numeric_gradient(params, seq, support)
        scale = max(1.0, float(np.max(np.abs(grad))))
        assert np.max(np.abs(grad - fd)) <= 1e-5 * scale


def test_jacobian_is_symmetric():
    rng = np.random.default_rng(7)
    truth = sample_instance(InstanceSpec(n=2, r=2, d=4, seed=0))
    seq = generate_moments(truth, 4)
    support = enumerate_monomials(2, 4)
    params = random_state(rng, 2, 2)
    _, jac = gradient_and_jacobian(params, seq, support)
    assert np.max(np.abs(jac - jac.T)) <= 1e-10 * max(1.0, float(np.max(np.abs(jac))))


def test_jacobian_at_exact_fit_is_gauss_newton():
    # the second-order block is contracted against F, which vanishes
    from multiprony.newton import _derivatives

    truth = sample_instance(InstanceSpec(n=2, r=2, d=4, seed=5))
    seq = generate_moments(truth, 4)
    support = enumerate_monomials(2, 4)
    params = pack(truth)
    grad, jac = gradient_and_jacobian(params, seq, support)
    assert np.max(np.abs(grad)) <= 1e-12
    _, d, _ = _derivatives(params, support.exponents())
    gram = d.conj().T @ d
    nn = gram.shape[0]
    gn = np.empty((2 * nn, 2 * nn))
    gn[0::2, 0::2] = gram.real
    gn[0::2, 1::2] = -gram.imag
    gn[1::2, 0::2] = gram.imag
    gn[1::2, 1::2] = gram.real
    assert np.max(np.abs(jac - gn)) <= 1e-10 * max(1.0, float(np.max(np.abs(gn))))


def test_jacobian_matches_gradient_differences():
    # central differences of the analytic gradient reproduce the Hessian
    rng = np.random.default_rng(3)
    truth = sample_instance(InstanceSpec(n=2, r=1, d=3, seed=2))
    seq = generate_moments(truth, 3)
    support = enumerate_monomials(2, 3)
    params = random_state(rng, 2, 1)
    _, jac = gradient_and_jacobian(params, seq, support)
    h = 1e-6
    flat = params.ravel()
    fd = np.empty_like(jac)
    for k in range(flat.size):
        for part, slot in ((1.0, 2 * k), (1j, 2 * k + 1)):
            plus = flat.copy()
            plus[k] += part * h
            minus = flat.copy()
            minus[k] -= part * h
            gp, _ = gradient_and_jacobian(plus.reshape(params.shape), seq, support)
            gm, _ = gradient_and_jacobian(minus.reshape(params.shape), seq, support)
            fd[:, slot] = (gp - gm) / (2 * h)
    scale = max(1.0, float(np.max(np.abs(jac))))
    assert np.max(np.abs(jac - fd)) <= 1e-4 * scale


def test_refine_fixed_point_at_solution():
    model = sample_instance(InstanceSpec(n=2, r=2, d=5, seed=4))
    seq = generate_moments(model, 5)
    result = refine(model, seq)
    assert result.reason == "fixed-point"
    assert result.trace == (0.0,)
    assert np.array_equal(result.model.weights, model.weights)
    assert np.array_equal(result.model.frequencies, model.frequencies)


@pytest.mark.parametrize("r", [1, 2])
def test_refine_reduces_noisy_misfit(r):
    truth = sample_instance(InstanceSpec(n=1, r=r, d=6, seed=11))
    seq = perturb(generate_moments(truth, 6), PerturbationSpec(e=4.0, seed=1))
    result = refine(truth, seq, max_iters=5)
    assert result.trace[-1] <= result.trace[0]
    diffs = np.diff(result.trace)
    assert np.all(diffs <= 0)  # damped steps only accept decreases


def test_refine_zero_iterations():
    truth = sample_instance(InstanceSpec(n=1, r=1, d=3, seed=0))
    seq = generate_moments(truth, 3)
    result = refine(truth, seq, max_iters=0)
    assert len(result.trace) == 1
    assert result.reason == "iteration-limit"


def test_refine_returns_best_iterate_undamped():
    truth = sample_instance(InstanceSpec(n=1, r=2, d=6, seed=13))
    seq = perturb(generate_moments(truth, 6), PerturbationSpec(e=3.0, seed=3))
    result = refine(truth, seq, max_iters=5, damping=False)
    support = enumerate_monomials(1, 6)
    final = misfit(residual(pack(result.model), seq, support))
    assert final <= min(result.trace) + 1e-18


def test_refine_validates_arguments():
    truth = sample_instance(InstanceSpec(n=2, r=1, d=3, seed=0))
    seq = seq_from_values(1, 1, [1.0, 2.0])
    with pytest.raises(UsageError):
        refine(truth, seq)
    truth1 = sample_instance(InstanceSpec(n=1, r=1, d=1, seed=0))
    with pytest.raises(UsageError):
        refine(truth1, seq, max_iters=-1)


def test_refine_supports_subset():
    truth = sample_instance(InstanceSpec(n=2, r=2, d=5, seed=21))
    seq = perturb(generate_moments(truth, 5), PerturbationSpec(e=5.0, seed=2))
    support = enumerate_monomials(2, 3)
    result = refine(truth, seq, support=support, max_iters=3)
    assert len(result.trace) >= 1


def test_solve_step_regularizes_singular_hessian():
    from multiprony.newton import _solve_step

    jac = np.array([[1.0, 0.0], [0.0, 0.0]])
    step = _solve_step(jac, np.array([1.0, 1.0]))
    assert step is not None and np.all(np.isfinite(step))


def test_make_state_and_pack_round_trip():
    model = sample_instance(InstanceSpec(n=2, r=3, d=4, seed=6))
    seq = generate_moments(model, 4)
    state = make_state(model, seq)
    assert state.E == 0.0
    assert state.iteration == 0
    assert state.params.shape == (3, 3)
    back = unpack(2, pack(model))
    assert np.array_equal(back.weights, model.weights)
    assert np.array_equal(back.frequencies, model.frequencies)
    with pytest.raises(UsageError):
        make_state(np.zeros((2, 5), dtype=complex), seq)
