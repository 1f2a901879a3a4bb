import numpy as np
import pytest

from conftest import scalar
from glqlab.closed_loop import (
    cost_identity_residual,
    integrate_adjoint,
    open_loop,
    solve_glq,
    solve_lq,
)
from glqlab.glq import GlqProblem
from glqlab.numlin import expm
from glqlab.randsys import random_certified, random_glq
from glqlab.riccati import integrate_dre
from glqlab.steady import solve_steady


def test_zero_problem():
    traj = solve_glq(scalar(a=-1.0), np.zeros(1), 2.0, 1e-2)
    assert np.all(traj.states == 0) and np.all(traj.controls == 0) and traj.cost == 0


def test_unobserved_free_evolution():
    A = np.array([[-1.0, 0.5], [0.0, -2.0]])
    pr = GlqProblem.create(A=A, B=np.eye(2), C=np.zeros((1, 2)))
    x0 = np.array([1.0, -1.0])
    traj = solve_glq(pr, x0, 2.0, 1e-2)
    assert np.all(traj.controls == 0)
    for t in (0.5, 1.0, 2.0):
        assert np.allclose(traj.sample(t)[0], expm(A, t) @ x0, atol=1e-9)


def test_tanh_cost():
    traj = solve_glq(scalar(), np.ones(1), 6.0, 1e-3)
    assert abs(traj.cost - np.tanh(6.0)) <= 1e-5


def test_initial_state_kept(rng):
    pr = random_certified(rng)
    x0 = rng.normal(size=pr.n)
    traj = solve_glq(pr, x0, 3.0, 1e-2)
    assert np.array_equal(traj.states[0], x0)


def test_adjoint_zero():
    pr = random_glq(np.random.default_rng(1), 3, 1, 2)
    sol = integrate_dre(pr, 2.0, 1e-2)
    arc = integrate_adjoint(pr, sol, np.zeros(3), 2.0)
    assert np.all(arc.values == 0)


@pytest.mark.parametrize("a", [-1.0, 0.7])
def test_adjoint_scalar_exponential(a):
    pr = scalar(a=a, c=0.0)
    sol = integrate_dre(pr, 2.0, 1e-3)
    arc = integrate_adjoint(pr, sol, np.array([0.3]), 2.0)
    assert np.allclose(arc.values[:, 0], 0.3 * np.exp(a * arc.grid), rtol=1e-10)


def test_adjoint_norm_bound(rng):
    pr = random_certified(rng, n_max=3)
    st = solve_steady(pr)
    T = 3.0
    sol = integrate_dre(pr, T, 1e-3)
    arc = integrate_adjoint(pr, sol, st.w, T)
    assert arc.values[0] == pytest.approx(st.w)
    # the generator A^T - P B R^-1 B^T is bounded by |A| + |S||P| in norm
    rho = np.linalg.norm(pr.A, 2) + np.linalg.norm(pr.S, 2) * max(np.linalg.norm(P, 2) for P in sol.values)
    assert np.linalg.norm(arc.values[-1]) <= np.exp(rho * T) * np.linalg.norm(st.w) + 1e-12


def test_lq_zero_start():
    pr = random_glq(np.random.default_rng(2), 3, 2, 2)
    traj = solve_lq(pr, np.zeros(3), 2.0, 1e-2)
    assert np.all(traj.states == 0) and np.all(traj.controls == 0)


def test_lq_feedback_formula(rng):
    pr = random_glq(rng, 3, 2, 2, linear=False)
    x0 = rng.normal(size=3)
    T, dt = 2.0, 1e-2
    traj = solve_lq(pr, x0, T, dt)
    gain = np.linalg.solve(pr.R, pr.B.T)
    sol = traj.riccati
    for i in range(0, len(traj.grid), 40):
        P = sol.values[len(traj.grid) - 1 - i]
        assert np.allclose(traj.controls[i], -gain @ P @ traj.states[i], atol=1e-10)


def test_lq_cost_is_quadratic_form(rng):
    pr = random_glq(rng, 3, 1, 1, linear=False)
    x0 = rng.normal(size=3)
    traj = solve_lq(pr, x0, 5.0, 1e-3)
    ref = x0 @ traj.riccati.at(5.0) @ x0
    assert abs(traj.cost - ref) <= 1e-6 * abs(ref)


def test_identity_optimal_control(rng):
    pr = random_glq(rng, 3, 2, 2, linear=False)
    x0 = rng.normal(size=3)
    T, dt = 2.0, 1e-3
    traj = solve_lq(pr, x0, T, dt)
    # piecewise-constant samples of the optimal control on fine segments
    levels = traj.controls[:-1:10]
    assert cost_identity_residual(pr, x0, levels, T, dt) <= 1e-6


def test_identity_zero_control(rng):
    pr = random_glq(rng, 3, 2, 2, linear=False)
    x0 = rng.normal(size=3)
    assert cost_identity_residual(pr, x0, np.zeros((4, 2)), 2.0, 1e-3) <= 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_identity_random_piecewise(seed):
    rng = np.random.default_rng(seed)
    pr = random_glq(rng, 3, 2, 2, linear=False)
    x0 = rng.normal(size=3)
    levels = rng.normal(size=(8, 2))
    assert cost_identity_residual(pr, x0, levels, 2.0, 1e-3) <= 1e-5


def test_open_loop_scalar():
    pr = scalar(a=-1.0)
    (ts, xs, us), = open_loop(pr, np.zeros(1), lambda t: np.ones(1), 2.0, 1e-2)
    assert np.allclose(xs[:, 0], 1 - np.exp(-ts), atol=1e-9)


def test_dynamic_programming_restart(rng):
    pr = random_certified(rng)
    x0 = rng.normal(size=pr.n)
    T, dt, t1 = 4.0, 1e-3, 1.5
    full = solve_glq(pr, x0, T, dt)
    x1, _ = full.sample(t1)
    tail = solve_glq(pr, x1, T - t1, dt)
    i1 = int(round(t1 / dt))
    assert np.max(np.abs(tail.states - full.states[i1:])) <= 1e-6
    assert np.max(np.abs(tail.controls - full.controls[i1:])) <= 1e-6


def test_optimality_against_perturbations(rng):
    pr = random_certified(rng)
    x0 = rng.normal(size=pr.n)
    T, dt = 2.0, 1e-3
    best = solve_glq(pr, x0, T, dt).cost
    from glqlab.oracle import TranscribedProblem, simulate

    for _ in range(5):
        tp = TranscribedProblem(pr, x0, T, 20, rng.normal(size=(20, pr.m)))
        assert best <= simulate(tp)[2] + 1e-6 * (1 + abs(best))


@pytest.mark.parametrize("seed", range(3))
def test_glq_lq_difference_identity(seed):
    rng = np.random.default_rng(50 + seed)
    pr = random_certified(rng)
    st = solve_steady(pr)
    y0 = rng.normal(size=pr.n)
    T, dt = 4.0, 1e-3
    sol = integrate_dre(pr, T, dt)
    far = solve_glq(pr, st.x_e + 2 * y0, T, dt, riccati=sol)
    near = solve_glq(pr, st.x_e + y0, T, dt, riccati=sol)
    lq = solve_lq(pr, y0, T, dt, riccati=sol)
    assert np.max(np.abs(far.states - near.states - lq.states)) <= 1e-8
