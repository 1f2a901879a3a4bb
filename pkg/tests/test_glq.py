import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import scalar
from glqlab.errors import DimensionMismatch, NotCoercive
from glqlab.glq import GlqProblem, running_cost, steady_residual, total_cost, validate
from glqlab.closed_loop import Trajectory, solve_lq
from glqlab.randsys import random_glq


def test_validate_identity():
    pr = GlqProblem.create(A=np.eye(2), B=np.eye(2), C=np.eye(2), K=np.eye(2))
    assert validate(pr) == pytest.approx(1.0)


def test_validate_diag():
    pr = GlqProblem.create(A=np.eye(2), B=np.eye(2), C=np.eye(2), K=np.diag([2.0, 3.0]))
    assert validate(pr) == pytest.approx(4.0)
    assert pr.m_coerc == pytest.approx(4.0)


def test_validate_singular_K():
    with pytest.raises(NotCoercive):
        GlqProblem.create(A=np.eye(2), B=np.eye(2), C=np.eye(2), K=np.diag([1.0, 0.0]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        GlqProblem.create(A=np.eye(2), B=np.eye(3), C=np.eye(2))
    with pytest.raises(DimensionMismatch):
        GlqProblem.create(A=np.eye(2), B=np.eye(2), C=np.eye(2), z=[1.0])


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        GlqProblem.create(A=np.array([[np.nan]]), B=np.eye(1), C=np.eye(1))


def test_problem_immutable():
    pr = scalar()
    with pytest.raises(ValueError):
        pr.A[0, 0] = 3.0


def test_running_cost_zero():
    pr = scalar(z=1.0, v=2.0)
    assert running_cost(pr, [0.0], [0.0]).total == 0.0


def test_running_cost_linear_term():
    assert running_cost(scalar(z=1.0), [1.0], [0.0]).total == pytest.approx(3.0)


def test_running_cost_unit_vectors():
    pr = GlqProblem.create(A=np.eye(2), B=np.eye(2), C=np.eye(2), K=np.eye(2))
    e1 = np.array([1.0, 0.0])
    assert running_cost(pr, e1, e1).total == pytest.approx(2.0)


def test_running_cost_breakdown_sums(rng):
    pr = random_glq(rng, 3, 2, 2)
    cb = running_cost(pr, rng.normal(size=3), rng.normal(size=2))
    assert abs(cb.total - (cb.quadratic_state + cb.quadratic_control + cb.linear_state + cb.linear_control)) <= 1e-12
    assert float(cb) == cb.total


def test_running_cost_dimension_error():
    with pytest.raises(DimensionMismatch):
        running_cost(scalar(), [1.0, 2.0], [0.0])


@settings(max_examples=50, deadline=None)
@given(
    arrays(float, 5, elements=st.floats(-5, 5)),
    arrays(float, 5, elements=st.floats(-5, 5)),
    st.floats(0, 1),
    st.integers(0, 2**32 - 1),
)
def test_running_cost_convex(a, b, t, seed):
    pr = random_glq(np.random.default_rng(seed), 3, 2, 2)

    def ell(w):
        return running_cost(pr, w[:3], w[3:]).total

    mix = t * a + (1 - t) * b
    assert ell(mix) <= t * ell(a) + (1 - t) * ell(b) + 1e-10 * (1 + abs(ell(a)) + abs(ell(b)))


@settings(max_examples=50, deadline=None)
@given(arrays(float, 5, elements=st.floats(-10, 10)), st.integers(0, 2**32 - 1))
def test_running_cost_coercive_lower_bound(w, seed):
    pr = random_glq(np.random.default_rng(seed), 3, 2, 2)
    x, u = w[:3], w[3:]
    bound = pr.m_coerc * u @ u - 2 * np.linalg.norm(pr.v) * np.linalg.norm(u) - 2 * np.linalg.norm(pr.z) * np.linalg.norm(x)
    assert running_cost(pr, x, u).total >= bound - 1e-9


def _arc(grid, X, U):
    return Trajectory(grid, X, U, 0.0, None)


def test_total_cost_zero_arc():
    grid = np.linspace(0, 1, 11)
    assert total_cost(scalar(z=1.0), _arc(grid, np.zeros((11, 1)), np.zeros((11, 1)))) == 0.0


def test_total_cost_constant_arc():
    pr = scalar(a=-1.0, z=1.0)
    x_e, u_e = np.array([-0.5]), np.array([-0.5])
    T = 3.0
    grid = np.linspace(0, T, 301)
    arc = _arc(grid, np.tile(x_e, (301, 1)), np.tile(u_e, (301, 1)))
    assert total_cost(pr, arc) == pytest.approx(T * running_cost(pr, x_e, u_e).total, abs=1e-10)


def test_total_cost_scalar_lq_closed_form():
    # optimal LQ cost from x0 = 1 equals P(T) = tanh(T)
    T = 2.0
    traj = solve_lq(scalar(), [1.0], T, 1e-3)
    assert abs(total_cost(scalar(), traj) - np.tanh(T)) <= 1e-6


def test_total_cost_concatenation(rng):
    pr = random_glq(rng, 2, 1, 1)
    grid = np.linspace(0, 2, 201)
    X = np.column_stack([np.sin(grid), np.cos(3 * grid)])
    U = np.exp(-grid)[:, None]
    whole = total_cost(pr, _arc(grid, X, U))
    first = total_cost(pr, _arc(grid[:101], X[:101], U[:101]))
    second = total_cost(pr, _arc(grid[100:], X[100:], U[100:]))
    assert whole == pytest.approx(first + second, rel=1e-10)


def test_steady_residual_examples():
    pr = scalar(a=-1.0)
    assert steady_residual(pr, [0.0], [0.0]) == 0.0
    assert steady_residual(pr, [1.0], [1.0]) == 0.0
    assert steady_residual(pr, [1.0], [0.0]) == pytest.approx(1.0)


def test_lq_and_with():
    pr = scalar(z=1.0, v=2.0)
    assert not pr.is_lq()
    assert pr.lq().is_lq()
    assert pr.with_(z=[3.0]).z[0] == 3.0
    assert pr == scalar(z=1.0, v=2.0)
    assert pr != scalar(z=1.0)
