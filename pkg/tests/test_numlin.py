import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from glqlab.errors import NonFiniteState, SingularMatrix
from glqlab.numlin import eigen, expm, kernel_basis, rk4_integrate, simpson, solve_linear


def test_solve_identity():
    assert np.allclose(solve_linear(np.eye(3), [1.0, 2.0, 3.0]), [1, 2, 3])


def test_solve_diagonal():
    assert np.allclose(solve_linear(np.diag([2.0, 4.0]), [2.0, 4.0]), [1, 1])


def test_solve_random_residual(rng):
    M = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    b = rng.normal(size=5)
    y = solve_linear(M, b)
    assert np.linalg.norm(M @ y - b) <= 1e-10 * (1 + np.linalg.norm(b))


def test_solve_singular():
    with pytest.raises(SingularMatrix):
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(arrays(float, (4, 4), elements=st.floats(-3, 3)), arrays(float, 4, elements=st.floats(-3, 3)))
def test_solve_residual_property(M, b):
    M = M + 13 * np.eye(4)  # strictly diagonally dominant
    y = solve_linear(M, b)
    assert np.linalg.norm(M @ y - b) / (1 + np.linalg.norm(b)) <= 1e-10


def test_kernel_full_rank():
    assert kernel_basis(np.eye(2)).shape == (2, 0)


def test_kernel_zero_matrix():
    Q = kernel_basis(np.zeros((2, 2)))
    assert Q.shape == (2, 2)
    assert np.allclose(Q.T @ Q, np.eye(2))


def test_kernel_rank_one():
    Q = kernel_basis(np.ones((2, 2)))
    assert Q.shape == (2, 1)
    v = Q[:, 0] * np.sign(Q[0, 0])
    assert np.allclose(v, np.array([1.0, -1.0]) / np.sqrt(2))


def test_kernel_orthonormal_and_annihilated(rng):
    M = rng.normal(size=(3, 2)) @ rng.normal(size=(2, 6))
    Q = kernel_basis(M)
    assert Q.shape == (6, 4)
    assert np.allclose(Q.T @ Q, np.eye(4), atol=1e-12)
    assert np.linalg.norm(M @ Q) < 1e-10


def test_eigen_diagonal():
    dec = eigen(np.diag([1.0, -2.0]))
    assert np.allclose(sorted(dec.eigenvalues.real), [-2, 1])


def test_eigen_rotation():
    dec = eigen(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert np.allclose(sorted(dec.eigenvalues.imag), [-1, 1])
    assert np.allclose(dec.eigenvalues.real, 0)


def test_eigen_heat_counterexample():
    from glqlab.heat import HeatConfig, build_system

    A = build_system(HeatConfig(c=5.0, n_modes=4)).A
    assert np.allclose(eigen(A).eigenvalues.real, [4, 1, -4, -11])


def test_eigen_residuals_and_unit_vectors(rng):
    V = rng.normal(size=(5, 5))
    M = V @ np.diag([3.0, 1.0, -0.5, -2.0, -4.0]) @ np.linalg.inv(V)
    dec = eigen(M)
    assert np.allclose(np.linalg.norm(dec.eigenvectors, axis=0), 1)
    res = np.linalg.norm(M @ dec.eigenvectors - dec.eigenvectors * dec.eigenvalues, axis=0)
    assert np.all(res <= dec.residuals + 1e-15)
    assert res.sum() <= 1e-8 * np.linalg.norm(M, 2)
    assert dec.valid


def test_expm_zero_time(rng):
    assert np.allclose(expm(rng.normal(size=(3, 3)), 0.0), np.eye(3), atol=1e-15)


def test_expm_diagonal():
    a = np.array([0.3, -1.0, 2.0])
    assert np.allclose(expm(np.diag(a), 1.7), np.diag(np.exp(1.7 * a)), rtol=1e-12)


def test_expm_semigroup(rng):
    M = rng.normal(size=(4, 4))
    assert np.allclose(expm(M, 0.7 + 1.3), expm(M, 0.7) @ expm(M, 1.3), rtol=1e-9, atol=1e-9)


def test_expm_against_scipy(rng):
    from scipy.linalg import expm as sp_expm

    for scale in (0.1, 1.0, 5.0):
        M = scale * rng.normal(size=(4, 4))
        ref = sp_expm(M)
        assert np.linalg.norm(expm(M) - ref) <= 1e-10 * np.linalg.norm(ref)


def test_rk4_zero_field():
    t, y = rk4_integrate(lambda t, y: np.zeros_like(y), np.array([1.0, -2.0]), 0.0, 1.0, 0.1)
    assert np.all(y == np.array([1.0, -2.0]))


def test_rk4_exponential():
    t, y = rk4_integrate(lambda t, y: -y, np.array([1.0]), 0.0, 1.0, 1e-3)
    assert abs(y[-1, 0] - np.exp(-1)) <= 1e-10
    assert t[-1] == 1.0


def test_rk4_short_final_step():
    t, y = rk4_integrate(lambda t, y: -y, np.array([1.0]), 0.0, 1.05, 0.1)
    assert t[-1] == pytest.approx(1.05, abs=1e-15)
    assert abs(y[-1, 0] - np.exp(-1.05)) < 1e-6


def test_rk4_linear_vs_expm(rng):
    A = rng.normal(size=(3, 3)) - np.eye(3)
    y0 = rng.normal(size=3)
    t, y = rk4_integrate(lambda t, y: A @ y, y0, 0.0, 2.0, 1e-3)
    assert np.linalg.norm(y[-1] - expm(A, 2.0) @ y0) <= 1e-8


def test_rk4_order():
    errs = []
    for dt in (0.1, 0.05):
        _, y = rk4_integrate(lambda t, y: -y, np.array([1.0]), 0.0, 1.0, dt)
        errs.append(abs(y[-1, 0] - np.exp(-1)))
    assert errs[0] / errs[1] >= 12


def test_rk4_blowup():
    with pytest.raises(NonFiniteState) as info:
        rk4_integrate(lambda t, y: y * y, np.array([1.0]), 0.0, 2.0, 1e-2)
    # exact solution 1/(1-t) blows up at t = 1; RK4 overshoots by a few steps
    assert 0.9 < info.value.t_last < 1.1


def test_simpson_polynomial():
    x = np.linspace(0, 2, 11)
    assert simpson(x**3, x[1] - x[0]) == pytest.approx(4.0, rel=1e-13)


def test_simpson_even_samples_trapezoid_tail():
    x = np.linspace(0, 1, 4)
    assert simpson(np.ones(4), x[1] - x[0]) == pytest.approx(1.0, rel=1e-14)
