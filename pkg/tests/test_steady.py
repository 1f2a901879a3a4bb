import numpy as np
import pytest

from conftest import scalar
from glqlab.errors import KktSingular
from glqlab.glq import GlqProblem, running_cost
from glqlab.heat import HeatConfig, build_system
from glqlab.randsys import random_certified
from glqlab.steady import (
    check_uniqueness,
    kkt_matrix,
    projected_operator_spectrum,
    solve_steady,
    steady_manifold_basis,
)


def test_zero_data_gives_zero_triple():
    st = solve_steady(scalar(a=-1.0))
    assert st.x_e[0] == 0 and st.u_e[0] == 0 and st.w[0] == 0


def test_scalar_hand_example():
    st = solve_steady(scalar(a=-1.0, z=1.0))
    assert np.allclose([st.x_e[0], st.u_e[0], st.w[0]], [-0.5, -0.5, -0.5], atol=1e-12, rtol=0)
    assert st.unique


def test_scalar_zero_generator():
    st = solve_steady(scalar(a=0.0, z=1.0))
    assert np.allclose([st.x_e[0], st.u_e[0], st.w[0]], [-1.0, 0.0, 0.0], atol=1e-12)


def test_kkt_shape():
    pr = random_certified(np.random.default_rng(3))
    n, m = pr.n, pr.m
    assert kkt_matrix(pr).shape == (2 * n + m, 2 * n + m)


@pytest.mark.parametrize("seed", range(10))
def test_random_suite_residuals(seed):
    pr = random_certified(np.random.default_rng(seed))
    st = solve_steady(pr)
    scale = 1 + np.linalg.norm(st.x_e) + np.linalg.norm(st.u_e) + np.linalg.norm(st.w)
    assert np.linalg.norm(pr.A @ st.x_e + pr.B @ st.u_e) <= 1e-9 * scale
    rx, ru = st.optimality_residuals(pr)
    assert rx + ru <= 1e-9 * scale
    assert rx + ru <= st.kkt_residual + 1e-15


@pytest.mark.parametrize("seed", range(5))
def test_global_optimality_on_manifold(seed):
    rng = np.random.default_rng(100 + seed)
    pr = random_certified(rng)
    st = solve_steady(pr)
    V = steady_manifold_basis(pr)
    best = running_cost(pr, st.x_e, st.u_e).total
    for _ in range(1000):
        y = np.concatenate([st.x_e, st.u_e]) + V @ rng.normal(scale=3.0, size=V.shape[1])
        assert best <= running_cost(pr, y[: pr.n], y[pr.n :]).total + 1e-8


def test_linear_stability_of_rhs():
    pr = random_certified(np.random.default_rng(7))
    base = solve_steady(pr)
    for delta in (1e-4, 1e-6):
        pert = solve_steady(pr.with_(z=pr.z + delta))
        shift = np.linalg.norm(pert.x_e - base.x_e) + np.linalg.norm(pert.u_e - base.u_e)
        assert shift <= 1e4 * delta


def test_uniqueness_examples():
    assert check_uniqueness(GlqProblem.create(A=-np.eye(2), B=np.eye(2), C=np.zeros((1, 2))))
    assert not check_uniqueness(scalar(a=0.0, c=0.0))
    assert check_uniqueness(scalar(a=0.0, c=1.0))


def test_singular_kkt_raises_with_fallback():
    pr = scalar(a=0.0, b=0.0, c=0.0, z=1.0)
    with pytest.raises(KktSingular) as info:
        solve_steady(pr)
    fb = info.value.fallback
    assert fb is not None and not fb.unique
    assert np.all(np.isfinite(fb.x_e))
    relaxed = solve_steady(pr, strict=False)
    assert not relaxed.unique


def test_projected_spectrum_scalar():
    val, trivial = projected_operator_spectrum(scalar(a=-1.0))
    assert not trivial
    assert val == pytest.approx(1.0)


def test_projected_spectrum_unobserved_plane():
    val, trivial = projected_operator_spectrum(scalar(a=0.0, b=0.0, c=0.0))
    assert not trivial
    assert val == pytest.approx(0.0, abs=1e-14)


def test_projected_spectrum_heat_stable_positive():
    pr = build_system(HeatConfig(c=0.0, n_modes=8, omega=(0.5, 2.0)))
    val, _ = projected_operator_spectrum(pr)
    assert val > 0
