import numpy as np
import pytest

from conftest import scalar
from glqlab.closed_loop import solve_glq
from glqlab.heat import (
    COUNTEREXAMPLE,
    HeatConfig,
    b1_matrix,
    b2_column,
    build_system,
    default_x0,
    demo_counterexample,
    demo_stable,
    snap_roundoff,
    truncation_agreement,
    truncation_stabilized,
    truncation_study,
)
from glqlab.numlin import expm
from glqlab.riccati import integrate_dre
from glqlab.structure import hautus_detectable, hautus_stabilizable

EPS = np.finfo(float).eps


def test_config_validation():
    with pytest.raises(ValueError):
        HeatConfig(omega=(2.0, 1.0))
    with pytest.raises(ValueError):
        HeatConfig(omega=(0.5, 4.0))
    with pytest.raises(ValueError):
        HeatConfig(n_modes=0)
    with pytest.raises(ValueError):
        HeatConfig(kappa=0.0)
    with pytest.raises(ValueError):
        HeatConfig(operator_kind="B3")


def test_counterexample_eigenvalues():
    pr = build_system(COUNTEREXAMPLE)
    assert np.array_equal(np.diag(pr.A), [4.0, 1.0, -4.0, -11.0])
    assert np.count_nonzero(pr.A - np.diag(np.diag(pr.A))) == 0


def test_stable_eigenvalues():
    assert np.array_equal(HeatConfig(c=0.0, n_modes=3).eigenvalues(), [-1.0, -4.0, -9.0])


def test_b2_closed_form_values():
    b = b2_column(4, (np.pi / 4, 3 * np.pi / 4))
    assert abs(b[1]) <= 4 * EPS
    assert b[0] == pytest.approx(np.sqrt(2 / np.pi) * np.sqrt(2), rel=1e-14)
    pr = build_system(COUNTEREXAMPLE)
    assert pr.B[1, 0] == 0.0 and pr.C[0, 1] == 0.0


def test_b2_matches_quadrature():
    a, b = 0.5, 2.0
    x = np.linspace(a, b, 20001)
    for k in range(1, 7):
        psi = np.sqrt(2 / np.pi) * np.sin(k * x)
        quad = np.trapezoid(psi, x)
        assert b2_column(6, (a, b))[k - 1] == pytest.approx(quad, abs=1e-8)


def test_b2_bound():
    k = np.arange(1, 201)
    for omega in ((0.1, 0.2), (0.5, 2.0), (np.pi / 4, 3 * np.pi / 4)):
        assert np.all(np.abs(b2_column(200, omega)) <= np.sqrt(2 / np.pi) * 2 / k + 1e-15)


def test_b1_matches_quadrature():
    a, b = 0.5, 2.0
    L = b - a
    x = np.linspace(a, b, 20001)
    B1 = b1_matrix(5, (a, b))
    for k in range(1, 6):
        for j in range(1, 6):
            f = np.sqrt(2 / L) * np.sin(j * np.pi * (x - a) / L) * np.sqrt(2 / np.pi) * np.sin(k * x)
            assert B1[k - 1, j - 1] == pytest.approx(np.trapezoid(f, x), abs=1e-8)


def test_b1_resonant_frequency():
    # omega of length pi/2 makes j pi / L = 2 j coincide with mode k = 2 j
    B1 = b1_matrix(4, (0.5, 0.5 + np.pi / 2))
    a, L = 0.5, np.pi / 2
    x = np.linspace(a, a + L, 40001)
    f = np.sqrt(2 / L) * np.sin(2 * (x - a)) * np.sqrt(2 / np.pi) * np.sin(2 * x)
    assert B1[1, 0] == pytest.approx(np.trapezoid(f, x), abs=1e-8)


def test_snap_roundoff():
    M = snap_roundoff(np.array([1.0, 1e-17, -3e-14, 0.5]))
    assert np.array_equal(M, [1.0, 0.0, -3e-14, 0.5])


def test_observation_is_adjoint():
    for kind in ("B1", "B2"):
        pr = build_system(HeatConfig(c=0.0, n_modes=5, omega=(0.5, 2.0), operator_kind=kind, kappa=2.0))
        assert np.array_equal(pr.C, pr.B.T)
        assert np.array_equal(pr.K, 2.0 * np.eye(pr.m))


def test_zero_input_is_free_evolution():
    cfg = HeatConfig(c=0.0, n_modes=4, omega=(0.5, 2.0))
    pr = build_system(cfg).with_(B=np.zeros((4, 1)))
    x0 = default_x0(4)
    traj = solve_glq(pr, x0, 2.0, 1e-3)
    assert np.allclose(traj.sample(2.0)[0], expm(pr.A, 2.0) @ x0, atol=1e-10)


def test_counterexample_demo():
    rep = demo_counterexample()
    assert not rep.stabilizable and rep.stabilizable.witness_eigenvalue == pytest.approx(1.0)
    assert not rep.detectable
    assert abs(rep.extras["mode2_ratio"] - 1) <= 0.05
    assert rep.scan.measure_outside[1] > rep.scan.measure_outside[0]


def test_stable_demo():
    rep = demo_stable()
    assert rep.stabilizable and rep.detectable
    assert all(rep.extras.values())
    r40 = rep.scan.results[-1]
    assert r40.k >= 0.5
    assert r40.midpoint_deviation <= 1e-3
    m = rep.scan.measure_outside
    assert m.max() - m.min() <= 0.05 * m.max()


def test_b1_detectable_on_generic_window():
    pr = build_system(HeatConfig(c=0.0, n_modes=8, omega=(0.5, 2.0), operator_kind="B1"))
    assert hautus_detectable(pr.A, pr.C) and hautus_stabilizable(pr.A, pr.B)


def test_truncation_stable_b2():
    rows = truncation_study(HeatConfig(c=0.0, omega=(0.5, 2.0)), [4, 8, 16], 10.0, 1e-3)
    mids = np.array([r.midpoint_deviation for r in rows])
    assert np.all(np.abs(np.diff(mids)) <= 1e-3)
    assert truncation_stabilized(rows)
    assert len(truncation_agreement(rows)) == 2


def test_truncation_counterexample_diverges_for_all_n():
    rows = truncation_study(COUNTEREXAMPLE, [2, 4, 8], 10.0, 1e-3)
    for r in rows:
        assert r.k <= 0
        assert r.midpoint_deviation > 10


def test_truncation_requires_increasing_n():
    with pytest.raises(ValueError):
        truncation_study(HeatConfig(), [8, 4], 10.0, 1e-2)


def test_single_mode_matches_scalar_closed_form():
    cfg = HeatConfig(c=0.0, n_modes=1, omega=(0.5, 2.0))
    pr = build_system(cfg)
    a, b = pr.A[0, 0], pr.B[0, 0]
    T = 5.0
    sol = integrate_dre(pr, T, 1e-3)
    # P' = 2 a P - b^2 P^2 + q with q = b^2 (C = B^T) and P(0) = 0
    q, s = b * b, b * b
    g = np.sqrt(a * a + s * q)
    t = sol.grid
    exact = q * np.sinh(g * t) / (g * np.cosh(g * t) - a * np.sinh(g * t))
    assert np.max(np.abs(sol.values[:, 0, 0] - exact)) <= 1e-9
    twin = scalar(a=a, b=b, c=b)
    rows = truncation_study(cfg, [1], T, 1e-3)
    traj = solve_glq(twin.with_(z=[1.0], v=[0.5]), default_x0(1), T, 1e-3)
    d = np.abs(traj.states[:, 0] - traj.reference.x_e[0]) + np.abs(traj.controls[:, 0] - traj.reference.u_e[0])
    assert rows[0].midpoint_deviation == pytest.approx(d[(len(d) - 1) // 2], rel=1e-12)
