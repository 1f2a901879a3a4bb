"""Optimal pair of the finite-horizon problem through the Riccati feedback law.

With ``(x_e, u_e, w)`` from :func:`~glqlab.steady.solve_steady`, ``P`` from
the Riccati flow and the adjoint arc

    p' = (A^T - P(t) S) p,   p(0) = w,

the optimal control on ``[0, T]`` is

    u*(t) = u_e - (K^T K)^{-1} B^T [ P(T - t) (x*(t) - x_e) + p(T - t) ].
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NonFiniteState
from .glq import running_cost_samples, total_cost
from .numlin import rk4_integrate, simpson
from .riccati import grid_steps, integrate_dre
from .steady import SteadyStateResult, check_uniqueness, solve_steady


@dataclass(frozen=True)
class AdjointArc:
    grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    grid: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    cost: float
    reference: SteadyStateResult
    adjoint: AdjointArc | None = None
    riccati: object = None

    @property
    def T(self):
        return float(self.grid[-1])

    @property
    def dt(self):
        return float(self.grid[1] - self.grid[0])

    def sample(self, t):
        """``(x*(t), u*(t))`` at a grid time."""
        i = int(round(t / self.dt))
        return self.states[i], self.controls[i]


def _riccati_for(problem, T, dt, riccati):
    steps = grid_steps(T, dt)
    if riccati is None:
        return integrate_dre(problem, T, dt), steps
    if abs(riccati.dt - dt) > 1e-12 * dt or len(riccati.grid) < steps + 1:
        raise ValueError("Riccati solution does not cover the horizon on the same grid")
    return riccati, steps


def integrate_adjoint(problem, riccati, w, T):
    """Forward RK4 on ``p' = (A^T - P(t) S) p`` with ``p(0) = w`` over ``[0, T]``."""
    dt = riccati.dt
    steps = grid_steps(T, dt)
    n = problem.n
    w = np.asarray(w, dtype=float)
    P = riccati.values[: steps + 1]
    dP = riccati.derivatives[: steps + 1]
    zeros = np.zeros((steps + 1, n))
    values, derivs, bad = kernels.ltv_rk4(problem.A.T, np.eye(n), problem.S, P, dP, zeros, zeros, w, dt)
    if bad >= 0:
        raise NonFiniteState(
            f"adjoint arc overflowed after t={(bad - 1) * dt:.6g}", (bad - 1) * dt, values[-1]
        )
    return AdjointArc(riccati.grid[: steps + 1].copy(), values, derivs)


def _feedback_arc(problem, steady, riccati, adjoint, x0, steps, dt):
    """Closed-loop state and control on the grid; returns ``(grid, X, U)``."""
    n = problem.n
    S = problem.S
    P_rev = riccati.values[steps::-1]
    dP_rev = -riccati.derivatives[steps::-1]
    p_rev = adjoint.values[steps::-1]
    dp_rev = -adjoint.derivatives[steps::-1]
    y0 = np.asarray(x0, dtype=float) - steady.x_e
    Y, _, bad = kernels.ltv_rk4(problem.A, S, np.eye(n), P_rev, dP_rev, -p_rev @ S.T, -dp_rev @ S.T, y0, dt)
    grid = dt * np.arange(Y.shape[0])
    if bad >= 0:
        err = NonFiniteState(
            f"closed-loop state overflowed after t={grid[-1]:.6g}", float(grid[-1]), Y[-1] + steady.x_e
        )
        err.partial_grid = grid
        err.partial_states = Y + steady.x_e
        raise err
    gain = np.linalg.solve(problem.R, problem.B.T)
    inner = np.einsum("kij,kj->ki", P_rev, Y) + p_rev
    U = steady.u_e - inner @ gain.T
    return grid, Y + steady.x_e, U


def solve_glq(problem, x0, T, dt, steady=None, riccati=None):
    """Optimal trajectory of the horizon-``T`` problem from ``x0``.

    ``steady`` and ``riccati`` may be passed in to share work between
    solves; ``riccati`` must be on step ``dt`` and cover ``[0, T]``.

    Raises
    ------
    KktSingular, NonFiniteState
    """
    if steady is None:
        steady = solve_steady(problem)
    riccati, steps = _riccati_for(problem, T, dt, riccati)
    adjoint = integrate_adjoint(problem, riccati, steady.w, T)
    grid, X, U = _feedback_arc(problem, steady, riccati, adjoint, x0, steps, dt)
    traj = Trajectory(grid, X, U, 0.0, steady, adjoint, riccati)
    return Trajectory(grid, X, U, total_cost(problem, traj), steady, adjoint, riccati)


def zero_reference(problem):
    n, m = problem.n, problem.m
    return SteadyStateResult(np.zeros(n), np.zeros(m), np.zeros(n), 0.0, check_uniqueness(problem))


def solve_lq(problem, x0, T, dt, riccati=None):
    """Same as :func:`solve_glq` with ``z = v = 0``; the reference is the origin."""
    lq = problem if problem.is_lq() else problem.lq()
    return solve_glq(lq, x0, T, dt, steady=zero_reference(lq), riccati=riccati)


def open_loop(problem, x0, control, T, dt):
    """Simulate ``x' = A x + B u`` under a given control with RK4.

    ``control`` is either a callable ``u(t)`` or an array of shape
    ``(N, m)`` holding piecewise-constant values on ``N`` equal segments of
    ``[0, T]`` (segment boundaries must fall on the ``dt`` grid).

    Returns
    -------
    pieces : list of (grid, states, controls)
        One entry per segment (a single entry for callables).
    """
    A, B = problem.A, problem.B
    if callable(control):
        segments = [(0.0, T, control)]
    else:
        levels = np.atleast_2d(np.asarray(control, dtype=float))
        N = levels.shape[0]
        h = T / N
        grid_steps(h, dt)
        segments = [(k * h, (k + 1) * h, (lambda t, c=levels[k]: c)) for k in range(N)]
    pieces = []
    x = np.asarray(x0, dtype=float)
    for a, b, u in segments:
        ts, xs = rk4_integrate(lambda t, y: A @ y + B @ np.atleast_1d(u(t)), x, a, b, dt)
        us = np.array([np.atleast_1d(u(t)) for t in ts])
        pieces.append((ts, xs, us))
        x = xs[-1]
    return pieces


def cost_identity_residual(problem, x0, control, T, dt, riccati=None):
    """Relative defect of the completing-the-square identity for the LQ cost.

    For any control ``u`` with state ``x``,

        J_T(x0, u) = int_0^T |K (u + (K^T K)^{-1} B^T P(T - t) x)|^2 dt + <P(T) x0, x0>.

    Returns ``|lhs - rhs| / (1 + |J_T|)``; ``z`` and ``v`` of ``problem``
    are ignored.
    """
    lq = problem if problem.is_lq() else problem.lq()
    riccati, steps = _riccati_for(lq, T, dt, riccati)
    gain = np.linalg.solve(lq.R, lq.B.T)
    J = 0.0
    square = 0.0
    for ts, xs, us in open_loop(lq, x0, control, T, dt):
        J += simpson(running_cost_samples(lq, xs, us), dt)
        idx = steps - np.rint(ts / dt).astype(int)
        corrected = us + np.einsum("ij,kjl,kl->ki", gain, riccati.values[idx], xs)
        KU = corrected @ lq.K.T
        square += simpson(np.einsum("ki,ki->k", KU, KU), dt)
    x0 = np.asarray(x0, dtype=float)
    terminal = float(x0 @ riccati.values[steps] @ x0)
    return abs(J - square - terminal) / (1.0 + abs(J))
