"""Differential Riccati equation ``P' = A^T P + P A - P S P + C^T C``, ``P(0) = 0``.

``P`` is stored on forward time measured from zero; the feedback at time
``t`` of a horizon ``T`` problem reads ``P(T - t)``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NonFiniteState, NotConverged
from .numlin import expm, simpson


@dataclass(frozen=True)
class RiccatiSolution:
    """Samples ``P(t_i)`` on a uniform grid, with the right-hand side at each sample."""

    grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    symmetrization_drift: float

    @property
    def dt(self):
        return float(self.grid[1] - self.grid[0])

    @property
    def horizon(self):
        return float(self.grid[-1])

    def index(self, t):
        i = int(round(t / self.dt))
        if i < 0 or i >= len(self.grid) or abs(self.grid[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not on the Riccati grid")
        return i

    def at(self, t):
        return self.values[self.index(t)]


def grid_steps(horizon, dt):
    """Number of ``dt`` steps spanning ``horizon``; must divide it to 1e-9."""
    if horizon <= 0 or dt <= 0:
        raise ValueError("horizon and dt must be positive")
    steps = int(round(horizon / dt))
    if steps < 1 or abs(steps * dt - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError(f"horizon {horizon} is not a multiple of dt {dt}")
    return steps


def integrate_dre(problem, horizon, dt):
    """RK4 integration of the Riccati flow on ``[0, horizon]`` from ``P(0) = 0``.

    Raises
    ------
    NonFiniteState
        If ``P`` overflows; ``t_last`` reports the last finite sample.
    """
    steps = grid_steps(horizon, dt)
    P, dP, drift, bad = kernels.dre_rk4(problem.A, problem.S, problem.Q, dt, steps)
    if bad >= 0:
        raise NonFiniteState(
            f"Riccati solution overflowed after t={(bad - 1) * dt:.6g}", (bad - 1) * dt, P[-1]
        )
    grid = dt * np.arange(steps + 1)
    for arr in (P, dP):
        arr.setflags(write=False)
    return RiccatiSolution(grid, P, dP, float(drift))


def mild_residual(problem, sol, t, x0):
    """Defect of the integral form of the Riccati equation at ``(t, x0)``.

    Evaluates

        P(t) x0 - int_0^t e^{s A^T} C^T C e^{s A} x0 ds
                + int_0^t e^{(t-s) A^T} P(s) S P(s) e^{(t-s) A} x0 ds

    by Simpson quadrature on the solution grid, propagating the exponentials
    by repeated multiplication with ``expm(A, dt)``.
    """
    x0 = np.asarray(x0, dtype=float)
    i_t = sol.index(t)
    if i_t == 0:
        return float(np.linalg.norm(sol.values[0] @ x0))
    dt = sol.dt
    step = expm(problem.A, dt)
    Q, S = problem.Q, problem.S
    # E[k] = e^{k dt A}
    n = problem.n
    E = np.empty((i_t + 1, n, n))
    E[0] = np.eye(n)
    for k in range(1, i_t + 1):
        E[k] = step @ E[k - 1]
    Ex = E @ x0
    source = np.einsum("kji,kj->ki", E, Ex @ Q.T)
    # s = k dt, t - s = (i_t - k) dt
    Er = E[i_t::-1]
    Erx = Er @ x0
    Ps = sol.values[: i_t + 1]
    inner = np.einsum("kij,kj->ki", Ps, Erx)
    inner = inner @ S.T
    inner = np.einsum("kij,kj->ki", Ps, inner)
    quad = np.einsum("kji,kj->ki", Er, inner)
    defect = sol.values[i_t] @ x0 - simpson(source, dt) + simpson(quad, dt)
    return float(np.linalg.norm(defect))


def dre_limit(problem, dt, tol, t_max, chunk=1.0):
    """Integrate until ``|P(t + 1) - P(t)|`` drops below ``tol``.

    Returns the limit matrix.

    Raises
    ------
    NotConverged
        When ``t_max`` is reached first; carries the last iterate.
    NonFiniteState
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    steps = grid_steps(chunk, dt)
    A, S, Q = problem.A, problem.S, problem.Q
    P = np.zeros((problem.n, problem.n))
    t = 0.0
    while t < t_max - 1e-12:
        vals, _, _, bad = kernels.dre_rk4(A, S, Q, dt, steps, P)
        if bad >= 0:
            raise NonFiniteState(f"Riccati flow overflowed near t={t:.6g}", t, P)
        new = vals[-1]
        t += chunk
        change = np.linalg.norm(new - P)
        P = new
        if change < tol:
            return P
    raise NotConverged(
        f"Riccati flow still moving at t={t:.6g} (|dP| over the last unit = {change:.3e})", P, t
    )
