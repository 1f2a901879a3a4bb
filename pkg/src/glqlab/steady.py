"""Optimal steady state and its adjoint multiplier.

Stationarity of ``l`` on the manifold ``A x + B u = 0`` is the square system

    [ C^T C    0      -A^T ] [x]   [-z]
    [   0    K^T K    -B^T ] [u] = [-v]
    [   A      B        0  ] [w]   [ 0]

whose ``w`` block is the adjoint steady state entering the feedback law.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import KktSingular, SingularMatrix
from .numlin import kernel_basis, solve_linear

log = logging.getLogger(__name__)

RIDGE = 1e-12


@dataclass(frozen=True)
class SteadyStateResult:
    x_e: np.ndarray
    u_e: np.ndarray
    w: np.ndarray
    kkt_residual: float
    unique: bool

    def optimality_residuals(self, problem):
        """Residuals of ``A^T w = z + C^T C x_e`` and ``B^T w = v + K^T K u_e``."""
        r_x = problem.A.T @ self.w - problem.z - problem.Q @ self.x_e
        r_u = problem.B.T @ self.w - problem.v - problem.R @ self.u_e
        return float(np.linalg.norm(r_x)), float(np.linalg.norm(r_u))


def kkt_matrix(problem):
    n, m = problem.n, problem.m
    A, B = problem.A, problem.B
    M = np.zeros((2 * n + m, 2 * n + m))
    M[:n, :n] = problem.Q
    M[:n, n + m :] = -A.T
    M[n : n + m, n : n + m] = problem.R
    M[n : n + m, n + m :] = -B.T
    M[n + m :, :n] = A
    M[n + m :, n : n + m] = B
    return M


def kkt_rhs(problem):
    return np.concatenate([-problem.z, -problem.v, np.zeros(problem.n)])


def _kkt_residual(problem, x, u, w):
    r_x = problem.A.T @ w - problem.z - problem.Q @ x
    r_u = problem.B.T @ w - problem.v - problem.R @ u
    r_s = problem.A @ x + problem.B @ u
    return float(np.linalg.norm(r_x) + np.linalg.norm(r_u) + np.linalg.norm(r_s))


def check_uniqueness(problem, tol=1e-9):
    """True iff ``ker A  cap  ker C = {0}``, i.e. ``[A; C]`` has trivial kernel."""
    stacked = np.vstack([problem.A, problem.C])
    return kernel_basis(stacked, tol).shape[1] == 0


def solve_steady(problem, strict=True):
    """Solve the KKT system for ``(x_e, u_e, w)``.

    Parameters
    ----------
    strict : bool
        When the KKT matrix is singular, raise :class:`KktSingular` (the
        default) or return the ridge-regularized least-squares solution
        flagged ``unique=False``. The exception carries that fallback too.
    """
    n, m = problem.n, problem.m
    M = kkt_matrix(problem)
    rhs = kkt_rhs(problem)
    unique = check_uniqueness(problem)
    try:
        sol = solve_linear(M, rhs)
    except SingularMatrix as exc:
        normal = M.T @ M + RIDGE * np.eye(M.shape[0])
        sol = np.linalg.solve(normal, M.T @ rhs)
        x, u, w = sol[:n], sol[n : n + m], sol[n + m :]
        fallback = SteadyStateResult(x, u, w, _kkt_residual(problem, x, u, w), False)
        if strict:
            raise KktSingular(f"KKT system is singular: {exc}", fallback) from exc
        log.warning("KKT system singular; using least-squares fallback")
        return fallback
    x, u, w = sol[:n], sol[n : n + m], sol[n + m :]
    return SteadyStateResult(x, u, w, _kkt_residual(problem, x, u, w), unique)


def steady_manifold_basis(problem, tol=1e-9):
    """Orthonormal basis (columns) of ``V = ker [A B]`` in ``R^{n+m}``."""
    return kernel_basis(np.hstack([problem.A, problem.B]), tol)


def projected_operator_spectrum(problem):
    """Smallest eigenvalue of ``diag(C^T C, K^T K)`` compressed to ``ker [A B]``.

    Returns ``(value, trivial)``; ``trivial`` flags an empty steady manifold,
    in which case the value is 0.
    """
    Qv = steady_manifold_basis(problem)
    if Qv.shape[1] == 0:
        return 0.0, True
    n, m = problem.n, problem.m
    W = np.zeros((n + m, n + m))
    W[:n, :n] = problem.Q
    W[n:, n:] = problem.R
    compressed = Qv.T @ W @ Qv
    return float(np.min(np.linalg.eigvalsh((compressed + compressed.T) / 2))), False
