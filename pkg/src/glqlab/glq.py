"""Problem model: data validation, running cost and total cost.

The running cost is

    l(x, u) = |C x|^2 + |K u|^2 + 2 <z, x> + 2 <v, u>

with real inner products; every system handled here is real, so the
``2 Re <.,.>`` of the complex setting reduces to ``2 <.,.>``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, NotCoercive
from .numlin import simpson

COERCIVITY_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class GlqProblem:
    """System ``x' = A x + B u`` with cost weights ``C, K`` and linear terms ``z, v``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    K: np.ndarray
    z: np.ndarray
    v: np.ndarray
    m_coerc: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        for name in ("A", "B", "C", "K"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("z", "v"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def create(cls, A, B, C, K=None, z=None, v=None):
        """Build and validate a problem; ``K`` defaults to the identity, ``z, v`` to zero."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.asarray(B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        C = np.atleast_2d(np.asarray(C, dtype=float))
        n, m = A.shape[0], B.shape[1]
        K = np.eye(m) if K is None else K
        z = np.zeros(n) if z is None else z
        v = np.zeros(m) if v is None else v
        problem = cls(A, B, C, K, z, v)
        return replace(problem, m_coerc=validate(problem))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def R(self):
        """Control weight ``K^T K``."""
        return self.K.T @ self.K

    @property
    def S(self):
        """``B (K^T K)^{-1} B^T``, the gain matrix entering the Riccati flow."""
        return self.B @ np.linalg.solve(self.R, self.B.T)

    @property
    def Q(self):
        return self.C.T @ self.C

    def is_lq(self):
        return not (np.any(self.z) or np.any(self.v))

    def lq(self):
        """Same system with ``z = v = 0``."""
        return replace(self, z=np.zeros(self.n), v=np.zeros(self.m))

    def with_(self, **changes):
        """Copy with some fields replaced, revalidated."""
        fields = dict(A=self.A, B=self.B, C=self.C, K=self.K, z=self.z, v=self.v)
        fields.update(changes)
        return GlqProblem.create(**fields)

    def __eq__(self, other):
        if not isinstance(other, GlqProblem):
            return NotImplemented
        return all(
            getattr(self, f).shape == getattr(other, f).shape
            and np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("A", "B", "C", "K", "z", "v")
        )

    __hash__ = None


def validate(problem):
    """Check dimensions and finiteness; return the coercivity constant of ``K``.

    The constant is the smallest eigenvalue of ``K^T K``.

    Raises
    ------
    DimensionMismatch
    NotCoercive
        When that eigenvalue is at most ``1e-12``.
    """
    A, B, C, K = problem.A, problem.B, problem.C, problem.K
    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    if B.shape[0] != n:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, expected {n}")
    m = B.shape[1]
    if C.shape[1] != n:
        raise DimensionMismatch(f"C has {C.shape[1]} columns, expected {n}")
    if K.shape != (m, m):
        raise DimensionMismatch(f"K must be {m}x{m}, got {K.shape}")
    if problem.z.shape != (n,):
        raise DimensionMismatch(f"z must have length {n}, got {problem.z.shape[0]}")
    if problem.v.shape != (m,):
        raise DimensionMismatch(f"v must have length {m}, got {problem.v.shape[0]}")
    for name in ("A", "B", "C", "K", "z", "v"):
        if not np.all(np.isfinite(getattr(problem, name))):
            raise ValueError(f"{name} has non-finite entries")
    m_coerc = float(np.min(np.linalg.eigvalsh(K.T @ K))) if m else float("inf")
    if m_coerc <= COERCIVITY_FLOOR:
        raise NotCoercive(f"K is not coercive: smallest eigenvalue of K^T K is {m_coerc:.3e}")
    return m_coerc


@dataclass(frozen=True)
class CostBreakdown:
    quadratic_state: float
    quadratic_control: float
    linear_state: float
    linear_control: float

    @property
    def total(self):
        return self.quadratic_state + self.quadratic_control + self.linear_state + self.linear_control

    def __float__(self):
        return self.total


def running_cost(problem, x, u):
    """Evaluate ``l(x, u)`` split into its four terms."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (problem.n,) or u.shape != (problem.m,):
        raise DimensionMismatch(
            f"expected x of length {problem.n} and u of length {problem.m}, got {x.shape}, {u.shape}"
        )
    Cx = problem.C @ x
    Ku = problem.K @ u
    return CostBreakdown(
        quadratic_state=float(Cx @ Cx),
        quadratic_control=float(Ku @ Ku),
        linear_state=2.0 * float(problem.z @ x),
        linear_control=2.0 * float(problem.v @ u),
    )


def running_cost_samples(problem, X, U):
    """Vectorized ``l`` over rows of ``X`` (N, n) and ``U`` (N, m)."""
    CX = X @ problem.C.T
    KU = U @ problem.K.T
    return (
        np.einsum("ij,ij->i", CX, CX)
        + np.einsum("ij,ij->i", KU, KU)
        + 2.0 * X @ problem.z
        + 2.0 * U @ problem.v
    )


def total_cost(problem, arc):
    """Integrate ``l`` along a sampled arc with composite Simpson.

    ``arc`` is anything with ``grid``, ``states`` and ``controls`` on a
    uniform grid (a :class:`~glqlab.closed_loop.Trajectory`, for instance).
    """
    grid = np.asarray(arc.grid)
    if grid.shape[0] < 2:
        raise ValueError("need at least two samples")
    dt = grid[1] - grid[0]
    values = running_cost_samples(problem, np.asarray(arc.states), np.asarray(arc.controls))
    return float(simpson(values, dt))


def steady_residual(problem, x, u):
    """``|A x + B u|``."""
    return float(np.linalg.norm(problem.A @ np.asarray(x, float) + problem.B @ np.asarray(u, float)))
