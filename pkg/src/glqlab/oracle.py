"""Direct-transcription optimizer, independent of the Riccati machinery.

Controls are piecewise constant on ``N`` equal segments. Each segment is
propagated exactly with the variation-of-constants formula

    x(tau) = e^{tau A} x_k + (int_0^tau e^{s A} ds) B u_k,

obtained from one exponential of the augmented matrix ``[[A, B], [0, 0]]``;
the running cost is integrated with Simpson's rule on a fixed sub-grid of
every segment. The resulting discrete cost is an exact convex quadratic of
the control values, minimized by linear conjugate gradients with a
discrete-adjoint gradient.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import BudgetExhausted
from .numlin import expm

log = logging.getLogger(__name__)

SUBSTEPS = 8


@dataclass
class TranscribedProblem:
    problem: object
    x0: np.ndarray
    T: float
    segments: int
    controls: np.ndarray = None
    substeps: int = SUBSTEPS
    _prop: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.segments < 2:
            raise ValueError("need at least two segments")
        if self.substeps < 2 or self.substeps % 2:
            raise ValueError("substeps must be even and >= 2")
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.controls is None:
            self.controls = np.zeros((self.segments, self.problem.m))
        self.controls = np.asarray(self.controls, dtype=float).reshape(self.segments, self.problem.m)

    @property
    def h(self):
        return self.T / self.segments

    def propagators(self):
        """``(E, F)`` stacks: ``E[j] = e^{tau_j A}``, ``F[j] = int_0^{tau_j} e^{sA} ds B``."""
        if self._prop is None:
            A, B = self.problem.A, self.problem.B
            n, m = A.shape[0], B.shape[1]
            aug = np.zeros((n + m, n + m))
            aug[:n, :n] = A
            aug[:n, n:] = B
            step = expm(aug, self.h / self.substeps)
            E = np.empty((self.substeps + 1, n, n))
            F = np.empty((self.substeps + 1, n, m))
            cur = np.eye(n + m)
            for j in range(self.substeps + 1):
                E[j] = cur[:n, :n]
                F[j] = cur[:n, n:]
                cur = step @ cur
            self._prop = (E, F)
        return self._prop

    def weights(self):
        w = np.ones(self.substeps + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * (self.h / self.substeps) / 3.0


def _nodes(tp, controls):
    """Segment start states ``(N+1, n)`` and all sub-grid states ``(N, S+1, n)``."""
    E, F = tp.propagators()
    N = tp.segments
    X = np.empty((N + 1, tp.problem.n))
    X[0] = tp.x0
    En, Fn = E[-1], F[-1]
    for k in range(N):
        X[k + 1] = En @ X[k] + Fn @ controls[k]
    sub = np.einsum("jab,kb->kja", E, X[:-1]) + np.einsum("jab,kb->kja", F, controls)
    return X, sub


def _cost(tp, controls, sub):
    pr = tp.problem
    w = tp.weights()
    CX = sub @ pr.C.T
    state_part = np.einsum("kja,kja->kj", CX, CX) + 2.0 * sub @ pr.z
    KU = controls @ pr.K.T
    control_part = np.einsum("ka,ka->k", KU, KU) + 2.0 * controls @ pr.v
    return float(np.sum(state_part @ w) + w.sum() * np.sum(control_part))


def simulate(tp, controls=None):
    """Exact propagation under piecewise-constant controls.

    Returns
    -------
    grid : ndarray, shape (N*S + 1,)
    states : ndarray, shape (N*S + 1, n)
    cost : float
    """
    controls = tp.controls if controls is None else np.asarray(controls, float).reshape(tp.controls.shape)
    X, sub = _nodes(tp, controls)
    N, S = tp.segments, tp.substeps
    states = np.concatenate([sub[:, :-1, :].reshape(N * S, -1), X[-1:]])
    grid = np.linspace(0.0, tp.T, N * S + 1)
    return grid, states, _cost(tp, controls, sub)


def _local_terms(tp, controls, sub, affine=True):
    """Per-segment cost derivatives w.r.t. the segment start state and control.

    With ``affine=False`` the linear cost terms are dropped, which gives the
    Hessian action when the sweep also starts from zero.
    """
    pr = tp.problem
    E, F = tp.propagators()
    w = tp.weights()
    dl = 2.0 * (sub @ pr.Q) * w[None, :, None]
    if affine:
        dl += 2.0 * pr.z * w[None, :, None]
    local_x = np.einsum("kja,jab->kb", dl, E)
    local_u = np.einsum("kja,jab->kb", dl, F)
    local_u += w.sum() * 2.0 * (controls @ pr.R + (pr.v if affine else 0.0))
    return local_x, local_u


def gradient(tp, controls=None):
    """Exact gradient of the discrete cost w.r.t. each segment control, shape ``(N, m)``.

    A backward recursion carries ``lam_k``, the derivative of the cost of
    segments ``k..N-1`` with respect to the segment start state ``x_k``.
    """
    controls = tp.controls if controls is None else np.asarray(controls, float).reshape(tp.controls.shape)
    E, F = tp.propagators()
    _, sub = _nodes(tp, controls)
    local_x, local_u = _local_terms(tp, controls, sub)
    En_T, Fn_T = E[-1].T, F[-1].T
    g = np.empty_like(controls)
    lam = np.zeros(tp.problem.n)
    for k in range(tp.segments - 1, -1, -1):
        g[k] = local_u[k] + Fn_T @ lam
        lam = local_x[k] + En_T @ lam
    return g


def stabilizing_gain(tp):
    """Gain ``G`` with ``e^{hA} + F_h G`` Schur stable, or zero when none is found.

    ``F_h`` is the input-to-state map of one segment. The gain comes from
    the discrete algebraic Riccati equation with identity weights; it only
    preconditions the optimization and never enters the cost.
    """
    E, F = tp.propagators()
    En, Fn = E[-1], F[-1]
    n, m = Fn.shape
    zero = np.zeros((m, n))
    if np.max(np.abs(np.linalg.eigvals(En))) < 1 - 1e-3:
        return zero
    try:
        X = linalg.solve_discrete_are(En, Fn, np.eye(n), np.eye(m))
        G = -np.linalg.solve(np.eye(m) + Fn.T @ X @ Fn, Fn.T @ X @ En)
    except (np.linalg.LinAlgError, ValueError):
        return zero
    if not np.all(np.isfinite(G)) or np.max(np.abs(np.linalg.eigvals(En + Fn @ G))) >= 1:
        return zero
    return G


def _closed_sweep(tp, G, v, affine=True):
    """Controls ``u_k = v_k + G x_k`` and the states they produce."""
    E, F = tp.propagators()
    En, Fn = E[-1], F[-1]
    N = tp.segments
    X = np.empty((N + 1, tp.problem.n))
    X[0] = tp.x0 if affine else 0.0
    u = np.empty_like(v)
    for k in range(N):
        u[k] = v[k] + G @ X[k]
        X[k + 1] = En @ X[k] + Fn @ u[k]
    sub = np.einsum("jab,kb->kja", E, X[:-1]) + np.einsum("jab,kb->kja", F, u)
    return u, X, sub


def _closed_gradient(tp, G, v, affine=True):
    """Gradient w.r.t. ``v`` through the closed-loop recursion, plus ``(u, cost)``.

    The adjoint runs backwards through ``e^{hA} + F_h G``, which is stable,
    so no growth of unstable modes enters the gradient.
    """
    E, F = tp.propagators()
    En_T, Fn_T = E[-1].T, F[-1].T
    u, _, sub = _closed_sweep(tp, G, v, affine)
    local_x, local_u = _local_terms(tp, u, sub, affine)
    g = np.empty_like(v)
    lam = np.zeros(tp.problem.n)
    for k in range(tp.segments - 1, -1, -1):
        g[k] = local_u[k] + Fn_T @ lam
        lam = local_x[k] + G.T @ g[k] + En_T @ lam
    cost = _cost(tp, u, sub) if affine else float("nan")
    return g, u, cost


@dataclass(frozen=True)
class OracleResult:
    controls: np.ndarray
    cost: float
    gradient_norm: float
    iterations: int
    converged: bool
    costs: tuple


def optimize(tp, max_iter=2000, tol=1e-10, strict=False):
    """Conjugate gradients on the discrete cost.

    The search runs in the variables ``v_k = u_k - G x_k`` with ``G`` from
    :func:`stabilizing_gain`. This is a causal, invertible change of
    variables on the same piecewise-constant control space, so the minimizer
    is unchanged; it removes the ``e^{2 T Re s}`` ill-conditioning that
    unstable modes cause in the plain control variables. The cost is
    quadratic, so the line search is exact. Gradients are recomputed at
    every iterate rather than updated recursively, which keeps rounding
    drift out of the stopping test.

    Parameters
    ----------
    tol : float
        Stop once the gradient in the search variables has norm ``<= tol``.
        It coincides with :func:`gradient` when ``G = 0``.
    strict : bool
        Raise :class:`BudgetExhausted` instead of returning a flagged result
        when ``max_iter`` runs out.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    G = stabilizing_gain(tp)
    X, _ = _nodes(tp, tp.controls)
    v = tp.controls - X[:-1] @ G.T
    g, u, cost = _closed_gradient(tp, G, v)
    costs = [cost]
    d = -g
    gg = float(np.sum(g * g))
    it = 0
    while np.sqrt(gg) > tol and it < max_iter:
        Hd, _, _ = _closed_gradient(tp, G, d, affine=False)
        curv = float(np.sum(d * Hd))
        if curv <= 0:
            log.debug("non-positive curvature %.3e; rounding floor reached", curv)
            break
        v = v + (-float(np.sum(g * d)) / curv) * d
        g_new, u, cost = _closed_gradient(tp, G, v)
        gg_new = float(np.sum(g_new * g_new))
        beta = max(0.0, float(np.sum(g_new * (g_new - g))) / gg)
        d = -g_new + beta * d
        g, gg = g_new, gg_new
        it += 1
        costs.append(cost)
    gnorm = float(np.sqrt(gg))
    converged = gnorm <= tol
    result = OracleResult(u, costs[-1], gnorm, it, converged, tuple(costs))
    if not converged:
        msg = f"CG stopped after {it} iterations with gradient norm {gnorm:.3e}"
        if strict:
            raise BudgetExhausted(msg)
        log.info(msg)
    tp.controls = u
    return result


def segment_means(samples, segments):
    """Trapezoid-rule mean of a uniformly sampled arc over each of ``segments`` equal pieces.

    ``samples`` has shape ``(segments * r + 1, m)``. The result is the
    ``L^2`` projection of the arc onto piecewise-constant functions, which is
    what a transcribed optimum should be compared against.
    """
    samples = np.asarray(samples, dtype=float)
    steps = samples.shape[0] - 1
    if steps % segments:
        raise ValueError(f"{steps} sample intervals do not split into {segments} segments")
    r = steps // segments
    ends = samples[::r]
    interior = samples[:-1].reshape(segments, r, -1)[:, 1:].sum(axis=1)
    return (interior + 0.5 * (ends[:-1] + ends[1:])) / r


def control_gap(feedback_controls, oracle_controls, T):
    """``L^2(0, T)`` distance between segment means of a sampled arc and piecewise-constant controls."""
    oracle_controls = np.asarray(oracle_controls, dtype=float)
    N = oracle_controls.shape[0]
    diff = segment_means(feedback_controls, N) - oracle_controls
    return float(np.sqrt(np.sum(diff * diff) * T / N))
