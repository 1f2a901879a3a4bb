"""Turnpike diagnostics: deviation curves, time spent away, exponential fits.

Also hosts the numerical probes of the structural statements about the
problem: invariance of the optimal control along unobservable directions,
and the reduction of the generalized problem to the pure LQ one through
differences of optimal trajectories.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .closed_loop import solve_glq, solve_lq
from .errors import KktSingular, NonFiniteState
from .riccati import integrate_dre
from .steady import solve_steady, steady_manifold_basis
from .structure import unobservable_subspace

log = logging.getLogger(__name__)

FIT_WINDOW = (0.1, 0.45)
UNDERFLOW = 1e-14
K_MIN = 0.05


def deviation_curve(traj, ref=None):
    """``d(t) = |x*(t) - x_e| + |u*(t) - u_e|`` on the trajectory grid."""
    ref = traj.reference if ref is None else ref
    return np.linalg.norm(traj.states - ref.x_e, axis=1) + np.linalg.norm(traj.controls - ref.u_e, axis=1)


def measure_outside(d, epsilon, dt):
    """Left-endpoint estimate of the measure of ``{t : d(t) > epsilon}``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    d = np.asarray(d)
    return float(dt * np.count_nonzero(d[:-1] > epsilon))


@dataclass(frozen=True)
class ExpFit:
    """Fitted bound ``d(t) <= M (e^{-kt} + e^{-k(T-t)})``.

    ``failed`` marks deviation underflow inside the fit window, reported with
    the sentinel ``k = inf`` (decay faster than measurable).
    """

    M: float
    k: float
    failed: bool = False
    reason: str = ""

    @property
    def turnpike(self):
        return self.k > K_MIN


def fit_exponential(d, T):
    """Least-squares fit of ``log d`` on ``[0.1 T, 0.45 T]``; ``k`` is minus the slope.

    ``M`` is the largest ratio ``d(t) / (e^{-kt} + e^{-k(T-t)})`` over all
    samples, so the bound holds at every sample by construction.
    """
    if T <= 4:
        raise ValueError("fit needs T > 4")
    d = np.asarray(d, dtype=float)
    t = np.linspace(0.0, T, d.shape[0])
    lo, hi = FIT_WINDOW
    window = (t >= lo * T) & (t <= hi * T)
    dw = d[window]
    if np.any(dw < UNDERFLOW):
        return ExpFit(float("nan"), float("inf"), True, "deviation underflow in fit window")
    slope, _ = np.polyfit(t[window], np.log(dw), 1)
    k = float(-slope)
    with np.errstate(over="ignore"):
        envelope = np.exp(-k * t) + np.exp(-k * (T - t))
        M = float(np.max(d / envelope))
    return ExpFit(M, k)


@dataclass
class HorizonResult:
    T: float
    status: str
    measure_outside: float = float("nan")
    k: float = float("nan")
    M: float = float("nan")
    midpoint_deviation: float = float("nan")
    grid: np.ndarray = None
    deviation: np.ndarray = None
    trajectory: object = None
    message: str = ""


@dataclass
class TurnpikeReport:
    horizons: list
    epsilon: float
    dt: float
    x0: np.ndarray
    results: list = field(default_factory=list)

    def _col(self, name):
        return np.array([getattr(r, name) for r in self.results])

    @property
    def measure_outside(self):
        return self._col("measure_outside")

    @property
    def fitted_rate(self):
        return self._col("k")

    @property
    def fitted_amplitude(self):
        return self._col("M")

    @property
    def midpoint_deviation(self):
        return self._col("midpoint_deviation")

    @property
    def statuses(self):
        return [r.status for r in self.results]


def _scan_one(problem, x0, T, dt, epsilon, steady, riccati):
    try:
        traj = solve_glq(problem, x0, T, dt, steady=steady, riccati=riccati)
    except NonFiniteState as exc:
        return HorizonResult(T, "nonfinite", message=str(exc))
    d = deviation_curve(traj)
    fit = fit_exponential(d, T) if T > 4 else ExpFit(float("nan"), float("nan"), True, "horizon too short")
    mid = d[(len(d) - 1) // 2]
    return HorizonResult(
        T,
        "ok" if not fit.failed else "fit_failed",
        measure_outside(d, epsilon, dt),
        fit.k,
        fit.M,
        float(mid),
        traj.grid,
        d,
        traj,
        fit.reason,
    )


def horizon_scan(problem, x0, horizons, dt, epsilon, workers=None):
    """Solve the problem for each horizon and collect turnpike statistics.

    The Riccati flow is integrated once up to the largest horizon and shared.
    Per-horizon failures become report entries with a non-``"ok"`` status;
    ``"fit_failed"`` entries still carry every statistic except the fit.
    """
    horizons = [float(T) for T in horizons]
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be increasing")
    x0 = np.asarray(x0, dtype=float)
    report = TurnpikeReport(horizons, epsilon, dt, x0)
    try:
        steady = solve_steady(problem)
    except KktSingular as exc:
        report.results = [HorizonResult(T, "kkt_singular", message=str(exc)) for T in horizons]
        return report
    try:
        riccati = integrate_dre(problem, horizons[-1], dt)
    except NonFiniteState as exc:
        report.results = [HorizonResult(T, "nonfinite", message=str(exc)) for T in horizons]
        return report

    def run(T):
        return _scan_one(problem, x0, T, dt, epsilon, steady, riccati)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            report.results = list(pool.map(run, horizons))
    else:
        report.results = [run(T) for T in horizons]
    return report


@dataclass(frozen=True)
class TurnpikeVerdict:
    k: float
    midpoint_deviation: float
    positive: bool
    status: str


def numeric_turnpike(problem, x0, T=40.0, dt=1e-2, k_min=K_MIN, mid_tol=1e-3):
    """Single-horizon turnpike predicate: fitted ``k > k_min`` and ``d(T/2) < mid_tol``."""
    report = horizon_scan(problem, x0, [T], dt, 0.1)
    r = report.results[0]
    if r.status not in ("ok", "fit_failed") or (r.status == "fit_failed" and not np.isinf(r.k)):
        return TurnpikeVerdict(r.k, r.midpoint_deviation, False, r.status)
    positive = bool(r.k > k_min and r.midpoint_deviation < mid_tol)
    return TurnpikeVerdict(r.k, r.midpoint_deviation, positive, r.status)


def unobservable_invariance_gap(problem, x0, gammas, T, dt, tol=1e-8):
    """Largest sup-norm gap between ``u*(., gamma x0)`` and ``u*(., x0)``.

    ``x0`` must lie in the unobservable subspace of ``(A, C)``.
    """
    obs = unobservable_subspace(problem.A, problem.C)
    if not obs.contains(x0, tol):
        raise ValueError("x0 is not in the unobservable subspace")
    steady = solve_steady(problem)
    riccati = integrate_dre(problem, T, dt)
    base = solve_glq(problem, x0, T, dt, steady=steady, riccati=riccati).controls
    worst = 0.0
    for gamma in gammas:
        u = solve_glq(problem, gamma * np.asarray(x0, float), T, dt, steady=steady, riccati=riccati).controls
        worst = max(worst, float(np.max(np.linalg.norm(u - base, axis=1))))
    return worst


def lq_difference_gap(problem, x0, T, dt):
    """Gap between ``x*(., x_e + 2 x0) - x*(., x_e + x0)`` and the LQ trajectory from ``x0``."""
    steady = solve_steady(problem)
    riccati = integrate_dre(problem, T, dt)
    x0 = np.asarray(x0, dtype=float)
    far = solve_glq(problem, steady.x_e + 2 * x0, T, dt, steady=steady, riccati=riccati)
    near = solve_glq(problem, steady.x_e + x0, T, dt, steady=steady, riccati=riccati)
    lq = solve_lq(problem, x0, T, dt, riccati=riccati)
    return float(np.max(np.linalg.norm(far.states - near.states - lq.states, axis=1)))


def reference_margin(problem, traj, rng, samples=100):
    """Compare the turnpike midpoint with random alternative steady pairs.

    Returns ``(distance to (x_e, u_e), smallest distance to an alternative)``
    where alternatives are random points of ``ker [A B]`` at unit-scale
    offsets from the optimal steady pair.
    """
    ref = traj.reference
    x_mid, u_mid = traj.sample(traj.T / 2)
    mid = np.concatenate([x_mid, u_mid])
    target = np.concatenate([ref.x_e, ref.u_e])
    V = steady_manifold_basis(problem)
    if V.shape[1] == 0:
        return float(np.linalg.norm(mid - target)), float("inf")
    offsets = rng.normal(size=(samples, V.shape[1]))
    offsets /= np.linalg.norm(offsets, axis=1, keepdims=True)
    scale = max(1.0, np.linalg.norm(target))
    alternatives = target + scale * offsets @ V.T
    dist_alt = np.min(np.linalg.norm(alternatives - mid, axis=1))
    return float(np.linalg.norm(mid - target)), float(dist_alt)
