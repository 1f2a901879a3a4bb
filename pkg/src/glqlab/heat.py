"""Spectral Galerkin model of the controlled 1-D heat equation on ``(0, pi)``.

``h_t = h_xx + c h + B u`` with Dirichlet conditions, written in the sine
basis ``psi_k(x) = sqrt(2/pi) sin(k x)`` so that ``A = diag(c - k^2)``.
Two control operators acting on a subinterval ``omega = (a, b)``:

* ``B1``: distributed control ``1_omega u`` with ``u`` expanded in the first
  ``n_modes`` sine modes of ``L^2(omega)``;
* ``B2``: a scalar amplitude times ``1_omega``.

The observation is ``C = B^T`` in both cases.
"""

from dataclasses import dataclass, field

import numpy as np

from .glq import GlqProblem
from .structure import hautus_detectable, hautus_stabilizable
from .turnpike import horizon_scan

SQRT_2_PI = np.sqrt(2.0 / np.pi)


@dataclass(frozen=True)
class HeatConfig:
    c: float = 0.0
    n_modes: int = 8
    omega: tuple = (np.pi / 4, 3 * np.pi / 4)
    operator_kind: str = "B2"
    kappa: float = 1.0
    z_coeffs: np.ndarray | None = field(default=None, compare=False)
    v_coeffs: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        a, b = self.omega
        if not 0 < a < b < np.pi:
            raise ValueError(f"omega must satisfy 0 < a < b < pi, got {self.omega}")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.operator_kind not in ("B1", "B2"):
            raise ValueError(f"operator_kind must be B1 or B2, got {self.operator_kind!r}")

    @property
    def control_dim(self):
        return self.n_modes if self.operator_kind == "B1" else 1

    def eigenvalues(self):
        k = np.arange(1, self.n_modes + 1)
        return self.c - k.astype(float) ** 2


def b2_column(n_modes, omega):
    """``b_k = int_omega psi_k = sqrt(2/pi) (cos(k a) - cos(k b)) / k``."""
    a, b = omega
    k = np.arange(1, n_modes + 1, dtype=float)
    return SQRT_2_PI * (np.cos(k * a) - np.cos(k * b)) / k


def _int_cos(freq, phase, a, b):
    """``int_a^b cos(freq x - phase) dx`` with the zero-frequency limit."""
    if abs(freq) < 1e-12:
        return (b - a) * np.cos(phase)
    return (np.sin(freq * b - phase) - np.sin(freq * a - phase)) / freq


def b1_matrix(n_modes, omega):
    """``B1[k, j] = <1_omega phi_j, psi_k>`` with ``phi_j = sqrt(2/L) sin(j pi (x - a) / L)``.

    Each entry is an exact integral of a product of sines, split into two
    cosines by the product-to-sum identity.
    """
    a, b = omega
    L = b - a
    out = np.empty((n_modes, n_modes))
    scale = SQRT_2_PI * np.sqrt(2.0 / L) / 2.0
    for k in range(1, n_modes + 1):
        for j in range(1, n_modes + 1):
            w = j * np.pi / L
            phase = w * a
            # sin(w (x - a)) sin(k x) = [cos((w - k) x - w a) - cos((w + k) x - w a)] / 2
            out[k - 1, j - 1] = scale * (_int_cos(w - k, phase, a, b) - _int_cos(w + k, phase, a, b))
    return out


ROUNDOFF = 64 * np.finfo(float).eps


def snap_roundoff(M, rel=ROUNDOFF):
    """Set entries below ``rel * max|M|`` to exact zeros.

    The closed forms vanish exactly for some modes (``cos(k a) = cos(k b)``)
    but evaluate to round-off in floating point. A coupling of ``1e-16``
    is not harmless: the Riccati flow then drives the gain of that mode
    towards ``1 / b_k^2`` over long horizons.
    """
    M = np.array(M, dtype=float)
    scale = np.max(np.abs(M)) if M.size else 0.0
    M[np.abs(M) <= rel * scale] = 0.0
    return M


def build_system(cfg):
    """Galerkin ``GlqProblem`` for a heat configuration.

    Round-off-level entries of ``B`` are zeroed, see :func:`snap_roundoff`.
    """
    n = cfg.n_modes
    A = np.diag(cfg.eigenvalues())
    if cfg.operator_kind == "B2":
        B = snap_roundoff(b2_column(n, cfg.omega).reshape(n, 1))
    else:
        B = snap_roundoff(b1_matrix(n, cfg.omega))
    m = B.shape[1]
    z = np.zeros(n) if cfg.z_coeffs is None else np.asarray(cfg.z_coeffs, float)[:n]
    v = np.zeros(m) if cfg.v_coeffs is None else np.asarray(cfg.v_coeffs, float)[:m]
    return GlqProblem.create(A=A, B=B, C=B.T.copy(), K=cfg.kappa * np.eye(m), z=z, v=v)


def default_x0(n_modes):
    """Initial state with coefficients ``1/k``; every mode is excited."""
    return 1.0 / np.arange(1, n_modes + 1)


COUNTEREXAMPLE = HeatConfig(c=5.0, n_modes=4, omega=(np.pi / 4, 3 * np.pi / 4), operator_kind="B2")


@dataclass
class DemoReport:
    config: HeatConfig
    problem: GlqProblem
    x0: np.ndarray
    scan: object
    stabilizable: object
    detectable: object
    extras: dict = field(default_factory=dict)


def demo_counterexample(n_modes=4, T_list=(5.0, 10.0), dt=1e-3, x0=None, probe_time=3.0):
    """Reaction coefficient ``c = 5``, ``omega = (pi/4, 3pi/4)``, scalar control.

    ``sin(2x)`` has zero mean on ``omega``, so the eigenvalue ``1`` mode is
    neither controlled nor observed and grows freely. ``extras`` holds the
    ratio ``|x_2(probe_time)| / (e^{probe_time} |x_2(0)|)``.
    """
    if n_modes < 2:
        raise ValueError("the decoupled mode needs n_modes >= 2")
    cfg = HeatConfig(c=5.0, n_modes=n_modes, omega=COUNTEREXAMPLE.omega, operator_kind="B2")
    problem = build_system(cfg)
    x0 = default_x0(n_modes) if x0 is None else np.asarray(x0, float)
    stab = hautus_stabilizable(problem.A, problem.B)
    det = hautus_detectable(problem.A, problem.C)
    scan = horizon_scan(problem, x0, T_list, dt, 0.1)
    extras = {"b": problem.B[:, 0].copy()}
    for r in scan.results:
        if r.trajectory is not None and r.T >= probe_time:
            x2_t, _ = r.trajectory.sample(probe_time)
            extras["mode2_ratio"] = abs(x2_t[1]) / (np.exp(probe_time) * abs(x0[1]))
            break
    return DemoReport(cfg, problem, x0, scan, stab, det, extras)


def random_cost_coeffs(cfg, rng):
    """Seeded ``z, v`` with ``1/k`` decay so that truncations stay consistent."""
    k = np.arange(1, cfg.n_modes + 1)
    z = rng.normal(size=cfg.n_modes) / k
    j = np.arange(1, cfg.control_dim + 1)
    v = rng.normal(size=cfg.control_dim) / j
    return z, v


def demo_stable(n_modes=8, T_list=(5.0, 10.0, 20.0, 40.0), dt=1e-3, omega=(0.5, 2.0),
                operator_kind="B2", seed=0, epsilon=0.1):
    """``c = 0`` (all eigenvalues ``<= -1``) with random linear cost terms.

    ``extras`` records the Hautus verdicts for both control operators on
    ``omega``.
    """
    rng = np.random.default_rng(seed)
    base = HeatConfig(c=0.0, n_modes=n_modes, omega=tuple(omega), operator_kind=operator_kind)
    z, v = random_cost_coeffs(base, rng)
    cfg = HeatConfig(0.0, n_modes, tuple(omega), operator_kind, 1.0, z, v)
    problem = build_system(cfg)
    x0 = default_x0(n_modes)
    extras = {}
    for kind in ("B1", "B2"):
        other = build_system(HeatConfig(0.0, n_modes, tuple(omega), kind))
        extras[f"{kind}_stabilizable"] = bool(hautus_stabilizable(other.A, other.B))
        extras[f"{kind}_detectable"] = bool(hautus_detectable(other.A, other.C))
    scan = horizon_scan(problem, x0, T_list, dt, epsilon)
    return DemoReport(cfg, problem, x0, scan, hautus_stabilizable(problem.A, problem.B),
                      hautus_detectable(problem.A, problem.C), extras)


@dataclass(frozen=True)
class TruncationRow:
    n_modes: int
    midpoint_deviation: float
    k: float
    status: str


def truncation_study(cfg, n_list, T, dt, z_fn=None, v_fn=None):
    """Midpoint deviation and fitted rate as the number of modes grows.

    ``z_fn(k)`` and ``v_fn(j)`` give the cost coefficients of mode ``k`` and
    control mode ``j`` (defaults ``1/k^2`` and ``1/(2 j^2)``), so every
    truncation sees the same underlying data. The initial state uses
    :func:`default_x0`.
    """
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    z_fn = z_fn or (lambda k: 1.0 / k**2)
    v_fn = v_fn or (lambda j: 0.5 / j**2)
    rows = []
    for n in n_list:
        shape = HeatConfig(cfg.c, n, cfg.omega, cfg.operator_kind, cfg.kappa)
        z = np.array([z_fn(k) for k in range(1, n + 1)], dtype=float)
        v = np.array([v_fn(j) for j in range(1, shape.control_dim + 1)], dtype=float)
        problem = build_system(HeatConfig(cfg.c, n, cfg.omega, cfg.operator_kind, cfg.kappa, z, v))
        r = horizon_scan(problem, default_x0(n), [T], dt, 0.1).results[0]
        rows.append(TruncationRow(n, r.midpoint_deviation, r.k, r.status))
    return rows


def truncation_agreement(rows, digits=3):
    """Per consecutive pair of rows: do ``d(T/2)`` and ``k`` agree to ``digits`` significant digits?

    Agreement means a relative difference of at most ``10^-digits``.
    """
    tol = 10.0 ** (-digits)
    flags = []
    for prev, cur in zip(rows, rows[1:]):
        ok = True
        for a, b in ((prev.midpoint_deviation, cur.midpoint_deviation), (prev.k, cur.k)):
            if not (np.isfinite(a) and np.isfinite(b)) or abs(a - b) > tol * max(abs(a), abs(b)):
                ok = False
        flags.append(ok)
    return flags


def truncation_stabilized(rows, digits=3):
    """True when the two finest truncations agree to ``digits`` significant digits.

    Coarser pairs may still disagree: with ``B2`` the neglected modes
    contribute roughly ``n^-3`` relative to the midpoint deviation.
    """
    flags = truncation_agreement(rows, digits)
    return bool(flags) and flags[-1]


__all__ = [
    "HeatConfig",
    "b1_matrix",
    "b2_column",
    "build_system",
    "demo_counterexample",
    "demo_stable",
    "truncation_study",
    "truncation_agreement",
    "truncation_stabilized",
]
