"""Structural tests: Hautus rank conditions, spectral splitting, unobservable subspace.

Spectral projectors are built from eigen-decompositions (sums of rank-one
right/left eigenvector products), so only diagonalizable matrices are
supported.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GapViolation, SpectralUnreliable, Unstabilizable
from .glq import GlqProblem
from .numlin import KERNEL_TOL, eigen, expm, kernel_basis
from .riccati import dre_limit

GAP = 1e-7
SPECTRAL_RESIDUAL_TOL = 1e-6
STABILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class ObservabilityData:
    unobservable_basis: np.ndarray
    restricted_A: np.ndarray
    restricted_eigenvalues: np.ndarray
    stable_on_unobservable: bool
    output_residual: float
    invariance_residual: float

    @property
    def dim(self):
        return self.unobservable_basis.shape[1]

    def contains(self, x, tol=1e-8):
        """Distance of ``x`` from the unobservable subspace is at most ``tol (1 + |x|)``."""
        x = np.asarray(x, dtype=float)
        Qu = self.unobservable_basis
        resid = x - Qu @ (Qu.T @ x)
        return float(np.linalg.norm(resid)) <= tol * (1 + np.linalg.norm(x))


def observability_matrix(A, C):
    """Stack ``[C; C A; ...; C A^{n-1}]``, each block scaled by ``max(1, |A|)^-k``.

    The scaling leaves the kernel unchanged and keeps the rank decision
    meaningful when ``A`` has large entries.
    """
    A = np.asarray(A, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n = A.shape[0]
    scale = max(1.0, np.linalg.norm(A, 2))
    blocks = []
    block = C
    for _ in range(n):
        blocks.append(block)
        block = block @ A / scale
    return np.vstack(blocks)


def unobservable_subspace(A, C, tol=KERNEL_TOL):
    """Kernel of the observability matrix and the restriction of ``A`` to it."""
    A = np.asarray(A, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    Qu = kernel_basis(observability_matrix(A, C), tol)
    Qu = np.real_if_close(Qu).astype(float)
    Ar = Qu.T @ A @ Qu
    lam = np.linalg.eigvals(Ar) if Ar.size else np.zeros(0, dtype=complex)
    stable = bool(np.all(lam.real < -STABILITY_MARGIN))
    out_res = float(np.linalg.norm(C @ Qu)) if Qu.size else 0.0
    inv_res = float(np.linalg.norm(A @ Qu - Qu @ Ar)) if Qu.size else 0.0
    return ObservabilityData(Qu, Ar, lam, stable, out_res, inv_res)


@dataclass(frozen=True)
class HautusResult:
    holds: bool
    witness_eigenvalue: complex | None = None
    witness_vector: np.ndarray | None = None
    diagonalizable: bool = True

    def __bool__(self):
        return self.holds


def hautus_detectable(A, C, gap=GAP, tol=KERNEL_TOL):
    """Check ``ker(sI - A)  cap  ker C = {0}`` for every eigenvalue with ``Re s >= -gap``.

    Returns
    -------
    HautusResult
        Truthy when the condition holds; otherwise carries the first
        violating eigenvalue and a unit kernel vector.

    Raises
    ------
    SpectralUnreliable
        When an eigenpair residual exceeds ``1e-6 max(1, |A|)``.
    """
    A = np.asarray(A, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n = A.shape[0]
    if C.shape[1] != n:
        C = C.reshape(-1, n)
    dec = eigen(A)
    limit = SPECTRAL_RESIDUAL_TOL * max(1.0, np.linalg.norm(A, 2))
    if not dec.valid or dec.max_residual() > limit:
        raise SpectralUnreliable(f"eigen residual {dec.max_residual():.3e} exceeds {limit:.3e}")
    diagonalizable = dec.left is not None
    for s in dec.eigenvalues:
        if s.real < -gap:
            continue
        stacked = np.vstack([s * np.eye(n) - A, C.astype(complex)])
        ker = kernel_basis(stacked, tol)
        if ker.shape[1]:
            vec = ker[:, 0]
            # fix the phase so real eigenvectors come out real
            k = np.argmax(np.abs(vec))
            vec = vec * (abs(vec[k]) / vec[k])
            return HautusResult(False, complex(s), np.real_if_close(vec, tol=1e6), diagonalizable)
    return HautusResult(True, diagonalizable=diagonalizable)


def hautus_stabilizable(A, B, gap=GAP, tol=KERNEL_TOL):
    """Hautus test for stabilizability: the detectability test on ``(A^T, B^T)``."""
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    return hautus_detectable(np.asarray(A, dtype=float).T, B.T, gap, tol)


@dataclass(frozen=True)
class SpectralSplit:
    """Eigenvalues grouped by the sign of their real part, with spectral projectors."""

    negative: np.ndarray
    zero: np.ndarray
    positive: np.ndarray
    gap: float
    projectors: dict

    def counts(self):
        return len(self.negative), len(self.zero), len(self.positive)


def spectral_split(A, gap=GAP):
    """Partition the spectrum of ``A`` into ``Re < -gap``, ``|Re| <= gap``, ``Re > gap``.

    Raises
    ------
    GapViolation
        When some ``|Re s|`` lies within ``gap/2`` of ``gap`` (and is not
        rounding noise below 1e-12), so the classification is ambiguous.
    """
    A = np.asarray(A, dtype=float)
    dec = eigen(A)
    lam = dec.eigenvalues
    re = lam.real
    ambiguous = (np.abs(np.abs(re) - gap) < gap / 2) & (np.abs(re) > 1e-12)
    if np.any(ambiguous):
        raise GapViolation(f"eigenvalue {lam[ambiguous][0]} too close to the classification gap {gap:g}")
    masks = {"negative": re < -gap, "zero": np.abs(re) <= gap, "positive": re > gap}
    projectors = {}
    if dec.left is not None:
        for name, mask in masks.items():
            Pm = dec.eigenvectors[:, mask] @ dec.left[mask, :]
            projectors[name] = np.real_if_close(Pm, tol=1e8).real
    return SpectralSplit(lam[masks["negative"]], lam[masks["zero"]], lam[masks["positive"]], gap, projectors)


def decay_constants(A, gap=GAP, t_grid=None):
    """Estimate ``(N_A, eps)`` with ``|e^{tA} P^-| <= N_A e^{-eps t}`` on a sample grid.

    ``eps`` is the distance of the stable spectrum from the imaginary axis;
    ``N_A`` is the largest observed ratio. Reported, not certified.
    """
    split = spectral_split(A, gap)
    if not len(split.negative) or "negative" not in split.projectors:
        return float("nan"), float("nan")
    eps = float(-np.max(split.negative.real))
    if t_grid is None:
        t_grid = np.linspace(0.0, 10.0 / max(eps, 1e-3), 101)
    Pm = split.projectors["negative"]
    N_A = max(np.linalg.norm(expm(A, t) @ Pm, 2) * np.exp(eps * t) for t in t_grid)
    return float(N_A), eps


@dataclass(frozen=True)
class StabilizingFeedback:
    F: np.ndarray
    P: np.ndarray
    abscissa: float


def stabilizing_feedback(A, B, dt=1e-2, tol=1e-10, t_max=500.0):
    """Gain ``F = -B^T P`` from the stationary Riccati flow with ``C = I``, ``K = I``.

    Raises
    ------
    Unstabilizable
        If the Hautus test fails or ``A + B F`` is not exponentially stable.
    NotConverged
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    test = hautus_stabilizable(A, B)
    if not test:
        raise Unstabilizable(f"(A, B) fails the Hautus test at s = {test.witness_eigenvalue}", test)
    n, m = B.shape
    problem = GlqProblem.create(A=A, B=B, C=np.eye(n), K=np.eye(m))
    P = dre_limit(problem, dt, tol, t_max)
    F = -B.T @ P
    abscissa = float(np.max(np.linalg.eigvals(A + B @ F).real))
    if abscissa >= -STABILITY_MARGIN:
        raise Unstabilizable(f"closed-loop spectral abscissa {abscissa:.3e} is not negative")
    return StabilizingFeedback(F, P, abscissa)
