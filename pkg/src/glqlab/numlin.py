"""Dense linear algebra and ODE kernels used by the rest of the package.

Matrices are plain ``numpy`` float arrays; complex arithmetic only shows up
in the spectral routines (:func:`eigen`, :func:`kernel_basis` on complex
input).
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NoConvergence, NonFiniteState, SingularMatrix

KERNEL_TOL = 1e-9
PIVOT_TOL = 1e-12


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float array (copy-free when possible)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def solve_linear(M, b):
    """Solve ``M y = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrix
        If a pivot falls below ``1e-12 * max|M_ij|``.
    """
    M = np.asarray(M)
    b = np.asarray(b)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"solve_linear needs a square matrix, got {M.shape}")
    scale = np.max(np.abs(M)) if M.size else 0.0
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrix
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(M, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < PIVOT_TOL * scale:
        raise SingularMatrix(
            f"pivot {np.min(pivots):.3e} below {PIVOT_TOL:g} x max|entry| ({scale:.3e})"
        )
    return linalg.lu_solve((lu, piv), b)


def kernel_basis(M, tol=KERNEL_TOL):
    """Orthonormal basis of the numerical null space of ``M``.

    Column-pivoted QR of the conjugate transpose: the trailing columns of the
    full ``Q`` factor span ``ran(M^H)^perp = ker M``. A diagonal entry of
    ``R`` counts towards the rank when it exceeds ``tol`` times the largest
    column norm of ``M^H``.

    Returns
    -------
    ndarray, shape (cols, k)
        Basis vectors as columns; ``k == 0`` means a trivial kernel.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = np.atleast_2d(np.asarray(M))
    rows, cols = M.shape
    if rows == 0:
        return np.eye(cols, dtype=M.dtype)
    Q, R, _ = linalg.qr(M.conj().T, mode="full", pivoting=True)
    diag = np.abs(np.diag(R))
    top = diag[0] if diag.size else 0.0
    rank = int(np.sum(diag > tol * top)) if top > 0 else 0
    return Q[:, rank:]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues with unit-norm right eigenvectors (columns) and residuals.

    ``left`` holds the dual basis (rows of ``V^{-1}``) when the eigenvector
    matrix is invertible, so that ``sum_i V[:, i] left[i]`` is the identity.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    left: np.ndarray | None = None
    valid: bool = True

    def __len__(self):
        return len(self.eigenvalues)

    def max_residual(self):
        return float(np.max(self.residuals)) if self.residuals.size else 0.0


def eigen(M):
    """Eigen-decomposition of a square real matrix.

    LAPACK ``geev`` (Hessenberg reduction followed by shifted QR) supplies
    eigenvalues and eigenvectors; residuals ``||M v - lambda v||`` are
    recomputed here so that callers can judge reliability.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"eigen needs a square matrix, got {M.shape}")
    n = M.shape[0]
    if n == 0:
        empty = np.zeros(0, dtype=complex)
        return EigenDecomposition(empty, np.zeros((0, 0), complex), np.zeros(0), np.zeros((0, 0), complex))
    try:
        lam, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"QR iteration did not converge: {exc}") from exc
    lam = lam.astype(complex)
    V = V.astype(complex)
    V /= np.linalg.norm(V, axis=0)
    residuals = np.linalg.norm(M @ V - V * lam, axis=0)
    left = None
    valid = bool(np.all(np.isfinite(residuals)))
    if np.linalg.cond(V) < 1e12:
        left = np.linalg.inv(V)
    order = np.lexsort((lam.imag, -lam.real))
    return EigenDecomposition(
        eigenvalues=lam[order],
        eigenvectors=V[:, order],
        residuals=residuals[order],
        left=None if left is None else left[order, :],
        valid=valid,
    )


_TAYLOR_TERMS = 18


def expm(M, t=1.0):
    """Matrix exponential ``exp(t M)`` by scaling and squaring.

    The argument is scaled by ``2**-s`` until its 1-norm is at most 1/2, a
    truncated Taylor series of fixed length is summed (Horner form), and the
    result squared ``s`` times.
    """
    X = np.asarray(M, dtype=float) * t
    n = X.shape[0]
    if X.ndim != 2 or X.shape[1] != n:
        raise ValueError(f"expm needs a square matrix, got {X.shape}")
    norm = np.linalg.norm(X, 1) if n else 0.0
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
        X = X / 2.0**s
    I = np.eye(n)
    E = I.copy()
    for k in range(_TAYLOR_TERMS, 0, -1):
        E = I + (X @ E) / k
    for _ in range(s):
        E = E @ E
    return E


def rk4_integrate(f, y0, t0, t1, dt):
    """Classical fourth-order Runge--Kutta on a uniform grid.

    Parameters
    ----------
    f : callable
        ``f(t, y) -> dy/dt``.
    y0 : array_like
        Initial state.
    t0, t1 : float
        Integration window, ``t1 > t0``.
    dt : float
        Step; the last step is shortened so that the grid lands on ``t1``.

    Returns
    -------
    t : ndarray, shape (N+1,)
    y : ndarray, shape (N+1, len(y0))

    Raises
    ------
    NonFiniteState
        When a sample becomes inf/nan; carries the last finite sample.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    span = t1 - t0
    nfull = int(np.floor(span / dt + 1e-9))
    steps = [dt] * nfull
    rest = span - nfull * dt
    if rest > 1e-12 * max(1.0, span):
        steps.append(rest)
    y = np.array(y0, dtype=float)
    ts = [t0]
    ys = [y.copy()]
    t = t0
    for i, h in enumerate(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(t, y)
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y_new = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * dt if i < nfull else t1
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState(f"state became non-finite after t={ts[-1]:.6g}", ts[-1], ys[-1])
        y = y_new
        ts.append(t)
        ys.append(y.copy())
    return np.array(ts), np.array(ys)


def simpson(values, dx):
    """Composite Simpson rule over uniformly spaced samples along axis 0.

    An odd number of intervals is handled by Simpson on all but the last
    interval plus the trapezoid rule on the last.
    """
    y = np.asarray(values, dtype=float)
    npts = y.shape[0]
    if npts < 2:
        return np.zeros(y.shape[1:]) if y.ndim > 1 else 0.0
    if npts == 2:
        return dx * (y[0] + y[1]) / 2
    nint = npts - 1
    tail = 0.0
    if nint % 2 == 1:
        tail = dx * (y[-2] + y[-1]) / 2
        y = y[:-1]
    total = y[0] + y[-1] + 4 * y[1:-1:2].sum(axis=0) + 2 * y[2:-1:2].sum(axis=0)
    return dx / 3 * total + tail
