"""Backend selection for the RK4 hot loops.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy implementation in ``_pykernels`` takes over. Both expose

``dre_rk4(A, S, Q, dt, nsteps, P0) -> (P, dP, drift, bad)``
    RK4 on ``P' = A^T P + P A - P S P + Q`` from ``P(0) = P0``, symmetrizing
    after each step. ``dP`` holds the right-hand side at every stored sample.
    ``bad`` is the index of the first non-finite step, or -1.

``ltv_rk4(A0, L, R, Gv, Gd, hv, hd, y0, dt) -> (Y, dY, bad)``
    RK4 on ``y' = A0 y - L G(t) R y + h(t)`` where ``G`` and ``h`` are given
    with their time derivatives on the step grid; half-step values come from
    cubic Hermite interpolation, which keeps the scheme fourth order.
"""

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = ("cython", "python") if _ckernels is not None else ("python",)
_active = _ckernels if _ckernels is not None else _pykernels


def backend():
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def set_backend(name):
    """Switch between ``"cython"`` and ``"python"``; returns the previous name."""
    global _active
    previous = backend()
    if name == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not available")
        _active = _ckernels
    elif name == "python":
        _active = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous


def _c(a):
    return np.ascontiguousarray(a, dtype=float)


def dre_rk4(A, S, Q, dt, nsteps, P0=None):
    if P0 is None:
        P0 = np.zeros_like(A, dtype=float)
    return _active.dre_rk4(_c(A), _c(S), _c(Q), float(dt), int(nsteps), _c(P0))


def ltv_rk4(A0, L, R, Gv, Gd, hv, hd, y0, dt):
    return _active.ltv_rk4(_c(A0), _c(L), _c(R), _c(Gv), _c(Gd), _c(hv), _c(hd), _c(y0), float(dt))
