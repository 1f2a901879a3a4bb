"""Pure-numpy RK4 kernels; reference implementation of ``_ckernels``.

Both modules expose the same two functions with identical semantics, see
:mod:`glqlab.kernels`.
"""

import numpy as np

# overflow is expected on blow-up and reported through the ``bad`` index
_quiet = np.errstate(over="ignore", invalid="ignore")


def _dre_rhs(A, S, Q, P):
    AtP = A.T @ P
    return AtP + AtP.T - P @ S @ P + Q


@_quiet
def dre_rk4(A, S, Q, dt, nsteps, P0):
    n = A.shape[0]
    P = np.zeros((nsteps + 1, n, n))
    dP = np.zeros((nsteps + 1, n, n))
    P[0] = P0
    dP[0] = _dre_rhs(A, S, Q, P[0])
    drift = 0.0
    cur = P[0]
    for i in range(nsteps):
        k1 = dP[i]
        k2 = _dre_rhs(A, S, Q, cur + dt / 2 * k1)
        k3 = _dre_rhs(A, S, Q, cur + dt / 2 * k2)
        k4 = _dre_rhs(A, S, Q, cur + dt * k3)
        nxt = cur + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(nxt)):
            return P[: i + 1], dP[: i + 1], drift, i + 1
        asym = np.max(np.abs(nxt - nxt.T)) if n else 0.0
        drift = max(drift, asym)
        nxt = (nxt + nxt.T) / 2
        P[i + 1] = nxt
        dP[i + 1] = _dre_rhs(A, S, Q, nxt)
        cur = nxt
    return P, dP, drift, -1


@_quiet
def ltv_rk4(A0, L, R, Gv, Gd, hv, hd, y0, dt):
    nsteps = Gv.shape[0] - 1
    Y = np.zeros((nsteps + 1, y0.shape[0]))
    dY = np.zeros_like(Y)

    def rhs(G, h, y):
        return A0 @ y - L @ (G @ (R @ y)) + h

    y = np.array(y0, dtype=float)
    Y[0] = y
    dY[0] = rhs(Gv[0], hv[0], y)
    for i in range(nsteps):
        Gm = (Gv[i] + Gv[i + 1]) / 2 + dt * (Gd[i] - Gd[i + 1]) / 8
        hm = (hv[i] + hv[i + 1]) / 2 + dt * (hd[i] - hd[i + 1]) / 8
        k1 = dY[i]
        k2 = rhs(Gm, hm, y + dt / 2 * k1)
        k3 = rhs(Gm, hm, y + dt / 2 * k2)
        k4 = rhs(Gv[i + 1], hv[i + 1], y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            return Y[: i + 1], dY[: i + 1], i + 1
        Y[i + 1] = y
        dY[i + 1] = rhs(Gv[i + 1], hv[i + 1], y)
    return Y, dY, -1
