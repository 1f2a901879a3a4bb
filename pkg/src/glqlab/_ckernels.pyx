# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernels (Riccati flow and linear time-varying arcs).

Same contract as ``glqlab._pykernels``; loops are written out so that small
systems do not pay numpy call overhead at every stage.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite, fabs

cnp.import_array()


cdef void _dre_rhs(const double[:, ::1] A, const double[:, ::1] S,
                   const double[:, ::1] Q, const double[:, ::1] P,
                   double[:, ::1] W, double[:, ::1] out) noexcept nogil:
    # out = A^T P + P A - P S P + Q ;  W is scratch for S P
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + S[i, k] * P[k, j]
            W[i, j] = acc
    for i in range(n):
        for j in range(i, n):
            acc = Q[i, j]
            for k in range(n):
                acc = acc + A[k, i] * P[k, j] + P[i, k] * A[k, j] - P[i, k] * W[k, j]
            out[i, j] = acc
            out[j, i] = acc


def dre_rk4(const double[:, ::1] A, const double[:, ::1] S, const double[:, ::1] Q, double dt,
            Py_ssize_t nsteps, const double[:, ::1] P0):
    cdef Py_ssize_t n = A.shape[0]
    P_arr = np.zeros((nsteps + 1, n, n))
    P_arr[0] = P0
    dP_arr = np.zeros((nsteps + 1, n, n))
    cdef double[:, :, ::1] P = P_arr
    cdef double[:, :, ::1] dP = dP_arr
    cdef double[:, ::1] W = np.zeros((n, n))
    cdef double[:, ::1] T = np.zeros((n, n))
    cdef double[:, ::1] k2 = np.zeros((n, n))
    cdef double[:, ::1] k3 = np.zeros((n, n))
    cdef double[:, ::1] k4 = np.zeros((n, n))
    cdef double[:, ::1] nxt = np.zeros((n, n))
    cdef Py_ssize_t step, i, j
    cdef double drift = 0.0, a, h2 = dt / 2, h6 = dt / 6
    cdef Py_ssize_t bad = -1
    with nogil:
        _dre_rhs(A, S, Q, P[0], W, dP[0])
        for step in range(nsteps):
            for i in range(n):
                for j in range(n):
                    T[i, j] = P[step, i, j] + h2 * dP[step, i, j]
            _dre_rhs(A, S, Q, T, W, k2)
            for i in range(n):
                for j in range(n):
                    T[i, j] = P[step, i, j] + h2 * k2[i, j]
            _dre_rhs(A, S, Q, T, W, k3)
            for i in range(n):
                for j in range(n):
                    T[i, j] = P[step, i, j] + dt * k3[i, j]
            _dre_rhs(A, S, Q, T, W, k4)
            for i in range(n):
                for j in range(n):
                    nxt[i, j] = P[step, i, j] + h6 * (dP[step, i, j] + 2 * k2[i, j]
                                                      + 2 * k3[i, j] + k4[i, j])
                    if not isfinite(nxt[i, j]):
                        bad = step + 1
            if bad >= 0:
                break
            for i in range(n):
                for j in range(i, n):
                    a = fabs(nxt[i, j] - nxt[j, i])
                    if a > drift:
                        drift = a
                    a = (nxt[i, j] + nxt[j, i]) / 2
                    P[step + 1, i, j] = a
                    P[step + 1, j, i] = a
            _dre_rhs(A, S, Q, P[step + 1], W, dP[step + 1])
    if bad >= 0:
        return P_arr[:bad], dP_arr[:bad], drift, bad
    return P_arr, dP_arr, drift, -1


cdef void _ltv_rhs(const double[:, ::1] A0, const double[:, ::1] L, const double[:, ::1] R,
                   const double[:, ::1] G, const double[::1] h, const double[::1] y,
                   double[::1] s1, double[::1] s2, double[::1] out) noexcept nogil:
    # out = A0 y - L G R y + h
    cdef Py_ssize_t n = A0.shape[0]
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(n):
            acc = acc + R[i, k] * y[k]
        s1[i] = acc
    for i in range(n):
        acc = 0.0
        for k in range(n):
            acc = acc + G[i, k] * s1[k]
        s2[i] = acc
    for i in range(n):
        acc = h[i]
        for k in range(n):
            acc = acc + A0[i, k] * y[k] - L[i, k] * s2[k]
        out[i] = acc


def ltv_rk4(const double[:, ::1] A0, const double[:, ::1] L, const double[:, ::1] R,
            const double[:, :, ::1] Gv, const double[:, :, ::1] Gd,
            const double[:, ::1] hv, const double[:, ::1] hd, const double[::1] y0, double dt):
    cdef Py_ssize_t n = A0.shape[0]
    cdef Py_ssize_t nsteps = Gv.shape[0] - 1
    Y_arr = np.zeros((nsteps + 1, n))
    dY_arr = np.zeros((nsteps + 1, n))
    cdef double[:, ::1] Y = Y_arr
    cdef double[:, ::1] dY = dY_arr
    cdef double[:, ::1] Gm = np.zeros((n, n))
    cdef double[::1] hm = np.zeros(n)
    cdef double[::1] tmp = np.zeros(n)
    cdef double[::1] k2 = np.zeros(n)
    cdef double[::1] k3 = np.zeros(n)
    cdef double[::1] k4 = np.zeros(n)
    cdef double[::1] s1 = np.zeros(n)
    cdef double[::1] s2 = np.zeros(n)
    cdef Py_ssize_t step, i, j
    cdef double h2 = dt / 2, h6 = dt / 6, h8 = dt / 8, v
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(n):
            Y[0, i] = y0[i]
        _ltv_rhs(A0, L, R, Gv[0], hv[0], Y[0], s1, s2, dY[0])
        for step in range(nsteps):
            for i in range(n):
                for j in range(n):
                    Gm[i, j] = (Gv[step, i, j] + Gv[step + 1, i, j]) / 2 \
                        + h8 * (Gd[step, i, j] - Gd[step + 1, i, j])
                hm[i] = (hv[step, i] + hv[step + 1, i]) / 2 + h8 * (hd[step, i] - hd[step + 1, i])
            for i in range(n):
                tmp[i] = Y[step, i] + h2 * dY[step, i]
            _ltv_rhs(A0, L, R, Gm, hm, tmp, s1, s2, k2)
            for i in range(n):
                tmp[i] = Y[step, i] + h2 * k2[i]
            _ltv_rhs(A0, L, R, Gm, hm, tmp, s1, s2, k3)
            for i in range(n):
                tmp[i] = Y[step, i] + dt * k3[i]
            _ltv_rhs(A0, L, R, Gv[step + 1], hv[step + 1], tmp, s1, s2, k4)
            for i in range(n):
                v = Y[step, i] + h6 * (dY[step, i] + 2 * k2[i] + 2 * k3[i] + k4[i])
                if not isfinite(v):
                    bad = step + 1
                Y[step + 1, i] = v
            if bad >= 0:
                break
            _ltv_rhs(A0, L, R, Gv[step + 1], hv[step + 1], Y[step + 1], s1, s2, dY[step + 1])
    if bad >= 0:
        return Y_arr[:bad], dY_arr[:bad], bad
    return Y_arr, dY_arr, -1
