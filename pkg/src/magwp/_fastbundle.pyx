# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused quadrature kernels for the builtin fields.

Each function evaluates the analytic field derivatives at the quadrature
nodes and accumulates the weighted averages in one pass, returning the same
tuple of arrays as the pure-numpy bundle:

    (a0, G1, H, G3, w0, gW, HW, dtA0, GdtA, vbar0)

Shapes: a0 (d,), G1 (d,d), H (d,d,d), G3 (d,d,d,d), gW (d,), HW (d,d),
dtA0 (d,), GdtA (d,d); w0 and vbar0 are floats.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def trig_bundle(const double[:, ::1] xs, const double[::1] ws, const double[::1] u,
                const double[::1] sig, double alpha, double t, const double[:, ::1] V2):
    """A_k = sig_k sin(u.x + alpha sin t), V = x^T V2 x / 2."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t d = xs.shape[1]
    cdef double phase = alpha * sin(t)
    cdef double dphase = alpha * cos(t)
    cdef double sig2 = 0.0
    cdef Py_ssize_t i, j, k, m, c
    for k in range(d):
        sig2 += sig[k] * sig[k]

    # scalar moments of the oscillatory factors
    cdef double m_sn = 0.0, m_cs = 0.0, m_cssn = 0.0, m_cs2sn2 = 0.0, m_sn2 = 0.0
    cdef double m_V = 0.0
    gV_np = np.zeros(d)
    x1_np = np.zeros(d)
    x2_np = np.zeros((d, d))
    cdef double[::1] m_gV = gV_np
    cdef double[::1] m_x = x1_np
    cdef double[:, ::1] m_xx = x2_np
    cdef double s, sn, cs, w, V
    for i in range(n):
        s = phase
        for j in range(d):
            s += u[j] * xs[i, j]
        sn = sin(s)
        cs = cos(s)
        w = ws[i]
        m_sn += w * sn
        m_cs += w * cs
        m_sn2 += w * sn * sn
        m_cssn += w * cs * sn
        m_cs2sn2 += w * (cs * cs - sn * sn)
        V = 0.0
        for j in range(d):
            for k in range(d):
                V += xs[i, j] * V2[j, k] * xs[i, k]
            m_x[j] += w * xs[i, j]
        V *= 0.5
        m_V += w * V
        for j in range(d):
            for k in range(d):
                m_xx[j, k] += w * xs[i, j] * xs[i, k]

    a0 = np.empty(d)
    G1 = np.empty((d, d))
    H = np.empty((d, d, d))
    G3 = np.empty((d, d, d, d))
    gW = np.empty(d)
    HW = np.empty((d, d))
    dtA0 = np.empty(d)
    GdtA = np.empty((d, d))
    cdef double[::1] a0v = a0
    cdef double[:, ::1] G1v = G1
    cdef double[:, :, ::1] Hv = H
    cdef double[:, :, :, ::1] G3v = G3
    cdef double[::1] gWv = gW
    cdef double[:, ::1] HWv = HW
    cdef double[::1] dtA0v = dtA0
    cdef double[:, ::1] GdtAv = GdtA

    for j in range(d):
        for k in range(d):
            m_gV[j] += V2[j, k] * m_x[k]

    for k in range(d):
        a0v[k] = sig[k] * m_sn
        dtA0v[k] = dphase * sig[k] * m_cs
        for j in range(d):
            G1v[k, j] = sig[k] * u[j] * m_cs
            GdtAv[k, j] = -dphase * sig[k] * u[j] * m_sn
            for i in range(d):
                Hv[k, i, j] = -sig[k] * u[i] * u[j] * m_sn
                for m in range(d):
                    G3v[k, m, i, j] = -sig[k] * u[m] * u[i] * u[j] * m_cs
    # W = V + |A|^2/2 with |A|^2 = sig2 sin^2
    cdef double w0 = m_V + 0.5 * sig2 * m_sn2
    cdef double vbar0 = m_V
    for j in range(d):
        gWv[j] = m_gV[j] + u[j] * sig2 * m_cssn
        for i in range(d):
            HWv[i, j] = V2[i, j] + u[i] * u[j] * sig2 * m_cs2sn2
    return a0, G1, H, G3, w0, gW, HW, dtA0, GdtA, vbar0


def linear_bundle(const double[:, ::1] xs, const double[::1] ws, const double[:, ::1] MA,
                  const double[:, ::1] V2, const double[::1] v1, double v0):
    """A = MA x, V = x^T V2 x / 2 + v1.x + v0 (time-independent)."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t d = xs.shape[1]
    cdef Py_ssize_t i, j, k
    x1_np = np.zeros(d)
    x2_np = np.zeros((d, d))
    cdef double[::1] m_x = x1_np
    cdef double[:, ::1] m_xx = x2_np
    cdef double w
    for i in range(n):
        w = ws[i]
        for j in range(d):
            m_x[j] += w * xs[i, j]
            for k in range(d):
                m_xx[j, k] += w * xs[i, j] * xs[i, k]

    a0 = np.asarray(MA) @ np.asarray(m_x)
    G1 = np.array(MA, copy=True)
    H = np.zeros((d, d, d))
    G3 = np.zeros((d, d, d, d))
    dtA0 = np.zeros(d)
    GdtA = np.zeros((d, d))
    MXX = np.asarray(m_xx)
    V2n = np.asarray(V2)
    MAn = np.asarray(MA)
    v1n = np.asarray(v1)
    mx = np.asarray(m_x)
    vbar0 = float(0.5 * np.sum(V2n * MXX) + v1n @ mx + v0)
    MtM = MAn.T @ MAn
    w0 = vbar0 + float(0.5 * np.sum(MtM * MXX))
    gW = V2n @ mx + v1n + MtM @ mx
    HW = V2n + MtM
    return a0, G1, H, G3, w0, gW, HW, dtA0, GdtA, vbar0


def rot2d_bundle(const double[:, ::1] xs, const double[::1] ws):
    """A = (-x2, x1)/(1 + |x|^2), V = |x|^2/2 in two dimensions."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i, j, k, m, l
    cdef double[2][2] E
    E[0][0] = 0.0
    E[0][1] = -1.0
    E[1][0] = 1.0
    E[1][1] = 0.0

    a0 = np.zeros(2)
    G1 = np.zeros((2, 2))
    H = np.zeros((2, 2, 2))
    G3 = np.zeros((2, 2, 2, 2))
    gW = np.zeros(2)
    HW = np.zeros((2, 2))
    cdef double[::1] a0v = a0
    cdef double[:, ::1] G1v = G1
    cdef double[:, :, ::1] Hv = H
    cdef double[:, :, :, ::1] G3v = G3
    cdef double[::1] gWv = gW
    cdef double[:, ::1] HWv = HW
    cdef double w0 = 0.0, vbar0 = 0.0

    cdef double w, r2, g, g2, g3, g4, V
    cdef double[2] x, c, dg, A
    cdef double[2][2] JA, ddg
    cdef double[2][2][2] dddg, HA
    cdef double acc, asq
    for i in range(n):
        w = ws[i]
        x[0] = xs[i, 0]
        x[1] = xs[i, 1]
        r2 = x[0] * x[0] + x[1] * x[1]
        g = 1.0 / (1.0 + r2)
        g2 = g * g
        g3 = g2 * g
        g4 = g2 * g2
        c[0] = -x[1]
        c[1] = x[0]
        for j in range(2):
            dg[j] = -2.0 * x[j] * g2
        for j in range(2):
            for k in range(2):
                ddg[j][k] = 8.0 * x[j] * x[k] * g3
            ddg[j][j] -= 2.0 * g2
        for m in range(2):
            for j in range(2):
                for k in range(2):
                    dddg[m][j][k] = -48.0 * x[j] * x[k] * x[m] * g4
                    if j == k:
                        dddg[m][j][k] += 8.0 * x[m] * g3
                    if j == m:
                        dddg[m][j][k] += 8.0 * x[k] * g3
                    if k == m:
                        dddg[m][j][k] += 8.0 * x[j] * g3
        for k in range(2):
            A[k] = c[k] * g
            a0v[k] += w * A[k]
            for j in range(2):
                JA[k][j] = E[k][j] * g + c[k] * dg[j]
                G1v[k, j] += w * JA[k][j]
            for j in range(2):
                for l in range(2):
                    HA[k][j][l] = E[k][j] * dg[l] + E[k][l] * dg[j] + c[k] * ddg[j][l]
                    Hv[k, j, l] += w * HA[k][j][l]
            for m in range(2):
                for j in range(2):
                    for l in range(2):
                        G3v[k, m, j, l] += w * (
                            E[k][m] * ddg[j][l]
                            + E[k][j] * ddg[m][l]
                            + E[k][l] * ddg[m][j]
                            + c[k] * dddg[m][j][l]
                        )
        V = 0.5 * r2
        asq = A[0] * A[0] + A[1] * A[1]
        vbar0 += w * V
        w0 += w * (V + 0.5 * asq)
        for j in range(2):
            acc = x[j]
            for k in range(2):
                acc += JA[k][j] * A[k]
            gWv[j] += w * acc
        for j in range(2):
            for l in range(2):
                acc = 1.0 if j == l else 0.0
                for k in range(2):
                    acc += JA[k][j] * JA[k][l] + A[k] * HA[k][j][l]
                HWv[j, l] += w * acc

    dtA0 = np.zeros(2)
    GdtA = np.zeros((2, 2))
    return a0, G1, H, G3, w0, gW, HW, dtA0, GdtA, vbar0
