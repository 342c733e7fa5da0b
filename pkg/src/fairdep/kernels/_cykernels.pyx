# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend: the hot per-batch linear algebra.

Mirrors _pykernels exactly (raw sigmoid, no clipping); plain C loops beat
numpy dispatch overhead at the small batch/feature sizes this toolkit runs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt, tanh

cnp.import_array()


cdef inline double _sigmoid(double z) nogil:
    cdef double ez
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    ez = exp(z)
    return ez / (1.0 + ez)


def logistic_forward(const double[:, ::1] X, const double[::1] w, double b):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    p = np.empty(n, dtype=np.float64)
    cdef double[::1] pv = p
    cdef Py_ssize_t i, j
    cdef double z
    for i in range(n):
        z = b
        for j in range(d):
            z += X[i, j] * w[j]
        pv[i] = _sigmoid(z)
    return p


def logistic_backward(const double[:, ::1] X, const double[::1] dz):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    gw = np.zeros(d, dtype=np.float64)
    cdef double[::1] gwv = gw
    cdef double gb = 0.0
    cdef Py_ssize_t i, j
    cdef double dzi
    for i in range(n):
        dzi = dz[i]
        gb += dzi
        for j in range(d):
            gwv[j] += X[i, j] * dzi
    return gw, gb


def mlp_forward(const double[:, ::1] X, const double[:, ::1] W1, const double[::1] b1,
                const double[::1] w2, double b2):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], h = W1.shape[1]
    p = np.empty(n, dtype=np.float64)
    H = np.empty((n, h), dtype=np.float64)
    cdef double[::1] pv = p
    cdef double[:, ::1] Hv = H
    cdef Py_ssize_t i, j, k
    cdef double a, z
    for i in range(n):
        for k in range(h):
            a = b1[k]
            for j in range(d):
                a += X[i, j] * W1[j, k]
            Hv[i, k] = tanh(a)
        z = b2
        for k in range(h):
            z += Hv[i, k] * w2[k]
        pv[i] = _sigmoid(z)
    return p, H


def mlp_backward(const double[:, ::1] X, const double[:, ::1] H, const double[::1] w2,
                 const double[::1] dz):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], h = H.shape[1]
    gW1 = np.zeros((d, h), dtype=np.float64)
    gb1 = np.zeros(h, dtype=np.float64)
    gw2 = np.zeros(h, dtype=np.float64)
    cdef double[:, ::1] gW1v = gW1
    cdef double[::1] gb1v = gb1
    cdef double[::1] gw2v = gw2
    cdef double gb2 = 0.0
    cdef Py_ssize_t i, j, k
    cdef double dzi, dhk
    for i in range(n):
        dzi = dz[i]
        gb2 += dzi
        for k in range(h):
            gw2v[k] += H[i, k] * dzi
            dhk = dzi * w2[k] * (1.0 - H[i, k] * H[i, k])
            gb1v[k] += dhk
            for j in range(d):
                gW1v[j, k] += X[i, j] * dhk
    return gW1, gb1, gw2, gb2


def adam_step(double[::1] param, const double[::1] grad, double[::1] m,
              double[::1] v, long t, double lr, double beta1, double beta2,
              double eps):
    cdef Py_ssize_t i, n = param.shape[0]
    cdef double c1 = 1.0 - beta1 ** t
    cdef double c2 = 1.0 - beta2 ** t
    cdef double m_hat, v_hat
    for i in range(n):
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i]
        m_hat = m[i] / c1
        v_hat = v[i] / c2
        param[i] -= lr * m_hat / (sqrt(v_hat) + eps)
