# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the network kernels.

Mirrors `_pure` function for function; see that module for contracts.
This backend targets single-row calls, the per-mini-turn path: the
gradient step wins clearly there because the numpy version is a chain
of small allocating ops, while single-row inference lands at parity
with BLAS. Batched work is BLAS territory; benchmarks/bench_kernels.py
has the honest numbers. Dot products run 16 lanes wide so the compiler
can keep independent SIMD accumulators in flight. Summation order
differs from BLAS, so results agree with `_pure` only to rounding.
"""

import numpy as np

from libc.math cimport exp, log

NAME = "compiled"


cdef inline double _dot(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    # 16 lanes: wide enough for several independent SIMD accumulators,
    # so the loop is bound by FMA throughput instead of FMA latency
    cdef double lanes[16]
    cdef Py_ssize_t k = 0, j
    for j in range(16):
        lanes[j] = 0.0
    while k + 16 <= n:
        for j in range(16):
            lanes[j] += a[k + j] * b[k + j]
        k += 16
    while k < n:
        lanes[0] += a[k] * b[k]
        k += 1
    cdef double s = 0.0
    for j in range(16):
        s += lanes[j]
    return s


def forward(double[:, ::1] X, double[:, ::1] W_fuse, double[::1] b_fuse,
            double[:, ::1] W_pred, double[::1] b_pred):
    """See `_pure.forward`."""
    cdef Py_ssize_t B = X.shape[0]
    cdef Py_ssize_t d_in = X.shape[1]
    cdef Py_ssize_t d_h = W_fuse.shape[0]
    cdef Py_ssize_t A = W_pred.shape[0]

    H_arr = np.zeros((B, d_h), dtype=np.float64)
    logits_arr = np.zeros((B, A), dtype=np.float64)
    P_arr = np.zeros((B, A), dtype=np.float64)
    cdef double[:, ::1] H = H_arr
    cdef double[:, ::1] logits = logits_arr
    cdef double[:, ::1] P = P_arr

    cdef Py_ssize_t i, j
    cdef double acc, m, s

    for i in range(B):
        for j in range(d_h):
            acc = b_fuse[j] + _dot(&W_fuse[j, 0], &X[i, 0], d_in)
            H[i, j] = acc if acc > 0.0 else 0.0
        for j in range(A):
            logits[i, j] = b_pred[j] + _dot(&W_pred[j, 0], &H[i, 0], d_h)
        m = logits[i, 0]
        for j in range(1, A):
            if logits[i, j] > m:
                m = logits[i, j]
        s = 0.0
        for j in range(A):
            P[i, j] = exp(logits[i, j] - m)
            s += P[i, j]
        for j in range(A):
            P[i, j] /= s
    return H_arr, logits_arr, P_arr


def loss_and_grads_core(double[:, ::1] X, Py_ssize_t[::1] labels,
                        double[:, ::1] W_fuse, double[::1] b_fuse,
                        double[:, ::1] W_pred, double[::1] b_pred):
    """See `_pure.loss_and_grads_core`."""
    cdef Py_ssize_t B = X.shape[0]
    cdef Py_ssize_t d_in = X.shape[1]
    cdef Py_ssize_t d_h = W_fuse.shape[0]
    cdef Py_ssize_t A = W_pred.shape[0]

    dW_fuse_arr = np.zeros((d_h, d_in), dtype=np.float64)
    db_fuse_arr = np.zeros(d_h, dtype=np.float64)
    dW_pred_arr = np.zeros((A, d_h), dtype=np.float64)
    db_pred_arr = np.zeros(A, dtype=np.float64)
    cdef double[:, ::1] dW_fuse = dW_fuse_arr
    cdef double[::1] db_fuse = db_fuse_arr
    cdef double[:, ::1] dW_pred = dW_pred_arr
    cdef double[::1] db_pred = db_pred_arr

    h_arr = np.zeros(d_h, dtype=np.float64)
    lg_arr = np.zeros(A, dtype=np.float64)
    dlg_arr = np.zeros(A, dtype=np.float64)
    dh_arr = np.zeros(d_h, dtype=np.float64)
    cdef double[::1] h = h_arr
    cdef double[::1] lg = lg_arr
    cdef double[::1] dlg = dlg_arr
    cdef double[::1] dh = dh_arr

    cdef Py_ssize_t i, j, k, y
    cdef double m, s, loss_sum, g

    loss_sum = 0.0
    for i in range(B):
        y = labels[i]
        for j in range(d_h):
            g = b_fuse[j] + _dot(&W_fuse[j, 0], &X[i, 0], d_in)
            h[j] = g if g > 0.0 else 0.0
        for j in range(A):
            lg[j] = b_pred[j] + _dot(&W_pred[j, 0], &h[0], d_h)
        m = lg[0]
        for j in range(1, A):
            if lg[j] > m:
                m = lg[j]
        s = 0.0
        for j in range(A):
            dlg[j] = exp(lg[j] - m)
            s += dlg[j]
        loss_sum += m + log(s) - lg[y]
        # dlg becomes (softmax - onehot) / B
        for j in range(A):
            dlg[j] = dlg[j] / s / B
        dlg[y] -= 1.0 / B
        for j in range(d_h):
            dh[j] = 0.0
        for j in range(A):
            g = dlg[j]
            db_pred[j] += g
            for k in range(d_h):
                dW_pred[j, k] += g * h[k]
                dh[k] += g * W_pred[j, k]
        for j in range(d_h):
            if h[j] > 0.0:
                g = dh[j]
                db_fuse[j] += g
                for k in range(d_in):
                    dW_fuse[j, k] += g * X[i, k]

    return loss_sum / B, dW_fuse_arr, db_fuse_arr, dW_pred_arr, db_pred_arr
