# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled LSTM sequence kernels.

Mirrors ``numpy_backend`` exactly: stacked gate parameters in
[forget, input, cell, output] order acting on [h_prev, x_t]; matmuls go
through BLAS dgemm, elementwise gate math through tight C loops.
"""

from libc.math cimport exp, tanh

import numpy as np

from scipy.linalg.cython_blas cimport dgemm


cdef inline double sig(double v) noexcept nogil:
    return 1.0 / (1.0 + exp(-v))


def lstm_forward(x_in, w_in, b_in):
    """Batch LSTM forward pass; see numpy_backend.lstm_forward."""
    cdef double[:, :, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)

    cdef Py_ssize_t batch = x.shape[0]
    cdef Py_ssize_t steps = x.shape[1]
    cdef Py_ssize_t isize = x.shape[2]
    cdef Py_ssize_t hidden = w.shape[0] // 4
    cdef Py_ssize_t hi = hidden + isize

    hs_arr = np.empty((batch, steps, hidden))
    cs_arr = np.empty((batch, steps, hidden))
    gates_arr = np.empty((batch, steps, 4 * hidden))
    z_arr = np.empty((batch, hi))
    a_arr = np.empty((batch, 4 * hidden))
    # contiguous transpose keeps the per-step GEMM in plain "N","N" form
    wt_arr = np.ascontiguousarray(np.asarray(w_in, dtype=np.float64).T)

    cdef double[:, :, ::1] hs = hs_arr
    cdef double[:, :, ::1] cs = cs_arr
    cdef double[:, :, ::1] gates = gates_arr
    cdef double[:, ::1] z = z_arr
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] wt = wt_arr

    # row-major GEMM dims (BLAS is column-major; operands are swapped)
    cdef int m4h = <int>(4 * hidden)
    cdef int nb = <int>batch
    cdef int khi = <int>hi
    cdef double one = 1.0, zero = 0.0

    cdef Py_ssize_t t, s, j
    cdef double c, cp

    for t in range(steps):
        for s in range(batch):
            if t == 0:
                for j in range(hidden):
                    z[s, j] = 0.0
            else:
                for j in range(hidden):
                    z[s, j] = hs[s, t - 1, j]
            for j in range(isize):
                z[s, hidden + j] = x[s, t, j]
        # a = z @ wt
        dgemm("N", "N", &m4h, &nb, &khi, &one, &wt[0, 0], &m4h,
              &z[0, 0], &khi, &zero, &a[0, 0], &m4h)
        # contiguous activation passes keep these loops vectorizable
        for s in range(batch):
            for j in range(2 * hidden):
                gates[s, t, j] = sig(a[s, j] + b[j])
            for j in range(2 * hidden, 3 * hidden):
                gates[s, t, j] = tanh(a[s, j] + b[j])
            for j in range(3 * hidden, 4 * hidden):
                gates[s, t, j] = sig(a[s, j] + b[j])
            for j in range(hidden):
                cp = cs[s, t - 1, j] if t > 0 else 0.0
                c = gates[s, t, j] * cp + gates[s, t, hidden + j] * gates[s, t, 2 * hidden + j]
                cs[s, t, j] = c
                hs[s, t, j] = gates[s, t, 3 * hidden + j] * tanh(c)
    return hs_arr, cs_arr, gates_arr


def lstm_backward(x_in, w_in, hs_in, cs_in, gates_in, dh_in):
    """BPTT from a gradient on the final hidden state; see numpy_backend."""
    cdef double[:, :, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef double[:, :, ::1] hs = np.ascontiguousarray(hs_in, dtype=np.float64)
    cdef double[:, :, ::1] cs = np.ascontiguousarray(cs_in, dtype=np.float64)
    cdef double[:, :, ::1] gates = np.ascontiguousarray(gates_in, dtype=np.float64)

    cdef Py_ssize_t batch = x.shape[0]
    cdef Py_ssize_t steps = x.shape[1]
    cdef Py_ssize_t isize = x.shape[2]
    cdef Py_ssize_t hidden = w.shape[0] // 4
    cdef Py_ssize_t hi = hidden + isize

    dw_arr = np.zeros((4 * hidden, hi))
    db_arr = np.zeros(4 * hidden)
    dh_arr = np.array(dh_in, dtype=np.float64, copy=True, order="C")
    dc_arr = np.zeros((batch, hidden))
    z_arr = np.empty((batch, hi))
    da_arr = np.empty((batch, 4 * hidden))
    dz_arr = np.empty((batch, hi))
    tc_arr = np.empty((batch, hidden))

    cdef double[:, ::1] dw = dw_arr
    cdef double[::1] db = db_arr
    cdef double[:, ::1] dh = dh_arr
    cdef double[:, ::1] dc = dc_arr
    cdef double[:, ::1] z = z_arr
    cdef double[:, ::1] da = da_arr
    cdef double[:, ::1] dz = dz_arr
    cdef double[:, ::1] tc = tc_arr

    cdef int m4h = <int>(4 * hidden)
    cdef int nb = <int>batch
    cdef int khi = <int>hi
    cdef double one = 1.0, zero = 0.0

    cdef Py_ssize_t t, s, j
    cdef double f, ig, cand, o, dcv, cp, dov, dfv, div_, dgv

    for t in range(steps - 1, -1, -1):
        for s in range(batch):
            if t == 0:
                for j in range(hidden):
                    z[s, j] = 0.0
            else:
                for j in range(hidden):
                    z[s, j] = hs[s, t - 1, j]
            for j in range(isize):
                z[s, hidden + j] = x[s, t, j]

        for s in range(batch):
            for j in range(hidden):
                tc[s, j] = tanh(cs[s, t, j])
        for s in range(batch):
            for j in range(hidden):
                f = gates[s, t, j]
                ig = gates[s, t, hidden + j]
                cand = gates[s, t, 2 * hidden + j]
                o = gates[s, t, 3 * hidden + j]
                dov = dh[s, j] * tc[s, j]
                dcv = dc[s, j] + dh[s, j] * o * (1.0 - tc[s, j] * tc[s, j])
                cp = cs[s, t - 1, j] if t > 0 else 0.0
                dfv = dcv * cp
                div_ = dcv * cand
                dgv = dcv * ig
                da[s, j] = dfv * f * (1.0 - f)
                da[s, hidden + j] = div_ * ig * (1.0 - ig)
                da[s, 2 * hidden + j] = dgv * (1.0 - cand * cand)
                da[s, 3 * hidden + j] = dov * o * (1.0 - o)
                dc[s, j] = dcv * f
                db[j] += da[s, j]
                db[hidden + j] += da[s, hidden + j]
                db[2 * hidden + j] += da[s, 2 * hidden + j]
                db[3 * hidden + j] += da[s, 3 * hidden + j]

        # dw += da.T @ z
        dgemm("N", "T", &khi, &m4h, &nb, &one, &z[0, 0], &khi,
              &da[0, 0], &m4h, &one, &dw[0, 0], &khi)
        # dz = da @ w
        dgemm("N", "N", &khi, &nb, &m4h, &one, &w[0, 0], &khi,
              &da[0, 0], &m4h, &zero, &dz[0, 0], &khi)
        for s in range(batch):
            for j in range(hidden):
                dh[s, j] = dz[s, j]
    return dw_arr, db_arr
