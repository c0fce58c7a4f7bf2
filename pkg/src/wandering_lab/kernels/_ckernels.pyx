# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the escape-time and Blaschke evaluation kernels."""

import numpy as np
from libc.math cimport log, hypot, pow


cdef enum:
    LANES = 8


def green_escape(coeffs, zs, long max_iter, double bailout):
    c_arr = np.ascontiguousarray(coeffs, dtype=np.complex128)
    z_arr = np.asarray(zs, dtype=np.complex128)
    shape = z_arr.shape
    zf = np.ascontiguousarray(z_arr.ravel())
    cdef Py_ssize_t n = zf.shape[0]
    cdef int d = c_arr.shape[0] - 1
    green = np.zeros(n, dtype=np.float64)
    iters = np.full(n, max_iter, dtype=np.int64)
    escaped = np.zeros(n, dtype=np.uint8)
    cdef double shift = log(abs(c_arr[d])) / (d - 1)
    cdef double b2 = bailout * bailout
    cdef const double complex[::1] cv = c_arr
    cdef const double complex[::1] zv = zf
    cdef double[::1] gv = green
    cdef long long[::1] iv = iters.view(np.longlong)
    cdef unsigned char[::1] ev = escaped
    # each orbit is a serial chain of dependent multiply-adds, so several
    # orbits are advanced in lock step to keep the FPU busy; plain real
    # arithmetic avoids the NaN-safe library call behind C complex products
    cdef double lx[LANES]
    cdef double ly[LANES]
    cdef long lk[LANES]
    cdef Py_ssize_t li[LANES]
    cdef Py_ssize_t nxt = 0
    cdef int live = 0
    cdef int l, j
    cdef long k
    cdef double x, y, ax, ay, t
    with nogil:
        for l in range(LANES):
            li[l] = -1
            if nxt < n:
                li[l] = nxt
                lx[l] = zv[nxt].real
                ly[l] = zv[nxt].imag
                lk[l] = 0
                nxt += 1
                live += 1
        while live > 0:
            for l in range(LANES):
                if li[l] < 0:
                    continue
                x = lx[l]
                y = ly[l]
                k = lk[l]
                if x * x + y * y > b2 or k == max_iter:
                    if x * x + y * y > b2:
                        gv[li[l]] = (log(hypot(x, y)) + shift) / pow(d, k)
                        iv[li[l]] = k
                        ev[li[l]] = 1
                    if nxt < n:
                        li[l] = nxt
                        lx[l] = zv[nxt].real
                        ly[l] = zv[nxt].imag
                        lk[l] = 0
                        nxt += 1
                    else:
                        li[l] = -1
                        live -= 1
                    continue
                ax = cv[d].real
                ay = cv[d].imag
                for j in range(d - 1, -1, -1):
                    t = ax * x - ay * y + cv[j].real
                    ay = ax * y + ay * x + cv[j].imag
                    ax = t
                lx[l] = ax
                ly[l] = ay
                lk[l] = k + 1
    return (green.reshape(shape), iters.reshape(shape),
            escaped.astype(bool).reshape(shape))


def blaschke_eval(zeros, phase, zs):
    a_arr = np.ascontiguousarray(zeros, dtype=np.complex128)
    z_arr = np.asarray(zs, dtype=np.complex128)
    shape = z_arr.shape
    zf = np.ascontiguousarray(z_arr.ravel())
    out = np.empty(zf.shape[0], dtype=np.complex128)
    cdef Py_ssize_t n = zf.shape[0]
    cdef Py_ssize_t m = a_arr.shape[0]
    cdef double complex ph = phase
    cdef const double complex[::1] av = a_arr
    cdef const double complex[::1] zv = zf
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double complex acc, w, ak, akc
    with nogil:
        for i in range(n):
            w = zv[i]
            acc = ph
            for j in range(m):
                ak = av[j]
                akc.real = ak.real
                akc.imag = -ak.imag
                acc = acc * ((w - ak) / (1.0 - akc * w))
            ov[i] = acc
    return out.reshape(shape)
