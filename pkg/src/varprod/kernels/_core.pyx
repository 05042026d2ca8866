# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: VAR(1) state recursion and biased (cross-)covariances."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def var1_recursion(double phi11, double phi12, double phi21, double phi22,
                   double[:, ::1] z, Py_ssize_t burnin,
                   double x10=0.0, double x20=0.0):
    cdef Py_ssize_t steps = z.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((steps - burnin, 2))
    cdef double[:, ::1] o = out
    cdef double x1 = x10, x2 = x20, nx1
    cdef Py_ssize_t t, k = 0
    for t in range(steps):
        nx1 = phi11 * x1 + phi12 * x2 + z[t, 0]
        x2 = phi21 * x1 + phi22 * x2 + z[t, 1]
        x1 = nx1
        if t >= burnin:
            o[k, 0] = x1
            o[k, 1] = x2
            k += 1
    return out


def var1_recursion_batch(double phi11, double phi12, double phi21, double phi22,
                         double[:, :, ::1] z, Py_ssize_t burnin):
    cdef Py_ssize_t reps = z.shape[0]
    cdef Py_ssize_t steps = z.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((reps, steps - burnin, 2))
    cdef double[:, :, ::1] o = out
    cdef double x1, x2, nx1
    cdef Py_ssize_t r, t, k
    for r in range(reps):
        x1 = 0.0
        x2 = 0.0
        k = 0
        for t in range(steps):
            nx1 = phi11 * x1 + phi12 * x2 + z[r, t, 0]
            x2 = phi21 * x1 + phi22 * x2 + z[r, t, 1]
            x1 = nx1
            if t >= burnin:
                o[r, k, 0] = x1
                o[r, k, 1] = x2
                k += 1
    return out


def acvf_biased(double[::1] y, Py_ssize_t hmax):
    cdef Py_ssize_t n = y.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(hmax + 1)
    cdef double[::1] o = out
    cdef double mean = 0.0, acc
    cdef Py_ssize_t t, h
    for t in range(n):
        mean += y[t]
    mean /= n
    for h in range(hmax + 1):
        acc = 0.0
        for t in range(n - h):
            acc += (y[t] - mean) * (y[t + h] - mean)
        o[h] = acc / n
    return out


def acvf_biased_batch(double[:, ::1] ys, Py_ssize_t hmax):
    cdef Py_ssize_t reps = ys.shape[0]
    cdef Py_ssize_t n = ys.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((reps, hmax + 1))
    cdef double[:, ::1] o = out
    cdef double mean, acc
    cdef Py_ssize_t r, t, h
    for r in range(reps):
        mean = 0.0
        for t in range(n):
            mean += ys[r, t]
        mean /= n
        for h in range(hmax + 1):
            acc = 0.0
            for t in range(n - h):
                acc += (ys[r, t] - mean) * (ys[r, t + h] - mean)
            o[r, h] = acc / n
    return out


def ccvf_biased(double[::1] a, double[::1] b, Py_ssize_t hmax):
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(hmax + 1)
    cdef double[::1] o = out
    cdef double amean = 0.0, bmean = 0.0, acc
    cdef Py_ssize_t t, h
    for t in range(n):
        amean += a[t]
        bmean += b[t]
    amean /= n
    bmean /= n
    for h in range(hmax + 1):
        acc = 0.0
        for t in range(n - h):
            acc += (a[t] - amean) * (b[t + h] - bmean)
        o[h] = acc / n
    return out
