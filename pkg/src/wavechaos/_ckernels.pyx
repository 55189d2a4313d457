# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; semantics match ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, pow

cnp.import_array()


def modulus_window_sum(w, weights, int kind, double nu):
    cdef const double complex[:, ::1] wv = np.ascontiguousarray(np.atleast_2d(w), dtype=np.complex128)
    cdef const double[::1] wt = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t P = wv.shape[0], n = wv.shape[1], p, k
    cdef double[::1] out = np.zeros(P)
    cdef double acc, re, im, r2, half = 0.5 * nu
    cdef long bad = 0
    if wt.shape[0] != n:
        raise ValueError("weights length does not match the window")
    for p in range(P):
        acc = 0.0
        if kind == 1:
            for k in range(n):
                re = wv[p, k].real
                im = wv[p, k].imag
                r2 = re * re + im * im
                if r2 == 0.0:
                    bad += 1
                else:
                    acc += wt[k] * 0.5 * log(r2)
        elif nu == 2.0:
            for k in range(n):
                re = wv[p, k].real
                im = wv[p, k].imag
                acc += wt[k] * (re * re + im * im)
        elif nu == 1.0:
            for k in range(n):
                re = wv[p, k].real
                im = wv[p, k].imag
                acc += wt[k] * sqrt(re * re + im * im)
        else:
            for k in range(n):
                re = wv[p, k].real
                im = wv[p, k].imag
                acc += wt[k] * pow(re * re + im * im, half)
        out[p] = acc
    return np.asarray(out), int(bad)


def ks_sup(cdf_sorted):
    cdef const double[::1] c = np.ascontiguousarray(cdf_sorted, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], i
    cdef double best = 0.0, d, fn = <double>n
    for i in range(n):
        d = (i + 1) / fn - c[i]
        if d > best:
            best = d
        d = c[i] - i / fn
        if d > best:
            best = d
    return best


def sign_split_sum(signs):
    # Heap's algorithm over positions; all ℓ! orderings, duplicates included
    cdef int ell = len(signs), h = ell // 2, i, q
    cdef long long total = 0, acc, prod, tmp
    cdef long long a[16]
    cdef int c[16]
    cdef long long coef[9]
    if ell > 16:
        raise ValueError("too many signs")
    from math import comb
    for q in range(h + 1):
        coef[q] = comb(h, q) * (-1 if q % 2 else 1)
    for i in range(ell):
        a[i] = signs[i]
        c[i] = 0

    # first ordering
    acc = coef[0]
    prod = 1
    for q in range(1, h + 1):
        prod *= a[ell - 2 * q] * a[ell - 2 * q + 1]
        acc += coef[q] * prod
    total += acc
    i = 1
    while i < ell:
        if c[i] < i:
            if i % 2 == 0:
                tmp = a[0]; a[0] = a[i]; a[i] = tmp
            else:
                tmp = a[c[i]]; a[c[i]] = a[i]; a[i] = tmp
            acc = coef[0]
            prod = 1
            for q in range(1, h + 1):
                prod *= a[ell - 2 * q] * a[ell - 2 * q + 1]
                acc += coef[q] * prod
            total += acc
            c[i] += 1
            i = 1
        else:
            c[i] = 0
            i += 1
    return int(total)
