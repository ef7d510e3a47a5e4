# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_fallback`` for the reference contracts."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs

cnp.import_array()

BACKEND = "cython"


def forward_vectors(const double[:, :, ::1] atoms, const cnp.int64_t[:, ::1] seqs,
                    const double[::1] x0, bint history):
    cdef Py_ssize_t trials = seqs.shape[0], n = seqs.shape[1], d = atoms.shape[1]
    cdef Py_ssize_t t, k, i, j, a
    cdef double best, v
    out = np.empty((trials, d), dtype=np.float64)
    cdef double[:, ::1] x = out
    cdef double[::1] tmp = np.empty(d, dtype=np.float64)
    hist = np.empty((trials, n + 1, d), dtype=np.float64) if history else None
    cdef double[:, :, ::1] h
    if history:
        h = hist
    with nogil:
        for t in range(trials):
            for i in range(d):
                x[t, i] = x0[i]
                if history:
                    h[t, 0, i] = x0[i]
            for k in range(n):
                a = seqs[t, k]
                for i in range(d):
                    best = -INFINITY
                    for j in range(d):
                        v = atoms[a, i, j] + x[t, j]
                        if v > best:
                            best = v
                    tmp[i] = best
                for i in range(d):
                    x[t, i] = tmp[i]
                    if history:
                        h[t, k + 1, i] = tmp[i]
    return out, hist


def fold_products(const double[:, :, ::1] atoms, const cnp.int64_t[::1] seq, bint history):
    cdef Py_ssize_t n = seq.shape[0], d = atoms.shape[1]
    cdef Py_ssize_t k, i, j, l, a
    cdef double best, v, m, s = 0.0, c = 0.0, tsum, total, rm
    p_arr = np.array(atoms[seq[0]], dtype=np.float64)
    cdef double[:, ::1] p = p_arr
    cdef double[:, ::1] q = np.empty((d, d), dtype=np.float64)
    hist = np.empty((n, d), dtype=np.float64) if history else None
    cdef double[:, ::1] h
    if history:
        h = hist
    with nogil:
        for k in range(n):
            if k > 0:
                a = seq[k]
                for i in range(d):
                    for j in range(d):
                        best = -INFINITY
                        for l in range(d):
                            v = p[i, l] + atoms[a, l, j]
                            if v > best:
                                best = v
                        q[i, j] = best
                for i in range(d):
                    for j in range(d):
                        p[i, j] = q[i, j]
            m = -INFINITY
            for i in range(d):
                for j in range(d):
                    if p[i, j] > m:
                        m = p[i, j]
            if m != -INFINITY:
                for i in range(d):
                    for j in range(d):
                        p[i, j] = p[i, j] - m
                tsum = s + m
                if fabs(s) >= fabs(m):
                    c += (s - tsum) + m
                else:
                    c += (m - tsum) + s
                s = tsum
            if history:
                total = s + c
                for i in range(d):
                    rm = -INFINITY
                    for j in range(d):
                        if p[i, j] > rm:
                            rm = p[i, j]
                    h[k, i] = rm + total
    return p_arr, s + c, hist


def markov_paths(const double[:, ::1] cum, const cnp.int64_t[::1] start,
                 const double[:, ::1] uniforms):
    cdef Py_ssize_t trials = uniforms.shape[0], m = uniforms.shape[1]
    cdef Py_ssize_t n_states = cum.shape[0]
    cdef Py_ssize_t t, k, s, nxt
    cdef double u
    out = np.empty((trials, m + 1), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    with nogil:
        for t in range(trials):
            s = start[t]
            o[t, 0] = s
            for k in range(m):
                u = uniforms[t, k]
                nxt = 0
                while nxt < n_states - 1 and cum[s, nxt] <= u:
                    nxt += 1
                s = nxt
                o[t, k + 1] = s
    return out
