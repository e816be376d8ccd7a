# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the pairwise-distance matrix and the DP relaxation.

Must stay semantically identical to motiongraph._kernels.pyref: same
accumulation orders (compiled with -ffp-contract=off so mul+add rounds twice)
and same tie-breaking, so either backend yields the same graphs and paths.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

BACKEND_NAME = "cython"


def pair_parts(cnp.float64_t[::1] al, cnp.float64_t[::1] ag,
               cnp.float64_t[::1] bl, cnp.float64_t[::1] bg):
    cdef Py_ssize_t k
    cdef double sl = 0.0, sg = 0.0, d
    for k in range(al.shape[0]):
        d = al[k] - bl[k]
        sl += d * d
    for k in range(ag.shape[0]):
        d = ag[k] - bg[k]
        sg += d * d
    return sqrt(sl), sqrt(sg)


def pairwise_block(cnp.float64_t[:, ::1] L, cnp.float64_t[:, ::1] G,
                   Py_ssize_t row0, Py_ssize_t row1):
    cdef Py_ssize_t n = L.shape[0]
    cdef Py_ssize_t m = L.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((row1 - row0, n), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double sl, sg, d
    for i in range(row0, row1):
        for j in range(n):
            sl = 0.0
            sg = 0.0
            for k in range(m):
                d = L[i, k] - L[j, k]
                sl += d * d
            for k in range(m):
                d = G[i, k] - G[j, k]
                sg += d * d
            o[i - row0, j] = sqrt(sl) + sqrt(sg)
    return out


cdef inline int _history_count(cnp.int32_t[:, ::1] bp_hist, Py_ssize_t last_step,
                               Py_ssize_t last_node, Py_ssize_t target, int window) nogil:
    cdef int count = 0
    cdef Py_ssize_t node = last_node
    cdef Py_ssize_t s = last_step
    cdef int it
    for it in range(window):
        if node == target:
            count += 1
        if s == 0:
            break
        node = bp_hist[s, node]
        s -= 1
    return count


def dp_relax(cnp.float64_t[::1] prev_cost,
             cnp.int32_t[::1] edge_src, cnp.int32_t[::1] edge_dst,
             cnp.float64_t[::1] edge_w, double w_edge,
             cnp.float64_t[::1] frame_row,
             double struct_p, int struct_w,
             cnp.int32_t[:, ::1] bp_hist, int step):
    cdef Py_ssize_t n = prev_cost.shape[0]
    cdef Py_ssize_t ne = edge_src.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] new_cost = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] bp = np.full(n, -1, dtype=np.int32)
    cdef cnp.float64_t[::1] nc = new_cost
    cdef cnp.int32_t[::1] bpv = bp
    cdef Py_ssize_t e, u, v
    cdef double cand
    cdef bint use_struct = struct_p > 0.0 and step > 0

    for v in range(n):
        nc[v] = INFINITY
    # Edges are sorted by (dst, src); strict < keeps the smallest winning src.
    for e in range(ne):
        u = edge_src[e]
        v = edge_dst[e]
        cand = prev_cost[u] + w_edge * edge_w[e]
        if use_struct:
            cand = cand + struct_p * _history_count(bp_hist, step - 1, u, v, struct_w)
        if cand < nc[v]:
            nc[v] = cand
            bpv[v] = u
    for v in range(n):
        if nc[v] != INFINITY:
            nc[v] = nc[v] + frame_row[v]
    return new_cost, bp
