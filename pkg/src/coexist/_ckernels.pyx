# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the functions in ``_pykernels``."""

from libc.math cimport log2, sqrt, INFINITY
from libc.stdlib cimport malloc, free

import numpy as np

cdef double _LN2 = 0.6931471805599453


cdef inline double _fbl(double sinr, double blocklength, double qinv, double bandwidth) noexcept nogil:
    cdef double dispersion, per_use
    if sinr <= 0.0:
        return 0.0
    dispersion = 1.0 - 1.0 / ((1.0 + sinr) * (1.0 + sinr))
    per_use = log2(1.0 + sinr) - sqrt(dispersion / blocklength) * qinv / _LN2
    if per_use <= 0.0:
        return 0.0
    return bandwidth * per_use


def fbl_rate(double sinr, double blocklength, double qinv, double bandwidth):
    return _fbl(sinr, blocklength, qinv, bandwidth)


def min_power(double target, double gain, double noise, double bandwidth,
              double blocklength, double qinv, double pmax, double rtol):
    cdef double lo = 0.0, hi = pmax, mid
    if target <= 0.0:
        return 0.0
    if _fbl(pmax * gain / noise, blocklength, qinv, bandwidth) < target:
        return -1.0
    with nogil:
        while hi - lo > rtol * hi:
            mid = 0.5 * (lo + hi)
            if _fbl(mid * gain / noise, blocklength, qinv, bandwidth) >= target:
                hi = mid
            else:
                lo = mid
    return hi


cdef bint _stable(int n_e, int n_u, int* pe, int* pu, long[:, :] re, long[:, :] ru) noexcept nogil:
    cdef int e, u, cur
    cdef bint e_wants, u_wants
    for e in range(n_e):
        u = pe[e]
        if u >= 0 and (re[e, u] < 0 or ru[u, e] < 0):
            return False
    for e in range(n_e):
        for u in range(n_u):
            if pe[e] == u or re[e, u] < 0 or ru[u, e] < 0:
                continue
            cur = pe[e]
            e_wants = cur < 0 or re[e, u] < re[e, cur]
            if not e_wants:
                continue
            cur = pu[u]
            u_wants = cur < 0 or ru[u, e] < ru[u, cur]
            if u_wants:
                return False
    return True


cdef class _Walker:
    cdef int n_e, n_u
    cdef int* pe
    cdef int* pu
    cdef long[:, :] re
    cdef long[:, :] ru
    cdef public long checked
    cdef public list found

    def __cinit__(self, long[:, :] re, long[:, :] ru):
        self.n_e = re.shape[0]
        self.n_u = ru.shape[0]
        self.re = re
        self.ru = ru
        self.pe = <int*> malloc(max(self.n_e, 1) * sizeof(int))
        self.pu = <int*> malloc(max(self.n_u, 1) * sizeof(int))
        for i in range(self.n_e):
            self.pe[i] = -1
        for i in range(self.n_u):
            self.pu[i] = -1
        self.checked = 0
        self.found = []

    def __dealloc__(self):
        free(self.pe)
        free(self.pu)

    cdef void walk(self, int e):
        cdef int u
        if e == self.n_e:
            self.checked += 1
            if _stable(self.n_e, self.n_u, self.pe, self.pu, self.re, self.ru):
                self.found.append(tuple([self.pe[i] for i in range(self.n_e)]))
            return
        self.walk(e + 1)
        for u in range(self.n_u):
            if self.pu[u] < 0:
                self.pe[e] = u
                self.pu[u] = e
                self.walk(e + 1)
                self.pu[u] = -1
                self.pe[e] = -1


def stable_matchings(rank_e, rank_u):
    n_e = len(rank_e)
    n_u = len(rank_u)
    re = np.asarray(rank_e, dtype=np.int64).reshape(n_e, n_u)
    ru = np.asarray(rank_u, dtype=np.int64).reshape(n_u, n_e)
    walker = _Walker(re, ru)
    walker.walk(0)
    return walker.found, int(walker.checked)


def best_assignment(loss, cell):
    cdef double[:, :] L = np.ascontiguousarray(loss, dtype=np.float64)
    cdef long[:, :] C = np.ascontiguousarray(cell, dtype=np.int64)
    cdef int n_rows = L.shape[0]
    cdef int n_opts = L.shape[1] if n_rows > 0 else 0
    cdef int r, s, o
    cdef long n_feasible = 0
    cdef double best = INFINITY, acc
    cdef bint ok
    if n_rows == 0:
        return 0.0, (), 1
    cdef int* idx = <int*> malloc(n_rows * sizeof(int))
    cdef int* best_idx = <int*> malloc(n_rows * sizeof(int))
    try:
        for r in range(n_rows):
            idx[r] = 0
            best_idx[r] = -1
        # odometer over all option tuples, last row fastest (C order)
        while True:
            ok = True
            acc = 0.0
            for r in range(n_rows):
                acc = acc + L[r, idx[r]]
            if acc == INFINITY:
                ok = False
            if ok:
                for r in range(n_rows):
                    for s in range(r + 1, n_rows):
                        if C[r, idx[r]] == C[s, idx[s]]:
                            ok = False
                            break
                    if not ok:
                        break
            if ok:
                n_feasible += 1
                if acc < best:
                    best = acc
                    for r in range(n_rows):
                        best_idx[r] = idx[r]
            r = n_rows - 1
            while r >= 0:
                idx[r] += 1
                if idx[r] < n_opts:
                    break
                idx[r] = 0
                r -= 1
            if r < 0:
                break
        if n_feasible == 0:
            return float("inf"), None, 0
        return best, tuple([best_idx[r] for r in range(n_rows)]), int(n_feasible)
    finally:
        free(idx)
        free(best_idx)
