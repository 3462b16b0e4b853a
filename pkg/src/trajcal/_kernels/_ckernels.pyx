# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``_pykernels`` semantics exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sin, atan2, sqrt

cnp.import_array()


cdef Py_ssize_t _nearest_one(const double[::1] ref, double s, Py_ssize_t j) noexcept nogil:
    # advance a monotone cursor j to the nearest ref stamp to s (ties -> lower)
    cdef Py_ssize_t n = ref.shape[0]
    while j + 1 < n and (ref[j + 1] - s) < (s - ref[j]):
        j += 1
    return j


def associate_nearest(ta, tb, double max_dt):
    cdef const double[::1] a = np.ascontiguousarray(ta, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(tb, dtype=np.float64)
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    if na == 0 or nb == 0:
        return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp)
    cdef cnp.intp_t[::1] nn_b = np.empty(na, dtype=np.intp)
    cdef cnp.intp_t[::1] nn_a = np.empty(nb, dtype=np.intp)
    cdef Py_ssize_t i, j = 0, k = 0
    with nogil:
        for i in range(na):
            j = _nearest_one(b, a[i], j)
            nn_b[i] = j
        j = 0
        for i in range(nb):
            j = _nearest_one(a, b[i], j)
            nn_a[i] = j
    out_a = np.empty(na, dtype=np.intp)
    out_b = np.empty(na, dtype=np.intp)
    cdef cnp.intp_t[::1] oa = out_a
    cdef cnp.intp_t[::1] ob = out_b
    with nogil:
        for i in range(na):
            j = nn_b[i]
            if nn_a[j] == i and fabs(b[j] - a[i]) <= max_dt:
                oa[k] = i
                ob[k] = j
                k += 1
    return out_a[:k].copy(), out_b[:k].copy()


def local_maxima(x):
    cdef const double[::1] v = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if n < 3:
        return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.float64)
    peaks = np.empty(n // 2, dtype=np.intp)
    cdef cnp.intp_t[::1] pk = peaks
    cdef Py_ssize_t i = 1, ahead, m = 0, last = n - 1
    with nogil:
        while i < last:
            if v[i - 1] < v[i]:
                ahead = i + 1
                while ahead < last and v[ahead] == v[i]:
                    ahead += 1
                if v[ahead] < v[i]:
                    pk[m] = (i + ahead - 1) // 2
                    m += 1
                    i = ahead
            i += 1
    prom = np.empty(m, dtype=np.float64)
    cdef double[::1] pr = prom
    cdef Py_ssize_t p, c
    cdef double top, lmin, rmin
    with nogil:
        for c in range(m):
            p = pk[c]
            top = v[p]
            lmin = top
            i = p
            while i >= 0 and v[i] <= top:
                if v[i] < lmin:
                    lmin = v[i]
                i -= 1
            rmin = top
            i = p
            while i < n and v[i] <= top:
                if v[i] < rmin:
                    rmin = v[i]
                i += 1
            pr[c] = top - (lmin if lmin > rmin else rmin)
    return peaks[:m].copy(), prom


def resample_poses(stamps, t, q, query):
    cdef const double[::1] s = np.ascontiguousarray(stamps, dtype=np.float64)
    cdef const double[:, ::1] tt = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[:, ::1] qq = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] qs = np.ascontiguousarray(query, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], m = qs.shape[0]
    to_arr = np.empty((m, 3), dtype=np.float64)
    qo_arr = np.empty((m, 4), dtype=np.float64)
    cdef double[:, ::1] to = to_arr
    cdef double[:, ::1] qo = qo_arr
    cdef Py_ssize_t k, i = 0, c
    cdef double x, u, sg, d, dn, sm, phi, sp, w0, w1, nrm
    cdef double q1[4]
    with nogil:
        for k in range(m):
            x = qs[k]
            if n == 1:
                for c in range(3):
                    to[k, c] = tt[0, c]
                for c in range(4):
                    qo[k, c] = qq[0, c]
                continue
            # bracket: largest i <= n-2 with s[i] <= x (queries need not be sorted)
            if x < s[i]:
                i = 0
            while i + 1 < n - 1 and s[i + 1] <= x:
                i += 1
            if x == s[i]:
                for c in range(3):
                    to[k, c] = tt[i, c]
                for c in range(4):
                    qo[k, c] = qq[i, c]
                continue
            if x == s[i + 1]:
                for c in range(3):
                    to[k, c] = tt[i + 1, c]
                for c in range(4):
                    qo[k, c] = qq[i + 1, c]
                continue
            u = (x - s[i]) / (s[i + 1] - s[i])
            sg = 0.0
            for c in range(4):
                sg += qq[i, c] * qq[i + 1, c]
            for c in range(4):
                q1[c] = -qq[i + 1, c] if sg < 0.0 else qq[i + 1, c]
            d = 0.0
            sm = 0.0
            for c in range(4):
                d += (qq[i, c] - q1[c]) * (qq[i, c] - q1[c])
                sm += (qq[i, c] + q1[c]) * (qq[i, c] + q1[c])
            phi = 2.0 * atan2(sqrt(d), sqrt(sm))
            if phi < 1e-8:
                w0 = 1.0 - u
                w1 = u
            else:
                sp = sin(phi)
                w0 = sin((1.0 - u) * phi) / sp
                w1 = sin(u * phi) / sp
            nrm = 0.0
            for c in range(4):
                qo[k, c] = w0 * qq[i, c] + w1 * q1[c]
                nrm += qo[k, c] * qo[k, c]
            nrm = sqrt(nrm)
            for c in range(4):
                qo[k, c] = qo[k, c] / nrm
            for c in range(3):
                to[k, c] = (1.0 - u) * tt[i, c] + u * tt[i + 1, c]
    return to_arr, qo_arr
