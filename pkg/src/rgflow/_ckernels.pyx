# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see rgflow._pykernels for the reference versions."""

import numpy as np
from libc.math cimport fabs, pow, sqrt

BACKEND = "cython"


cdef inline double _series(double u, double[::1] deg, int[::1] ideg, double[::1] a, Py_ssize_t m) nogil:
    cdef double acc = 0.0, pw, au
    cdef Py_ssize_t j
    cdef int e, i
    for j in range(m):
        e = ideg[j]
        if e >= 0:
            pw = 1.0
            for i in range(e):
                pw *= u
        else:
            au = fabs(u)
            pw = pow(au, deg[j])
            if u < 0:
                pw = -pw
        acc += a[j] * pw
    return acc


def _prepare(degrees, coeffs):
    deg = np.ascontiguousarray(degrees, dtype=np.float64)
    a = np.ascontiguousarray(coeffs, dtype=np.float64)
    ideg = np.array([int(d) if float(d).is_integer() else -1 for d in deg], dtype=np.intc)
    return deg, ideg, a


def series_eval(u, degrees, coeffs):
    cdef double[::1] deg, a
    cdef int[::1] ideg
    deg, ideg, a = _prepare(degrees, coeffs)
    src = np.array(u, dtype=np.float64, order="C")
    out = np.empty_like(src)
    cdef double[::1] uv = src.reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t k, n = uv.shape[0], m = deg.shape[0]
    with nogil:
        for k in range(n):
            ov[k] = _series(uv[k], deg, ideg, a, m)
    return out


def weighted_sup(w, c, d, double q):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double complex[::1] cv = np.ascontiguousarray(c, dtype=np.complex128)
    cdef const double complex[::1] dv = np.ascontiguousarray(d, dtype=np.complex128)
    cdef Py_ssize_t k, n = wv.shape[0], best_k = 0
    cdef double best = -1.0, val, aw, wq
    cdef double complex cz, dz
    cdef bint square = q == 2.0
    with nogil:
        for k in range(n):
            aw = fabs(wv[k])
            wq = aw * aw if square else pow(aw, q)
            cz = cv[k]
            dz = dv[k]
            # spectra are O(1), so the unscaled modulus cannot overflow
            val = (1.0 + wq) * (sqrt(cz.real * cz.real + cz.imag * cz.imag)
                                + sqrt(dz.real * dz.real + dz.imag * dz.imag))
            if val > best or (val == best and aw < fabs(wv[best_k])):
                best = val
                best_k = k
    return float(best), int(best_k)


def cn_imex_run(u0, double dx, times, c_mid, g_start, g_mid, degrees, coeffs, double guard):
    cdef double[::1] deg, a
    cdef int[::1] ideg
    deg, ideg, a = _prepare(degrees, coeffs)
    u_arr = np.array(u0, dtype=np.float64)
    u_arr[0] = 0.0
    cdef double[::1] u = u_arr
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[::1] cm = np.ascontiguousarray(c_mid, dtype=np.float64)
    cdef const double[::1] gs = np.ascontiguousarray(g_start, dtype=np.float64)
    cdef const double[::1] gm = np.ascontiguousarray(g_mid, dtype=np.float64)
    cdef Py_ssize_t N = u.shape[0], m = deg.shape[0]
    cdef double[::1] half = np.zeros(N)
    cdef double[::1] rhs = np.zeros(N)
    cdef double[::1] cp = np.zeros(N)
    cdef Py_ssize_t k, j, K = tv.shape[0] - 1
    cdef double h, lap, mu, inv_dx2 = 1.0 / (dx * dx), denom, left, right, smax
    cdef Py_ssize_t fail = -1
    with nogil:
        for k in range(K):
            h = tv[k + 1] - tv[k]
            smax = 0.0
            for j in range(N):
                if fabs(u[j]) > smax:
                    smax = fabs(u[j])
            if smax >= guard:
                fail = k
                break
            # predictor on interior nodes 1..N-1, u[0] = u[N] = 0
            smax = 0.0
            for j in range(1, N):
                left = u[j - 1]
                right = u[j + 1] if j + 1 < N else 0.0
                lap = (left - 2.0 * u[j] + right) * inv_dx2
                half[j] = u[j] + 0.5 * h * (cm[k] * lap + gs[k] * _series(u[j], deg, ideg, a, m))
                if fabs(half[j]) > smax:
                    smax = fabs(half[j])
            if smax >= guard:
                fail = k
                break
            mu = cm[k] * h * 0.5 * inv_dx2
            for j in range(1, N):
                left = u[j - 1]
                right = u[j + 1] if j + 1 < N else 0.0
                rhs[j] = u[j] + mu * (left - 2.0 * u[j] + right) + h * gm[k] * _series(half[j], deg, ideg, a, m)
            # Thomas sweep for (1 + 2mu) on the diagonal, -mu off it
            cp[1] = -mu / (1.0 + 2.0 * mu)
            rhs[1] = rhs[1] / (1.0 + 2.0 * mu)
            for j in range(2, N):
                denom = (1.0 + 2.0 * mu) + mu * cp[j - 1]
                cp[j] = -mu / denom
                rhs[j] = (rhs[j] + mu * rhs[j - 1]) / denom
            u[N - 1] = rhs[N - 1]
            for j in range(N - 2, 0, -1):
                u[j] = rhs[j] - cp[j] * u[j + 1]
        if fail < 0:
            smax = 0.0
            for j in range(N):
                if fabs(u[j]) > smax:
                    smax = fabs(u[j])
            if smax >= guard:
                fail = K
    return u_arr, int(fail)
