# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pointwise kernels on flattened ``(components..., N)`` arrays.

Same formulas as ``_kernels_py``; the node index is innermost so every loop
streams contiguous memory.
"""

import numpy as np
from libc.math cimport pow


def central_diff(const double[:, :, ::1] f, double factor):
    """Periodic central difference along the middle axis of a ``(pre, n, post)`` array."""
    cdef Py_ssize_t pre = f.shape[0], n = f.shape[1], post = f.shape[2]
    out = np.empty((pre, n, post))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t p, i, q, ip, im
    with nogil:
        for p in range(pre):
            for i in range(n):
                ip = i + 1 if i + 1 < n else 0
                im = i - 1 if i > 0 else n - 1
                for q in range(post):
                    o[p, i, q] = (f[p, ip, q] - f[p, im, q]) * factor
    return out


def gauss_quadratic(const double[:, :, :, ::1] h):
    """``sum_a h[a,j,i] h[a,k,l] - h[a,k,i] h[a,j,l]`` as ``[i, j, k, l, N]``."""
    cdef Py_ssize_t n_co = h.shape[0], d = h.shape[1], N = h.shape[3]
    out = np.zeros((d, d, d, d, N))
    cdef double[:, :, :, :, ::1] o = out
    cdef Py_ssize_t a, i, j, k, l, x
    with nogil:
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    for l in range(d):
                        for a in range(n_co):
                            for x in range(N):
                                o[i, j, k, l, x] += h[a, j, i, x] * h[a, k, l, x] - h[a, k, i, x] * h[a, j, l, x]
    return out


def codazzi_algebra(const double[:, :, :, ::1] h, const double[:, :, :, ::1] kappa,
                    const double[:, :, :, ::1] gamma):
    """``G^m_lj h^a_km + kappa^a_kb h^b_lj`` as ``[a, j, k, l, N]``."""
    cdef Py_ssize_t n_co = h.shape[0], d = h.shape[1], N = h.shape[3]
    out = np.zeros((n_co, d, d, d, N))
    cdef double[:, :, :, :, ::1] o = out
    cdef Py_ssize_t a, b, j, k, l, m, x
    with nogil:
        for a in range(n_co):
            for j in range(d):
                for k in range(d):
                    for l in range(d):
                        for m in range(d):
                            for x in range(N):
                                o[a, j, k, l, x] += gamma[m, l, j, x] * h[a, k, m, x]
                        for b in range(n_co):
                            for x in range(N):
                                o[a, j, k, l, x] += kappa[a, k, b, x] * h[b, l, j, x]
    return out


cdef _raise_index(const double[:, :, :, ::1] h, const double[:, :, ::1] ginv, double[:, :, :, ::1] hg):
    """``hg[b, k, m] = g^mn h[b, k, n]``."""
    cdef Py_ssize_t n_co = h.shape[0], d = h.shape[1], N = h.shape[3]
    cdef Py_ssize_t b, k, m, n, x
    with nogil:
        for b in range(n_co):
            for k in range(d):
                for m in range(d):
                    for n in range(d):
                        for x in range(N):
                            hg[b, k, m, x] += ginv[m, n, x] * h[b, k, n, x]


def ricci_algebra(const double[:, :, :, ::1] h, const double[:, :, :, ::1] kappa,
                  const double[:, :, ::1] ginv):
    """``-g^mn h^a_ml h^b_kn + kappa^a_kc kappa^c_lb`` as ``[a, b, k, l, N]``."""
    cdef Py_ssize_t n_co = h.shape[0], d = h.shape[1], N = h.shape[3]
    hg_arr = np.zeros((n_co, d, d, N))
    cdef double[:, :, :, ::1] hg = hg_arr
    _raise_index(h, ginv, hg)
    out = np.zeros((n_co, n_co, d, d, N))
    cdef double[:, :, :, :, ::1] o = out
    cdef Py_ssize_t a, b, c, k, l, m, x
    with nogil:
        for a in range(n_co):
            for b in range(n_co):
                for k in range(d):
                    for l in range(d):
                        for m in range(d):
                            for x in range(N):
                                o[a, b, k, l, x] -= h[a, m, l, x] * hg[b, k, m, x]
                        for c in range(n_co):
                            for x in range(N):
                                o[a, b, k, l, x] += kappa[a, k, c, x] * kappa[c, l, b, x]
    return out


def gauss_adjoint(const double[:, :, :, :, ::1] s, const double[:, :, :, ::1] h):
    """Transpose of ``h -> sum_a h[a,j,i] h[a,k,l]`` applied to ``s``."""
    cdef Py_ssize_t n_co = h.shape[0], d = h.shape[1], N = h.shape[3]
    out = np.zeros((n_co, d, d, N))
    cdef double[:, :, :, ::1] g = out
    cdef Py_ssize_t a, i, j, k, l, x
    with nogil:
        for a in range(n_co):
            for i in range(d):
                for j in range(d):
                    for k in range(d):
                        for l in range(d):
                            for x in range(N):
                                g[a, j, i, x] += s[i, j, k, l, x] * h[a, k, l, x]
                                g[a, k, l, x] += s[i, j, k, l, x] * h[a, j, i, x]
    return out


def codazzi_adjoint(const double[:, :, :, :, ::1] s, const double[:, :, :, ::1] h,
                    const double[:, :, :, ::1] kappa, const double[:, :, :, ::1] gamma):
    """Transpose of ``codazzi_algebra`` with respect to ``h`` and ``kappa``."""
    cdef Py_ssize_t n_co = h.shape[0], d = h.shape[1], N = h.shape[3]
    gh_arr = np.zeros((n_co, d, d, N))
    gk_arr = np.zeros((n_co, d, n_co, N))
    cdef double[:, :, :, ::1] gh = gh_arr
    cdef double[:, :, :, ::1] gk = gk_arr
    cdef Py_ssize_t a, b, j, k, l, m, x
    with nogil:
        for a in range(n_co):
            for j in range(d):
                for k in range(d):
                    for l in range(d):
                        for m in range(d):
                            for x in range(N):
                                gh[a, k, m, x] += s[a, j, k, l, x] * gamma[m, l, j, x]
                        for b in range(n_co):
                            for x in range(N):
                                gh[b, l, j, x] += s[a, j, k, l, x] * kappa[a, k, b, x]
                                gk[a, k, b, x] += s[a, j, k, l, x] * h[b, l, j, x]
    return gh_arr, gk_arr


def ricci_adjoint(const double[:, :, :, :, ::1] s, const double[:, :, :, ::1] h,
                  const double[:, :, :, ::1] kappa, const double[:, :, ::1] ginv):
    """Transpose of ``ricci_algebra`` with respect to ``h`` and ``kappa``."""
    cdef Py_ssize_t n_co = h.shape[0], d = h.shape[1], N = h.shape[3]
    hg_arr = np.zeros((n_co, d, d, N))
    cdef double[:, :, :, ::1] hg = hg_arr
    _raise_index(h, ginv, hg)
    hga_arr = np.zeros((n_co, d, d, N))
    cdef double[:, :, :, ::1] hga = hga_arr
    cdef Py_ssize_t a, b, c, k, l, m, n, x
    with nogil:
        # hga[a, l, n] = g^mn h[a, m, l]
        for a in range(n_co):
            for l in range(d):
                for n in range(d):
                    for m in range(d):
                        for x in range(N):
                            hga[a, l, n, x] += ginv[m, n, x] * h[a, m, l, x]
    gh_arr = np.zeros((n_co, d, d, N))
    gk_arr = np.zeros((n_co, d, n_co, N))
    cdef double[:, :, :, ::1] gh = gh_arr
    cdef double[:, :, :, ::1] gk = gk_arr
    with nogil:
        for a in range(n_co):
            for b in range(n_co):
                for k in range(d):
                    for l in range(d):
                        for m in range(d):
                            for x in range(N):
                                gh[a, m, l, x] -= s[a, b, k, l, x] * hg[b, k, m, x]
                                gh[b, k, m, x] -= s[a, b, k, l, x] * hga[a, l, m, x]
                        for c in range(n_co):
                            for x in range(N):
                                gk[a, k, c, x] += s[a, b, k, l, x] * kappa[c, l, b, x]
                                gk[c, l, b, x] += s[a, b, k, l, x] * kappa[a, k, c, x]
    return gh_arr, gk_arr


def power_density(const double[:, ::1] v, double p):
    """``(sum_c v_c^2)^(p/2)`` and ``p (sum_c v_c^2)^(p/2 - 1)`` per node."""
    cdef Py_ssize_t C = v.shape[0], N = v.shape[1]
    sq_arr = np.zeros(N)
    dens_arr = np.empty(N)
    fac_arr = np.empty(N)
    cdef double[::1] sq = sq_arr
    cdef double[::1] dens = dens_arr
    cdef double[::1] fac = fac_arr
    cdef Py_ssize_t c, x
    cdef double half = 0.5 * p
    with nogil:
        for c in range(C):
            for x in range(N):
                sq[x] += v[c, x] * v[c, x]
        for x in range(N):
            dens[x] = pow(sq[x], half)
            fac[x] = p * pow(sq[x], half - 1.0)
    return dens_arr, fac_arr
