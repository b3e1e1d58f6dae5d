# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: point location, bounded 2-D cell areas, grouped hull areas.

Every function here has a twin in ``_pykernels`` with identical semantics.
"""

import numpy as np

from libc.math cimport sqrt, fabs
from libc.stdlib cimport malloc, free


def nearest_sites(const double[:, ::1] points, const double[:, ::1] sites):
    """Index of the closest site for every point (lowest index wins ties)."""
    cdef Py_ssize_t n_pts = points.shape[0]
    cdef Py_ssize_t n_sites = sites.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef Py_ssize_t i, j, k, best_j
    cdef double best, d, diff
    out = np.zeros(n_pts, dtype=np.intp)
    cdef Py_ssize_t[::1] res = out
    if n_sites == 0:
        raise ValueError("empty diagram")
    with nogil:
        for i in range(n_pts):
            best = 1e308
            best_j = 0
            for j in range(n_sites):
                d = 0.0
                for k in range(dim):
                    diff = points[i, k] - sites[j, k]
                    d = d + diff * diff
                if d < best:
                    best = d
                    best_j = j
            res[i] = best_j
    return out


cdef Py_ssize_t _clip(double* xs, double* ys, Py_ssize_t n,
                      double ux, double uy, double c,
                      double* ox, double* oy) noexcept nogil:
    # keep {x : ux*x + uy*y <= c}
    cdef Py_ssize_t m = 0, a, b
    cdef double va, vb, t
    for a in range(n):
        b = a + 1
        if b == n:
            b = 0
        va = ux * xs[a] + uy * ys[a] - c
        vb = ux * xs[b] + uy * ys[b] - c
        if va <= 0.0:
            ox[m] = xs[a]
            oy[m] = ys[a]
            m += 1
        if (va <= 0.0) != (vb <= 0.0):
            t = va / (va - vb)
            ox[m] = xs[a] + t * (xs[b] - xs[a])
            oy[m] = ys[a] + t * (ys[b] - ys[a])
            m += 1
    return m


cdef double _shoelace(double* xs, double* ys, Py_ssize_t n) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t a, b
    for a in range(n):
        b = a + 1
        if b == n:
            b = 0
        s += xs[a] * ys[b] - xs[b] * ys[a]
    return 0.5 * fabs(s)


def cell_areas_2d(const double[:, ::1] sites, double xlo, double ylo,
                  double xhi, double yhi):
    """Area of every Voronoi cell clipped to the box [xlo, xhi] x [ylo, yhi]."""
    cdef Py_ssize_t p = sites.shape[0]
    cdef Py_ssize_t cap = 2 * p + 16
    cdef Py_ssize_t i, j, k, n
    cdef double sx, sy, dx, dy, d2, r2, vx, vy, c
    cdef double *xs
    cdef double *ys
    cdef double *tx
    cdef double *ty
    cdef double *swap
    cdef bint empty
    out = np.zeros(p, dtype=np.float64)
    cdef double[::1] res = out
    if p == 0:
        raise ValueError("empty diagram")
    cdef double* buf = <double*> malloc(4 * cap * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(p):
                xs = buf
                ys = buf + cap
                tx = buf + 2 * cap
                ty = buf + 3 * cap
                xs[0] = xlo; ys[0] = ylo
                xs[1] = xhi; ys[1] = ylo
                xs[2] = xhi; ys[2] = yhi
                xs[3] = xlo; ys[3] = yhi
                n = 4
                sx = sites[i, 0]
                sy = sites[i, 1]
                r2 = _max_r2(xs, ys, n, sx, sy)
                empty = False
                for j in range(p):
                    if j == i:
                        continue
                    dx = sites[j, 0] - sx
                    dy = sites[j, 1] - sy
                    d2 = dx * dx + dy * dy
                    if d2 == 0.0:
                        if j < i:
                            empty = True
                            break
                        continue
                    # bisector cannot reach the polygon
                    if d2 > 4.0 * r2:
                        continue
                    c = 0.5 * ((sites[j, 0] * sites[j, 0] + sites[j, 1] * sites[j, 1])
                               - (sx * sx + sy * sy))
                    n = _clip(xs, ys, n, dx, dy, c, tx, ty)
                    swap = xs; xs = tx; tx = swap
                    swap = ys; ys = ty; ty = swap
                    if n < 3:
                        empty = True
                        break
                    r2 = _max_r2(xs, ys, n, sx, sy)
                if empty:
                    res[i] = 0.0
                else:
                    res[i] = _shoelace(xs, ys, n)
    finally:
        free(buf)
    return out


cdef double _max_r2(double* xs, double* ys, Py_ssize_t n, double sx, double sy) noexcept nogil:
    cdef double r2 = 0.0, dx, dy, d
    cdef Py_ssize_t k
    for k in range(n):
        dx = xs[k] - sx
        dy = ys[k] - sy
        d = dx * dx + dy * dy
        if d > r2:
            r2 = d
    return r2


def grouped_hull_areas_2d(const double[:, ::1] pts, const Py_ssize_t[::1] starts):
    """Convex-hull area of each contiguous group ``pts[starts[g]:starts[g+1]]``.

    Each group must already be sorted lexicographically by (x, y).
    """
    cdef Py_ssize_t n_groups = starts.shape[0] - 1
    cdef Py_ssize_t g, a, b, i, k, t, m
    cdef double s, cr
    out = np.zeros(max(n_groups, 0), dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t n_max = 0
    for g in range(n_groups):
        if starts[g + 1] - starts[g] > n_max:
            n_max = starts[g + 1] - starts[g]
    cdef Py_ssize_t* hull = <Py_ssize_t*> malloc((2 * n_max + 2) * sizeof(Py_ssize_t))
    if hull == NULL:
        raise MemoryError()
    try:
        with nogil:
            for g in range(n_groups):
                a = starts[g]
                b = starts[g + 1]
                if b - a < 3:
                    continue
                k = 0
                for i in range(a, b):
                    while k >= 2 and _cross(pts, hull[k - 2], hull[k - 1], i) <= 0.0:
                        k -= 1
                    hull[k] = i
                    k += 1
                t = k + 1
                i = b - 2
                while i >= a:
                    while k >= t and _cross(pts, hull[k - 2], hull[k - 1], i) <= 0.0:
                        k -= 1
                    hull[k] = i
                    k += 1
                    i -= 1
                m = k - 1
                if m < 3:
                    continue
                s = 0.0
                for i in range(m):
                    t = hull[i]
                    k = hull[i + 1] if i + 1 < m else hull[0]
                    s += pts[t, 0] * pts[k, 1] - pts[k, 0] * pts[t, 1]
                res[g] = 0.5 * fabs(s)
    finally:
        free(hull)
    return out


cdef inline double _cross(const double[:, ::1] pts, Py_ssize_t o, Py_ssize_t a,
                          Py_ssize_t b) noexcept nogil:
    return ((pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1])
            - (pts[a, 1] - pts[o, 1]) * (pts[b, 0] - pts[o, 0]))
