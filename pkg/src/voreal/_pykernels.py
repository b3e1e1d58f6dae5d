"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built, or when ``VOREAL_PURE_PYTHON=1``.
"""

import numpy as np

_CHUNK = 4096


def nearest_sites(points, sites):
    """Index of the closest site for every point (lowest index wins ties)."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    sites = np.ascontiguousarray(sites, dtype=np.float64)
    if sites.shape[0] == 0:
        raise ValueError("empty diagram")
    out = np.zeros(points.shape[0], dtype=np.intp)
    for a in range(0, points.shape[0], _CHUNK):
        block = points[a:a + _CHUNK]
        diff = block[:, None, :] - sites[None, :, :]
        d2 = np.zeros(diff.shape[:2])
        # accumulate per coordinate, same summation order as the compiled loop
        for k in range(diff.shape[2]):
            d2 = d2 + diff[:, :, k] * diff[:, :, k]
        out[a:a + _CHUNK] = np.argmin(d2, axis=1)
    return out


def _clip(poly, ux, uy, c):
    out = []
    n = len(poly)
    for a in range(n):
        xa, ya = poly[a]
        xb, yb = poly[(a + 1) % n]
        va = ux * xa + uy * ya - c
        vb = ux * xb + uy * yb - c
        if va <= 0.0:
            out.append((xa, ya))
        if (va <= 0.0) != (vb <= 0.0):
            t = va / (va - vb)
            out.append((xa + t * (xb - xa), ya + t * (yb - ya)))
    return out


def _shoelace(poly):
    s = 0.0
    n = len(poly)
    for a in range(n):
        xa, ya = poly[a]
        xb, yb = poly[(a + 1) % n]
        s += xa * yb - xb * ya
    return 0.5 * abs(s)


def _max_r2(poly, sx, sy):
    return max((x - sx) ** 2 + (y - sy) ** 2 for x, y in poly)


def cell_areas_2d(sites, xlo, ylo, xhi, yhi):
    """Area of every Voronoi cell clipped to the box [xlo, xhi] x [ylo, yhi]."""
    sites = np.asarray(sites, dtype=np.float64)
    p = sites.shape[0]
    if p == 0:
        raise ValueError("empty diagram")
    pts = [(float(x), float(y)) for x, y in sites]
    out = np.zeros(p)
    for i, (sx, sy) in enumerate(pts):
        poly = [(xlo, ylo), (xhi, ylo), (xhi, yhi), (xlo, yhi)]
        r2 = _max_r2(poly, sx, sy)
        empty = False
        for j, (qx, qy) in enumerate(pts):
            if j == i:
                continue
            dx = qx - sx
            dy = qy - sy
            d2 = dx * dx + dy * dy
            if d2 == 0.0:
                if j < i:
                    empty = True
                    break
                continue
            if d2 > 4.0 * r2:
                continue
            c = 0.5 * ((qx * qx + qy * qy) - (sx * sx + sy * sy))
            poly = _clip(poly, dx, dy, c)
            if len(poly) < 3:
                empty = True
                break
            r2 = _max_r2(poly, sx, sy)
        out[i] = 0.0 if empty else _shoelace(poly)
    return out


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def grouped_hull_areas_2d(pts, starts):
    """Convex-hull area of each contiguous, lexicographically sorted group."""
    pts = np.asarray(pts, dtype=np.float64)
    starts = np.asarray(starts)
    out = np.zeros(max(len(starts) - 1, 0))
    for g in range(len(starts) - 1):
        a, b = int(starts[g]), int(starts[g + 1])
        if b - a < 3:
            continue
        group = [tuple(row) for row in pts[a:b].tolist()]
        lower = []
        for q in group:
            while len(lower) >= 2 and _cross(lower[-2], lower[-1], q) <= 0.0:
                lower.pop()
            lower.append(q)
        upper = []
        for q in reversed(group):
            while len(upper) >= 2 and _cross(upper[-2], upper[-1], q) <= 0.0:
                upper.pop()
            upper.append(q)
        hull = lower[:-1] + upper[:-1]
        if len(hull) >= 3:
            out[g] = _shoelace(hull)
    return out
