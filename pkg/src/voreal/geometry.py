"""Bounded Voronoi cells, convex hulls and their volumes.

All volumes are measured inside an axis-aligned :class:`BoundingBox`. In two
dimensions cell areas are exact (half-plane clipping); in higher dimensions
they are Monte Carlo estimates driven by an explicit seed, so that every
individual of a run sees the same sample cloud.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend

#: Samples per volume estimate when the dimension is above two.
DEFAULT_SAMPLES = 50_000


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box ``[lo, hi]`` on which all volumes are defined."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be vectors of equal length")
        if not np.all(lo < hi):
            raise ValueError("BoundingBox needs lo < hi in every dimension")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def around(cls, points, margin: float = 0.1) -> "BoundingBox":
        """Bounds of ``points`` expanded by ``margin`` of the extent on each side."""
        points = np.asarray(points, dtype=float)
        lo, hi = points.min(axis=0), points.max(axis=0)
        ext = hi - lo
        # a flat dimension still needs positive width
        ext = np.where(ext > 0, ext, 1.0)
        return cls(lo - margin * ext, hi + margin * ext)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))

    def volume(self) -> float:
        return float(np.prod(self.extent))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.lo + rng.random((n, self.dim)) * self.extent

    def sample_stratified(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` uniform points, one jittered point per cell of an ``m^d`` grid.

        ``m = floor(n ** (1/d))``; the ``n - m^d`` leftovers are plain uniform
        draws. Every point is still marginally uniform in the box, but cell
        counts have far less variance than with independent draws.
        """
        d = self.dim
        m = int(np.floor(n ** (1.0 / d) + 1e-9))
        while m ** d > n:
            m -= 1
        grid = np.indices((m,) * d).reshape(d, -1).T if m > 0 else np.zeros((0, d))
        unit = (grid + rng.random(grid.shape)) / max(m, 1)
        rest = rng.random((n - len(unit), d))
        return self.lo + np.vstack([unit, rest]) * self.extent

    def contains(self, points) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= self.lo) & (points <= self.hi), axis=1)

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundingBox":
        return cls(np.asarray(d["lo"]), np.asarray(d["hi"]))


@dataclass(frozen=True)
class Hyperplane:
    """The plane ``{x : normal . x = offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(normal) - 1.0) > 1e-9:
            raise ValueError("hyperplane normal must have unit length")
        object.__setattr__(self, "normal", normal)

    def signed(self, points) -> np.ndarray:
        return np.atleast_2d(points) @ self.normal - self.offset


@dataclass
class VolumeReport:
    cell_volumes: np.ndarray
    hull_volumes: np.ndarray
    counts: np.ndarray
    samples_used: int = 0


@dataclass(frozen=True)
class GeometryConfig:
    """How volumes are obtained during evaluation.

    ``seed`` is shared by every individual evaluated with this config, which
    gives common random numbers for the Monte Carlo estimates.
    """

    n_samples: int = DEFAULT_SAMPLES
    seed: int = 0
    exact_2d: bool = True


@dataclass
class Hull2D:
    vertices: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    degenerate: bool = True

    def area(self) -> float:
        if self.degenerate:
            return 0.0
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def site_coords(sites) -> np.ndarray:
    """Coordinates as a C-contiguous ``(p, n)`` float array.

    Accepts an array, a list of objects with ``coords`` or anything with a
    ``coords`` array attribute (an Individual).
    """
    if hasattr(sites, "coords") and not isinstance(sites, (list, tuple)):
        arr = sites.coords
    elif isinstance(sites, (list, tuple)) and sites and hasattr(sites[0], "coords"):
        arr = np.array([s.coords for s in sites], dtype=float)
    else:
        arr = sites
    arr = np.asarray(arr, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empty diagram")
    if arr.ndim == 1:
        arr = arr[:, None]
    return np.ascontiguousarray(arr)


def nearest_sites(points, sites) -> np.ndarray:
    """Vectorised :func:`nearest_site` over a ``(N, n)`` array."""
    coords = site_coords(sites)
    points = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, coords.shape[1]))
    return _backend.nearest_sites(points, coords)


def nearest_site(point, sites) -> int:
    """Index of the site closest to ``point``; ties go to the lowest index."""
    coords = site_coords(sites)
    point = np.asarray(point, dtype=float).reshape(1, -1)
    if point.shape[1] != coords.shape[1]:
        raise ValueError(f"point has dimension {point.shape[1]}, sites have {coords.shape[1]}")
    return int(_backend.nearest_sites(np.ascontiguousarray(point), coords)[0])


def assign_points(data, sites) -> list[np.ndarray]:
    """Split ``data`` into the per-cell subsets ``D_1 .. D_p``."""
    coords = site_coords(sites)
    data = np.asarray(data, dtype=float).reshape(-1, coords.shape[1])
    owner = nearest_sites(data, coords)
    return [data[owner == i] for i in range(coords.shape[0])]


def cell_volumes_mc(sites, box: BoundingBox, n_samples: int, seed: int) -> np.ndarray:
    """Monte Carlo cell volumes; they sum to ``box.volume()`` by construction.

    Volume of cell ``i`` = share of the (stratified) box samples whose
    nearest site is ``i``, times the box volume.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    coords = site_coords(sites)
    samples = box.sample_stratified(n_samples, np.random.default_rng(seed))
    owner = _backend.nearest_sites(samples, coords)
    counts = np.bincount(owner, minlength=coords.shape[0])
    return counts / n_samples * box.volume()


def cell_volumes_exact_2d(sites, box: BoundingBox) -> np.ndarray:
    """Exact areas of the Voronoi cells clipped to a 2-D box.

    A site that duplicates a lower-indexed one gets area 0.
    """
    coords = site_coords(sites)
    if coords.shape[1] != 2 or box.dim != 2:
        raise ValueError("exact volume only in 2-D")
    return _backend.cell_areas_2d(coords, box.lo[0], box.lo[1], box.hi[0], box.hi[1])


def cell_volumes(sites, box: BoundingBox, cfg: GeometryConfig | None = None) -> np.ndarray:
    cfg = cfg or GeometryConfig()
    if box.dim == 2 and cfg.exact_2d:
        return cell_volumes_exact_2d(sites, box)
    return cell_volumes_mc(sites, box, cfg.n_samples, cfg.seed)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points) -> Hull2D:
    """Counter-clockwise hull by Andrew's monotone chain.

    Collinear boundary points are dropped. Fewer than three non-collinear
    points give a degenerate hull (area 0).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        return Hull2D(pts.copy(), True)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    srt = [tuple(p) for p in pts[order].tolist()]
    lower: list = []
    for q in srt:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list = []
    for q in reversed(srt):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    hull = np.array(lower[:-1] + upper[:-1], dtype=float).reshape(-1, 2)
    return Hull2D(hull, len(hull) < 3)


def in_hull_lp(x, points, tol: float = 1e-9) -> bool:
    """Is ``x`` a convex combination of ``points``?

    Decided by phase one of the simplex method on
    ``sum_j lam_j p_j = x, sum_j lam_j = 1, lam >= 0`` with one artificial
    variable per row and Bland's rule against cycling.
    """
    pts = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    m, n = pts.shape
    A = np.vstack([pts.T, np.ones((1, m))])
    b = np.concatenate([x, [1.0]])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    rows = n + 1
    # tableau: [A | I | b], objective row minimises the artificial sum
    T = np.zeros((rows + 1, m + rows + 1))
    T[:rows, :m] = A
    T[:rows, m:m + rows] = np.eye(rows)
    T[:rows, -1] = b
    T[rows, :] = -T[:rows, :].sum(axis=0)
    T[rows, m:m + rows] = 0.0
    basis = list(range(m, m + rows))
    for _ in range(50 * (m + rows)):
        red = T[rows, :-1]
        entering = next((j for j in range(m + rows) if red[j] < -tol), None)
        if entering is None:
            break
        col = T[:rows, entering]
        ratios = np.full(rows, np.inf)
        pos = col > tol
        ratios[pos] = T[:rows, -1][pos] / col[pos]
        if not np.isfinite(ratios).any():
            break
        best = ratios.min()
        leave = min((i for i in range(rows) if ratios[i] <= best + tol), key=lambda i: basis[i])
        T[leave] /= T[leave, entering]
        for i in range(rows + 1):
            if i != leave and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[leave]
        basis[leave] = entering
    return -T[rows, -1] <= 1e-7


def _facet_membership(points, samples) -> np.ndarray:
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(points)
    except (QhullError, ValueError):
        # flat point set: zero volume
        return np.zeros(len(samples), dtype=bool)
    eq = hull.equations
    return np.all(samples @ eq[:, :-1].T + eq[:, -1] <= 1e-12, axis=1)


def hull_volume(points, box: BoundingBox, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> float:
    """Volume of the convex hull of ``points``; 0 when ``len(points) <= dim``.

    Exact shoelace area in 2-D. Above that, the fraction of uniform box
    samples that fall inside the hull, times the box volume.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[1]
    if len(pts) <= n:
        return 0.0
    if n == 2:
        return convex_hull_2d(pts).area()
    samples = box.sample_stratified(n_samples, np.random.default_rng(seed))
    # only samples inside the points' bounding box can be in the hull
    near = np.all((samples >= pts.min(axis=0)) & (samples <= pts.max(axis=0)), axis=1)
    if not near.any():
        return 0.0
    inside = _facet_membership(pts, samples[near])
    return float(inside.sum()) / n_samples * box.volume()


def grouped_hull_areas_2d(points, owner, n_groups: int) -> np.ndarray:
    """Hull area of each ``points[owner == g]`` for 2-D points (fast path)."""
    points = np.asarray(points, dtype=np.float64)
    owner = np.asarray(owner)
    order = np.lexsort((points[:, 1], points[:, 0], owner))
    counts = np.bincount(owner, minlength=n_groups)
    starts = np.zeros(n_groups + 1, dtype=np.intp)
    np.cumsum(counts, out=starts[1:])
    return _backend.grouped_hull_areas_2d(np.ascontiguousarray(points[order]), starts)


def volume_report(sites, data, box: BoundingBox, cfg: GeometryConfig | None = None) -> VolumeReport:
    """Cell volumes, per-cell hull volumes and occupancy in one pass."""
    cfg = cfg or GeometryConfig()
    coords = site_coords(sites)
    p, n = coords.shape
    data = np.asarray(data, dtype=float).reshape(-1, n)
    owner = nearest_sites(data, coords) if len(data) else np.zeros(0, dtype=np.intp)
    counts = np.bincount(owner, minlength=p)
    exact = n == 2 and cfg.exact_2d
    cells = cell_volumes(coords, box, cfg)
    if n == 2:
        hulls = grouped_hull_areas_2d(data, owner, p) if len(data) else np.zeros(p)
    else:
        hulls = np.zeros(p)
        for i in np.flatnonzero(counts > n):
            hulls[i] = hull_volume(data[owner == i], box, cfg.n_samples, cfg.seed)
    return VolumeReport(cells, hulls, counts, 0 if exact else cfg.n_samples)
