"""Synthetic 2-D anomaly benchmarks, test-anomaly injection and CSV I/O.

Each generator draws an ``normal_fraction`` share of Normal points from one
shape and the rest (Anomaly) from another. Shape constants live in
``SHAPES``; every coordinate is perturbed by Gaussian noise truncated at
``3 * noise``, so every generator has a hard bounding region
(:func:`bounding_radius`).

==================  ==========================================  ===========================
kind                Normal class                                Anomaly class
==================  ==========================================  ===========================
TwoSpiral           spiral r = a*theta, theta in [pi/2, 7pi/2]  same spiral turned by pi
CrescentFullMoon    annular sector r in [0.7, 1], opening right filled disc r <= 0.45
HalfKernel          upper half-ring r in [0.75, 1]              upper half-ring r in [0.3, 0.5]
Corners             four L-shaped strips in the corners         centre square |x|,|y| <= 0.3
Outliers            Gaussian blob, sd 0.2, truncated at 3 sd    sparse ring r in [0.8, 1]
ClusterInCluster    annulus r in [0.7, 1]                       dense disc r <= 0.3
==================  ==========================================  ===========================
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .genotype import Label
from .geometry import BoundingBox

log = logging.getLogger(__name__)

NORMAL_FRACTION = 0.8
INJECT_MARGIN = 0.1
INJECT_MAX_REJECTIONS = 1000
INJECT_SHRINK = 0.9

SHAPES = {
    "TwoSpiral": {"theta": (0.5 * math.pi, 3.5 * math.pi), "r_max": 1.0},
    "CrescentFullMoon": {"crescent_r": (0.7, 1.0), "crescent_gap": 0.5 * math.pi, "moon_r": 0.45},
    "HalfKernel": {"outer_r": (0.75, 1.0), "inner_r": (0.3, 0.5)},
    "Corners": {"strip_len": 0.6, "strip_width": 0.2, "centre_half": 0.3},
    "Outliers": {"blob_sd": 0.2, "ring_r": (0.8, 1.0)},
    "ClusterInCluster": {"annulus_r": (0.7, 1.0), "core_r": 0.3},
}


class Kind(str, enum.Enum):
    TwoSpiral = "TwoSpiral"
    CrescentFullMoon = "CrescentFullMoon"
    HalfKernel = "HalfKernel"
    Corners = "Corners"
    Outliers = "Outliers"
    ClusterInCluster = "ClusterInCluster"


@dataclass
class Dataset:
    points: np.ndarray
    labels: np.ndarray
    name: str = ""
    seed: int | None = None
    injected: np.ndarray | None = field(default=None, repr=False)
    delta: float | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        self.labels = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        if len(self.points) != len(self.labels):
            raise ValueError("points and labels differ in length")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subset(self, mask) -> "Dataset":
        inj = None if self.injected is None else self.injected[mask]
        return Dataset(self.points[mask], self.labels[mask], self.name, self.seed, inj, self.delta)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n_points: int = 400
    noise: float = 0.02
    seed: int = 0
    normal_fraction: float = NORMAL_FRACTION

    def __post_init__(self):
        if self.kind not in Kind.__members__:
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.n_points < 4:
            raise ValueError("n_points must be >= 4")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        return cls(**d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_points": self.n_points, "noise": self.noise,
                "seed": self.seed, "normal_fraction": self.normal_fraction}


def class_sizes(spec: GeneratorSpec) -> tuple[int, int]:
    n_norm = int(round(spec.normal_fraction * spec.n_points))
    n_norm = min(max(n_norm, 1), spec.n_points - 1)
    return n_norm, spec.n_points - n_norm


def _polar(r, theta):
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _annulus(rng, k, r_lo, r_hi, t_lo=0.0, t_hi=2 * math.pi):
    # area-uniform radius
    r = np.sqrt(rng.uniform(r_lo ** 2, r_hi ** 2, k))
    return _polar(r, rng.uniform(t_lo, t_hi, k))


def _two_spiral(rng, n_norm, n_anom):
    lo, hi = SHAPES["TwoSpiral"]["theta"]
    a = SHAPES["TwoSpiral"]["r_max"] / hi
    t1 = rng.uniform(lo, hi, n_norm)
    t2 = rng.uniform(lo, hi, n_anom)
    return _polar(a * t1, t1), _polar(a * t2, t2 + math.pi)


def _crescent_full_moon(rng, n_norm, n_anom):
    c = SHAPES["CrescentFullMoon"]
    gap = c["crescent_gap"] / 2
    crescent = _annulus(rng, n_norm, *c["crescent_r"], gap, 2 * math.pi - gap)
    moon = _annulus(rng, n_anom, 0.0, c["moon_r"])
    return crescent, moon


def _half_kernel(rng, n_norm, n_anom):
    c = SHAPES["HalfKernel"]
    return (_annulus(rng, n_norm, *c["outer_r"], 0.0, math.pi),
            _annulus(rng, n_anom, *c["inner_r"], 0.0, math.pi))


def _corners(rng, n_norm, n_anom):
    c = SHAPES["Corners"]
    length, width, half = c["strip_len"], c["strip_width"], c["centre_half"]
    # an L is two strips of area length*width sharing a width*width square
    along = rng.uniform(0, length, n_norm)
    across = rng.uniform(0, width, n_norm)
    horizontal = rng.random(n_norm) < 0.5
    local = np.where(horizontal[:, None], np.column_stack([along, across]),
                     np.column_stack([across, along]))
    corner = rng.integers(0, 4, n_norm)
    sx = np.where(corner % 2 == 0, 1.0, -1.0)
    sy = np.where(corner < 2, 1.0, -1.0)
    normal = np.column_stack([sx * (1.0 - local[:, 0]), sy * (1.0 - local[:, 1])])
    centre = rng.uniform(-half, half, (n_anom, 2))
    return normal, centre


def _outliers(rng, n_norm, n_anom):
    c = SHAPES["Outliers"]
    blob = np.clip(rng.normal(0, c["blob_sd"], (n_norm, 2)), -3 * c["blob_sd"], 3 * c["blob_sd"])
    return blob, _annulus(rng, n_anom, *c["ring_r"])


def _cluster_in_cluster(rng, n_norm, n_anom):
    c = SHAPES["ClusterInCluster"]
    return _annulus(rng, n_norm, *c["annulus_r"]), _annulus(rng, n_anom, 0.0, c["core_r"])


_GENERATORS = {
    "TwoSpiral": _two_spiral,
    "CrescentFullMoon": _crescent_full_moon,
    "HalfKernel": _half_kernel,
    "Corners": _corners,
    "Outliers": _outliers,
    "ClusterInCluster": _cluster_in_cluster,
}


def bounding_radius(kind: str) -> float:
    """Noise-free max |coordinate| of a generator (all shapes fit in a square)."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown dataset kind {kind!r}")
    if kind == "Outliers":
        return max(3 * SHAPES["Outliers"]["blob_sd"], SHAPES["Outliers"]["ring_r"][1])
    return 1.0


def generate(spec: GeneratorSpec) -> Dataset:
    """Draw a labelled point set; identical specs give identical datasets."""
    rng = np.random.default_rng([spec.seed, list(Kind.__members__).index(spec.kind)])
    n_norm, n_anom = class_sizes(spec)
    normal, anomaly = _GENERATORS[spec.kind](rng, n_norm, n_anom)
    points = np.vstack([normal, anomaly])
    if spec.noise > 0:
        points = points + np.clip(rng.normal(0, spec.noise, points.shape), -3 * spec.noise, 3 * spec.noise)
    labels = np.concatenate([np.full(n_norm, Label.NORMAL), np.full(n_anom, Label.ANOMALY)])
    perm = rng.permutation(len(points))
    return Dataset(points[perm], labels[perm].astype(np.int8), spec.kind, spec.seed)


def default_delta(train: Dataset) -> float:
    return 0.05 * BoundingBox.around(train.points, INJECT_MARGIN).diagonal


def inject_test_anomalies(train: Dataset, n_anom: int, delta: float | None = None,
                          seed: int = 0, spec: GeneratorSpec | None = None) -> Dataset:
    """Build a test set with anomalies placed where training data is absent.

    The base test data is a fresh draw of ``spec`` (same generator, new
    seed) when given, else a copy of ``train``. Injected points are uniform
    in the 10 %-expanded training box and farther than ``delta`` from every
    training point; after 1000 rejections in a row ``delta`` shrinks by 10 %.
    The returned dataset's ``injected`` mask marks them.
    """
    if len(train) == 0:
        raise ValueError("empty training set")
    if delta is None:
        delta = default_delta(train)
    if delta <= 0:
        raise ValueError("delta must be > 0")
    rng = np.random.default_rng([seed, 0x1A7])
    if spec is not None:
        base = generate(replace(spec, seed=int(rng.integers(2**31))))
    else:
        base = Dataset(train.points.copy(), train.labels.copy(), train.name, train.seed)
    box = BoundingBox.around(train.points, INJECT_MARGIN)
    accepted = []
    rejections = 0
    tree = cKDTree(train.points)
    while len(accepted) < n_anom:
        cand = box.sample(1, rng)[0]
        dist, _ = tree.query(cand)
        if dist > delta:
            accepted.append(cand)
            rejections = 0
            continue
        rejections += 1
        if rejections >= INJECT_MAX_REJECTIONS:
            delta *= INJECT_SHRINK
            rejections = 0
            log.info("injection: shrinking delta to %.6g", delta)
    extra = np.array(accepted).reshape(-1, train.dim)
    points = np.vstack([base.points, extra])
    labels = np.concatenate([base.labels, np.full(len(extra), Label.ANOMALY, dtype=np.int8)])
    injected = np.concatenate([np.zeros(len(base), bool), np.ones(len(extra), bool)])
    return Dataset(points, labels, base.name, base.seed, injected, delta)


def save(dataset: Dataset, path) -> None:
    """CSV with header ``x0,...,x{n-1},label``; floats written with 17 digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k}" for k in range(dataset.dim)] + ["label"])
        for row, lab in zip(dataset.points, dataset.labels):
            w.writerow([repr(float(v)) for v in row] + [str(Label(int(lab)))])


class DatasetFormatError(ValueError):
    pass


def load(path, name: str | None = None) -> Dataset:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DatasetFormatError(f"{path}: empty file")
        dim = len(header) - 1
        if dim < 1 or header[-1] != "label" or header[:-1] != [f"x{k}" for k in range(dim)]:
            raise DatasetFormatError(f"{path}:1: bad header {header!r}")
        points, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise DatasetFormatError(f"{path}:{lineno}: expected {dim + 1} fields, got {len(row)}")
            try:
                coords = [float(v) for v in row[:-1]]
                lab = Label.parse(row[-1])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in coords):
                raise DatasetFormatError(f"{path}:{lineno}: non-finite coordinate")
            points.append(coords)
            labels.append(int(lab))
    if not points:
        raise DatasetFormatError(f"{path}: no data rows")
    return Dataset(np.array(points), np.array(labels, dtype=np.int8), name or path.stem)
