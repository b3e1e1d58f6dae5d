"""Reference detectors: V-detector negative selection with non-self
enrichment (hypersphere detectors), and Gaussian naive Bayes."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .datasets import Dataset
from .genotype import Label
from .geometry import BoundingBox

VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class SphereDetector:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("detector radius must be > 0")


@dataclass
class NSAModel:
    """Detector library; ``coverage`` is the training-time estimate of the
    fraction of non-self space the random detectors cover."""

    centers: np.ndarray
    radii: np.ndarray
    self_radius: float = 0.0
    coverage: float = 0.0
    n_random: int = 0

    @property
    def detectors(self) -> list[SphereDetector]:
        return [SphereDetector(c, float(r)) for c, r in zip(self.centers, self.radii)]

    def classify_many(self, points) -> np.ndarray:
        return nsa_classify_many(self, points)

    def to_dict(self) -> dict:
        return {"kind": "nsa", "self_radius": self.self_radius, "coverage": self.coverage,
                "n_random": self.n_random, "centers": self.centers.tolist(), "radii": self.radii.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NSAModel":
        centers = np.asarray(d["centers"], dtype=float)
        return cls(centers.reshape(len(d["radii"]), -1), np.asarray(d["radii"], dtype=float),
                   d.get("self_radius", 0.0), d.get("coverage", 0.0), d.get("n_random", 0))


def nsa_train(train: Dataset, self_radius: float | None = None, target_coverage: float = 0.99,
              max_detectors: int = 1000, seed=0, box: BoundingBox | None = None,
              window: int = 1000) -> NSAModel:
    """Variable-radius negative selection (V-detector) plus enrichment.

    Uniform candidates inside ``self_radius`` of a Normal point are
    discarded. Every other candidate either falls inside an existing
    detector (counted as covered) or becomes a detector whose radius reaches
    up to ``self_radius`` of the nearest Normal point. Coverage is the
    covered fraction of the last ``window`` non-self candidates; generation
    stops when it reaches ``target_coverage`` or at ``max_detectors``.
    Each training Anomaly then adds a detector centred on itself.
    """
    normal = train.points[train.labels == Label.NORMAL]
    if len(normal) == 0:
        raise ValueError("NSA needs Normal training points")
    box = box or BoundingBox.around(train.points)
    if self_radius is None:
        self_radius = 0.02 * box.diagonal
    rng = np.random.default_rng(seed)
    tree = cKDTree(normal)

    centers: list[np.ndarray] = []
    radii: list[float] = []
    recent: deque = deque(maxlen=window)
    coverage = 0.0
    batch = 512
    while len(centers) < max_detectors:
        cands = box.sample(batch, rng)
        dist, _ = tree.query(cands)
        for x, d in zip(cands, dist):
            if d <= self_radius:
                continue
            if centers:
                c = np.asarray(centers)
                covered = bool(np.any(np.sum((c - x) ** 2, axis=1) <= np.square(radii)))
            else:
                covered = False
            recent.append(covered)
            if not covered:
                centers.append(x)
                radii.append(float(d - self_radius))
                if len(centers) >= max_detectors:
                    break
            if len(recent) == window:
                coverage = sum(recent) / window
                if coverage >= target_coverage:
                    break
        else:
            continue
        break
    if len(recent) and len(recent) < window:
        coverage = sum(recent) / len(recent)
    n_random = len(centers)

    anomalies = train.points[train.labels == Label.ANOMALY]
    if len(anomalies):
        dist, _ = tree.query(anomalies)
        for x, d in zip(anomalies, dist):
            if d - self_radius > 0:
                centers.append(x)
                radii.append(float(d - self_radius))
    dim = train.dim
    return NSAModel(np.asarray(centers, dtype=float).reshape(-1, dim), np.asarray(radii, dtype=float),
                    float(self_radius), float(coverage), n_random)


def nsa_classify_many(model, points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(model, NSAModel):
        centers, radii = model.centers, model.radii
    else:
        centers = np.array([d.center for d in model], dtype=float).reshape(-1, points.shape[1])
        radii = np.array([d.radius for d in model], dtype=float)
    out = np.full(len(points), Label.NORMAL, dtype=np.int8)
    if len(radii) == 0:
        return out
    for a in range(0, len(points), 2048):
        block = points[a:a + 2048]
        d2 = np.sum((block[:, None, :] - centers[None]) ** 2, axis=2)
        hit = np.any(d2 <= radii ** 2, axis=1)
        out[a:a + 2048][hit] = Label.ANOMALY
    return out


def nsa_classify(model, point) -> Label:
    """Anomaly iff ``point`` lies inside (or on) some detector sphere."""
    return Label(int(nsa_classify_many(model, np.asarray(point, dtype=float).reshape(1, -1))[0]))


@dataclass
class NaiveBayesModel:
    means: np.ndarray  # (2, n), row = Label value
    variances: np.ndarray
    priors: np.ndarray = field(default_factory=lambda: np.full(2, 0.5))

    def log_posteriors(self, points) -> np.ndarray:
        """Unnormalised log posteriors, shape ``(N, 2)``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        diff = points[:, None, :] - self.means[None]
        ll = -0.5 * np.sum(np.log(2 * np.pi * self.variances)[None] + diff ** 2 / self.variances[None], axis=2)
        return ll + np.log(self.priors)[None]

    def classify_many(self, points) -> np.ndarray:
        lp = self.log_posteriors(points)
        return np.where(lp[:, Label.ANOMALY] >= lp[:, Label.NORMAL], Label.ANOMALY, Label.NORMAL).astype(np.int8)

    def to_dict(self) -> dict:
        return {"kind": "naive_bayes", "means": self.means.tolist(),
                "variances": self.variances.tolist(), "priors": self.priors.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveBayesModel":
        return cls(np.asarray(d["means"], float), np.asarray(d["variances"], float), np.asarray(d["priors"], float))


def nb_train(train: Dataset, variance_floor: float = VARIANCE_FLOOR) -> NaiveBayesModel:
    means, variances, priors = [], [], []
    for lab in (Label.NORMAL, Label.ANOMALY):
        pts = train.points[train.labels == lab]
        if len(pts) == 0:
            raise ValueError("naive Bayes needs both classes in the training set")
        means.append(pts.mean(axis=0))
        variances.append(np.maximum(pts.var(axis=0), variance_floor))
        priors.append(len(pts) / len(train))
    return NaiveBayesModel(np.array(means), np.array(variances), np.array(priors))


def nb_classify(model: NaiveBayesModel, point) -> Label:
    """Maximum posterior label; an exact tie goes to Anomaly."""
    return Label(int(model.classify_many(np.asarray(point, dtype=float).reshape(1, -1))[0]))
