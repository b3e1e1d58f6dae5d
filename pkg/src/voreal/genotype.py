"""Labelled Voronoi diagrams: the genome that is also the classifier."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import BoundingBox, nearest_sites

#: Initial mutation step as a fraction of the box extent.
SIGMA_INIT_FRACTION = 0.1
SIGMA_MIN_FRACTION = 1e-6
SIGMA_MAX_FRACTION = 1.0


class Label(enum.IntEnum):
    NORMAL = 0
    ANOMALY = 1

    @classmethod
    def parse(cls, text) -> "Label":
        if isinstance(text, (Label, int, np.integer)):
            return cls(int(text))
        key = str(text).strip().lower()
        if key == "normal":
            return cls.NORMAL
        if key == "anomaly":
            return cls.ANOMALY
        raise ValueError(f"unknown label {text!r}")

    def __str__(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Site:
    coords: np.ndarray
    sigmas: np.ndarray
    label: Label


def sigma_bounds(box: BoundingBox) -> tuple[np.ndarray, np.ndarray]:
    return SIGMA_MIN_FRACTION * box.extent, SIGMA_MAX_FRACTION * box.extent


@dataclass(eq=False)
class Individual:
    """A variable-length list of sites stored column-wise.

    ``coords`` and ``sigmas`` are ``(p, n)`` arrays and ``labels`` a length-``p``
    int8 array. Treat instances as values: operators build new ones. The
    ``objectives``/``eval_stamp``/``confusion`` fields are an evaluation cache.
    """

    coords: np.ndarray
    sigmas: np.ndarray
    labels: np.ndarray
    objectives: np.ndarray | None = None
    eval_stamp: int | None = None
    confusion: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
        self.coords = np.ascontiguousarray(coords)
        self.sigmas = np.asarray(self.sigmas, dtype=np.float64).reshape(self.coords.shape)
        self.labels = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        if self.labels.shape[0] != self.coords.shape[0]:
            raise ValueError("one label per site required")

    @classmethod
    def from_sites(cls, sites) -> "Individual":
        sites = list(sites)
        return cls(
            np.array([s.coords for s in sites], dtype=float),
            np.array([s.sigmas for s in sites], dtype=float),
            np.array([int(s.label) for s in sites], dtype=np.int8),
        )

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def sites(self) -> list[Site]:
        return [Site(self.coords[i].copy(), self.sigmas[i].copy(), Label(int(self.labels[i])))
                for i in range(len(self))]

    @property
    def evaluated(self) -> bool:
        return self.objectives is not None

    @property
    def accuracy(self) -> float:
        if self.confusion is None:
            raise ValueError("individual has not been evaluated")
        tp, fp, tn, fn = self.confusion
        return (tp + tn) / (tp + fp + tn + fn)

    def take(self, idx) -> "Individual":
        """New unevaluated individual made of the sites at ``idx``."""
        idx = np.asarray(idx, dtype=np.intp)
        return Individual(self.coords[idx], self.sigmas[idx], self.labels[idx])

    def copy(self) -> "Individual":
        """Fresh copy with the evaluation cache dropped."""
        return Individual(self.coords.copy(), self.sigmas.copy(), self.labels.copy())

    def same_genome(self, other: "Individual") -> bool:
        return (np.array_equal(self.coords, other.coords)
                and np.array_equal(self.sigmas, other.sigmas)
                and np.array_equal(self.labels, other.labels))

    def to_dict(self) -> dict:
        return {
            "sites": [
                {"coords": c.tolist(), "sigmas": s.tolist(), "label": str(Label(int(l)))}
                for c, s, l in zip(self.coords, self.sigmas, self.labels)
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Individual":
        sites = d["sites"]
        if not sites:
            raise ValueError("individual without sites")
        return cls(
            np.array([s["coords"] for s in sites], dtype=float),
            np.array([s["sigmas"] for s in sites], dtype=float),
            np.array([int(Label.parse(s["label"])) for s in sites], dtype=np.int8),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Individual":
        return cls.from_dict(json.loads(text))


def random_sites(k: int, box: BoundingBox, rng: np.random.Generator):
    """``k`` sites uniform in ``box`` with uniform labels and initial steps."""
    coords = box.sample(k, rng)
    labels = rng.integers(0, 2, size=k).astype(np.int8)
    sigmas = np.tile(SIGMA_INIT_FRACTION * box.extent, (k, 1))
    return coords, sigmas, labels


def random_individual(dim: int, p_min: int, p_max: int, box: BoundingBox, seed) -> Individual:
    """Uniformly random diagram with a site count drawn from ``[p_min, p_max]``.

    ``seed`` may be an int or an existing ``numpy.random.Generator``.
    """
    if p_min < 1 or p_max < p_min:
        raise ValueError("need 1 <= p_min <= p_max")
    if box.dim != dim:
        raise ValueError("box dimension does not match dim")
    rng = np.random.default_rng(seed)
    k = int(rng.integers(p_min, p_max + 1))
    return Individual(*random_sites(k, box, rng))


def classify_many(ind: Individual, points) -> np.ndarray:
    """Labels (as an int8 array) of many points at once."""
    points = np.asarray(points, dtype=float).reshape(-1, ind.dim)
    if len(points) == 0:
        return np.zeros(0, dtype=np.int8)
    return ind.labels[nearest_sites(points, ind.coords)]


def classify(ind: Individual, point) -> Label:
    point = np.asarray(point, dtype=float).ravel()
    if point.shape[0] != ind.dim:
        raise ValueError(f"point has dimension {point.shape[0]}, individual has {ind.dim}")
    return Label(int(classify_many(ind, point)[0]))
