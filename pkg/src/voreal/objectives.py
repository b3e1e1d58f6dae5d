"""Classification metrics and volume objectives, all to be maximised."""

from __future__ import annotations

import enum
import warnings
from typing import NamedTuple, Sequence

import numpy as np

from .datasets import Dataset
from .genotype import Individual, Label, classify_many
from .geometry import BoundingBox, GeometryConfig, VolumeReport, volume_report


class Objective(str, enum.Enum):
    ACCURACY = "accuracy"
    RECALL = "recall"
    SPECIFICITY = "specificity"
    COMPACTNESS = "compactness"
    MULT_COMPACTNESS = "mult_compactness"
    EMPTY_VOLUME = "empty_volume"


_METRICS = (Objective.ACCURACY, Objective.RECALL, Objective.SPECIFICITY)
_VOLUMETRIC = (Objective.COMPACTNESS, Objective.MULT_COMPACTNESS, Objective.EMPTY_VOLUME)

# shorthand used in configs: a/c, a/c/t, a/m, a/m/t, ...
_LETTERS = {
    "a": Objective.ACCURACY,
    "r": Objective.RECALL,
    "s": Objective.SPECIFICITY,
    "c": Objective.COMPACTNESS,
    "m": Objective.MULT_COMPACTNESS,
    "t": Objective.EMPTY_VOLUME,
}


class ObjectiveSet(tuple):
    """Ordered, duplicate-free tuple of :class:`Objective`."""

    def __new__(cls, ids: Sequence):
        ids = tuple(Objective(i) for i in ids)
        if not ids:
            raise ValueError("objective set must not be empty")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate objective in set")
        return super().__new__(cls, ids)

    @classmethod
    def parse(cls, text) -> "ObjectiveSet":
        """``"a/m/t"`` or a list of objective names."""
        if isinstance(text, ObjectiveSet):
            return text
        if isinstance(text, str):
            parts = text.split("/")
            if all(p in _LETTERS for p in parts):
                return cls([_LETTERS[p] for p in parts])
            return cls(parts)
        return cls(list(text))

    @property
    def code(self) -> str:
        inv = {v: k for k, v in _LETTERS.items()}
        return "/".join(inv[o] for o in self)


class ConfusionCounts(NamedTuple):
    """Anomaly is the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class DegenerateMetricWarning(RuntimeWarning):
    pass


def confusion_from_predictions(predicted, truth) -> ConfusionCounts:
    predicted = np.asarray(predicted) == Label.ANOMALY
    truth = np.asarray(truth) == Label.ANOMALY
    return ConfusionCounts(int(np.sum(predicted & truth)), int(np.sum(predicted & ~truth)),
                           int(np.sum(~predicted & ~truth)), int(np.sum(~predicted & truth)))


def confusion(ind: Individual, data: Dataset) -> ConfusionCounts:
    if len(data) == 0:
        raise ValueError("empty dataset")
    if data.dim != ind.dim:
        raise ValueError("dataset and individual differ in dimension")
    return confusion_from_predictions(classify_many(ind, data.points), data.labels)


def metric(counts: ConfusionCounts, which) -> float:
    """Accuracy, recall or specificity; 0 (with a warning) on a zero denominator."""
    which = Objective(which)
    if which is Objective.ACCURACY:
        num, den = counts.tp + counts.tn, counts.total
    elif which is Objective.RECALL:
        num, den = counts.tp, counts.tp + counts.fn
    elif which is Objective.SPECIFICITY:
        num, den = counts.tn, counts.tn + counts.fp
    else:
        raise ValueError(f"{which.value} is not a classification metric")
    if den == 0:
        warnings.warn(f"{which.value} undefined: zero denominator", DegenerateMetricWarning, stacklevel=2)
        return 0.0
    return num / den


def compactness_terms(report: VolumeReport, dim: int, multiplicative: bool = False) -> np.ndarray:
    """Per-cell hull-to-cell volume ratios; zero for sparse or zero-volume cells."""
    ok = (report.counts > dim) & (report.cell_volumes > 0)
    terms = np.zeros(len(report.counts))
    terms[ok] = report.hull_volumes[ok] / report.cell_volumes[ok]
    if multiplicative:
        terms[ok] *= report.counts[ok] - dim
    return terms


def empty_volume_terms(report: VolumeReport, labels) -> np.ndarray:
    anomalous = np.asarray(labels) == Label.ANOMALY
    terms = report.cell_volumes / (1.0 + 2.0 * np.log(report.counts + 1.0))
    return np.where(anomalous, terms, 0.0)


def _report(ind, data, box, geom_cfg):
    if data.dim != ind.dim:
        raise ValueError("dataset and individual differ in dimension")
    return volume_report(ind.coords, data.points, box, geom_cfg)


def compactness(ind: Individual, data: Dataset, box: BoundingBox, geom_cfg: GeometryConfig | None = None) -> float:
    return float(compactness_terms(_report(ind, data, box, geom_cfg), ind.dim).sum())


def mult_compactness(ind: Individual, data: Dataset, box: BoundingBox,
                     geom_cfg: GeometryConfig | None = None) -> float:
    return float(compactness_terms(_report(ind, data, box, geom_cfg), ind.dim, True).sum())


def empty_volume(ind: Individual, data: Dataset, box: BoundingBox, geom_cfg: GeometryConfig | None = None) -> float:
    return float(empty_volume_terms(_report(ind, data, box, geom_cfg), ind.labels).sum())


def evaluate(ind: Individual, data: Dataset, objective_set, box: BoundingBox,
             geom_cfg: GeometryConfig | None = None, stamp: int | None = None) -> np.ndarray:
    """Objective vector of ``ind`` in the order of ``objective_set``.

    The confusion counts are always stored on the individual (committees
    rank by training accuracy even when it is not an objective). Cell
    partition and volumes are computed once and only when needed.
    """
    objective_set = ObjectiveSet.parse(objective_set)
    counts = confusion(ind, data)
    report = None
    if any(o in _VOLUMETRIC for o in objective_set):
        report = _report(ind, data, box, geom_cfg)
    values = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateMetricWarning)
        for o in objective_set:
            if o in _METRICS:
                values.append(metric(counts, o))
            elif o is Objective.COMPACTNESS:
                values.append(compactness_terms(report, ind.dim).sum())
            elif o is Objective.MULT_COMPACTNESS:
                values.append(compactness_terms(report, ind.dim, True).sum())
            else:
                values.append(empty_volume_terms(report, ind.labels).sum())
    vec = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(vec)):
        raise FloatingPointError(f"non-finite objective values {vec}")
    ind.objectives = vec
    ind.confusion = tuple(counts)
    ind.eval_stamp = stamp
    return vec
