"""Generational NSGA-II over Voronoi genomes, and the committee classifier.

Each generation: binary tournaments on (front rank, crowding) pick parent
pairs, a pair is crossed with probability ``mating_prob``, every child is
mutated, new individuals are evaluated on the training set, and the best
``n_pop`` of parents plus offspring survive. After the last generation the
``rho`` fraction of the population with the highest training accuracy forms
a voting committee.

Random streams are derived per (seed, generation, task) so the order in
which offspring are produced cannot change the result.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .datasets import Dataset
from .genotype import Individual, Label, classify_many, random_individual
from .geometry import DEFAULT_SAMPLES, BoundingBox, GeometryConfig
from .objectives import ObjectiveSet, evaluate
from .operators import MAX_RETRIES, P_MAX, P_MIN, MutationParams, crossover_voronoi, mutate_voronoi

log = logging.getLogger(__name__)


@dataclass
class EvolutionConfig:
    n_pop: int = 100
    n_off: int | None = None
    generations: int = 500
    mating_prob: float = 0.5
    mutation: MutationParams = field(default_factory=MutationParams)
    p_min: int = P_MIN
    p_max: int = P_MAX
    objective_set: str = "a/m/t"
    rho: float = 0.05
    seed: int = 0
    geometry_samples: int = DEFAULT_SAMPLES
    max_retries: int = MAX_RETRIES
    tie_label: str = "anomaly"

    def __post_init__(self):
        if self.n_off is None:
            self.n_off = self.n_pop
        if isinstance(self.mutation, dict):
            self.mutation = MutationParams(**self.mutation)
        if self.n_pop < 2:
            raise ValueError("n_pop must be >= 2")
        if self.n_off < 1:
            raise ValueError("n_off must be >= 1")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if not 0.0 <= self.mating_prob <= 1.0:
            raise ValueError("mating_prob must be in [0, 1]")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must be in (0, 1]")
        if not 1 <= self.p_min <= self.p_max:
            raise ValueError("need 1 <= p_min <= p_max")
        ObjectiveSet.parse(self.objective_set)
        Label.parse(self.tie_label)

    @property
    def objectives(self) -> ObjectiveSet:
        return ObjectiveSet.parse(self.objective_set)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvolutionConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown evolution settings: {sorted(unknown)}")
        return cls(**d)


@dataclass
class ParetoRanking:
    fronts: list[list[int]]
    crowding: np.ndarray
    rank: np.ndarray


def dominates(a, b) -> bool:
    """``a`` is no worse everywhere and strictly better somewhere (maximisation)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("objective vectors differ in length")
    return bool(np.all(a >= b) and np.any(a > b))


def crowding_distance(values) -> np.ndarray:
    """NSGA-II crowding distance of the points of one front.

    Extremes of every objective get infinity; interior points sum the
    neighbour gaps normalised by the objective's range on the front.
    """
    values = np.asarray(values, dtype=float)
    k, m = values.shape
    dist = np.zeros(k)
    if k <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.argsort(values[:, j], kind="stable")
        col = values[order, j]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = col[-1] - col[0]
        if span <= 0:
            continue
        dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def non_dominated_sort(objs) -> ParetoRanking:
    """Deb's fast non-dominated sort plus per-front crowding distance."""
    objs = np.asarray(objs, dtype=float)
    if objs.ndim != 2 or len(objs) == 0:
        raise ValueError("empty population")
    ge = np.all(objs[:, None, :] >= objs[None, :, :], axis=2)
    gt = np.any(objs[:, None, :] > objs[None, :, :], axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j
    n_dominators = dom.sum(axis=0)
    rank = np.full(len(objs), -1)
    fronts = []
    current = np.flatnonzero(n_dominators == 0)
    while len(current):
        rank[current] = len(fronts)
        fronts.append(current.tolist())
        n_dominators = n_dominators - dom[current].sum(axis=0)
        n_dominators[current] = -1
        current = np.flatnonzero(n_dominators == 0)
    crowd = np.zeros(len(objs))
    for f in fronts:
        crowd[f] = crowding_distance(objs[f])
    return ParetoRanking(fronts, crowd, rank)


def _objective_matrix(pop: Sequence[Individual]) -> np.ndarray:
    for i, ind in enumerate(pop):
        if ind.objectives is None:
            raise ValueError(f"individual {i} has not been evaluated")
    return np.array([ind.objectives for ind in pop], dtype=float)


def select_indices(objs, n_pop: int) -> tuple[list[int], ParetoRanking]:
    """Indices of the NSGA-II survivors, and the ranking they were chosen by."""
    ranking = non_dominated_sort(objs)
    if len(objs) < n_pop:
        raise ValueError("fewer candidates than survivors requested")
    chosen: list[int] = []
    for f in ranking.fronts:
        if len(chosen) + len(f) <= n_pop:
            chosen.extend(f)
            if len(chosen) == n_pop:
                break
            continue
        rest = sorted(f, key=lambda i: (-ranking.crowding[i], i))
        chosen.extend(rest[:n_pop - len(chosen)])
        break
    return chosen, ranking


def nsga2_select(union: Sequence[Individual], n_pop: int) -> list[Individual]:
    chosen, _ = select_indices(_objective_matrix(union), n_pop)
    return [union[i] for i in chosen]


def hypervolume(points, reference=None) -> float:
    """Volume dominated by ``points`` (maximisation) above ``reference``.

    Exact, by slicing along the last objective. Meant for small fronts.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return 0.0
    ref = np.zeros(pts.shape[1]) if reference is None else np.asarray(reference, dtype=float)
    pts = pts[np.all(pts > ref, axis=1)] - ref
    return _hv(pts)


def _hv(pts: np.ndarray) -> float:
    if len(pts) == 0:
        return 0.0
    if pts.shape[1] == 1:
        return float(pts[:, 0].max())
    levels = np.unique(pts[:, -1])[::-1]
    total = 0.0
    for k, level in enumerate(levels):
        below = levels[k + 1] if k + 1 < len(levels) else 0.0
        total += (level - below) * _hv(pts[pts[:, -1] >= level][:, :-1])
    return total


@dataclass
class Committee:
    members: list[Individual]
    tie_label: Label = Label.ANOMALY

    def classify_many(self, points) -> np.ndarray:
        if not self.members:
            raise ValueError("empty committee")
        votes = np.zeros(len(np.atleast_2d(points)), dtype=np.int64)
        for m in self.members:
            votes += classify_many(m, points) == Label.ANOMALY
        twice, size = 2 * votes, len(self.members)
        anomaly = (twice > size) | ((twice == size) & (self.tie_label == Label.ANOMALY))
        return np.where(anomaly, Label.ANOMALY, Label.NORMAL).astype(np.int8)

    def to_dict(self) -> dict:
        return {"kind": "voreal", "tie_label": str(self.tie_label),
                "members": [m.to_dict() for m in self.members]}

    @classmethod
    def from_dict(cls, d: dict) -> "Committee":
        return cls([Individual.from_dict(m) for m in d["members"]],
                   Label.parse(d.get("tie_label", "anomaly")))


def committee_select(pop: Sequence[Individual], rho: float, tie_label=Label.ANOMALY) -> Committee:
    """The ``max(1, round(rho * |pop|))`` most accurate individuals."""
    if not pop:
        raise ValueError("empty population")
    size = max(1, int(round(rho * len(pop))))
    order = sorted(range(len(pop)), key=lambda i: (-pop[i].accuracy, i))
    return Committee([pop[i] for i in order[:size]], Label.parse(tie_label))


def committee_classify(c: Committee, point) -> Label:
    return Label(int(c.classify_many(np.asarray(point, dtype=float).reshape(1, -1))[0]))


def _tournament(rng, rank, crowd) -> int:
    i, j = (int(v) for v in rng.integers(len(rank), size=2))
    if rank[j] < rank[i] or (rank[j] == rank[i] and crowd[j] > crowd[i]):
        return j
    return i


def _history_row(gen: int, pop: Sequence[Individual], objs: ObjectiveSet, union_front0: int) -> dict:
    mat = _objective_matrix(pop)
    ranking = non_dominated_sort(mat)
    front0 = mat[ranking.fronts[0]]
    # union_front0 > n_pop means crowding truncated the first front; the
    # best-front hypervolume may then drop
    row = {"gen": gen, "front0_size": len(front0), "union_front0_size": union_front0}
    for j, o in enumerate(objs):
        row[f"{o.value}_best"] = float(mat[:, j].max())
        row[f"{o.value}_median"] = float(np.median(mat[:, j]))
    row["hypervolume"] = hypervolume(front0) if mat.shape[1] <= 4 else math.nan
    row["mean_sites"] = float(np.mean([len(i) for i in pop]))
    return row


@dataclass
class EvolutionResult:
    population: list[Individual]
    committee: Committee
    history: list[dict]
    config: EvolutionConfig | None = None

    def write_history(self, path) -> None:
        write_history_csv(self.history, path)


def write_history_csv(history: list[dict], path) -> None:
    if not history:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(history[0]))
        w.writeheader()
        w.writerows(history)


def save_population(pop: Sequence[Individual], path) -> None:
    Path(path).write_text(json.dumps({"population": [i.to_dict() for i in pop]}))


def load_population(path) -> list[Individual]:
    return [Individual.from_dict(d) for d in json.loads(Path(path).read_text())["population"]]


def _variation(parents, cfg: EvolutionConfig, box, rng, mate: bool) -> list[Individual]:
    a, b = parents
    if mate:
        a, b = crossover_voronoi(a, b, rng, cfg.max_retries, cfg.p_min, cfg.p_max)
    return [mutate_voronoi(c, cfg.mutation, box, rng, cfg.p_min, cfg.p_max) for c in (a, b)]


def evolve(train: Dataset, cfg: EvolutionConfig, box: BoundingBox | None = None,
           callback: Callable[[int, list[Individual]], None] | None = None) -> EvolutionResult:
    """Run the whole generational loop on ``train`` and build the committee."""
    if len(train) == 0:
        raise ValueError("empty training set")
    box = box or BoundingBox.around(train.points)
    objs = cfg.objectives
    geom = GeometryConfig(n_samples=cfg.geometry_samples,
                          seed=int(np.random.default_rng([cfg.seed, 7]).integers(2**31)))

    pop = [random_individual(train.dim, cfg.p_min, cfg.p_max, box, np.random.default_rng([cfg.seed, 0, 0, k]))
           for k in range(cfg.n_pop)]
    for ind in pop:
        evaluate(ind, train, objs, box, geom, stamp=0)
    _, ranking = select_indices(_objective_matrix(pop), cfg.n_pop)
    rank, crowd = ranking.rank, ranking.crowding
    history = [_history_row(0, pop, objs, len(ranking.fronts[0]))]

    for gen in range(1, cfg.generations + 1):
        sel_rng = np.random.default_rng([cfg.seed, gen, 1])
        n_pairs = (cfg.n_off + 1) // 2
        pairs = []
        for _ in range(n_pairs):
            p1 = pop[_tournament(sel_rng, rank, crowd)]
            p2 = pop[_tournament(sel_rng, rank, crowd)]
            pairs.append(((p1, p2), bool(sel_rng.random() < cfg.mating_prob)))
        # each pair owns its stream; results are merged in pair order
        offspring: list[Individual] = []
        for k, (parents, mate) in enumerate(pairs):
            offspring.extend(_variation(parents, cfg, box, np.random.default_rng([cfg.seed, gen, 2, k]), mate))
        offspring = offspring[:cfg.n_off]
        for ind in offspring:
            if not ind.evaluated:
                evaluate(ind, train, objs, box, geom, stamp=gen)

        union = pop + offspring
        chosen, union_rank = select_indices(_objective_matrix(union), cfg.n_pop)
        pop = [union[i] for i in chosen]
        rank, crowd = union_rank.rank[chosen], union_rank.crowding[chosen]
        history.append(_history_row(gen, pop, objs, len(union_rank.fronts[0])))
        if callback is not None:
            callback(gen, pop)
        log.debug("gen %d: %s", gen, history[-1])

    committee = committee_select(pop, cfg.rho, cfg.tie_label)
    return EvolutionResult(pop, committee, history, cfg)
