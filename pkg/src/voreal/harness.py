"""Repeated seeded experiments, significance tables and result files.

Layout of an output directory::

    records.csv        one row per (dataset, algorithm, run), canonical order
    timings.csv        wall-clock seconds per row (kept apart: not reproducible)
    summary.json       median and quartiles per dataset/algorithm/metric
    stats_<metric>.csv +/-/~ matrices per dataset
    wins.csv           per-algorithm counts of + and - per metric/dataset
    models/, data/     persisted models and test sets, one per record
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import NaiveBayesModel, NSAModel, nb_train, nsa_train
from .datasets import Dataset, GeneratorSpec, generate, inject_test_anomalies, save
from .evolution import Committee, EvolutionConfig, evolve
from .genotype import Label
from .geometry import BoundingBox
from .objectives import confusion_from_predictions, metric
from .stats import SignificanceMatrix, significance_matrix

log = logging.getLogger(__name__)

METRICS = ("accuracy", "recall", "specificity")
RECORD_FIELDS = ["dataset", "algorithm", "run", "seed", "accuracy", "recall", "specificity",
                 "injected_recall", "error"]


def stable_seed(*parts) -> int:
    """31-bit seed from a SHA-256 of the parts; independent of PYTHONHASHSEED."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "little") % (2**31)


@dataclass
class DatasetEntry:
    spec: GeneratorSpec
    name: str

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetEntry":
        d = dict(d)
        name = d.pop("name", None) or d["kind"]
        return cls(GeneratorSpec.from_dict(d), name)


@dataclass
class ExperimentConfig:
    datasets: list[DatasetEntry]
    algorithms: list[dict]
    runs: int = 50
    base_seed: int = 0
    alpha: float = 0.05
    output_dir: str | None = None
    n_anom: int | None = None
    delta: float | None = None
    metrics: list[str] = field(default_factory=lambda: list(METRICS))
    save_models: bool = True

    def __post_init__(self):
        self.datasets = [d if isinstance(d, DatasetEntry) else DatasetEntry.from_dict(d) for d in self.datasets]
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        names = [a.get("name") for a in self.algorithms]
        if any(not n for n in names) or len(set(names)) != len(names):
            raise ValueError("every algorithm needs a unique name")
        for a in self.algorithms:
            if a.get("kind") not in ("voreal", "nsa", "naive_bayes"):
                raise ValueError(f"unknown algorithm kind {a.get('kind')!r}")
        dnames = [d.name for d in self.datasets]
        if len(set(dnames)) != len(dnames):
            raise ValueError("dataset names must be unique")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def keys(self):
        for ds in self.datasets:
            for alg in self.algorithms:
                for run in range(self.runs):
                    yield ds.name, alg["name"], run


def train_model(alg: dict, train: Dataset, seed: int, box: BoundingBox | None = None):
    """Fit the detector described by an algorithm config entry."""
    kind = alg["kind"]
    opts = {k: v for k, v in alg.items() if k not in ("name", "kind")}
    if kind == "voreal":
        if "objectives" in opts:
            opts["objective_set"] = opts.pop("objectives")
        cfg = EvolutionConfig.from_dict({**opts, "seed": seed})
        return evolve(train, cfg, box).committee
    if kind == "nsa":
        return nsa_train(train, seed=seed, box=box, **opts)
    if kind == "naive_bayes":
        return nb_train(train, **opts)
    raise ValueError(f"unknown algorithm kind {kind!r}")


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "voreal":
        return Committee.from_dict(d)
    if kind == "nsa":
        return NSAModel.from_dict(d)
    if kind == "naive_bayes":
        return NaiveBayesModel.from_dict(d)
    raise ValueError(f"unknown model kind {kind!r}")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))


def score(model, test: Dataset) -> dict:
    pred = model.classify_many(test.points)
    counts = confusion_from_predictions(pred, test.labels)
    out = {m: metric(counts, m) for m in METRICS}
    if test.injected is not None and test.injected.any():
        out["injected_recall"] = float(np.mean(pred[test.injected] == Label.ANOMALY))
    else:
        out["injected_recall"] = float("nan")
    return out


def build_datasets(entry: DatasetEntry, cfg: ExperimentConfig, run: int) -> tuple[Dataset, Dataset]:
    """Training set and its injected test set for one run.

    Shared by every algorithm, so runs are paired blocks.
    """
    data_seed = stable_seed(cfg.base_seed, entry.name, run)
    spec = GeneratorSpec(**{**entry.spec.to_dict(), "seed": data_seed})
    train = generate(spec)
    n_anom = cfg.n_anom if cfg.n_anom is not None else int(np.sum(train.labels == Label.ANOMALY))
    test = inject_test_anomalies(train, n_anom, cfg.delta, seed=data_seed, spec=spec)
    train.name = test.name = entry.name
    return train, test


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in text).strip("_")


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _read_records(path: Path) -> list[dict]:
    if not path.exists() or path.stat().st_size == 0:
        return []
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def _parse_record(row: dict) -> dict:
    out = dict(row)
    out["run"] = int(row["run"])
    out["seed"] = int(row["seed"])
    for m in (*METRICS, "injected_recall"):
        out[m] = float(row[m]) if row.get(m, "") != "" else float("nan")
    return out


def read_records(path) -> list[dict]:
    return [_parse_record(r) for r in _read_records(Path(path))]


def _write_records(path: Path, records: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow([_fmt(r[f]) if f in r else "" for f in RECORD_FIELDS])


def run_experiment(cfg: ExperimentConfig, stop_after: int | None = None) -> list[dict]:
    """Run every (dataset, algorithm, run) cell not already in ``records.csv``.

    Rows are appended as they finish; a failing cell is recorded with its
    error message instead of aborting. ``stop_after`` ends the batch after
    that many new cells (used to exercise resumption).
    """
    out = Path(cfg.output_dir) if cfg.output_dir else None
    done: dict = {}
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        for row in _read_records(out / "records.csv"):
            done[(row["dataset"], row["algorithm"], int(row["run"]))] = _parse_record(row)
        if not (out / "records.csv").exists():
            _write_records(out / "records.csv", [])
    algs = {a["name"]: a for a in cfg.algorithms}
    ents = {d.name: d for d in cfg.datasets}
    cache: dict = {}
    new = 0
    for key in cfg.keys():
        if key in done:
            continue
        if stop_after is not None and new >= stop_after:
            break
        ds_name, alg_name, run = key
        seed = stable_seed(cfg.base_seed, ds_name, alg_name, run)
        rec = {"dataset": ds_name, "algorithm": alg_name, "run": run, "seed": seed, "error": ""}
        t0 = time.perf_counter()
        try:
            if (ds_name, run) not in cache:
                cache.clear()
                cache[(ds_name, run)] = build_datasets(ents[ds_name], cfg, run)
            train, test = cache[(ds_name, run)]
            box = BoundingBox.around(train.points)
            model = train_model(algs[alg_name], train, seed, box)
            rec.update(score(model, test))
            if out is not None and cfg.save_models:
                (out / "models").mkdir(exist_ok=True)
                (out / "data").mkdir(exist_ok=True)
                stem = f"{_slug(ds_name)}__{_slug(alg_name)}__{run}"
                (out / "models" / f"{stem}.json").write_text(json.dumps(model.to_dict()))
                test_path = out / "data" / f"{_slug(ds_name)}__{run}_test.csv"
                if not test_path.exists():
                    save(test, test_path)
        except Exception as exc:  # recorded, batch continues
            log.warning("run %s failed: %s", key, exc)
            for m in (*METRICS, "injected_recall"):
                rec[m] = float("nan")
            rec["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        elapsed = time.perf_counter() - t0
        done[key] = rec
        new += 1
        if out is not None:
            with (out / "records.csv").open("a", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(
                    [_fmt(rec[f]) if f in rec else "" for f in RECORD_FIELDS])
            with (out / "timings.csv").open("a", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow([ds_name, alg_name, run, f"{elapsed:.4f}"])
        log.info("%s / %s / run %d: %s", ds_name, alg_name, run,
                 {m: rec.get(m) for m in METRICS} if not rec["error"] else rec["error"])
    records = [done[k] for k in cfg.keys() if k in done]
    if out is not None:
        _write_records(out / "records.csv", records)
    return records


def compare(records: list[dict], metric_name: str = "accuracy", alpha: float = 0.05) -> dict[str, SignificanceMatrix]:
    """Per-dataset significance matrix for one metric.

    Algorithms keep their first-appearance order; errored rows are ignored.
    """
    by_ds: dict[str, dict[str, dict[int, float]]] = {}
    for r in records:
        if r.get("error"):
            continue
        by_ds.setdefault(r["dataset"], {}).setdefault(r["algorithm"], {})[int(r["run"])] = float(r[metric_name])
    result = {}
    for ds, algs in by_ds.items():
        if len(algs) < 2:
            continue
        runs = {frozenset(v) for v in algs.values()}
        if len(runs) != 1:
            raise ValueError(f"unequal run counts across algorithms on {ds}")
        order = sorted(next(iter(runs)))
        samples = {a: np.array([v[r] for r in order]) for a, v in algs.items()}
        result[ds] = significance_matrix(samples, alpha)
    return result


def summarize(records: list[dict], metrics=METRICS) -> dict:
    """Box-plot numbers: median, quartiles and range per dataset/algorithm/metric."""
    out: dict = {}
    for r in records:
        if r.get("error"):
            continue
        slot = out.setdefault(r["dataset"], {}).setdefault(r["algorithm"], {})
        for m in metrics:
            slot.setdefault(m, []).append(float(r[m]))
    for ds in out.values():
        for alg in ds.values():
            for m, vals in alg.items():
                v = np.asarray(vals)
                q1, med, q3 = np.percentile(v, [25, 50, 75])
                alg[m] = {"n": int(len(v)), "median": float(med), "q1": float(q1), "q3": float(q3),
                          "min": float(v.min()), "max": float(v.max())}
    return out


def export(records: list[dict], matrices: dict[str, dict[str, SignificanceMatrix]], output_dir,
           metrics=None) -> list[Path]:
    """Write records, summary, significance tables and win counts."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics = list(metrics or matrices or METRICS)
    paths = [out / "records.csv", out / "summary.json", out / "wins.csv"]
    _write_records(paths[0], records)
    paths[1].write_text(json.dumps(summarize(records, METRICS), indent=2, sort_keys=True) + "\n")
    wins_rows = []
    for m in metrics:
        p = out / f"stats_{m}.csv"
        paths.append(p)
        mats = matrices.get(m, {})
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            algs = next(iter(mats.values())).algorithms if mats else []
            w.writerow(["dataset", "algorithm", *algs])
            for ds, mat in mats.items():
                for name, row in zip(mat.algorithms, mat.cells):
                    w.writerow([ds, name, *row])
                    wins_rows.append([m, ds, name, mat.wins(name), mat.losses(name)])
    with paths[2].open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "dataset", "algorithm", "wins", "losses"])
        w.writerows(wins_rows)
    return paths


def bench(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """``run_experiment`` then ``compare`` every configured metric and ``export``."""
    records = run_experiment(cfg)
    matrices = {m: compare(records, m, cfg.alpha) for m in cfg.metrics}
    if cfg.output_dir:
        export(records, matrices, cfg.output_dir, cfg.metrics)
    return records, matrices
