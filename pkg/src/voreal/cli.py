"""Command line entry point: ``voreal <subcommand>`` (or ``python -m voreal``)."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import datasets as ds
from .genotype import Label
from .geometry import BoundingBox
from .harness import ExperimentConfig, bench, compare, load_model, read_records, score, train_model
from .objectives import confusion_from_predictions, metric


def _load_json_arg(text: str):
    p = Path(text)
    if p.exists():
        return json.loads(p.read_text())
    return json.loads(text)


def _spec_from_arg(args) -> ds.GeneratorSpec:
    text = args.spec
    if text in ds.Kind.__members__:
        d = {"kind": text}
    else:
        d = _load_json_arg(text)
    for key in ("n_points", "noise", "seed"):
        val = getattr(args, key)
        if val is not None:
            d[key] = val
    d.pop("name", None)
    return ds.GeneratorSpec.from_dict(d)


def cmd_gen_data(args) -> int:
    spec = _spec_from_arg(args)
    data = ds.generate(spec)
    if args.inject:
        data = ds.inject_test_anomalies(data, args.inject, seed=spec.seed, spec=spec)
    ds.save(data, args.output)
    print(f"wrote {len(data)} points ({int((data.labels == Label.ANOMALY).sum())} anomalies) to {args.output}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_json_arg(args.config)
    if "data" in cfg:
        train = ds.load(cfg["data"])
    elif "dataset" in cfg:
        entry = dict(cfg["dataset"])
        entry.pop("name", None)
        train = ds.generate(ds.GeneratorSpec.from_dict(entry))
    else:
        raise ValueError("train config needs 'data' (CSV path) or 'dataset' (generator spec)")
    alg = cfg.get("algorithm", {"name": "VorEAl (a/m/t)", "kind": "voreal"})
    alg.setdefault("name", alg.get("kind", "model"))
    model = train_model(alg, train, int(cfg.get("seed", 0)), BoundingBox.around(train.points))
    Path(args.out).write_text(json.dumps(model.to_dict()))
    print(f"wrote {alg['kind']} model to {args.out}")
    return 0


def cmd_classify(args) -> int:
    model = load_model(args.model)
    data = ds.load(args.data)
    pred = model.classify_many(data.points)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["index", "predicted", "label"])
        for i, (p, t) in enumerate(zip(pred, data.labels)):
            w.writerow([i, str(Label(int(p))), str(Label(int(t)))])
    finally:
        if args.output:
            out.close()
    counts = confusion_from_predictions(pred, data.labels)
    print(" ".join(f"{m}={metric(counts, m):.4f}" for m in ("accuracy", "recall", "specificity")),
          file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    cfg = ExperimentConfig.from_dict(_load_json_arg(args.config))
    cfg.output_dir = args.out
    records, matrices = bench(cfg)
    n_err = sum(1 for r in records if r.get("error"))
    print(f"{len(records)} records ({n_err} failed) written to {args.out}")
    return 0


def cmd_stats(args) -> int:
    records = read_records(args.records)
    mats = compare(records, args.metric, args.alpha)
    for name, mat in mats.items():
        print(f"{name} ({args.metric}, Friedman p={mat.friedman_p:.3g})")
        width = max(len(a) for a in mat.algorithms)
        for a, row in zip(mat.algorithms, mat.cells):
            print(f"  {a:<{width}}  {' '.join(row)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="voreal", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate a benchmark dataset as CSV")
    g.add_argument("spec", help="dataset kind (e.g. TwoSpiral) or generator spec as JSON text/file")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--n-points", type=int, dest="n_points")
    g.add_argument("--noise", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--inject", type=int, default=0, help="build a test set with this many injected anomalies")
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train one detector and save it as JSON")
    t.add_argument("--config", required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("classify", help="label a CSV dataset with a saved model")
    c.add_argument("--model", required=True)
    c.add_argument("--data", required=True)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_classify)

    b = sub.add_parser("bench", help="run a repeated experiment and write result files")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("stats", help="significance matrices from a records.csv")
    s.add_argument("--records", required=True)
    s.add_argument("--metric", default="accuracy", choices=["accuracy", "recall", "specificity", "injected_recall"])
    s.add_argument("--alpha", type=float, default=0.05)
    s.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        print(f"voreal {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
