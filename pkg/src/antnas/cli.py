"""Command line: ``antnas run|report|predict``.

Log verbosity comes from the ``ANTNAS_LOG`` environment variable
(``DEBUG``, ``INFO``, ``WARNING``; default ``WARNING``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .data import MinMaxStats
from .nn import forward, model_from_dict, mse


def cmd_run(args) -> int:
    from .orchestrator import run_experiment, write_outputs

    try:
        cfg = load_config(args.config, args.set or [])
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    if args.out:
        cfg = cfg.replace(output_dir=args.out)
    try:
        report = run_experiment(cfg)
        paths = write_outputs(report, cfg.output_dir)
    except Exception as exc:
        logging.getLogger("antnas").debug("run failed", exc_info=True)
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    best = report.overall
    print(f"overall best validation MSE: {best['best_fitness']!r} (colony {best['colony_id']})")
    print(f"persistence baseline (validation): {report.baseline['persistence_validation_mse']!r}")
    print(f"report written to {paths['report']}")
    return 0


def _fmt(v, spec=".6g") -> str:
    return "-" if v is None else format(v, spec)


def cmd_report(args) -> int:
    try:
        doc = json.loads(Path(args.report).read_text())
        colonies = doc["colonies"]
        overall = doc["overall"]
    except FileNotFoundError:
        print(f"no such report: {args.report}", file=sys.stderr)
        return 1
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"corrupt report {args.report}: {exc}", file=sys.stderr)
        return 1
    header = f"{'colony':>6}  {'best val MSE':>12}  {'test MSE':>12}  {'evals':>6}  {'exchanges':>9}  {'final ants':>10}"
    print(header)
    print("-" * len(header))
    for c in colonies:
        print(
            f"{c['colony_id']:>6}  {_fmt(c['best_fitness']):>12}  {_fmt(c.get('test_mse')):>12}  "
            f"{c['results']:>6}  {c['exchanges']:>9}  {c['final_params']['num_ants']:>10}"
        )
    print("-" * len(header))
    print(
        f"overall best: {_fmt(overall['best_fitness'])} (colony {overall['colony_id']}), "
        f"test MSE {_fmt(overall.get('test_mse'))}"
    )
    base = doc.get("baseline", {})
    if "persistence_validation_mse" in base:
        print(f"persistence baseline: validation {_fmt(base['persistence_validation_mse'])}, "
              f"test {_fmt(base.get('persistence_test_mse'))}")
    print(f"evaluations: {doc.get('evaluations')}  wall time: {_fmt(doc.get('wall_time_s'), '.1f')} s")
    return 0


def cmd_predict(args) -> int:
    try:
        model = json.loads(Path(args.genome).read_text())
        genome, graph, weights = model_from_dict(model)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"cannot load model {args.genome}: {exc}", file=sys.stderr)
        return 1
    try:
        with open(args.csv, newline="") as fh:
            rows = list(csv.reader(fh))
        header = [h.strip() for h in rows[0]]
        body = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except (OSError, IndexError, ValueError) as exc:
        print(f"cannot read {args.csv}: {exc}", file=sys.stderr)
        return 1

    columns = model["columns"]
    stats = MinMaxStats.from_dict(model["normalization"])
    targets = model["target_columns"]
    has_targets = all(t in header for t in targets)
    inputs = [h for h in header if h not in targets]
    if len(inputs) != graph.n_inputs:
        print(
            f"{args.csv}: expected {graph.n_inputs} input columns ({', '.join(model['input_columns'])}), "
            f"found {len(inputs)}",
            file=sys.stderr,
        )
        return 1
    if body.ndim != 2 or body.shape[0] < 1 or body.shape[1] != len(header):
        print(f"{args.csv}: ragged or empty body", file=sys.stderr)
        return 1
    if set(inputs) == set(model["input_columns"]):
        inputs = list(model["input_columns"])
    else:
        # unnamed columns: trust the order
        inputs_by_model = dict(zip(inputs, model["input_columns"]))
        header = [inputs_by_model.get(h, h) for h in header]
        inputs = list(model["input_columns"])

    def scaled(name):
        j = columns.index(name)
        col = body[:, header.index(name)]
        return MinMaxStats(stats.mins[j : j + 1], stats.maxs[j : j + 1]).apply(col[:, None])[:, 0]

    x = np.column_stack([scaled(c) for c in inputs])
    preds = forward(graph, weights, x)
    tcols = [columns.index(t) for t in targets]
    raw_preds = stats.invert(preds, tcols)

    out = Path(args.out) if args.out else Path(args.csv).with_name(Path(args.csv).stem + "_predictions.csv")
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row"] + [f"pred_next_{t}" for t in targets])
        for i, r in enumerate(raw_preds):
            w.writerow([i] + [repr(float(v)) for v in r])
    print(f"predictions written to {out}")
    if has_targets and len(x) > 1:
        y = np.column_stack([scaled(t) for t in targets])
        err = mse(preds[:-1], y[1:])
        print(f"MSE (normalized): {err!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="antnas", description="Multi-colony ant-based RNN topology search")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config")
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a config value, e.g. --set train.epochs=10 (repeatable)")
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="summarize a report.json")
    rep.add_argument("report")
    rep.set_defaults(func=cmd_report)

    pred = sub.add_parser("predict", help="run a saved model over a CSV")
    pred.add_argument("genome")
    pred.add_argument("csv")
    pred.add_argument("--out", help="predictions CSV path")
    pred.set_defaults(func=cmd_predict)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("ANTNAS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
