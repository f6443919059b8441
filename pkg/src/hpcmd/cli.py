"""Batch command-line front end.

Exit codes: 0 success, 1 internal error, 2 configuration or data error.
"""
import argparse
import json
import sys
from pathlib import Path

from . import __version__
from ._accel import backend_name
from .core import ConfigError, DataError, HpcmdError
from .cost_model import CostTable, cost_csv, cost_json, estimate_cost, rank_models
from .dataset import GeneratorConfig, csv_text, generate_synthetic, parse_csv
from .experiment import (METRIC_COLUMNS, ExperimentConfig, StageError, TRAINERS, fit_bundle,
                         run_experiment, write_report)
from .feature_selection import DEFAULT_BINS, select_k_best, selection_report
from .metrics import evaluate, roc_csv_text, roc_curve
from .persistence import load_model, save_model
from .rules import RuleListModel
from .trees import DecisionTreeModel


def _emit(text, args, filename):
    """Write to ``<out>/<filename>`` when --out is given, else to stdout."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed {what} {path}: {exc}") from exc


def cmd_generate(args):
    d = _load_json(args.config, "generator config") if args.config else {}
    if args.seed is not None:
        d["seed"] = args.seed
    ds = generate_synthetic(GeneratorConfig.from_dict(d))
    _emit(csv_text(ds), args, "dataset.csv")
    return 0


def cmd_select(args):
    ds = parse_csv(args.data)
    k = args.k if args.k is not None else min(4, ds.n_features)
    result = select_k_best(ds, k, args.bins)
    _emit(selection_report(result, ds.feature_names), args, "selection.csv")
    return 0


def cmd_train(args):
    ds = parse_csv(args.data)
    if args.features:
        names = [n.strip() for n in args.features.split(",")]
        missing = [n for n in names if n not in ds.feature_names]
        if missing:
            raise DataError(f"unknown features: {', '.join(missing)}")
        ds = ds.select_features([ds.feature_names.index(n) for n in names])
    hyper = _load_json(args.config, "hyperparameter file") if args.config else {}
    seed = args.seed if args.seed is not None else 0
    bundle = fit_bundle(args.model, ds, hyper, seed)
    target = Path(args.out or ".")
    target.mkdir(parents=True, exist_ok=True)
    save_model(bundle, target / f"{args.model}.json")
    return 0


def cmd_eval(args):
    bundle = load_model(args.model_file)
    ds = parse_csv(args.data)
    labels, scores = bundle.predict_dataset(ds)
    r = evaluate(bundle.model_type, labels, scores, ds.y)
    cm = r.confusion
    row = [r.model, f"{r.accuracy:.6f}", f"{r.precision:.6f}", f"{r.recall:.6f}", f"{r.f1:.6f}",
           f"{r.auc:.6f}", cm.tp, cm.fp, cm.tn, cm.fn, "|".join(r.degenerate)]
    _emit(",".join(METRIC_COLUMNS) + "\n" + ",".join(map(str, row)) + "\n", args, "eval.csv")
    return 0


def cmd_explain(args):
    bundle = load_model(args.model_file)
    m = bundle.model
    if isinstance(m, RuleListModel):
        text = m.explain()
    elif isinstance(m, DecisionTreeModel):
        text = m.explain(list(bundle.feature_names))
    else:
        raise ConfigError(f"explain supports rule lists and decision trees, not {m.model_type}")
    _emit(text, args, "explain.txt")
    return 0


def cmd_roc(args):
    bundle = load_model(args.model_file)
    ds = parse_csv(args.data)
    _, scores = bundle.predict_dataset(ds)
    _emit(roc_csv_text(roc_curve(scores, ds.y)), args, f"roc_{bundle.model_type}.csv")
    return 0


def cmd_cost(args):
    table = CostTable.from_dict(_load_json(args.cost_table, "cost table")) if args.cost_table else CostTable()
    reports = []
    for path in args.model_files:
        bundle = load_model(path)
        reports.append((Path(path).stem, estimate_cost(bundle.model, table)))
    ranked = rank_models(reports)
    if args.out:
        _emit(cost_json(ranked), args, "cost.json")
    _emit(cost_csv(ranked), args, "cost.csv")
    return 0


def cmd_report(args):
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    result = run_experiment(cfg)
    out = write_report(result, args.out or "report")
    sys.stdout.write((out / "metrics.txt").read_text(encoding="utf-8"))
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="unsigned 64-bit seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")

    p = argparse.ArgumentParser(prog="hpcmd", description=__doc__.splitlines()[0])
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({backend_name()})")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("generate", parents=[common], help="write a synthetic HPC dataset")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("select", parents=[common], help="score features by mutual information")
    s.add_argument("--data", required=True)
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--bins", type=int, default=DEFAULT_BINS)
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("train", parents=[common], help="train one model and save it as JSON")
    s.add_argument("--data", required=True)
    s.add_argument("--model", required=True, choices=sorted(TRAINERS))
    s.add_argument("--features", default=None, help="comma-separated feature names to use")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", parents=[common], help="evaluate a saved model on a CSV")
    s.add_argument("--data", required=True)
    s.add_argument("--model-file", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("explain", parents=[common], help="print rules or tree if-then text")
    s.add_argument("--model-file", required=True)
    s.set_defaults(func=cmd_explain)

    s = sub.add_parser("roc", parents=[common], help="export ROC points as CSV")
    s.add_argument("--data", required=True)
    s.add_argument("--model-file", required=True)
    s.set_defaults(func=cmd_roc)

    s = sub.add_parser("cost", parents=[common], help="abstract hardware cost of saved models")
    s.add_argument("model_files", nargs="+")
    s.add_argument("--cost-table", default=None)
    s.set_defaults(func=cmd_cost)

    s = sub.add_parser("report", parents=[common], help="run the full zero-day experiment")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"hpcmd: error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return 2
    except HpcmdError as exc:
        print(f"hpcmd: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - mapped to the internal-error exit code
        print(f"hpcmd: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
