"""End-to-end zero-day experiment: split, select, scale, train, evaluate, cost."""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ConfigError, HpcmdError
from .cost_model import CostTable, cost_csv, cost_json, estimate_cost, rank_models
from .dataset import (DEFAULT_TEST_FAMILIES, DEFAULT_TRAIN_FAMILIES, GeneratorConfig, fit_scaling,
                      generate_synthetic, parse_csv, zero_day_split)
from .feature_selection import DEFAULT_BINS, select_k_best, selection_report
from .knn import train_knn
from .linear import LogisticParams, SvmParams, logreg_train, svm_train
from .metrics import evaluate, roc_curve, write_roc_csv
from .mlp import MlpParams, train_mlp
from .persistence import ModelBundle, dumps
from .rules import CLASSIC_BINS, BASE_CASE_MIN_SUPPORT, train_classic_oner, train_many_rules
from .trees import TreeParams, train_bagged, train_tree

DEFAULT_MODELS = ("knn", "mlp", "decision_tree", "bagged_trees", "svm", "logistic_regression",
                  "many_rules_oner", "oner")


class StageError(HpcmdError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


def _tree_params(h):
    return TreeParams(max_depth=h.get("max_depth", 20), min_leaf=h.get("min_leaf", 2))


def _fit_knn(X, y, h, seed, names):
    return train_knn(X, y, k=h.get("k", 5), metric=h.get("metric", "euclidean"))


def _fit_mlp(X, y, h, seed, names):
    return train_mlp(X, y, MlpParams(**{"seed": seed, **h}))


def _fit_tree(X, y, h, seed, names):
    return train_tree(X, y, _tree_params(h))


def _fit_bagged(X, y, h, seed, names):
    return train_bagged(X, y, T=h.get("T", 25), params=_tree_params(h), seed=h.get("seed", seed),
                        bootstrap=h.get("bootstrap", True))


def _fit_svm(X, y, h, seed, names):
    return svm_train(X, y, SvmParams(**{"seed": seed, **h}))


def _fit_logreg(X, y, h, seed, names):
    return logreg_train(X, y, LogisticParams(**{"seed": seed, **h}))


def _fit_oner(X, y, h, seed, names):
    return train_classic_oner(X, y, bins=h.get("bins", CLASSIC_BINS), feature_names=names)


def _fit_many_rules(X, y, h, seed, names):
    return train_many_rules(X, y, feature_names=names,
                            min_support=h.get("base_case_min_support", BASE_CASE_MIN_SUPPORT))


# name -> (needs scaled features, trainer)
TRAINERS = {
    "knn": (True, _fit_knn),
    "mlp": (True, _fit_mlp),
    "decision_tree": (False, _fit_tree),
    "bagged_trees": (False, _fit_bagged),
    "svm": (True, _fit_svm),
    "logistic_regression": (True, _fit_logreg),
    "many_rules_oner": (False, _fit_many_rules),
    "oner": (False, _fit_oner),
}


def fit_bundle(model_type, ds, hyper=None, seed=0):
    """Train ``model_type`` on every feature of ``ds``; scale first if the model needs it."""
    if model_type not in TRAINERS:
        raise ConfigError(f"unknown model type {model_type!r}")
    scaled, fit = TRAINERS[model_type]
    scaling = fit_scaling(ds) if scaled else None
    X = scaling.transform(ds.X) if scaled else ds.X
    try:
        model = fit(X, ds.y, dict(hyper or {}), seed, list(ds.feature_names))
    except TypeError as exc:
        raise ConfigError(f"bad hyperparameters for {model_type}: {exc}") from exc
    return ModelBundle(model, ds.feature_names, scaling)


@dataclass
class ExperimentConfig:
    seed: int = 42
    dataset: dict = field(default_factory=lambda: {"generator": {}})
    split: dict = field(default_factory=dict)
    selection: dict = field(default_factory=dict)
    models: list = field(default_factory=lambda: list(DEFAULT_MODELS))
    hyperparameters: dict = field(default_factory=dict)
    cost_table: dict = None

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"seed", "dataset", "split", "selection", "models", "hyperparameters", "cost_table"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        for m in cfg.models:
            if m not in TRAINERS:
                raise ConfigError(f"unknown model type {m!r}")
        if "path" not in cfg.dataset and "generator" not in cfg.dataset:
            raise ConfigError("dataset needs either 'path' or 'generator'")
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except (json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc

    def generator_config(self):
        gen = dict(self.dataset.get("generator") or {})
        gen.setdefault("seed", self.seed)
        return GeneratorConfig.from_dict(gen)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    split: object
    selection: object
    selected_names: tuple
    bundles: dict
    reports: dict
    rocs: dict
    costs: dict


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageError:
        raise
    except HpcmdError as exc:
        raise StageError(name, exc) from exc


def load_dataset(cfg):
    if "path" in cfg.dataset:
        return parse_csv(cfg.dataset["path"])
    return generate_synthetic(cfg.generator_config())


def run_experiment(cfg):
    ds = _stage("dataset", load_dataset, cfg)
    sp = cfg.split
    split = _stage("split", zero_day_split, ds,
                   sp.get("train_families", DEFAULT_TRAIN_FAMILIES),
                   sp.get("test_families", DEFAULT_TEST_FAMILIES),
                   sp.get("benign_ratio", 0.8), sp.get("seed", cfg.seed))
    k = cfg.selection.get("k", 4)
    bins = cfg.selection.get("bins", DEFAULT_BINS)
    # scored on the training half only so test labels never steer the choice
    selection = _stage("select", select_k_best, split.train, min(k, ds.n_features), bins)
    train = split.train.select_features(selection.kept_indices)
    test = split.test.select_features(selection.kept_indices)
    bundles, reports, rocs, costs = {}, {}, {}, {}
    table = _stage("cost", CostTable.from_dict, cfg.cost_table) if cfg.cost_table else CostTable()
    for name in cfg.models:
        bundle = _stage(f"train:{name}", fit_bundle, name, train,
                        cfg.hyperparameters.get(name), cfg.seed)
        labels, scores = _stage(f"evaluate:{name}", bundle.predict_dataset, test)
        bundles[name] = bundle
        reports[name] = _stage(f"evaluate:{name}", evaluate, name, labels, scores, test.y)
        rocs[name] = _stage(f"evaluate:{name}", roc_curve, scores, test.y)
        costs[name] = _stage(f"cost:{name}", estimate_cost, bundle.model, table)
    return ExperimentResult(cfg, split, selection, train.feature_names, bundles, reports, rocs, costs)


METRIC_COLUMNS = ("model", "accuracy", "precision", "recall", "f1", "auc", "tp", "fp", "tn", "fn", "degenerate")


def metrics_rows(result):
    rows = []
    for name in result.config.models:
        r = result.reports[name]
        cm = r.confusion
        rows.append([name, f"{r.accuracy:.6f}", f"{r.precision:.6f}", f"{r.recall:.6f}", f"{r.f1:.6f}",
                     f"{r.auc:.6f}", str(cm.tp), str(cm.fp), str(cm.tn), str(cm.fn),
                     "|".join(r.degenerate)])
    return rows


def render_table(header, rows):
    """Aligned plain-text table."""
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    fmt = lambda row: "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(header), sep] + [fmt(r) for r in rows]) + "\n"


def summary(result):
    split = result.split
    out = {
        "train_families": sorted(split.train_families),
        "test_families": sorted(split.test_families),
        "train_size": len(split.train),
        "test_size": len(split.test),
        "train_malware": int(split.train.y.sum()),
        "test_malware": int(split.test.y.sum()),
        "selected_features": list(result.selected_names),
    }
    b = result.bundles
    if "mlp" in b:
        out["mlp_final_rmse"] = b["mlp"].model.final_rmse
        out["mlp_epochs_run"] = len(b["mlp"].model.rmse_history)
    if "svm" in b:
        out["svm_margin_width"] = b["svm"].model.margin_width
    for name in ("oner", "many_rules_oner"):
        if name in b:
            m = b[name].model
            out[f"{name}_rules"] = m.n_rules
            out[f"{name}_feature"] = m.feature_name
    r = result.reports
    if "bagged_trees" in r and "decision_tree" in r:
        out["bagged_minus_tree_accuracy"] = r["bagged_trees"].accuracy - r["decision_tree"].accuracy
    return out


def write_report(result, out_dir):
    out = Path(out_dir)
    (out / "roc").mkdir(parents=True, exist_ok=True)
    (out / "models").mkdir(exist_ok=True)
    rows = metrics_rows(result)
    (out / "metrics.csv").write_text(
        "\n".join(",".join(r) for r in [list(METRIC_COLUMNS)] + rows) + "\n", encoding="utf-8")
    (out / "metrics.txt").write_text(render_table(METRIC_COLUMNS, rows), encoding="utf-8")
    for name, curve in result.rocs.items():
        write_roc_csv(curve, out / "roc" / f"{name}.csv")
    ranked = rank_models(list(result.costs.items()))
    (out / "cost.csv").write_text(cost_csv(ranked), encoding="utf-8")
    (out / "cost.json").write_text(cost_json(ranked), encoding="utf-8")
    (out / "selection.csv").write_text(
        selection_report(result.selection, result.split.train.feature_names), encoding="utf-8")
    (out / "summary.json").write_text(json.dumps(summary(result), indent=2) + "\n", encoding="utf-8")
    for name, bundle in result.bundles.items():
        (out / "models" / f"{name}.json").write_text(dumps(bundle), encoding="utf-8")
    if "many_rules_oner" in result.bundles:
        (out / "rules.txt").write_text(result.bundles["many_rules_oner"].model.explain(), encoding="utf-8")
    return out
