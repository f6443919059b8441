"""Samples, datasets, CSV ingestion, the zero-day family split, scaling and
the synthetic HPC generator."""
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import BENIGN, MALWARE, DataError

FEATURE_NAMES = ("node-loads", "dTLB-stores", "branch-instructions", "cyclesct")

MALWARE_FAMILIES = (
    "backdoor", "worm", "virus", "rootkit", "botnet",
    "ransomware", "spyware", "adware", "trojan",
)
NO_FAMILY = "none"
FAMILIES = MALWARE_FAMILIES + (NO_FAMILY,)

DEFAULT_TRAIN_FAMILIES = ("backdoor", "worm", "virus", "rootkit", "botnet")
DEFAULT_TEST_FAMILIES = ("ransomware", "spyware", "adware", "trojan")


@dataclass(frozen=True)
class HpcSample:
    features: tuple
    label: int
    family: str = ""  # "" means untagged

    def __post_init__(self):
        _check_row(np.asarray(self.features, dtype=np.float64), self.label, self.family)


def _check_row(x, label, family, where=""):
    if label not in (BENIGN, MALWARE):
        raise DataError(f"{where}label must be 0 or 1, got {label!r}")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise DataError(f"{where}feature values must be finite and >= 0")
    if family:
        if family not in FAMILIES:
            raise DataError(f"{where}unknown family {family!r}")
        if (family == NO_FAMILY) != (label == BENIGN):
            raise DataError(f"{where}family {family!r} contradicts label {label}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-oriented sample collection.

    ``X`` is an (n, d) float array, ``y`` holds labels in {0, 1} and
    ``family`` the per-row family tag ("" when untagged). Arrays are made
    read-only on construction.
    """

    X: np.ndarray
    y: np.ndarray
    family: np.ndarray
    feature_names: tuple
    provenance: str = "ingested"

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, len(self.feature_names))
        y = np.array(self.y, dtype=np.int64, copy=True)
        fam = np.array(self.family, dtype=object, copy=True)
        names = tuple(self.feature_names)
        if X.ndim != 2 or X.shape[1] != len(names):
            raise DataError(f"feature matrix shape {X.shape} does not match {len(names)} feature names")
        if not (len(y) == len(fam) == X.shape[0]):
            raise DataError("X, y and family must have the same number of rows")
        if self.provenance not in ("ingested", "synthetic"):
            raise DataError(f"unknown provenance {self.provenance!r}")
        if len(y):
            if not np.all(np.isin(y, (BENIGN, MALWARE))):
                raise DataError("labels must be 0 or 1")
            if not np.all(np.isfinite(X)) or np.any(X < 0):
                raise DataError("feature values must be finite and >= 0")
            for tag in set(fam):
                if tag and tag not in FAMILIES:
                    raise DataError(f"unknown family {tag!r}")
            tagged = fam != ""
            if np.any(tagged & ((fam == NO_FAMILY) != (y == BENIGN))):
                raise DataError("family tags contradict labels")
        for a in (X, y, fam):
            a.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "feature_names", names)

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def samples(self):
        return [HpcSample(tuple(float(v) for v in row), int(lab), str(f))
                for row, lab, f in zip(self.X, self.y, self.family)]

    @classmethod
    def from_samples(cls, samples, feature_names, provenance="ingested"):
        samples = list(samples)
        X = np.array([s.features for s in samples], dtype=np.float64).reshape(len(samples), len(feature_names))
        return cls(X, [s.label for s in samples], [s.family for s in samples], feature_names, provenance)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.family[idx], self.feature_names, self.provenance)

    def select_features(self, indices):
        indices = [int(i) for i in indices]
        return Dataset(self.X[:, indices], self.y, self.family,
                       tuple(self.feature_names[i] for i in indices), self.provenance)

    def with_features(self, X):
        """Same rows and tags, new feature matrix (used by scaling)."""
        return Dataset(X, self.y, self.family, self.feature_names, self.provenance)

    def families_present(self):
        return {str(f) for f in self.family if f and f != NO_FAMILY}


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def parse_csv(path):
    """Read a dataset from CSV.

    The header names the feature columns, followed by ``label`` and an
    optional ``family`` column. Errors cite 1-based file line numbers.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise DataError(f"{path}: empty dataset file")
    header = [h.strip() for h in rows[0]]
    if "label" not in header:
        raise DataError(f"{path}:1: header has no 'label' column")
    li = header.index("label")
    trailing = header[li + 1:]
    if trailing not in ([], ["family"]):
        raise DataError(f"{path}:1: only an optional 'family' column may follow 'label'")
    if li == 0:
        raise DataError(f"{path}:1: no feature columns before 'label'")
    names = tuple(header[:li])
    width = len(header)
    X, y, fam = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{path}:{lineno}: "
        if len(row) != width:
            raise DataError(f"{where}expected {width} columns, got {len(row)}")
        try:
            x = [float(c) for c in row[:li]]
        except ValueError:
            raise DataError(f"{where}non-numeric feature value") from None
        lab_text = row[li].strip()
        if lab_text not in ("0", "1"):
            raise DataError(f"{where}label must be 0 or 1, got {lab_text!r}")
        label = int(lab_text)
        family = row[li + 1].strip() if trailing else ""
        _check_row(np.asarray(x), label, family, where)
        X.append(x)
        y.append(label)
        fam.append(family)
    return Dataset(np.array(X, dtype=np.float64).reshape(len(X), len(names)), y, fam, names, "ingested")


def _fmt(v):
    return format(float(v), ".17g")


def csv_text(ds, with_family=True):
    header = list(ds.feature_names) + ["label"] + (["family"] if with_family else [])
    lines = [",".join(header)]
    for row, lab, f in zip(ds.X, ds.y, ds.family):
        cells = [_fmt(v) for v in row] + [str(int(lab))]
        if with_family:
            cells.append(str(f))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(ds, path, with_family=True):
    Path(path).write_text(csv_text(ds, with_family), encoding="utf-8")


# --------------------------------------------------------------------------
# zero-day split
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SplitPair:
    train: Dataset
    test: Dataset
    train_families: frozenset
    test_families: frozenset
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)


def zero_day_split(ds, train_families=DEFAULT_TRAIN_FAMILIES, test_families=DEFAULT_TEST_FAMILIES,
                   benign_ratio=0.8, seed=0):
    """Route malware by family and split benign rows at ``benign_ratio``.

    Every malware family in ``ds`` must be assigned to exactly one side so
    that the two halves partition the input.
    """
    train_families = frozenset(train_families)
    test_families = frozenset(test_families)
    if not train_families or not test_families:
        raise DataError("both family sets must be non-empty")
    overlap = train_families & test_families
    if overlap:
        raise DataError(f"zero-day protocol violated: families in both train and test: {sorted(overlap)}")
    if not 0.0 < benign_ratio < 1.0:
        raise DataError(f"benign_ratio must be in (0, 1), got {benign_ratio}")
    for tag in train_families | test_families:
        if tag not in MALWARE_FAMILIES:
            raise DataError(f"unknown malware family {tag!r}")
    present = ds.families_present()
    missing = sorted((train_families | test_families) - present)
    if missing:
        raise DataError(f"missing family: {', '.join(missing)} not present in dataset")
    malware = ds.y == MALWARE
    untagged = malware & (ds.family == "")
    if untagged.any():
        raise DataError("zero-day split needs a family tag on every malware row")
    unassigned = sorted(present - train_families - test_families)
    if unassigned:
        raise DataError(f"families not assigned to either side: {', '.join(unassigned)}")
    benign_idx = np.flatnonzero(~malware)
    if benign_idx.size == 0:
        raise DataError("zero-day split needs benign samples")
    rng = np.random.default_rng(seed)
    shuffled = rng.permutation(benign_idx)
    n_train_benign = int(round(benign_ratio * benign_idx.size))
    in_train = np.isin(ds.family, list(train_families))
    in_test = np.isin(ds.family, list(test_families))
    train_idx = np.sort(np.concatenate([np.flatnonzero(in_train), shuffled[:n_train_benign]]))
    test_idx = np.sort(np.concatenate([np.flatnonzero(in_test), shuffled[n_train_benign:]]))
    return SplitPair(ds.subset(train_idx), ds.subset(test_idx), train_families, test_families,
                     train_idx, test_idx)


# --------------------------------------------------------------------------
# scaling
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScalingParams:
    mins: np.ndarray
    maxs: np.ndarray

    def to_dict(self):
        return {"min": [float(v) for v in self.mins], "max": [float(v) for v in self.maxs]}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["min"], dtype=np.float64), np.asarray(d["max"], dtype=np.float64))

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        span = self.maxs - self.mins
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, (X - self.mins) / safe, 0.0)


def fit_scaling(train):
    if len(train) == 0:
        raise DataError("cannot fit scaling on an empty training set")
    return ScalingParams(train.X.min(axis=0), train.X.max(axis=0))


def apply_scaling(ds, params):
    """Min-max map with train-fitted params; unclamped, so test values may leave [0, 1]."""
    if ds.n_features != params.mins.size:
        raise DataError("scaling params do not match the dataset's feature count")
    # scaled values can go negative, which the raw-counter invariant forbids,
    # so scaled matrices are returned as plain arrays
    return params.transform(ds.X)


# --------------------------------------------------------------------------
# synthetic generator
# --------------------------------------------------------------------------

# Natural-log parameters of each counter. Benign programs rarely touch
# node-loads (floor(exp(.)) lands on 0 about a quarter of the time), malware
# families sit higher on every counter with per-family offsets. The extra
# counters are identically distributed for all classes and carry no signal.
DEFAULT_BENIGN = {"mu": [1.0, 11.0, 13.0, 14.0], "sigma": [1.5, 0.8, 0.7, 0.6]}
DEFAULT_FAMILY_PARAMS = {
    "backdoor": {"mu": [6.0, 11.8, 13.6, 14.6], "sigma": [1.0, 0.7, 0.6, 0.5]},
    "worm": {"mu": [6.5, 12.2, 13.4, 14.4], "sigma": [1.0, 0.7, 0.6, 0.5]},
    "virus": {"mu": [5.5, 11.6, 13.8, 14.8], "sigma": [1.1, 0.7, 0.6, 0.5]},
    "rootkit": {"mu": [7.0, 12.0, 13.3, 14.9], "sigma": [0.9, 0.7, 0.6, 0.5]},
    "botnet": {"mu": [6.2, 12.4, 13.9, 14.5], "sigma": [1.0, 0.7, 0.6, 0.5]},
    "ransomware": {"mu": [6.8, 12.6, 13.7, 15.0], "sigma": [1.0, 0.7, 0.6, 0.5]},
    "spyware": {"mu": [5.8, 11.9, 13.5, 14.7], "sigma": [1.0, 0.7, 0.6, 0.5]},
    "adware": {"mu": [4.0, 11.4, 13.2, 14.3], "sigma": [1.3, 0.8, 0.7, 0.6]},
    "trojan": {"mu": [6.0, 12.1, 13.6, 14.6], "sigma": [1.0, 0.7, 0.6, 0.5]},
}
DEFAULT_NOISE = {"names": ["cache-misses", "instructions", "LLC-loads", "bus-cycles"],
                 "mu": 10.0, "sigma": 1.0}


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic dataset recipe; a pure description, JSON-serialisable."""

    seed: int = 42
    benign_count: int = 2700
    families: dict = field(default_factory=lambda: {
        name: {"count": 300, **params} for name, params in DEFAULT_FAMILY_PARAMS.items()})
    benign: dict = field(default_factory=lambda: dict(DEFAULT_BENIGN))
    noise: dict = field(default_factory=lambda: dict(DEFAULT_NOISE))
    feature_names: tuple = FEATURE_NAMES

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DataError("seed must be an unsigned 64-bit value")
        if self.benign_count < 0:
            raise DataError("benign_count must be >= 0")
        d = len(self.feature_names)
        for name, fam in self.families.items():
            if name not in MALWARE_FAMILIES:
                raise DataError(f"unknown malware family {name!r}")
            _check_dist(fam, d, name)
            if int(fam["count"]) < 0:
                raise DataError(f"family {name!r}: count must be >= 0")
        _check_dist(self.benign, d, "benign")
        if self.noise and float(self.noise.get("sigma", 0)) < 0:
            raise DataError("noise sigma must be >= 0")

    @classmethod
    def from_dict(cls, d):
        kw = {k: d[k] for k in ("seed", "benign_count", "families", "benign", "noise") if k in d}
        if "feature_names" in d:
            kw["feature_names"] = tuple(d["feature_names"])
        if "families" in kw:
            kw["families"] = {name: _fill_family(name, spec) for name, spec in kw["families"].items()}
        return cls(**kw)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {"seed": int(self.seed), "benign_count": int(self.benign_count),
                "families": self.families, "benign": self.benign, "noise": self.noise,
                "feature_names": list(self.feature_names)}

    @classmethod
    def uniform(cls, per_family, benign_count, seed=42, **kw):
        fams = {name: {"count": per_family, **params} for name, params in DEFAULT_FAMILY_PARAMS.items()}
        return cls(seed=seed, benign_count=benign_count, families=fams, **kw)


def _fill_family(name, spec):
    # count-only family entries fall back to the documented defaults
    out = dict(DEFAULT_FAMILY_PARAMS.get(name, {}))
    out.update(spec)
    return out


def _check_dist(spec, d, what):
    for key in ("mu", "sigma"):
        if key not in spec or len(spec[key]) != d:
            raise DataError(f"{what}: {key} must list {d} values")
    if any(s < 0 or not math.isfinite(s) for s in spec["sigma"]):
        raise DataError(f"{what}: sigma values must be finite and >= 0")


def generate_synthetic(config=None):
    """Draw a deterministic synthetic dataset from ``config``.

    Each counter is ``floor(exp(N(mu, sigma)))`` with per-family parameters,
    giving non-negative, heavy-tailed integer counts. Rows are shuffled with
    the config seed.
    """
    config = config or GeneratorConfig()
    rng = np.random.default_rng(int(config.seed))
    names = tuple(config.feature_names)
    noise_names = tuple(config.noise.get("names", ())) if config.noise else ()
    blocks, labels, fams = [], [], []

    def draw(count, spec):
        mu = np.asarray(spec["mu"], dtype=np.float64)
        sigma = np.asarray(spec["sigma"], dtype=np.float64)
        return np.floor(np.exp(rng.normal(mu, sigma, size=(count, mu.size))))

    for name in sorted(config.families):
        spec = config.families[name]
        count = int(spec["count"])
        blocks.append(draw(count, spec))
        labels += [MALWARE] * count
        fams += [name] * count
    blocks.append(draw(int(config.benign_count), config.benign))
    labels += [BENIGN] * int(config.benign_count)
    fams += [NO_FAMILY] * int(config.benign_count)
    X = np.vstack(blocks) if blocks else np.empty((0, len(names)))
    n = X.shape[0]
    if noise_names:
        mu, sigma = float(config.noise["mu"]), float(config.noise["sigma"])
        noise = np.floor(np.exp(rng.normal(mu, sigma, size=(n, len(noise_names)))))
        X = np.hstack([X, noise])
        names = names + noise_names
    order = rng.permutation(n)
    return Dataset(X[order], np.asarray(labels, dtype=np.int64)[order],
                   np.asarray(fams, dtype=object)[order], names, "synthetic")
