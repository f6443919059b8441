"""Abstract hardware cost estimates for one inference.

Each model is reduced to a static count of primitive operations executed by
a single worst-case inference plus one ``memory_word`` per stored
parameter. Counts are grouped by component (e.g. ``trees`` and ``vote`` for
an ensemble) and priced with a :class:`CostTable`. Latency is the sequential
sum of primitive cycles; resources assume a fully unrolled datapath, so
they scale with the count. These are estimates of relative cost, not
synthesis results.
"""
import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .core import ConfigError
from .knn import KnnModel
from .linear import LinearModel
from .mlp import MlpModel
from .rules import RuleListModel
from .trees import BaggedModel, DecisionTreeModel

PRIMITIVES = ("compare", "add", "multiply", "divide", "exp_eval", "tanh_eval", "memory_word")
CATEGORIES = ("bram", "dsp", "ff", "lut")


@dataclass(frozen=True)
class OpCost:
    cycles: int = 0
    bram: int = 0
    dsp: int = 0
    ff: int = 0
    lut: int = 0


# Calibrated so the 4-feature linear SVM (4 multiply, 5 add, exp, divide,
# compare) costs 52 cycles, i.e. 1300 ns at a 25 ns clock.
DEFAULT_COSTS = {
    "compare": OpCost(cycles=1, ff=2, lut=12),
    "add": OpCost(cycles=3, ff=34, lut=60),
    "multiply": OpCost(cycles=3, dsp=3, ff=36, lut=40),
    "divide": OpCost(cycles=10, ff=120, lut=200),
    "exp_eval": OpCost(cycles=14, dsp=7, ff=260, lut=420),
    "tanh_eval": OpCost(cycles=16, dsp=8, ff=300, lut=480),
    "memory_word": OpCost(bram=1),
}


@dataclass(frozen=True)
class CostTable:
    costs: dict = field(default_factory=lambda: dict(DEFAULT_COSTS))
    clock_period_ns: float = 25.0

    def __post_init__(self):
        if not self.clock_period_ns > 0 or not math.isfinite(self.clock_period_ns):
            raise ConfigError("clock_period_ns must be a positive number")
        missing = set(PRIMITIVES) - set(self.costs)
        if missing:
            raise ConfigError(f"cost table lacks primitives: {sorted(missing)}")
        for name, c in self.costs.items():
            if min(c.cycles, c.bram, c.dsp, c.ff, c.lut) < 0:
                raise ConfigError(f"negative cost for {name}")

    @classmethod
    def unit(cls, clock_period_ns=1.0):
        """Every primitive costs one cycle and one unit of every resource."""
        return cls({p: OpCost(1, 1, 1, 1, 1) for p in PRIMITIVES}, clock_period_ns)

    @classmethod
    def from_dict(cls, d):
        costs = dict(DEFAULT_COSTS)
        for name, c in d.get("costs", {}).items():
            if name not in PRIMITIVES:
                raise ConfigError(f"unknown primitive {name!r}")
            costs[name] = OpCost(**c)
        return cls(costs, float(d.get("clock_period_ns", 25.0)))

    def to_dict(self):
        return {"clock_period_ns": self.clock_period_ns,
                "costs": {p: vars(self.costs[p]) for p in PRIMITIVES}}


@dataclass(frozen=True)
class CostReport:
    latency_cycles: int
    latency_ns: float
    interval_cycles: int
    bram: int
    dsp: int
    ff: int
    lut: int

    @property
    def rme(self):
        return self.bram + self.dsp + self.ff + self.lut

    def to_dict(self):
        return {"latency_cycles": self.latency_cycles, "latency_ns": self.latency_ns,
                "interval_cycles": self.interval_cycles, "bram": self.bram, "dsp": self.dsp,
                "ff": self.ff, "lut": self.lut, "rme": self.rme}


# --------------------------------------------------------------------------
# primitive counts
# --------------------------------------------------------------------------

def _tree_counts(tree):
    internal = int((tree.feature >= 0).sum())
    # internal nodes store feature + threshold + two child links, leaves a label
    return Counter(compare=tree.depth, memory_word=4 * internal + (tree.n_nodes - internal))


def _knn_counts(m):
    n, d = m.X.shape
    dist = Counter(add=n * (2 * d - 1), multiply=n * d) if m.metric == "euclidean" else \
        Counter(add=n * (2 * d - 1), compare=n * d)
    return {
        "distance": dist,
        "select": Counter(compare=n * m.k),
        "vote": Counter(add=m.k, compare=1),
        "storage": Counter(memory_word=n * (d + 1)),
    }


def _mlp_counts(m):
    d, h, _ = m.topology
    # bias weights enter as one add per unit
    return {
        "hidden": Counter(multiply=h * d, add=h * d, tanh_eval=h),
        "output": Counter(multiply=h, add=h, tanh_eval=1, compare=1),
        "storage": Counter(memory_word=h * (d + 1) + h + 1),
    }


def _linear_counts(m):
    d = m.n_features
    return {
        "dot": Counter(multiply=d, add=d),
        "sigmoid": Counter(exp_eval=1, add=1, divide=1),
        "decision": Counter(compare=1),
        "storage": Counter(memory_word=d + 1),
    }


def _rules_counts(m):
    n = len(m.intervals)
    search = math.ceil(math.log2(n)) if n > 1 else 0
    return {
        "base_cases": Counter(compare=len(m.base_cases)),
        "intervals": Counter(compare=1 + search),
        "storage": Counter(memory_word=2 * len(m.base_cases) + 2 * n + 1),
    }


def primitive_counts(model):
    """Primitive counts per component for a single worst-case inference."""
    if isinstance(model, DecisionTreeModel):
        return {"tree": _tree_counts(model)}
    if isinstance(model, BaggedModel):
        trees = Counter()
        for t in model.trees:
            trees.update(_tree_counts(t))
        return {"trees": trees, "vote": Counter(add=model.T, compare=1)}
    if isinstance(model, KnnModel):
        return _knn_counts(model)
    if isinstance(model, MlpModel):
        return _mlp_counts(model)
    if isinstance(model, LinearModel):
        return _linear_counts(model)
    if isinstance(model, RuleListModel):
        return _rules_counts(model)
    raise ConfigError(f"no cost model for {type(model).__name__}")


def price(counts, table):
    """Cycles and resources of a primitive Counter."""
    cycles = 0
    res = dict.fromkeys(CATEGORIES, 0)
    for prim, n in counts.items():
        c = table.costs[prim]
        cycles += n * c.cycles
        for cat in CATEGORIES:
            res[cat] += n * getattr(c, cat)
    return cycles, res


def estimate_cost(model, table=None):
    table = table or CostTable()
    total = Counter()
    for part in primitive_counts(model).values():
        total.update(part)
    cycles, res = price(total, table)
    return CostReport(cycles, cycles * table.clock_period_ns, cycles + 1, **res)


def rank_models(reports):
    """Sort ``(name, CostReport)`` pairs by rme, then latency, both descending; name breaks ties."""
    return sorted(reports, key=lambda nr: (-nr[1].rme, -nr[1].latency_cycles, nr[0]))


COST_CSV_HEADER = "model,latency_cycles,latency_ns,interval,bram,dsp,ff,lut,rme"


def cost_csv(reports):
    lines = [COST_CSV_HEADER]
    for name, r in reports:
        lines.append(f"{name},{r.latency_cycles},{r.latency_ns!r},{r.interval_cycles},"
                     f"{r.bram},{r.dsp},{r.ff},{r.lut},{r.rme}")
    return "\n".join(lines) + "\n"


def cost_json(reports):
    return json.dumps({name: r.to_dict() for name, r in reports}, indent=2) + "\n"
