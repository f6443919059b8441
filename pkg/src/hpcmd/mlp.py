"""One-hidden-layer tanh perceptron trained by online backpropagation."""
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .core import ConfigError, DataError, TrainedModel, check_binary_labels


@dataclass(frozen=True)
class MlpParams:
    hidden: int = 5
    learning_rate: float = 0.01
    epochs: int = 100
    rmse_stop: float = 0.05
    init_range: float = 0.5
    seed: int = 0

    def validate(self):
        if self.learning_rate < 0 or not math.isfinite(self.learning_rate):
            raise ConfigError("learning_rate must be finite and >= 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.hidden < 1:
            raise ConfigError("hidden layer needs at least one unit")


def rmse(preds, actuals):
    p = np.asarray(preds, dtype=np.float64)
    a = np.asarray(actuals, dtype=np.float64)
    if p.shape != a.shape or p.ndim != 1:
        raise DataError("rmse needs two sequences of equal length")
    if p.size == 0:
        raise DataError("rmse of empty sequences is undefined")
    return math.sqrt(float(np.mean((p - a) ** 2)))


def sample_loss(w_hidden, w_out, x, target):
    """Half squared error of one sample; the quantity backprop differentiates."""
    hidden = np.tanh(w_hidden[:, :-1] @ x + w_hidden[:, -1])
    y = math.tanh(float(w_out[:-1] @ hidden + w_out[-1]))
    return 0.5 * (y - target) ** 2


def backprop_gradient(w_hidden, w_out, x, target):
    """Analytic gradient of :func:`sample_loss`, same shapes as the weights."""
    hidden = np.tanh(w_hidden[:, :-1] @ x + w_hidden[:, -1])
    y = math.tanh(float(w_out[:-1] @ hidden + w_out[-1]))
    delta_o = (y - target) * (1.0 - y * y)
    g_out = np.append(delta_o * hidden, delta_o)
    delta_h = delta_o * w_out[:-1] * (1.0 - hidden * hidden)
    g_hidden = np.hstack([np.outer(delta_h, x), delta_h[:, None]])
    return g_hidden, g_out


class MlpModel(TrainedModel):
    model_type = "mlp"
    uses_scaling = True

    def __init__(self, w_hidden, w_out, params=MlpParams(), rmse_history=()):
        w_hidden = np.array(w_hidden, dtype=np.float64)
        w_out = np.array(w_out, dtype=np.float64)
        if w_hidden.ndim != 2 or w_out.shape != (w_hidden.shape[0] + 1,):
            raise ConfigError("inconsistent MLP weight shapes")
        if not (np.all(np.isfinite(w_hidden)) and np.all(np.isfinite(w_out))):
            raise ConfigError("MLP weights must be finite")
        w_hidden.setflags(write=False)
        w_out.setflags(write=False)
        self.w_hidden, self.w_out = w_hidden, w_out
        self.params = params
        self.rmse_history = tuple(float(r) for r in rmse_history)
        self.n_features = w_hidden.shape[1] - 1

    @property
    def topology(self):
        return (self.n_features, self.w_hidden.shape[0], 1)

    @property
    def final_rmse(self):
        return self.rmse_history[-1] if self.rmse_history else float("nan")

    def raw_output(self, X):
        X = self._as_matrix(X)
        if not np.all(np.isfinite(X)):
            raise DataError("MLP input must be finite")
        return kernels.mlp_forward(self.w_hidden, self.w_out, np.ascontiguousarray(X))

    def _scores_labels(self, X):
        out = self.raw_output(X)
        return (out + 1.0) / 2.0, (out >= 0.0).astype(np.int64)

    def to_params(self):
        return {"w_hidden": self.w_hidden.tolist(), "w_out": self.w_out.tolist(),
                "hyper": asdict(self.params), "rmse_history": list(self.rmse_history)}

    @classmethod
    def from_params(cls, p):
        return cls(p["w_hidden"], p["w_out"], MlpParams(**p["hyper"]), p.get("rmse_history", ()))


def forward(model, x):
    """Network output in (-1, 1) for one feature vector."""
    return float(model.raw_output(np.asarray(x, dtype=np.float64)[None, :])[0])


def init_weights(n_inputs, params):
    rng = np.random.default_rng(params.seed)
    r = params.init_range
    w_hidden = rng.uniform(-r, r, size=(params.hidden, n_inputs + 1))
    w_out = rng.uniform(-r, r, size=params.hidden + 1)
    return w_hidden, w_out


def train_mlp(X, y, params=MlpParams()):
    """Online gradient descent on squared error with targets in {-1, +1}.

    Samples are visited in a fresh seeded order every epoch; training stops
    early once the epoch's training RMSE drops below ``rmse_stop``.
    """
    params.validate()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = check_binary_labels(y)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DataError("MLP training data shape mismatch")
    if not np.all(np.isfinite(X)):
        raise DataError("MLP training data must be finite")
    target = 2.0 * y.astype(np.float64) - 1.0
    w_hidden, w_out = init_weights(X.shape[1], params)
    rng = np.random.default_rng([params.seed, 1])
    history = []
    for _ in range(params.epochs):
        order = rng.permutation(X.shape[0])
        kernels.mlp_epoch(w_hidden, w_out, X, target, order, params.learning_rate)
        history.append(rmse(kernels.mlp_forward(w_hidden, w_out, X), target))
        if history[-1] < params.rmse_stop:
            break
    return MlpModel(w_hidden, w_out, params, history)


def read_mlp_data(path):
    """Parse the MLP text format: a topology line, then feature rows ending in a 0/1 target."""
    lines = [ln.split() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty MLP data file")
    try:
        topology = tuple(int(t) for t in lines[0])
    except ValueError:
        raise DataError(f"{path}:1: topology line must be integers") from None
    if len(topology) != 3 or topology[2] != 1:
        raise DataError(f"{path}:1: expected a 'inputs hidden 1' topology line")
    d = topology[0]
    X, y = [], []
    for lineno, parts in enumerate(lines[1:], start=2):
        if len(parts) != d + 1:
            raise DataError(f"{path}:{lineno}: expected {d + 1} values")
        try:
            vals = [float(t) for t in parts]
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric value") from None
        if vals[-1] not in (0.0, 1.0):
            raise DataError(f"{path}:{lineno}: target must be 0 or 1")
        X.append(vals[:-1])
        y.append(int(vals[-1]))
    return topology, np.array(X, dtype=np.float64).reshape(len(y), d), np.array(y, dtype=np.int64)


def write_mlp_data(path, X, y, hidden=5):
    X = np.asarray(X, dtype=np.float64)
    lines = [f"{X.shape[1]} {hidden} 1"]
    lines += [" ".join(format(v, ".17g") for v in row) + f" {int(t)}" for row, t in zip(X, y)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
