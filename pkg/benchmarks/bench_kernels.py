"""Time each hot kernel on its numba and numpy implementations.

Inputs are sized like the default synthetic experiment (about 4,600 training
rows, 2,000 test rows, 4 features). Numba kernels are called once before
timing so compilation is not counted.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]
"""
import argparse
import time

import numpy as np

from hpcmd import kernels
from hpcmd.mlp import MlpParams, init_weights
from hpcmd.trees import TreeParams, train_tree


def make_cases(scale, seed=0):
    rng = np.random.default_rng(seed)
    n_train = int(4600 * scale)
    n_test = int(2000 * scale)
    X = rng.random((n_train, 4))
    Q = rng.random((n_test, 4))
    y = (X[:, 0] + 0.3 * rng.normal(size=n_train) > 0.5).astype(np.int64)
    t_pm = 2.0 * y - 1.0
    order = rng.permutation(n_train)
    wh, wo = init_weights(4, MlpParams(seed=seed))
    tree = train_tree(X, y, TreeParams(max_depth=12))
    # each case: args factory (fresh copies for in-place kernels)
    return {
        "knn_indices": lambda: (X, Q, 5, kernels.EUCLIDEAN),
        "mlp_forward": lambda: (wh, wo, Q),
        "mlp_epoch": lambda: (wh.copy(), wo.copy(), X, t_pm, order, 0.01),
        "hinge_epoch": lambda: (np.zeros(4), 0.0, X, t_pm, order, 0.01, 1.0),
        "logistic_epoch": lambda: (np.zeros(4), 0.0, X, y.astype(np.float64), order, 0.1),
        "best_split": lambda: (X, y, 2),
        "tree_leaves": lambda: (tree.feature, tree.threshold, tree.left, tree.right, Q),
    }


def bench(fn, make_args, repeat):
    args = make_args()
    fn(*args)  # warm-up; triggers compilation for numba kernels
    times = []
    for _ in range(repeat):
        args = make_args()
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="multiplier on the row counts")
    args = ap.parse_args()
    cases = make_cases(args.scale)
    print(f"{'kernel':<16}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, make_args in cases.items():
        nb, np_ = kernels.PAIRS[name]
        t_nb = bench(nb, make_args, args.repeat)
        t_np = bench(np_, make_args, args.repeat)
        print(f"{name:<16}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
