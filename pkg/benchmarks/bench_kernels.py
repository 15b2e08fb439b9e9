"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from oneshot_coherence import _kernels_py
from oneshot_coherence.qstate import GroupedDistribution

try:
    from oneshot_coherence import _kernels as compiled
except ImportError:
    compiled = None


def _cases(rng):
    small = GroupedDistribution.from_probabilities(rng.dirichlet(np.ones(8)))
    large = GroupedDistribution.from_probabilities(rng.dirichlet(np.ones(4096)))
    p3 = rng.dirichlet(np.ones(3))
    zeros, ones = np.zeros(3), np.ones(3)
    return {
        "capped_fidelity d=8": lambda k: k.capped_fidelity(small.values, small.mults, 0.2, 0),
        "capped_fidelity d=4096": lambda k: k.capped_fidelity(large.values, large.mults, 1e-3, 0),
        "grid_search d=3 step=1e-3": lambda k: k.grid_search(p3, 0.95, 1e-3, zeros, ones),
        "grid_bbox d=3 step=1e-3": lambda k: k.grid_bbox(p3, 0.95, 1e-3, zeros, ones, 0.6),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, fn in _cases(rng).items():
        number = 200 if "capped" in name else 2
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=number, repeat=args.repeat)) / number
        if compiled is None:
            print(f"{name:<28}{t_py * 1e3:>14.4f}{'n/a':>14}{'n/a':>10}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(compiled), number=number, repeat=args.repeat)) / number
        print(f"{name:<28}{t_py * 1e3:>14.4f}{t_cy * 1e3:>14.4f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
