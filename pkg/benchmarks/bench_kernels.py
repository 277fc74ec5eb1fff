"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with the best-of-N time for each backend and the
speedup. Exits with an error if the extension was not built.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from coexist import kernels
from coexist.phy import RadioParams, q_inverse


def _cases():
    p = RadioParams.macro_cell()
    qinv = q_inverse(p.error_target)
    rng = np.random.default_rng(0)
    gains = 10 ** (-rng.uniform(5, 12, 200))
    ranks_e = [list(rng.permutation(6)) for _ in range(6)]
    ranks_u = [list(rng.permutation(6)) for _ in range(6)]
    loss = rng.uniform(0, 1, (3, 128))
    loss[rng.random((3, 128)) < 0.3] = np.inf
    cell = rng.integers(0, 32, (3, 128))

    def fbl(mod):
        for g in np.linspace(0.01, 50, 2000):
            mod.fbl_rate(float(g), p.blocklength, qinv, p.rb_bandwidth)

    def power(mod):
        for g in gains:
            mod.min_power(6.4e6, float(g), p.noise_power, p.rb_bandwidth, p.blocklength, qinv, 5.0, 1e-6)

    def matchings(mod):
        mod.stable_matchings(ranks_e, ranks_u)

    def assignment(mod):
        mod.best_assignment(loss, cell)

    return {"fbl_rate x2000": fbl, "min_power x200": power, "stable_matchings 6x6": matchings,
            "best_assignment 3x128": assignment}


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not available; build with pip install -e . --no-build-isolation")
    print(f"{'kernel':24s} {'cython ms':>10s} {'python ms':>10s} {'speedup':>8s}")
    for name, fn in _cases().items():
        times = []
        for mod in (kernels.compiled_backend, kernels.python_backend):
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) * 1e3)
        print(f"{name:24s} {times[0]:10.2f} {times[1]:10.2f} {times[1] / times[0]:8.1f}x")


if __name__ == "__main__":
    main()
