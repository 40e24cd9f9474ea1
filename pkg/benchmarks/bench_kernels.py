"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--n 10] [--m 4] [--repeat 5]

Two measurements per backend: the raw scatter / negate kernels on a full
address superposition, and end-to-end queries through ``run_query``.
"""

from __future__ import annotations

import argparse
import math
import random
import timeit

import numpy as np

from qwqram import MemoryBank, QueryTerm, run_query
from qwqram import gates
from qwqram._core import BACKEND, pykernels
from qwqram.protocol import standard
from qwqram.memory import all_addresses
from qwqram.walker import encode_query

try:
    from qwqram._core import _ckernels as ckernels
except ImportError:  # extension not built
    ckernels = None


def full_superposition(n: int, m: int):
    addrs = all_addresses(n)
    amp = 1 / math.sqrt(len(addrs))
    return [QueryTerm(a, amp) for a in addrs]


def kernel_loop(mod, walkers: np.ndarray, n: int) -> None:
    w = walkers.copy()
    width = w.shape[1]
    for d in range(1, n + 1):
        mod.controlled_negate(w, d - 1, np.arange(d, width, dtype=np.int64), 1)
        mod.scatter(w, n)
    for d in range(n, 0, -1):
        mod.scatter_inverse(w, n)
        mod.controlled_negate(w, d - 1, np.arange(d, width, dtype=np.int64), 1)


def bench(n: int, m: int, repeat: int) -> list[tuple[str, str, float]]:
    config = standard(n, m)
    terms = full_superposition(n, m)
    bank = MemoryBank.random(n, m, random.Random(0))
    walkers = np.array(encode_query(terms, config.layout).walkers)

    backends = [("python", pykernels)] + ([("cython", ckernels)] if ckernels is not None else [])
    rows = []
    original = gates.kernels
    try:
        for name, mod in backends:
            t = min(timeit.repeat(lambda: kernel_loop(mod, walkers, n), number=1, repeat=repeat))
            rows.append((name, f"kernels, {len(terms)} components", t))
            gates.kernels = mod
            t = min(timeit.repeat(lambda: run_query(config, bank, terms, snapshots="none"), number=1, repeat=repeat))
            rows.append((name, f"run_query, {len(terms)} components", t))
            t = min(timeit.repeat(lambda: run_query(config, bank, "1" * n, snapshots="none"), number=20,
                                  repeat=repeat)) / 20
            rows.append((name, "run_query, classical", t))
    finally:
        gates.kernels = original
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"default backend: {BACKEND}; n={args.n} m={args.m}")
    rows = bench(args.n, args.m, args.repeat)
    base = {what: t for name, what, t in rows if name == "python"}
    print(f"{'backend':8} {'case':34} {'seconds':>10} {'speedup':>8}")
    for name, what, t in rows:
        print(f"{name:8} {what:34} {t:10.5f} {base[what] / t:8.2f}x")


if __name__ == "__main__":
    main()
