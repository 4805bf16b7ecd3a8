"""Benchmark the compiled counting kernels against the numpy fallback.

The contingency/log-likelihood pair is the hot loop of structure search:
every candidate edge move scores one family, which is one contingency count
over all rows.  Run with:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from formrelax.bn import _kernels_py

try:
    from formrelax.bn import _ckernels
except ImportError:
    _ckernels = None


def make_family(rng, n_rows, n_parents, arity=3):
    child = rng.integers(0, arity, size=n_rows).astype(np.int64)
    parents = [
        rng.integers(0, arity, size=n_rows).astype(np.int64)
        for _ in range(n_parents)
    ]
    return child, parents, [arity] * n_parents, arity


def run(impl, families, repeats):
    started = time.perf_counter()
    sink = 0.0
    for _ in range(repeats):
        for child, parents, arities, arity in families:
            counts = impl.contingency(child, parents, arities, arity)
            sink += impl.loglik(counts)
    return time.perf_counter() - started, sink


def bench(n_rows, n_parents, n_families=50, repeats=5):
    rng = np.random.default_rng(0)
    families = [make_family(rng, n_rows, n_parents) for _ in range(n_families)]
    t_py, sink_py = run(_kernels_py, families, repeats)
    line = f"rows={n_rows:>6}  parents={n_parents}  numpy={t_py:7.3f}s"
    if _ckernels is not None:
        t_cy, sink_cy = run(_ckernels, families, repeats)
        assert abs(sink_py - sink_cy) < 1e-6 * max(1.0, abs(sink_py))
        line += f"  cython={t_cy:7.3f}s  speedup={t_py / t_cy:5.2f}x"
    else:
        line += "  (compiled kernel not built)"
    print(line)


def main():
    backend = "cython" if _ckernels is not None else "numpy only"
    print(f"family-score kernels, {backend} available")
    for n_rows in (1_000, 10_000, 100_000):
        for n_parents in (0, 2, 4):
            bench(n_rows, n_parents)


if __name__ == "__main__":
    main()
