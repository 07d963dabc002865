"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the two hot paths (per-replicate moments + integrated block statistics)
at study-like sizes, then a full bootstrap run through each backend.

Run:  python benchmarks/bench_kernels.py
"""

import os
import time

import numpy as np

from hfanova import (
    BootstrapConfig,
    Dataset,
    FunctionalSample,
    SeedSpec,
    bootstrap_matrix,
    build_contrasts,
    make_grid,
)
from hfanova import kernels


def time_call(fn, *args, repeat=200, **kwargs):
    fn(*args, **kwargs)  # warm up
    start = time.perf_counter()
    for _ in range(repeat):
        fn(*args, **kwargs)
    return (time.perf_counter() - start) / repeat


def kernel_rows(rng, k, m, sizes, block_rows):
    values = rng.normal(size=(sum(sizes), m))
    sizes_arr = np.asarray(sizes, dtype=np.int64)
    blocks = [rng.normal(size=(r, k)) for r in block_rows]
    h = np.concatenate(blocks, axis=0)
    bounds = np.concatenate([[0], np.cumsum(block_rows)]).astype(np.intp)
    weights = np.full(m, 1.0 / m)
    return values, sizes_arr, h, bounds, weights


def bench_kernels():
    rng = np.random.default_rng(0)
    cases = [
        ("dunnett-like k=4 m=50", 4, 50, (15, 20, 25, 30), [1, 1, 1]),
        ("tukey-like k=4 m=50", 4, 50, (15, 20, 25, 30), [1] * 6),
        ("omnibus k=4 m=50", 4, 50, (15, 20, 25, 30), [4]),
        ("omnibus k=8 m=100", 8, 100, tuple([12] * 8), [8]),
    ]
    print(f"{'case':<24} {'python':>12} {'compiled':>12} {'speedup':>8}")
    for name, k, m, sizes, rows in cases:
        values, sizes_arr, h, bounds, weights = kernel_rows(rng, k, m, sizes, rows)
        timings = {}
        for backend_name in kernels.available_backends():
            backend = kernels.get_backend(backend_name)
            timings[backend_name] = time_call(
                backend.replicate_statistics, values, sizes_arr, h, bounds, weights, 1e-10
            )
        py = timings.get("python", float("nan"))
        cy = timings.get("compiled", float("nan"))
        print(f"{name:<24} {py * 1e6:>10.1f}us {cy * 1e6:>10.1f}us {py / cy:>7.1f}x")


def bench_bootstrap():
    rng = np.random.default_rng(1)
    m = 50
    grid = make_grid(np.linspace(0, 1, m))
    samples = tuple(
        FunctionalSample(i + 1, rng.normal(size=(n, m)))
        for i, n in enumerate((15, 20, 25, 30))
    )
    ds = Dataset(grid=grid, samples=samples)
    fam = build_contrasts("dunnett", k=4)
    cfg = BootstrapConfig(B=500, alpha=0.05, seed=SeedSpec(5))
    print(f"\nbootstrap_matrix, B={cfg.B}, Dunnett k=4 m=50 n=90")
    for backend_name in kernels.available_backends():
        os.environ["HFANOVA_KERNEL"] = backend_name
        import importlib

        importlib.reload(kernels)
        start = time.perf_counter()
        bootstrap_matrix(ds, fam, cfg)
        elapsed = time.perf_counter() - start
        print(f"  {backend_name:<10} {elapsed:.3f}s")
    os.environ.pop("HFANOVA_KERNEL", None)
    importlib.reload(kernels)


if __name__ == "__main__":
    print(f"active backend: {kernels.BACKEND}")
    bench_kernels()
    bench_bootstrap()
