"""Timing comparison of the compiled and pure-numpy kernel backends.

Run with ``python benchmarks/bench_kernels.py``.  Micro-benchmarks call
both backends in-process; the end-to-end replicate benchmark is also
re-run in a subprocess with ``EOCALIB_PURE=1`` to time the fallback on
the full path.
"""

import os
import subprocess
import sys
import time

import numpy as np

from eocalib._kernels import _fallback, backend

try:
    from eocalib._kernels import _core
except ImportError:
    _core = None


def draw(n=20_000, seed=0):
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    y = rng.uniform(0.0, 100.0, n)
    c = rng.uniform(0.0, 47.5, n)
    z = np.minimum(y, c)
    delta = (y <= c).astype(np.int8)
    e_t0 = np.full(n, 0.1)
    e_z = np.minimum(z / 100.0, 1.0)
    return z, delta, e_t0, e_z


def time_call(fn, repeats=200):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def micro_benchmarks():
    z, delta, e_t0, e_z = draw()
    rows = []
    for name, mod in (("python", _fallback), ("compiled", _core)):
        if mod is None:
            continue
        km = time_call(lambda: mod.km_curve(z, delta, 10.0))
        sums = time_call(lambda: mod.calibration_sums(z, delta, e_t0, e_z, 10.0))
        rows.append((name, km, sums))
    print(f"{'backend':<10} {'km_curve':>12} {'calibration_sums':>18}")
    for name, km, sums in rows:
        print(f"{name:<10} {km * 1e3:>10.3f}ms {sums * 1e3:>16.3f}ms")
    if len(rows) == 2:
        print(
            f"{'speedup':<10} {rows[0][1] / rows[1][1]:>11.2f}x "
            f"{rows[0][2] / rows[1][2]:>16.2f}x"
        )
    print()


def replicate_benchmark():
    import eocalib.simulation as sim

    design = sim.design_for_rate(100.0, 0.20, 20_000, 10.0, 50, 99)
    start = time.perf_counter()
    sim.run_design(design, target_uks_rate=0.20)
    elapsed = time.perf_counter() - start
    per_rep = elapsed / design.replicates * 1e3
    print(f"end-to-end [{backend()}]: {per_rep:.2f}ms per 20k-subject replicate")
    return per_rep


def main():
    print(f"active backend: {backend()}")
    micro_benchmarks()
    replicate_benchmark()
    if backend() == "compiled" and not os.environ.get("EOCALIB_PURE"):
        sys.stdout.flush()
        env = dict(os.environ, EOCALIB_PURE="1")
        code = (
            "import sys; sys.path.insert(0, 'benchmarks'); "
            "import bench_kernels; bench_kernels.replicate_benchmark()"
        )
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


if __name__ == "__main__":
    main()
