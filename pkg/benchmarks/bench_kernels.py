"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]

Prints one row per kernel with the best-of-R wall time of each backend and
the speedup.  Also times a desk-scale false-positive simulation under each
backend by re-running it in a subprocess with ``BDM_PURE_PYTHON`` set.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from bdm import _pykernels
from bdm.kernels import compiled_impl


def _cases(size: int):
    rng = np.random.default_rng(0)
    a = rng.uniform(0.5, 40.0, size)
    x = rng.uniform(0.01, 60.0, size)
    b = rng.uniform(0.5, 40.0, size)
    p = rng.uniform(0.01, 0.99, size)
    k = rng.uniform(0.1, 50.0, size)
    w = k / (a + 1.0) * rng.uniform(0.3, 3.0, size)
    return {
        "log_gamma_array": (x,),
        "trigamma_array": (x,),
        "shape_jeffreys_log_array": (x,),
        "reg_gamma_lower_array": (a, x),
        "reg_beta_array": (a, b, p),
        "gamma_levelset_array": (a, k, w),
    }


def bench_kernels(size: int, repeat: int) -> list[tuple[str, float, float]]:
    rows = []
    for name, args in _cases(size).items():
        t_py = min(timeit.repeat(lambda: getattr(_pykernels, name)(*args), number=1, repeat=repeat))
        t_c = min(timeit.repeat(lambda: getattr(compiled_impl, name)(*args), number=1, repeat=repeat))
        rows.append((name, t_py, t_c))
    return rows


_SIM = ("from bdm.simulate import SimulationPlan, false_positive_study;"
        "false_positive_study(SimulationPlan(sample_sizes=(10, 100), replications=2000), workers=1)")


def bench_simulation() -> tuple[float, float]:
    out = []
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("BDM_PURE_PYTHON", None)
        if pure:
            env["BDM_PURE_PYTHON"] = "1"
        stmt = f"import time; t = time.perf_counter(); {_SIM}; print(time.perf_counter() - t)"
        res = subprocess.run([sys.executable, "-c", stmt], env=env, capture_output=True, text=True, check=True)
        out.append(float(res.stdout.strip()))
    return out[0], out[1]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=20_000, help="elements per kernel call")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--skip-simulation", action="store_true")
    args = ap.parse_args(argv)
    if compiled_impl is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'kernel':<28s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s}")
    for name, t_py, t_c in bench_kernels(args.size, args.repeat):
        print(f"{name:<28s} {t_py:11.4f} {t_c:13.5f} {t_py / t_c:7.1f}x")
    if not args.skip_simulation:
        t_py, t_c = bench_simulation()
        print(f"{'simulation (2 x 2000 reps)':<28s} {t_py:11.4f} {t_c:13.5f} {t_py / t_c:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
