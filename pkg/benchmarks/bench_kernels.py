"""Compare the compiled and numpy kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times the raw reflected-block kernel on arrays shaped like the Example 1
system and a full single-frequency impedance evaluation with each backend.
"""

import argparse
import importlib
import os
import subprocess
import sys
import timeit
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]


def kernel_timings(repeat):
    from cablemom import _kernels_py

    rng = np.random.default_rng(0)
    nodes, slots = 630, 27
    C = rng.standard_normal((nodes, 2, 2)) + 1j * rng.standard_normal((nodes, 2, 2))
    obs = rng.standard_normal((nodes, 2, slots)) + 1j * rng.standard_normal((nodes, 2, slots))
    src = rng.standard_normal((nodes, 2, slots)) + 1j * rng.standard_normal((nodes, 2, slots))
    impls = {"python": _kernels_py.reflected_block_sum}
    try:
        impls["cython"] = importlib.import_module("cablemom._ckernels").reflected_block_sum
    except ImportError:
        print("compiled extension not built; only the numpy kernel is timed")
    ref = impls["python"](C, obs, src)
    for name, fn in impls.items():
        err = np.abs(fn(C, obs, src) - ref).max() / np.abs(ref).max()
        t = min(timeit.repeat(lambda: fn(C, obs, src), number=20, repeat=repeat)) / 20
        print(f"kernel  {name:7s} {t * 1e3:8.3f} ms/call  max rel diff {err:.1e}")


SNIPPET = """
import time, warnings
warnings.simplefilter("ignore")
from cablemom.config import load_config
from cablemom.solver import Solver
from cablemom import kernels
sys_, _ = load_config(r"{cfg}")
s = Solver(sys_)
s.at(50.0)
best = min((lambda t0: (s.at(f), time.perf_counter() - t0)[1])(time.perf_counter()) for f in [50.0, 1e3, 1e5] for _ in range({repeat}))
print(kernels.BACKEND, best)
"""


def solver_timings(repeat):
    cfg = ROOT / "configs" / "three_sc_submarine.json"
    for pure in ("0", "1"):
        env = dict(os.environ, CABLEMOM_PURE_PYTHON=pure)
        out = subprocess.run(
            [sys.executable, "-c", SNIPPET.format(cfg=cfg, repeat=repeat)], env=env, capture_output=True, text=True, check=True
        ).stdout.split()
        print(f"solver  {out[0]:7s} {float(out[1]) * 1e3:8.2f} ms/frequency (Example 1, 6x6)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    kernel_timings(args.repeat)
    solver_timings(args.repeat)


if __name__ == "__main__":
    main()
