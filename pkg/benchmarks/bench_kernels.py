"""Compiled vs numpy superoperator kernels, plus an end-to-end run per backend.

    python3 benchmarks/bench_kernels.py [--max-n 11] [--repeat 3]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qtwin import _kernels_py

try:
    from qtwin import _kernels as _ext
except ImportError:
    _ext = None


def _random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_table(max_n: int, repeat: int) -> None:
    rng = np.random.default_rng(0)
    s1 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    s2 = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    print(f"{'n':>3} {'kernel':>6} {'numpy [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for n in range(6, max_n + 1):
        rho = _random_state(n, rng)
        for name, call in (("1q", lambda m, r: m.superop_1q(r, s1, n // 2)),
                           ("2q", lambda m, r: m.superop_2q(r, s2, n - 1, 0))):
            work = rho.copy()
            t_py = _time(lambda: call(_kernels_py, work), repeat)
            if _ext is None:
                print(f"{n:3} {name:>6} {t_py:11.4f} {'n/a':>11}")
                continue
            t_c = _time(lambda: call(_ext, work), repeat)
            print(f"{n:3} {name:>6} {t_py:11.4f} {t_c:11.4f} {t_py / t_c:8.1f}")


def end_to_end(fixture: str) -> None:
    code = ("import time; from qtwin import kernels; from qtwin.bench import load_fixture;"
            "from qtwin.calibration import bundled_calibration; from qtwin.engine import simulate;"
            "from qtwin.bench import fixture_info;"
            f"c = load_fixture({fixture!r}); cal = bundled_calibration(fixture_info({fixture!r}).device);"
            "t = time.perf_counter(); simulate(c, cal, 'paper');"
            "print(kernels.BACKEND, round(time.perf_counter() - t, 3))")
    for pure in ("0", "1"):
        env = dict(os.environ, QTWIN_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                             check=True)
        backend, secs = out.stdout.split()
        print(f"{fixture} paper mode, {backend:>6} backend: {secs} s")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=11)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--fixture", default="QW-4")
    args = ap.parse_args()
    kernel_table(args.max_n, args.repeat)
    end_to_end(args.fixture)


if __name__ == "__main__":
    main()
