"""Time the compiled and pure-Python kernel backends on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from trajcal import _kernels


def cases(rng):
    n = 7200  # 60 s at 120 Hz
    stamps = np.cumsum(rng.uniform(0.006, 0.011, n))
    other = np.cumsum(rng.uniform(0.025, 0.040, n // 4))
    t = rng.normal(size=(n, 3))
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    query = np.sort(rng.uniform(stamps[0], stamps[-1], n))
    signal = np.sin(np.linspace(0, 60, n)) + rng.normal(scale=0.01, size=n)
    return {
        "associate_nearest": lambda k: k.associate_nearest(stamps, other, 0.02),
        "local_maxima": lambda k: k.local_maxima(signal),
        "resample_poses": lambda k: k.resample_poses(stamps, t, q, query),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    impls = _kernels.IMPLEMENTATIONS
    print(f"default backend: {_kernels.BACKEND}; available: {', '.join(sorted(impls))}")
    print(f"{'kernel':20s}" + "".join(f"{name:>14s}" for name in sorted(impls)) + "   speedup")
    for name, fn in cases(np.random.default_rng(0)).items():
        best = {}
        for backend in sorted(impls):
            timer = timeit.Timer(lambda: fn(impls[backend]))
            best[backend] = min(timer.repeat(repeat=args.repeat, number=1))
        row = f"{name:20s}" + "".join(f"{best[b] * 1e3:11.3f} ms" for b in sorted(impls))
        if "cython" in best:
            row += f"   {best['python'] / best['cython']:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
