"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Inputs match one PRS block generation (256 occasions x 4 symbols) and one
64-beam chunk of an explicit sweep at the default numerology.
"""

import argparse
import timeit

import numpy as np

from nrradar import _kernels_py
from nrradar.prs import PrsConfig, _c_inits

try:
    from nrradar import _kernels as compiled
except ImportError:
    compiled = None


def sweep_inputs(rng, beams=64, reps=4, symbols=4, tones=198, paths=24):
    cz = lambda *s: rng.normal(size=s) + 1j * rng.normal(size=s)
    return (cz(beams, reps, symbols, tones), cz(beams, reps, symbols, tones), cz(beams, paths),
            cz(paths, symbols, tones), cz(beams), cz(beams, reps, symbols), cz(symbols, tones), 4.0)


def bench(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    prs = PrsConfig()
    gold_args = (_c_inits(prs, range(prs.n_prs)), 2 * prs.n_active)
    sweep_args = sweep_inputs(np.random.default_rng(0))
    cases = [("gold_batch", "gold_batch", gold_args), ("sweep_power", "sweep_power", sweep_args)]

    print(f"{'kernel':<12} {'python_ms':>10} {'compiled_ms':>12} {'speedup':>8}")
    for name, attr, a in cases:
        t_py = bench(getattr(_kernels_py, attr), a, args.repeat)
        if compiled is None:
            print(f"{name:<12} {t_py * 1e3:>10.2f} {'n/a':>12} {'-':>8}")
            continue
        t_c = bench(getattr(compiled, attr), a, args.repeat)
        print(f"{name:<12} {t_py * 1e3:>10.2f} {t_c * 1e3:>12.2f} {t_py / t_c:>7.1f}x")
    if compiled is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
