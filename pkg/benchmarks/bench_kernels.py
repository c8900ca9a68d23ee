"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--n-x N]

Prints one line per kernel with the best wall time of each backend and the
speedup.  Both backends are run on identical inputs and their results are
compared so a fast but wrong build is caught.
"""
import argparse
import time

import numpy as np

from psystem import evolution as ev
from psystem import hamiltonian as hm
from psystem import kernels
from psystem.characteristics import trace
from psystem.constitutive import make_quadratic
from psystem.riemann import Family


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n-x", type=int, default=128)
    args = ap.parse_args(argv)
    if not kernels.HAVE_COMPILED:
        raise SystemExit("compiled kernels are not built; nothing to compare")

    model = make_quadratic()
    x = np.arange(args.n_x) / args.n_x
    fld, _ = ev.run(model, -1.0 + 0.1 * np.sin(2 * np.pi * x), np.zeros(args.n_x), 3.0,
                    save_every=2)
    pot = hm.FieldPotential(fld)

    cases = {
        "trace (forward, First)": lambda b: trace(fld, (0.0, 0.3), Family.FIRST, backend=b).x[-1],
        "trace (backward, Second)": lambda b: trace(fld, (fld.times[-1], 0.7), Family.SECOND, "Backward",
                                                    backend=b).x[-1],
        "particle flow (t = 3)": lambda b: hm.flow(pot, (0.0, 0.2, 0.5), fld.times[-1], backend=b).x[-1],
    }
    print(f"{'kernel':28s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'|diff|':>9s}")
    for name, fn in cases.items():
        tp, rp = best_of(lambda: fn("python"), args.repeat)
        tc, rc = best_of(lambda: fn("cython"), args.repeat)
        print(f"{name:28s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f} {abs(rp - rc):9.1e}")


if __name__ == "__main__":
    main()
