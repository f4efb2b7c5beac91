"""Compare the compiled and numpy tape evaluators on representative workloads.

Run with ``python benchmarks/bench_tape.py [--repeat N]``.  Prints one line per
workload with the best-of-N time for each backend, the speed ratio and the
largest difference (relative to the largest value) between the two results.
"""

import argparse
import time

import numpy as np

from colombeau import tape
from colombeau.dsl import parse
from colombeau.mollifier import make_mollifier

WORKLOADS = {
    "polynomial, 1 var": (("(+ (* 3 (^ x 3)) (* -2 x) (sin x))",), ("x",), 100_000),
    "kernel derivative": (('(d x (d x (iota "delta" x)))',), ("x",), 100_000),
    "Heaviside cube": (('(^ (iota "H" x) 3)',), ("x",), 100_000),
    "pp-wave metric": (('(* (- (^ x 2) (^ y 2)) (rho u))', "(* 2 x y)"), ("u", "v", "x", "y"), 50_000),
}

# ODE right-hand sides evaluate a handful of points per call; per-call
# overhead dominates there.
SMALL_CALLS = 2000
SMALL_WORKLOADS = {
    "pp-wave rhs, 1 pt": (('(* (- (^ x 2) (^ y 2)) (rho u))', '(* 2 x (rho u))'), ("u", "v", "x", "y"), 1),
    "torus rhs, 32 pts": (("1", "(- 1 (rho alpha))"), ("alpha", "beta"), 32),
}


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if "cython" not in tape.available_backends():
        print("compiled core not built; only the numpy backend is available")
        return 1
    rng = np.random.default_rng(0)
    m = make_mollifier()
    print(f"{'workload':<20} {'cython [ms]':>12} {'numpy [ms]':>12} {'speedup':>8} {'rel diff':>11}")
    jobs = [(k, v, 1) for k, v in WORKLOADS.items()] + [(k, v, SMALL_CALLS) for k, v in SMALL_WORKLOADS.items()]
    for name, (texts, names, npts), calls in jobs:
        exprs = tuple(parse(t, names, m) for t in texts)
        X = rng.uniform(-1.5, 1.5, size=(npts, len(names)))
        tp = tape.compile_exprs(exprs, len(names))
        results = {}
        for backend in ("cython", "python"):
            prev = tape.set_backend(backend)
            try:
                Xc = np.ascontiguousarray(X)
                results[backend] = best_time(lambda: [tape.run(tp, 0.1, Xc) for _ in range(calls)][-1],
                                             args.repeat)
            finally:
                tape.set_backend(prev)
        (tc, yc), (tp_, yp) = results["cython"], results["python"]
        diff = float(np.max(np.abs(yc - yp)) / max(np.max(np.abs(yp)), 1e-300))
        print(f"{name:<20} {1e3 * tc:>12.2f} {1e3 * tp_:>12.2f} {tp_ / tc:>8.2f} {diff:>11.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
