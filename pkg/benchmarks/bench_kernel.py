"""Compare the compiled row kernels with the pure-Python ones.

    python benchmarks/bench_kernel.py [--reps N]

Times tighten and shadow on random row sets, then a full Omega workload
(random inequality systems) with each backend swapped into the solver.
"""

from __future__ import annotations

import argparse
import random
import timeit
import types

from depsess.constraints import _kernel_py, kernel, omega

try:
    from depsess.constraints import _kernel as _ext
except ImportError:
    _ext = None


def random_rows(rng: random.Random, n_rows: int, n_vars: int, span: int = 6):
    return [tuple(rng.randint(-span, span) for _ in range(n_vars + 1)) for _ in range(n_rows)]


def systems(seed: int, count: int, n_vars: int = 4, n_rows: int = 7):
    rng = random.Random(seed)
    return [random_rows(rng, n_rows, n_vars, 4) for _ in range(count)]


def bench(label, fn, reps):
    t = min(timeit.repeat(fn, number=1, repeat=reps))
    print(f"  {label:<10} {t * 1e3:9.2f} ms")
    return t


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {"python": _kernel_py}
    if _ext is not None:
        backends["cython"] = _ext
    else:
        print("compiled kernel not built; timing the Python fallback only")
    print(f"selected at import: {kernel.BACKEND}")

    rng = random.Random(0)
    batches = [random_rows(rng, 24, 5) for _ in range(200)]
    results = {}

    print("tighten, 200 x 24 rows")
    for name, mod in backends.items():
        results[("tighten", name)] = bench(name, lambda m=mod: [m.tighten(b) for b in batches], args.reps)

    print("shadow (real and dark), 200 x 24 rows")
    for name, mod in backends.items():
        results[("shadow", name)] = bench(
            name, lambda m=mod: [(m.shadow(b, 0, False), m.shadow(b, 0, True)) for b in batches], args.reps
        )

    work = systems(1, 300)
    print("omega solve, 300 random systems")
    saved = omega.kernel
    answers = {}
    try:
        for name, mod in backends.items():
            omega.kernel = types.SimpleNamespace(tighten=mod.tighten, shadow=mod.shadow)
            answers[name] = [omega.solve([], s, 4) is None for s in work]
            results[("solve", name)] = bench(name, lambda: [omega.solve([], s, 4) for s in work], args.reps)
    finally:
        omega.kernel = saved
    if len(answers) == 2:
        assert answers["python"] == answers["cython"], "backends disagree"
        print("\nspeedup (python / cython)")
        for op in ("tighten", "shadow", "solve"):
            print(f"  {op:<10} {results[(op, 'python')] / results[(op, 'cython')]:6.2f}x")


if __name__ == "__main__":
    main()
