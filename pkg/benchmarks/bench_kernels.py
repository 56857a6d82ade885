"""Compare the compiled and numpy enumeration kernels.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

from loopcalc import _kernels_py, fixtures, kernels

try:
    from loopcalc import _kernels as compiled
except ImportError:  # pragma: no cover
    compiled = None

CASES = [
    ("k4_q3_seed7", lambda: fixtures.load("k4_q3_seed7")),
    ("grid3x3_q2", lambda: fixtures.from_edges(
        2, [(f"{r}{c}", f"{r}{c + 1}") for r in range(3) for c in range(2)]
        + [(f"{r}{c}", f"{r + 1}{c}") for r in range(2) for c in range(3)], seed=1)),
    ("k5_q3", lambda: fixtures.from_edges(
        3, [(a, b) for i, a in enumerate("abcde") for b in "abcde"[i + 1:]], seed=2)),
    ("ring18_q2", lambda: fixtures.from_edges(
        2, [(f"v{i:02d}", f"v{(i + 1) % 18:02d}") for i in range(18)], seed=3)),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    impls = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    print(f"{'model':<12} {'configs':>10} " + " ".join(f"{n:>10}" for n, _ in impls)
          + "   speedup  identical")
    for name, build in CASES:
        m = build()
        times, values = [], []
        for _, impl in impls:
            values.append(kernels.partition_sum(m, impl))
            times.append(min(timeit.repeat(lambda: kernels.partition_sum(m, impl),
                                           number=1, repeat=args.repeat)))
        speed = f"{times[0] / times[-1]:8.1f}x" if len(times) > 1 else "       -"
        same = all(v == values[0] for v in values)
        print(f"{name:<12} {m.n_configs:>10} " + " ".join(f"{t * 1e3:>8.2f}ms" for t in times)
              + f"  {speed}  {same}")


if __name__ == "__main__":
    main()
