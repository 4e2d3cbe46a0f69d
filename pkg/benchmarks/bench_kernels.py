"""Compiled vs pure-Python kernels on the workloads the package actually runs.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import random
import time

from supported import _kernels_py, kernels
from supported.cds_planar import compute_nonrepetitive_coloring
from supported.graph import generate_random_graph, generate_random_planar

try:
    from supported import _kernels as compiled
except ImportError:
    compiled = None


def cover_case(n: int, seed: int):
    g = generate_random_graph(n, 0.15, seed)
    closed = [(1 << v) | sum(1 << w for w in g.adj[v]) for v in range(n)]
    rng = random.Random(seed)
    clients = sum(1 << v for v in range(n) if rng.random() < 0.6)
    return (closed, clients, n)


def repetition_case(n: int, seed: int, max_half: int):
    """Full verification: the coloring has no repetition, so nothing exits early."""
    g = generate_random_planar(n, seed)
    nrc = compute_nonrepetitive_coloring(g, seed=seed, max_half=max_half)
    return ([list(a) for a in g.adj], list(nrc.colors), max_half)


def timed(fn, args, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args(argv)
    print(f"dispatch backend: {kernels.BACKEND}")
    if compiled is None:
        print("compiled extension not built; nothing to compare")
        return 0
    cases = [("min_cover n=24", "min_cover", cover_case(24, 1)),
             ("min_cover n=30", "min_cover", cover_case(30, 2)),
             ("find_repetition n=300 half=6", "find_repetition", repetition_case(300, 3, 6)),
             ("find_repetition n=1500 half=5", "find_repetition", repetition_case(1500, 4, 5))]
    print(f"{'case':40s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for label, name, args in cases:
        tp, out_p = timed(getattr(_kernels_py, name), args, a.repeat)
        tc, out_c = timed(getattr(compiled, name), args, a.repeat)
        if out_p != out_c:
            raise SystemExit(f"{label}: backends disagree")
        print(f"{label:40s} {tp:10.4f} {tc:11.4f} {tp / max(tc, 1e-9):7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
