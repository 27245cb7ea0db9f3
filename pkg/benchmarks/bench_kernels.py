"""Compare the compiled and pure-Python kernels on sampled decoding problems.

Usage: python benchmarks/bench_kernels.py [--n 5,7,9] [--p 0.006] [--shots 300]
"""

import argparse
import time

import numpy as np

from compass_ft import _pure, kernels
from compass_ft.code_model import elongated_coloring
from compass_ft.harness import PointSimulator, SweepPoint
from compass_ft.noise import NoiseParams


def sample_defects(n, p, shots, seed):
    point = SweepPoint(n, 2, "Z", NoiseParams.fig3(p), n)
    sim = PointSimulator(point, elongated_coloring(n, 2), ["uf_weighted"])
    return sim.graph, [sim.sample(seed, t)[1] for t in range(shots)]


def timed(fn, items):
    t0 = time.perf_counter()
    for x in items:
        fn(x)
    return (time.perf_counter() - t0) / max(len(items), 1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="5,7,9")
    ap.add_argument("--p", type=float, default=0.006)
    ap.add_argument("--shots", type=int, default=300)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    print(f"compiled backend available: {kernels.BACKEND == 'cython'}")
    print(f"{'kernel':<12}{'n':>4}{'defects':>9}{'cython us':>12}{'python us':>12}{'speedup':>9}")
    for n in (int(x) for x in args.n.split(",")):
        g, shots = sample_defects(n, args.p, args.shots, args.seed)
        indptr, adj = g.adjacency()
        arrays = (indptr, adj, g.eu, g.ev, g.weight, g.is_boundary())
        fast, slow = kernels.make_decoder(*arrays), _pure.make_decoder(*arrays)
        mean_k = np.mean([len(d) for d in shots])
        tf = timed(fast.decode, shots)
        ts = timed(slow.decode, shots)
        print(f"{'uf_decode':<12}{n:>4}{mean_k:>9.1f}{tf * 1e6:>12.1f}{ts * 1e6:>12.1f}{ts / tf:>9.1f}")
        rng = np.random.default_rng(n)
        problems = []
        for k in (8, 10, 12):
            pts = rng.uniform(0, 10, size=(k, 2))
            dist = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
            problems.append((dist, np.minimum(pts[:, 0], 10 - pts[:, 0])))
        tf = timed(lambda a: kernels.matching_dp(*a), problems)
        ts = timed(lambda a: _pure.matching_dp(*a), problems)
        print(f"{'matching_dp':<12}{n:>4}{'8-12':>9}{tf * 1e6:>12.1f}{ts * 1e6:>12.1f}{ts / tf:>9.1f}")


if __name__ == "__main__":
    main()
