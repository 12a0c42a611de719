"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot paths on synthetic workloads sized like a real tuning
run: all-pairs dependency distances over a corpus of parses, and
candidate pair expansion across a full 9x9x9 threshold grid.

Run:  python3 benchmarks/bench_kernels.py
"""

import random
import time

import numpy as np

from spanforge._kernels import HAVE_NUMBA, IMPLEMENTATIONS

N_SENTENCES = 300
SENTENCE_LEN = 30
GRID = [round(0.2 + 0.05 * k, 2) for k in range(9)]


def make_workload(seed=1234):
    rng = random.Random(seed)
    nprng = np.random.default_rng(seed)
    heads = []
    probs = []
    for _ in range(N_SENTENCES):
        n = rng.randint(5, SENTENCE_LEN)
        h = np.full(n, -1, dtype=np.int64)
        order = list(range(n))
        rng.shuffle(order)
        for rank, tok in enumerate(order[1:], start=1):
            h[tok] = order[rng.randrange(rank)]
        heads.append(h)
        probs.append(tuple(nprng.random(n) for _ in range(3)))
    return heads, probs


def bench_distances(fn, heads, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for h in heads:
            fn(h, 5)
        best = min(best, time.perf_counter() - started)
    return best


def bench_enumerate(fn, probs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for tau_s in GRID:
            for tau_e in GRID:
                for tau_i in GRID:
                    for p_start, p_end, p_inside in probs[:20]:
                        fn(p_start, p_end, p_inside, tau_s, tau_e, tau_i, 13, 2, 6)
        best = min(best, time.perf_counter() - started)
    return best


def main():
    heads, probs = make_workload()
    print(
        f"workload: {N_SENTENCES} parses (n<={SENTENCE_LEN}), "
        f"grid {len(GRID)}^3 x 20 sentences"
    )
    print(f"numba available: {HAVE_NUMBA}\n")

    results = {}
    for name, (dist_fn, enum_fn) in IMPLEMENTATIONS.items():
        # warm up (JIT compilation for the numba path)
        dist_fn(heads[0], 5)
        enum_fn(*probs[0], 0.5, 0.5, 0.5, 13, 2, 6)
        t_dist = bench_distances(dist_fn, heads)
        t_enum = bench_enumerate(enum_fn, probs)
        results[name] = (t_dist, t_enum)
        print(f"{name:>6}  distances {t_dist * 1e3:8.1f} ms   grid-enumerate {t_enum * 1e3:8.1f} ms")

    if "numba" in results and "numpy" in results:
        d_np, e_np = results["numpy"]
        d_nb, e_nb = results["numba"]
        print(f"\nspeedup numba vs numpy: distances {d_np / d_nb:.1f}x, "
              f"grid-enumerate {e_np / e_nb:.1f}x")


if __name__ == "__main__":
    main()
