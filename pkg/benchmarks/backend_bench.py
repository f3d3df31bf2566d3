#!/usr/bin/env python3
"""Head-to-head timing of the numpy and numba kernel backends.

Runs every kernel on a deployment-sized workload, checks the two variants
agree bit for bit, and reports best-of-N wall times. Run from the repo root:

    python3 benchmarks/backend_bench.py [--repeats N]
"""

import argparse
import time

import numpy as np

from actseg import _kernels


def _best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(rng):
    table = rng.standard_normal((30_000, 25))
    idx = rng.integers(0, 30_000, (8192, 8)).astype(np.int64)
    mixer_in = rng.standard_normal((8, 48, 56, 56))
    weight = rng.standard_normal((16, 48))
    bias = rng.standard_normal(16)
    base = rng.standard_normal((8, 16, 56, 56))
    enh = rng.standard_normal((8, 16, 56, 56))
    scale = rng.uniform(0.5, 1.5, 16)
    shift = rng.standard_normal(16)
    mean = rng.standard_normal(16)
    var = rng.uniform(0.5, 1.5, 16)
    hand = rng.standard_normal((8, 16, 14, 14))
    seq_a = rng.integers(0, 25, 500).astype(np.int64)
    seq_b = rng.integers(0, 25, 480).astype(np.int64)
    return [
        ("gather_mean", "30k x 25 logits, 8192 windows of 8", (table, idx)),
        ("mix_1x1", "(8, 48, 56, 56) -> 16 channels", (mixer_in, weight, bias)),
        ("bn_residual", "(8, 16, 56, 56)", (base, enh, scale, shift, mean, var)),
        ("resize_nearest", "(8, 16, 14, 14) -> 20 x 20", (hand, 20, 20)),
        ("resize_nearest", "(8, 16, 14, 14) -> 224 x 224", (hand, 224, 224)),
        ("levenshtein", "labels 500 vs 480", (seq_a, seq_b)),
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats, best kept")
    args = ap.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba not importable: only the numpy backend is available.")

    rows = []
    rng = np.random.default_rng(0)
    for name, desc, wargs in workloads(rng):
        np_fn = getattr(_kernels, f"{name}_numpy")
        t_np = _best_of(np_fn, wargs, args.repeats)
        if _kernels.HAS_NUMBA:
            nb_fn = getattr(_kernels, f"{name}_numba")
            nb_fn(*wargs)  # compile outside the timed region
            t_nb = _best_of(nb_fn, wargs, args.repeats)
            same = np.array_equal(np.asarray(np_fn(*wargs)), np.asarray(nb_fn(*wargs)))
            rows.append((name, desc, t_np, t_nb, same))
        else:
            rows.append((name, desc, t_np, None, True))

    print(f"{'kernel':<16} {'workload':<36} {'numpy ms':>9} {'numba ms':>9} {'speedup':>8}  identical")
    for name, desc, t_np, t_nb, same in rows:
        if t_nb is None:
            print(f"{name:<16} {desc:<36} {t_np * 1e3:>9.3f} {'-':>9} {'-':>8}  -")
        else:
            print(f"{name:<16} {desc:<36} {t_np * 1e3:>9.3f} {t_nb * 1e3:>9.3f} "
                  f"{t_np / t_nb:>7.2f}x  {'yes' if same else 'NO'}")

    if any(r[4] is False for r in rows):
        raise SystemExit("backend outputs diverged")


if __name__ == "__main__":
    main()
