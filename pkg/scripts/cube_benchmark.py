"""Corner-query timings against large uniform cube clouds, swept over dimension."""

import argparse
import time

import numpy as np

from hullmle import make_target_set, query


def run_dim(n_points, dim, trials, seed):
    corner = np.ones(dim)
    gammas, times = [], []
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
        points = rng.random((n_points, dim))
        tick = time.perf_counter()
        target = make_target_set(points)
        verdict = query(target, corner)
        elapsed = time.perf_counter() - tick
        gammas.append(verdict.gamma)
        times.append(elapsed)
        print(
            f"  d={dim:3d} trial={trial}  gamma={verdict.gamma:.6f}  "
            f"status={verdict.status.value}  {elapsed:.3f}s"
        )
    return np.mean(gammas), np.mean(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-points", type=int, default=100_000)
    ap.add_argument("--dims", type=int, nargs="+", default=[5, 10, 20])
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"cube corner benchmark: {args.n_points} points per cloud, {args.trials} trials per dimension")
    summary = []
    for dim in args.dims:
        mean_gamma, mean_time = run_dim(args.n_points, dim, args.trials, args.seed)
        summary.append((dim, mean_gamma, mean_time))

    print("\ndimension sweep:")
    print(f"{'d':>4}  {'mean gamma':>10}  {'mean seconds':>12}")
    for dim, mean_gamma, mean_time in summary:
        print(f"{dim:>4}  {mean_gamma:>10.6f}  {mean_time:>12.3f}")


if __name__ == "__main__":
    main()
