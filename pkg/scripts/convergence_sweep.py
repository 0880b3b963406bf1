"""Coefficient second moments of N^{n/2} f_N against their limit, over a range of N.

    python3 scripts/convergence_sweep.py --n 1 --kmax 3 --trials 2000 --N 64 128 256
"""
import argparse

from singpoints.config import VerifyConfig
from singpoints.kernels import limit_coefficient_second_moment
from singpoints.linalg import RngStream
from singpoints.verify import coefficient_convergence_test


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--kmax", type=int, default=3)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--N", type=int, nargs="+", default=[64, 128, 256])
    args = ap.parse_args()

    cfg = VerifyConfig(seed=args.seed, threads=args.threads)
    print(f"{'N':>5} {'k':>3} {'E|c_k|^2':>10} {'stderr':>8} {'limit':>7} {'rel.dev':>8}")
    for N in args.N:
        table = coefficient_convergence_test(N, args.n, args.kmax, args.trials, RngStream(args.seed), cfg)
        for k in range(args.kmax + 1):
            row = table.labels.index(f"fN E|c_{k}|^2")
            emp, se = table.empirical[row].real, table.stderr[row]
            lim = limit_coefficient_second_moment(args.n, k)
            print(f"{N:5d} {k:3d} {emp:10.4f} {se:8.4f} {lim:7.1f} {(emp - lim) / lim:+8.3f}")


if __name__ == "__main__":
    main()
