"""Empirical vs predicted expected counts in |z| < r for each ensemble.

Writes a whitespace table (family r empirical stderr predicted) suitable for plotting.

    python3 scripts/radial_profiles.py --trials 2000 > profiles.dat
"""
import argparse

import numpy as np

from singpoints import kernels as K
from singpoints.ensembles import det_gaf_zeros, ginibre_points, spherical_points, truncated_unitary_points
from singpoints.linalg import RngStream
from singpoints.stats import mean_and_stderr, run_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--N", type=int, default=16)
    args = ap.parse_args()
    n, N = args.n, args.N

    cases = [
        ("planar", K.KernelFamily.planar(n), lambda s: ginibre_points(n, s), np.linspace(0.25, 2.5, 10)),
        ("spherical", K.KernelFamily.spherical(n), lambda s: spherical_points(n, s), np.linspace(0.25, 3.0, 12)),
        ("truncated", K.KernelFamily.truncated(N, n), lambda s: truncated_unitary_points(N, n, s),
         np.linspace(0.1, 0.95, 10)),
        ("hyperbolic", K.KernelFamily.hyperbolic(n), lambda s: det_gaf_zeros(n, 0.8, 1e-6, s),
         np.linspace(0.1, 0.75, 8)),
    ]
    print("# family r empirical stderr predicted")
    for i, (name, fam, sampler, radii) in enumerate(cases):
        confs = run_trials(sampler, args.trials, RngStream(args.seed, i))
        for r in radii:
            m, se = mean_and_stderr(np.array([np.sum(np.abs(c.points) < r) for c in confs], dtype=float))
            print(f"{name} {r:.4f} {m:.5f} {se:.5f} {K.expected_count(fam, float(r)):.5f}")


if __name__ == "__main__":
    main()
