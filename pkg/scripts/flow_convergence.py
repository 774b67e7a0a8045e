"""H^s distance between the truncated flow at N and at a reference N.

    python3 scripts/flow_convergence.py --k 4 --n-grid 32,64,128,512 --t 0.1 --s 1.2
"""

import argparse
import csv

from bo_measures.flow import convergence_probe
from bo_measures.measures import field_from_g, sample_g


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=int, default=4, help="initial data drawn from mu_{k/2}")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-grid", default="32,64,128,512", help="last entry is the reference")
    parser.add_argument("--t", type=float, default=0.1)
    parser.add_argument("--s", type=float, default=1.2)
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--out", default="flow_convergence.csv")
    args = parser.parse_args()

    grid = sorted(int(n) for n in args.n_grid.split(","))
    u0 = field_from_g(sample_g(args.seed, grid[-1], 1)[0], args.k)
    rows = convergence_probe(u0, grid, args.t, args.s, dt=args.dt)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "N_ref", "t", "s", "seed", "error_Hs"])
        for n, e in rows:
            w.writerow([n, grid[-1], args.t, args.s, args.seed, repr(e)])
            print(f"N={n:4d}  ||Phi^{grid[-1]} - Phi^N||_H^{args.s} = {e:.4e}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
