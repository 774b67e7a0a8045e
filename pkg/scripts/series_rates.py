"""Lattice sums over geometric N grids, scaled by their expected rates.

    python3 scripts/series_rates.py --max-n 16384 --points 11 --out rates.csv
"""

import argparse

from bo_measures import series


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--min-n", type=int, default=16)
    parser.add_argument("--max-n", type=int, default=2 ** 14)
    parser.add_argument("--points", type=int, default=11)
    parser.add_argument("--triple-max-n", type=int, default=256)
    parser.add_argument("--integral-max-n", type=int, default=2 ** 10)
    parser.add_argument("--out", default="rates.csv")
    args = parser.parse_args()

    grid = series.geometric_grid(args.min_n, args.max_n, args.points)
    small = series.geometric_grid(args.min_n, args.triple_max_n, 9)
    fits = [series.fit_rate("algebrTV", grid),
            series.fit_rate("algebrTV2", grid, m=2),
            series.fit_rate("algebrTV2", small, m=3),
            series.fit_rate("serienew", grid),
            series.fit_rate("sersaut", grid)]
    for f in fits:
        print(f"{f.lemma:16s} fitted N^{f.exponent:+.3f} (log N)^{f.log_exponent:+.3f}  "
              f"sup scaled / first = {f.sup_scaled / f.scaled[0]:.3f}  bounded: {f.bounded}")
    holds, worst = series.integral_bound_holds(args.integral_max_n)
    print(f"integral bound, C = 2, N <= {args.integral_max_n}: holds {holds}, "
          f"worst ratio {worst:.4f}")
    series.write_rates_csv(args.out, fits)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
