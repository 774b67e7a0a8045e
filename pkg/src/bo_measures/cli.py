"""Command line entry point: one subcommand per family of checks.

Exit status is 0 when every assertion of the chosen subcommand holds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import energies, harness, moments, series
from .flow import convergence_probe
from .fourier import FourierField
from .measures import field_from_g, sample_g


def _grid(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _emit(args, payload: dict, header=None, rows=None) -> None:
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, default=_jsonable) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def cmd_identities(args) -> bool:
    tol = args.tol if args.tol is not None else 1e-10
    rep = harness.run_identity_suite(args.seed, n_fields=args.samples or 100, tol=tol)
    payload = rep.to_dict()
    payload["passed"] = rep.passed
    _emit(args, payload, ["identity", "n_max", "N", "residual"], rep.results)
    return rep.passed


def cmd_orthogonality(args) -> bool:
    plan = [("tildeA", args.box or 4), ("cor55", args.box or 3), ("forp2", args.box or 4),
            ("orthtzv", args.box or 4), ("rem5", args.box or 4)]
    reports = [moments.verify_orthogonality(name, box) for name, box in plan]
    part = moments.check_partition(5, args.box or 6)
    char = all(a == b for a, b in (moments.head_set_characterization(N, 10) for N in range(9)))
    ok = all(r["violations"] == 0 for r in reports) and part["ok"] and char
    payload = {"reports": reports, "partition": part, "head_set_characterization": char,
               "passed": ok}
    rows = [(r["statement"], r["box"], r["pairs_checked"], r["violations"]) for r in reports]
    _emit(args, payload, ["statement", "box", "pairs_checked", "violations"], rows)
    return ok


def cmd_series(args) -> bool:
    grid = args.n_grid or series.geometric_grid(16, 2 ** 14, 11)
    small = tuple(n for n in grid if n <= series.MAX_N_MULTI)
    if len(small) < 6:
        small = series.geometric_grid(16, 256, 9)
    fits = [series.fit_rate("algebrTV", grid), series.fit_rate("algebrTV2", grid, m=2),
            series.fit_rate("algebrTV2", small, m=3), series.fit_rate("serienew", grid),
            series.fit_rate("sersaut", grid)]
    holds, worst = series.integral_bound_holds(2 ** 10)
    ok = all(f.bounded for f in fits) and holds
    payload = {
        "fits": [{"lemma": f.lemma, "grid": f.grid, "exponent": f.exponent,
                  "log_exponent": f.log_exponent, "first_scaled": f.scaled[0],
                  "sup_scaled": f.sup_scaled, "bounded": f.bounded} for f in fits],
        "integral_bound": {"C": 2.0, "max_N": 2 ** 10, "holds": holds, "worst_ratio": worst},
        "passed": ok,
    }
    rows = [r for f in fits for r in f.rows()]
    _emit(args, payload, ["lemma", "N", "value", "scaled_value"], rows)
    return ok


def cmd_decay(args) -> bool:
    ks = args.k or [1, 2, 3, 4]
    grid = args.n_grid or (16, 32, 64, 128, 256)
    reports, ok = [], True
    for k in ks:
        rep = harness.run_decay_study(k, grid, args.samples or 2000, args.seed,
                                      measure_k=args.measure_k)
        if k == 1:
            tol = args.tol if args.tol is not None else 1e-10
            good = bool(np.all(rep.estimates <= tol))
        else:
            ratios = rep.ratios(4)
            good = (rep.strictly_decreasing() and rep.significant_decrease(3.0)
                    and all(r <= 0.8 for r in ratios.values()))
        ok &= good
        d = rep.to_dict()
        d["passed"] = good
        d["ratios_4N"] = rep.ratios(4)
        reports.append((rep, d))
    payload = {"reports": [d for _, d in reports], "passed": ok}
    rows = [r for rep, _ in reports for r in rep.rows()]
    _emit(args, payload, ["k", "measure_k", "N", "estimate", "std_error", "l4_estimate",
                          "samples", "seed"], rows)
    return ok


def cmd_density(args) -> bool:
    k = (args.k or [2])[0]
    grid = args.n_grid or (8, 16, 32, 64, 128)
    out = harness.run_density_probe(k, grid, args.R, args.samples or 2000, args.seed)
    values = [r["mean"] for r in out["rows"]]
    ok = all(np.isfinite(v) and v >= 0 for v in values)
    out["passed"] = ok
    keys = list(out["rows"][0])
    _emit(args, out, keys, [[r[c] for c in keys] for r in out["rows"]])
    return ok


def cmd_flow_converge(args) -> bool:
    grid = args.n_grid or (32, 64, 128, 512)
    k = (args.k or [4])[0]
    u0 = field_from_g(sample_g(args.seed, max(grid), 1)[0], k)
    rows = convergence_probe(u0, grid, args.t, args.s)
    errs = [e for _, e in rows]
    ok = all(b < a for a, b in zip(errs, errs[1:]))
    payload = {"k": k, "t": args.t, "s": args.s, "N_ref": max(grid), "seed": args.seed,
               "rows": rows, "passed": ok}
    _emit(args, payload, ["N", "error_Hs"], rows)
    return ok


def cmd_recurrence(args) -> bool:
    if args.single_mode is not None:
        u0 = FourierField.from_modes({1: args.single_mode}, n_max=args.N)
        k = None
    else:
        u0 = None
        k = (args.k or [4])[0]
    rep = harness.run_recurrence(args.equation, u0, args.t_final, args.s, args.window,
                                 N=args.N, dt=args.dt, stride=args.stride,
                                 tol=args.tol if args.tol is not None else 1e-6,
                                 k=k, seed=args.seed)
    ok = bool(np.all(rep.distances >= 0))
    payload = rep.to_dict()
    payload["passed"] = ok
    _emit(args, payload, ["equation", "t", "distance"], rep.rows())
    return ok


def cmd_calibrate(args) -> bool:
    tol = args.tol if args.tol is not None else 1e-8
    out, ok = [], True
    for k in args.k or [0, 1, 2, 3, 4]:
        res = energies.calibrated(k, args.seed)
        d = energies.calibration_report(k, args.seed)
        d["passed"] = res.residual <= tol
        ok &= d["passed"]
        out.append(d)
    payload = {"energies": out, "passed": ok}
    rows = [(d["k"], d["lambda"], t["coef"], t["monomial"], d["provenance"]["residual"])
            for d in out for t in d["terms"]]
    _emit(args, payload, ["k", "lambda", "coef", "monomial", "residual"], rows)
    return ok


COMMANDS = {
    "identities": (cmd_identities, "exact algebraic identities on random fields"),
    "orthogonality": (cmd_orthogonality, "exhaustive Gaussian orthogonality sweeps"),
    "series": (cmd_series, "lattice sums and their rates"),
    "decay": (cmd_decay, "Monte Carlo decay of G_N in L^2(mu)"),
    "density": (cmd_density, "truncated densities F_{k/2,N,R} and L^q distances"),
    "flow-converge": (cmd_flow_converge, "Phi^N_t against a reference N"),
    "recurrence": (cmd_recurrence, "return distances along long BO/KdV runs"),
    "calibrate": (cmd_calibrate, "fit and print the conserved energies"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bo-verify", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--k", type=int, action="append", help="energy/measure index (repeatable)")
        p.add_argument("--n-grid", type=_grid, help="comma separated N values")
        p.add_argument("--samples", type=int, help="sample count")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, help="tolerance (subcommand default if omitted)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        if name == "orthogonality":
            p.add_argument("--box", type=int, help="override every box size")
        if name == "decay":
            p.add_argument("--measure-k", type=int, help="sample from mu_{measure_k/2}")
        if name == "density":
            p.add_argument("--R", type=float, default=2.0)
        if name == "flow-converge":
            p.add_argument("--t", type=float, default=0.1)
            p.add_argument("--s", type=float, default=1.2)
        if name == "recurrence":
            p.add_argument("--equation", choices=("BO", "KdV"), default="BO")
            p.add_argument("--t-final", type=float, default=100.0)
            p.add_argument("--s", type=float, default=1.0)
            p.add_argument("--window", type=int, default=50)
            p.add_argument("--N", type=int, default=64)
            p.add_argument("--dt", type=float, default=1e-2)
            p.add_argument("--stride", type=int, default=10)
            p.add_argument("--single-mode", type=float,
                           help="start from a*cos(x)-type data with c_1 = a instead of a draw")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ok = COMMANDS[args.command][0](args)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
