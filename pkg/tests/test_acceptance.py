"""Acceptance criteria 1-10 at their stated tolerances.

Every test records a one line verdict; the terminal summary hook in
conftest.py prints one PASS/FAIL line per criterion.  Running this file
directly (``python3 tests/test_acceptance.py``) does the same without the
rest of the suite.
"""

import itertools
import time

import numpy as np
import pytest

from bo_measures import moments, series
from bo_measures.energies import g_closed_form_k2, g_value, rate_residual, standard_energy
from bo_measures.flow import convergence_probe
from bo_measures.fourier import random_field, sobolev_norm_sq
from bo_measures.harness import conservation_drift, run_decay_study, run_identity_suite
from bo_measures.measures import (
    MeasureSpec,
    alpha_N,
    expected_l2_norm_sq,
    field_from_g,
    sample_batch,
    sample_g,
)

pytestmark = pytest.mark.acceptance


def verdict(record_property, number, title, ok, detail, started):
    record_property("criterion", number)
    record_property("title", title)
    record_property("detail", f"{detail} ({time.perf_counter() - started:.1f} s)")
    assert ok, detail


def test_criterion_01_exact_identities(record_property):
    t0 = time.perf_counter()
    rep = run_identity_suite(seed=0, n_fields=100, n_max_choices=(8, 16, 32), tol=1e-10)
    worst = rep.worst()
    verdict(record_property, 1, "exact identity suite", rep.passed,
            f"{len(rep.results)} checks, worst {max(worst.values()):.1e} <= 1e-10", t0)


def test_criterion_02_closed_form(record_property):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = 0.0
    for i in range(100):
        n_max = (8, 16, 32)[i % 3]
        u = random_field(n_max, rng)
        n = int(rng.integers(max(1, n_max // 2), n_max + 1))
        a, b = g_value(2, n, u), g_closed_form_k2(n, u)
        worst = max(worst, abs(a - b) / abs(b))
    verdict(record_property, 2, "closed form of G_N for k = 2", worst <= 1e-10,
            f"100 fields, worst relative {worst:.1e} <= 1e-10", t0)


def test_criterion_03_conservation(record_property):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    fields = [random_field((8, 16, 32)[i % 3], rng) for i in range(30)]
    r_half = rate_residual(standard_energy(1), fields)
    r_one = rate_residual(standard_energy(2), fields)
    u0 = sample_batch(MeasureSpec(2, 64, seed=0), 1).field[0]
    drift = conservation_drift(u0, N=64, t_final=1.0)
    ok = max(r_half, r_one, drift["l2"], drift["e_half"]) <= 1e-8
    verdict(record_property, 3, "conservation laws", ok,
            f"rate residuals {r_half:.1e}, {r_one:.1e}; drift L2 {drift['l2']:.1e}, "
            f"E_1/2 {drift['e_half']:.1e} over {drift['checkpoints']} checkpoints; all <= 1e-8",
            t0)


def test_criterion_04_orthogonality(record_property):
    t0 = time.perf_counter()
    plan = [("tildeA", 4, [3, 4]), ("cor55", 3, [2, 3, 4, 5]),
            ("forp2", 4, None), ("orthtzv", 4, None), ("rem5", 4, None)]
    reports = [moments.verify_orthogonality(s, box, n=n) for s, box, n in plan]
    bad = sum(r["violations"] for r in reports)
    pairs = ", ".join(f"{r['statement']} {r['pairs_checked']}" for r in reports)
    verdict(record_property, 4, "Gaussian orthogonality sweeps", bad == 0,
            f"{bad} violations; pairs checked: {pairs}", t0)


def test_criterion_05_partition_and_characterization(record_property):
    t0 = time.perf_counter()
    part = moments.check_partition(5, 6)
    char = all(a == b for a, b in (moments.head_set_characterization(N, 10) for N in range(9)))
    verdict(record_property, 5, "partition and head set characterization",
            part["ok"] and char,
            f"partition n=5 box 6 {'ok' if part['ok'] else part['failing_j']}; "
            f"characterization N<=8 box 10 {'equal' if char else 'differs'}", t0)


def test_criterion_06_series_rates(record_property):
    t0 = time.perf_counter()
    double = series.geometric_grid(16, 2 ** 14, 11)
    fits = [series.fit_rate("algebrTV", double),
            series.fit_rate("algebrTV2", double, m=2),
            series.fit_rate("algebrTV2", series.geometric_grid(16, 256, 9), m=3),
            series.fit_rate("serienew", double),
            series.fit_rate("sersaut", double)]
    holds, worst = series.integral_bound_holds(2 ** 10, C=2.0)
    ok = all(f.bounded for f in fits) and holds
    sup = ", ".join(f"{f.lemma} {f.sup_scaled / f.scaled[0]:.2f}" for f in fits)
    verdict(record_property, 6, "lattice sum rates", ok,
            f"sup/first: {sup} (<= 10); integral bound C=2 worst ratio {worst:.3f}", t0)


def test_criterion_07_decay(record_property):
    t0 = time.perf_counter()
    grid = (16, 32, 64, 128, 256)
    parts, ok = [], True
    for k in (2, 3, 4):
        rep = run_decay_study(k, grid, M=2000, seed=0)
        ratios = rep.ratios(4)
        good = (rep.strictly_decreasing() and rep.significant_decrease(3.0)
                and max(ratios.values()) <= 0.8)
        ok &= good
        parts.append(f"k={k} {rep.estimates[0]:.3g}->{rep.estimates[-1]:.3g} "
                     f"max ratio {max(ratios.values()):.2f}")
    rep1 = run_decay_study(1, grid, M=2000, seed=0)
    ok &= bool(np.all(rep1.estimates <= 1e-10))
    parts.append(f"k=1 max {np.max(rep1.estimates):.1e}")
    verdict(record_property, 7, "Monte Carlo decay of G_N", ok, "; ".join(parts), t0)


def test_criterion_08_measure_sampling(record_property):
    t0 = time.perf_counter()
    checks = []
    for k in (2, 3, 4):
        u = sample_batch(MeasureSpec(k, 16, seed=k), 100_000).field
        power = np.abs(u.coeffs) ** 2
        se = power.std(axis=0, ddof=1) / np.sqrt(power.shape[0])
        expected = np.arange(1, 17, dtype=float) ** (-k)
        z_mode = np.max(np.abs(power.mean(axis=0) - expected) / se)
        norms = 2 * power.sum(axis=-1)
        z_norm = abs(norms.mean() - expected_l2_norm_sq(k, 16)) / (
            norms.std(ddof=1) / np.sqrt(norms.size))
        top = sobolev_norm_sq(u, (k - 1) / 2)
        z_alpha = abs(top.mean() - alpha_N(k, 16)) / (top.std(ddof=1) / np.sqrt(top.size))
        checks.append((k, z_mode, z_norm, z_alpha))
    ok = all(zm <= 5 and zn <= 3 and za <= 4 for _, zm, zn, za in checks)
    detail = "; ".join(f"k={k} z_mode {zm:.2f}/5 z_norm {zn:.2f}/3 z_alpha {za:.2f}/4"
                       for k, zm, zn, za in checks)
    verdict(record_property, 8, "Gaussian measure sampling", ok, detail, t0)


def test_criterion_09_wick_against_monte_carlo(record_property):
    t0 = time.perf_counter()
    g = sample_g(0, 5, 1_000_000)
    queries = moments.random_queries(100, 6, 5, np.random.default_rng(0), balanced=True)
    worst = 0.0
    for q in queries:
        mean, se_re, se_im = moments.monte_carlo_moment(q.j_list, q.i_list, g)
        exact = moments.exact_moment(q)
        worst = max(worst, abs(mean.real - exact) / se_re, abs(mean.imag) / se_im)
    verdict(record_property, 9, "exact moments against Monte Carlo", worst <= 4.0,
            f"100 balanced queries, 1e6 shared draws, worst {worst:.2f} SE <= 4", t0)


def test_criterion_10_flow_convergence(record_property):
    t0 = time.perf_counter()
    u0 = field_from_g(sample_g(0, 512, 1)[0], 4)
    rows = convergence_probe(u0, (32, 64, 128, 512), t=0.1, s=1.2)
    errs = [e for _, e in rows]
    ok = all(b < a for a, b in zip(errs, errs[1:]))
    verdict(record_property, 10, "truncated flow convergence", ok,
            "H^1.2 errors " + ", ".join(f"N={n} {e:.3g}" for n, e in rows), t0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
