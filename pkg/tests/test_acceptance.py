"""Benchmark gates for the full pipeline.

Each test prints one summary line with the measured numbers next to the
required tolerance, then asserts. Run with `pytest tests/test_acceptance.py -v -rA`
to see every line. The two graded runs come from session fixtures in conftest.
"""
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import ulamtail as ut

REPO_ROOT = Path(__file__).resolve().parents[1]

CRITICAL_AMPLITUDE = {
    2.5: 0.15561033863068795321,
    3.0: 0.4150929106440605849,
    5.0: 1.8095462773118563385,
    10.0: 6.0570009596415381007,
}


def _summary(tag, ok, detail):
    print(f"[{tag}] {'PASS' if ok else 'FAIL'}: {detail}")
    return detail


def test_a01_critical_amplitude_closed_form():
    t0 = time.perf_counter()
    worst_sigma = 0.0
    worst_mult = 0.0
    for b, sig_ref in CRITICAL_AMPLITUDE.items():
        sig, x_tan = ut.bifurcation_parameter(b)
        worst_sigma = max(worst_sigma, abs(sig - sig_ref) / sig_ref)
        m = ut.tanh_affine(b, sig)
        mult = ut.extremal_derivative(m, "+", x_tan, 1)
        worst_mult = max(worst_mult, abs(mult - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst_sigma <= 1e-10 and worst_mult <= 1e-10 and elapsed < 1.0
    detail = _summary(
        "a01", ok,
        f"amplitude rel err {worst_sigma:.2e} (<=1e-10), "
        f"tangency multiplier defect {worst_mult:.2e} (<=1e-10), {elapsed:.2f}s (<1s)",
    )
    assert ok, detail


def test_a02_invariant_interval_count_across_amplitudes():
    t0 = time.perf_counter()
    sig_star, _ = ut.bifurcation_parameter(5.0)
    counts = [
        len(ut.minimal_invariant_intervals(ut.tanh_affine(5.0, f * sig_star)))
        for f in (0.25, 1.0, 2.0)
    ]
    elapsed = time.perf_counter() - t0
    ok = counts == [2, 2, 1] and elapsed < 5.0
    detail = _summary(
        "a02", ok,
        f"interval counts below/at/above the critical amplitude {counts} "
        f"(need [2, 2, 1]), {elapsed:.2f}s (<5s)",
    )
    assert ok, detail


def test_a03_transfer_matrix_oracles(uniform):
    t0 = time.perf_counter()
    pure = ut.affine(0.0, 1.0)
    grid = ut.build_grid((-1.0, 1.0), 2000)

    shaped = ut.poly_symmetric_noise(1)
    tm_shaped = ut.assemble(pure, shaped, grid)
    phi = ut.stationary(tm_shaped).phi
    projected = ut.consecutive_masses(shaped, grid.edges) / grid.widths
    err_projection = float(np.max(np.abs(phi - projected)))

    tm_flat = ut.assemble(pure, uniform, grid)
    err_flat = float(np.max(np.abs(ut.stationary(tm_flat).phi - 0.5)))

    bench = ut.affine(0.5, 1.0)
    iv = ut.minimal_invariant_intervals(bench)[0]
    tm_bench = ut.assemble(bench, uniform, ut.build_grid(iv.bounds, 2000))
    defect = max(tm.row_defect for tm in (tm_shaped, tm_flat, tm_bench))

    elapsed = time.perf_counter() - t0
    ok = err_projection <= 1e-12 and err_flat <= 1e-10 and defect <= 1e-12 and elapsed < 10.0
    detail = _summary(
        "a03", ok,
        f"pure-noise projection err {err_projection:.2e} (<=1e-12), "
        f"flat density err {err_flat:.2e} (<=1e-10), "
        f"row defect {defect:.2e} (<=1e-12), {elapsed:.2f}s (<10s)",
    )
    assert ok, detail


def test_a04_simulation_matches_transfer_density(uniform):
    t0 = time.perf_counter()
    m = ut.affine(0.5, 1.0)
    iv = ut.minimal_invariant_intervals(m)[0]
    grid = ut.build_grid(iv.bounds, 500)
    dens = ut.stationary(ut.assemble(m, uniform, grid))
    plan = ut.SimulationPlan(x0=0.0, n_samples=1_000_000, seed=0, burn_in=1000)
    first = ut.simulate(m, uniform, plan, grid=grid)
    second = ut.simulate(m, uniform, plan, grid=grid)
    l1 = ut.l1_distance(first, dens)
    identical = bool(np.array_equal(first.counts, second.counts))
    elapsed = time.perf_counter() - t0
    ok = l1 <= 0.05 and identical and elapsed < 30.0
    detail = _summary(
        "a04", ok,
        f"L1 distance {l1:.4f} (<=0.05), re-run bit-identical {identical}, "
        f"{elapsed:.1f}s (<30s)",
    )
    assert ok, detail


def test_a05_hitting_time_constants():
    t0 = time.perf_counter()
    lines, failures = [], []
    for lam in (0.3, 0.5, 0.9):
        m = ut.affine(lam, 1.0)
        n = ut.hitting_time(m, x0=-1.0, x=-1e-6, x_plus=1.0 / (1.0 - lam))
        est = n / math.log(1e-6)
        ref = 1.0 / math.log(lam)
        rel = abs(est - ref) / abs(ref)
        line = f"lam={lam}: n={n}, n/ln|x|={est:.4f} vs {ref:.4f}, rel {rel:.2%} (<=2%)"
        lines.append(line)
        if rel > 0.02:
            failures.append(line)
    for alpha, r, x0 in ((1.0, 2, -0.4), (2.0, 3, -0.3)):
        m = ut.power_nonhyp(alpha, r, 0.05)
        n = ut.hitting_time(m, x0=x0, x=-1e-3)
        est = (1e-3) ** (r - 1) * n
        ref = 1.0 / (alpha * (r - 1))
        rel = abs(est - ref) / ref
        line = (
            f"alpha={alpha}, r={r}: n={n}, |x|^(r-1) n={est:.4f} vs {ref:.4f}, "
            f"rel {rel:.2%} (<=5%)"
        )
        lines.append(line)
        if rel > 0.05:
            failures.append(line)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60.0
    detail = _summary("a05", ok, "; ".join(lines) + f"; {elapsed:.1f}s (<60s)")
    assert ok, detail


def test_a06_estimators_recover_synthetic_constants():
    t0 = time.perf_counter()
    hyp = ut.BoundaryClassification("hyperbolic", 0.5, None, None, 0.0)
    nonhyp = ut.BoundaryClassification("nonhyperbolic", 1.0, 2, 1.0, 0.0)
    c1 = 1.0 / (2.0 * math.log(0.5))
    c2 = 2.0
    phi_h = lambda x: math.exp(c1 * math.log(-x) ** 2)
    phi_n = lambda x: math.exp(c2 * math.log(-x) / (-x))

    err_c1 = abs(ut.density_tail_exponent(phi_h, 0.0, hyp).estimate - c1)
    err_c2 = abs(ut.density_tail_exponent(phi_n, 0.0, nonhyp).estimate - c2)
    fit_h = ut.loglog_fit(phi_h, 0.0, hyp)
    err_slope = abs(fit_h.slope - 2.0)
    err_icept = abs(fit_h.intercept - math.log(-c1))
    elapsed = time.perf_counter() - t0
    ok = max(err_c1, err_c2, err_slope, err_icept) <= 1e-6 and elapsed < 1.0
    detail = _summary(
        "a06", ok,
        f"contracting constant err {err_c1:.1e}, neutral constant err {err_c2:.1e}, "
        f"slope err {err_slope:.1e}, intercept err {err_icept:.1e} (all <=1e-6), "
        f"{elapsed:.2f}s (<1s)",
    )
    assert ok, detail


def test_a07_contracting_boundary_tail_law(contracting_boundary_run):
    run = contracting_boundary_run
    cls = run["classification"]
    c1 = 1.0 / (2.0 * math.log(cls.lam))
    fit = ut.loglog_fit(
        run["density"], run["x_plus"], cls, window=np.geomspace(1e-1, 1e-3, 20)
    )
    slope_ok = abs(fit.slope - 2.0) <= 0.25
    rep = ut.density_tail_exponent(run["density"], run["x_plus"], cls)
    rel = abs(rep.estimate - c1) / abs(c1)
    const_ok = rel <= 0.30
    ok = slope_ok and const_ok
    detail = _summary(
        "a07", ok,
        f"loglog slope {fit.slope:.4f} (need 2 +/- 0.25), "
        f"extrapolated constant {rep.estimate:.4f} vs {c1:.4f}, rel {rel:.1%} (<=30%)",
    )
    assert ok, detail


def test_a08_neutral_boundary_tail_law(neutral_boundary_run):
    run = neutral_boundary_run
    cls = run["classification"]
    curvature = ut.extremal_derivative(run["map"], "+", run["x_plus"], 2)
    ln_c2 = math.log(4.0 / curvature)
    fit = ut.loglog_fit(
        run["density"], run["x_plus"], cls, window=np.geomspace(3e-1, 3e-3, 20)
    )
    rel = abs(fit.intercept - ln_c2) / abs(ln_c2)
    ok = fit.residual <= 0.3 and rel <= 0.30
    detail = _summary(
        "a08", ok,
        f"sup residual {fit.residual:.4f} (<=0.3), "
        f"intercept {fit.intercept:.4f} vs {ln_c2:.4f}, rel {rel:.2%} (<=30%)",
    )
    assert ok, detail


def test_a09_density_and_measure_routes_agree(
    contracting_boundary_run, neutral_boundary_run
):
    lines, failures = [], []
    for label, run in (
        ("contracting", contracting_boundary_run),
        ("neutral", neutral_boundary_run),
    ):
        cls = run["classification"]
        d_est = ut.density_tail_exponent(run["density"], run["x_plus"], cls).estimate
        m_est = ut.measure_tail_exponent(run["density"], run["x_plus"], cls).estimate
        rel = abs(d_est - m_est) / min(abs(d_est), abs(m_est))
        line = f"{label}: density {d_est:.4f} vs measure {m_est:.4f}, rel {rel:.2%} (<=10%)"
        lines.append(line)
        if rel > 0.10:
            failures.append(line)
    ok = not failures
    detail = _summary("a09", ok, "; ".join(lines))
    assert ok, detail


def test_a10_property_suite_standalone():
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "tests/test_properties.py", "-q"],
        cwd=REPO_ROOT,
        capture_output=True,
        text=True,
    )
    elapsed = time.perf_counter() - t0
    ok = proc.returncode == 0 and elapsed < 120.0
    detail = _summary(
        "a10", ok,
        f"property suite exit code {proc.returncode} (need 0), {elapsed:.1f}s (<120s)",
    )
    assert ok, detail + "\n" + proc.stdout[-2000:]
