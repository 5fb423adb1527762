"""Acceptance gate: every shipped claim, at its stated tolerance and budget.

Each test prints one summary line (visible with -s or in the captured
output); the pytest verdict per test is the pass/fail record.  Budgets are
asserted from wall-clock measurements on the same run that produced the
numbers, so a regression in speed fails loudly too.
"""

import math
import time

import numpy as np
import pytest

from _frozen import PUSHED_A, PUSHED_SIGMA

from rdwaves import (
    SimGrid,
    atan_limiter,
    build_G,
    check_bertsch_dalpasso,
    check_jumps,
    compare_speed_solutions,
    find_sigma_r,
    find_sigma_s,
    integrate_halfplane,
    invert_profile,
    limited_flux,
    linear_flux,
    logistic_reaction,
    make_example,
    make_example4,
    measure_speed,
    poly_reaction,
    quadratic_roots,
    ratio_limiter,
    residual_classic,
    separable_flux,
    simulate_front,
    slope_at_zero,
    viscosity_sweep,
)
from rdwaves.presets import DegenerateFamilySpec


def _report(label, detail, elapsed, budget):
    print(f"[{label}] PASS {detail} ({elapsed:.1f}s / {budget:.0f}s budget)")
    assert elapsed < budget


def test_criterion_1_pulled_speeds_linear_flux():
    worst = 0.0
    slowest = 0.0
    for d, k in ((1.0, 1.0), (4.0, 1.0), (0.25, 4.0)):
        t0 = time.monotonic()
        sigma, _ = find_sigma_s(linear_flux(d), logistic_reaction(k))
        dt = time.monotonic() - t0
        expect = 2.0 * math.sqrt(d * k)
        rel = abs(sigma - expect) / expect
        assert rel < 1e-3, f"(d={d}, k={k}): rel error {rel:.2e}"
        assert dt < 1.0
        worst = max(worst, rel)
        slowest = max(slowest, dt)
    _report("criterion 1", f"three linear-flux thresholds, worst rel err "
            f"{worst:.1e}", slowest, 1.0)


def test_criterion_2_lower_bound_random_fluxes():
    t0 = time.monotonic()
    rng = np.random.default_rng(20260814)
    worst = math.inf
    for i in range(20):
        d0 = float(rng.uniform(0.2, 2.0))
        bow = float(rng.uniform(-0.9, 4.0))

        def D(u, d0=d0, bow=bow):
            return d0 * (1.0 + bow * u * (1.0 - u))

        use_ratio = rng.random() < 0.7
        phi = (ratio_limiter(float(rng.uniform(2.0, 3.0))) if use_ratio
               else atan_limiter())
        if rng.random() < 0.5:
            r = logistic_reaction(float(rng.uniform(0.5, 4.0)))
        else:
            k = float(rng.uniform(0.5, 2.0))
            r = poly_reaction([k, k * float(rng.uniform(0.0, 10.0))])
        m = separable_flux(D, phi, label=f"random-{i}")
        sigma, _ = find_sigma_s(m, r, tol_sigma=1e-5)
        bound = 2.0 * math.sqrt(d0 * phi.dphi0 * r.df0)
        worst = min(worst, sigma - bound)
    assert worst >= -1e-6, f"threshold fell below the linear bound: {worst:.2e}"
    _report("criterion 2", f"20 random separable fluxes, worst margin "
            f"{worst:+.1e}", time.monotonic() - t0, 30.0)


def test_criterion_3_boundary_slopes():
    t0 = time.monotonic()
    m, r = linear_flux(1.0), logistic_reaction(1.0)
    worst_pulled = 0.0
    for sigma in (2.2, 2.5, 3.0):
        sol = integrate_halfplane(m, r, sigma)
        w, _ = slope_at_zero(sol)
        w_minus = quadratic_roots(sigma, 1.0).w_minus
        rel = abs(w - w_minus) / w_minus
        assert rel < 0.02, f"sigma={sigma}: slope off by {rel:.2%}"
        worst_pulled = max(worst_pulled, rel)

    ml, rl = limited_flux()
    sigma_s, report = find_sigma_s(ml, rl)
    sol = integrate_halfplane(ml, rl, sigma_s)
    w, _ = slope_at_zero(sol)
    w_plus = quadratic_roots(sigma_s, report.gamma0).w_plus
    rel_pushed = abs(w - w_plus) / w_plus
    assert rel_pushed < 0.05, f"threshold slope off by {rel_pushed:.2%}"
    _report("criterion 3", f"pulled slopes worst {worst_pulled:.2%}, pushed "
            f"threshold slope {rel_pushed:.2%} from w_plus",
            time.monotonic() - t0, 10.0)


def test_criterion_4_monotonicity_suites():
    t0 = time.monotonic()
    rng = np.random.default_rng(41)
    mf, rf = linear_flux(1.0), logistic_reaction(1.0)
    ml, rl = limited_flux()
    from rdwaves import with_viscosity

    worst = 0.0
    for i in range(50):
        if i % 2 == 0:
            s1, s2 = sorted(rng.uniform(2.05, 4.5, 2))
            rep = compare_speed_solutions(integrate_halfplane(mf, rf, s1),
                                          integrate_halfplane(mf, rf, s2))
        else:
            s1, s2 = sorted(rng.uniform(1.10, 2.5, 2))
            rep = compare_speed_solutions(integrate_halfplane(ml, rl, s1),
                                          integrate_halfplane(ml, rl, s2))
        worst = max(worst, rep.max_violation)
        assert rep.alpha_ordered
    for _ in range(25):
        e1, e2 = sorted(rng.uniform(0.02, 0.5, 2))
        rep = compare_speed_solutions(
            integrate_halfplane(with_viscosity(ml, e2), rl, 1.9),
            integrate_halfplane(with_viscosity(ml, e1), rl, 1.9))
        worst = max(worst, rep.max_violation)
    assert worst <= 1e-9, f"ordering violated by {worst:.2e}"
    _report("criterion 4", f"50 speed pairs + 25 viscosity pairs, worst "
            f"violation {worst:.1e}", time.monotonic() - t0, 60.0)


def test_criterion_5_viscosity_limit():
    t0 = time.monotonic()
    m, r = limited_flux()
    sweep = viscosity_sweep(m, r, [0.2, 0.1, 0.05, 0.025, 0.0125],
                            tol_sigma=1e-6)
    assert sweep.monotone, "sweep column must be nonincreasing"
    sigma_s, _ = find_sigma_s(m, r, tol_sigma=1e-6)
    gap = abs(sweep.limit - sigma_s)
    allowed = 5e-6 + sweep.limit_err
    assert gap <= allowed, f"extrapolated limit off by {gap:.2e} > {allowed:.2e}"
    _report("criterion 5", f"5-point sweep monotone, limit-vs-direct gap "
            f"{gap:.1e} <= {allowed:.1e}", time.monotonic() - t0, 300.0)


def test_criterion_6_degenerate_band_regimes():
    t0 = time.monotonic()
    m0, r0 = make_example(3)
    sigma_bar, _ = find_sigma_s(m0, r0, tol_sigma=1e-6)

    # (a) a small lift leaves the threshold where it was, yet no classic
    # wave moves that slowly: the classic threshold sits strictly higher
    ms, rs = make_example4(DegenerateFamilySpec(lam=0.048))
    sig_small, _ = find_sigma_s(ms, rs, tol_sigma=1e-6)
    assert abs(sig_small - sigma_bar) <= 2e-6
    sig_r, hint, _ = find_sigma_r(ms, rs, tol_sigma=1e-6)
    gap = sig_r - sig_small
    assert gap > 0.1, f"expected a wide speed gap, got {gap:.3f}"

    # (b) a large lift destroys the saturated descent and raises the bar
    ml, rl = make_example4(DegenerateFamilySpec(lam=0.75))
    sig_large, _ = find_sigma_s(ml, rl, tol_sigma=1e-6)
    assert sig_large > sigma_bar + 1e-6

    # (c) the threshold profile of the band family has exactly one jump
    # satisfying Rankine-Hugoniot; the same jump fails the secant test
    # against the lifted flux
    sol = integrate_halfplane(m0, r0, sigma_bar, max_du=1e-3)
    gmap = build_G(sol, 0.1, m=m0)
    prof = invert_profile(gmap, np.linspace(*gmap.xi_window(), 4001))
    assert len(prof.saturation_points) == 1
    report = check_jumps(prof, m0, sigma_bar)
    assert report.rh_residuals[0] <= 1e-6
    assert report.bdp_ok
    margins_lifted = check_bertsch_dalpasso(prof, ml, sigma_bar)
    assert max(margins_lifted) > 1e-3, "lifted flux must break the jump"
    _report("criterion 6", f"gap sigma_r-sigma_s {gap:.3f}, large-lift "
            f"threshold +{sig_large - sigma_bar:.3f}, one jump with RH "
            f"{report.rh_residuals[0]:.1e}, lifted-flux secant margin "
            f"{max(margins_lifted):.2e}", time.monotonic() - t0, 120.0)


def test_criterion_7_profile_self_consistency():
    t0 = time.monotonic()
    m, r = linear_flux(1.0), logistic_reaction(1.0)
    sol = integrate_halfplane(m, r, 2.5, max_du=1e-3)
    gmap = build_G(sol, 0.5, m=m)
    xi_lo, xi_hi = gmap.xi_window(u_min=1e-4, u_max=1.0 - 1e-4)

    res = {}
    for h in (2e-3, 1e-3):
        n = int(round((xi_hi - xi_lo) / h)) + 1
        prof = invert_profile(gmap, np.linspace(xi_lo, xi_hi, n))
        res[h] = residual_classic(prof, m, r, 2.5)
    assert res[1e-3] <= 1e-4
    ratio = res[2e-3] / res[1e-3]
    # second-order interior scheme: halving the grid divides the residual
    # by about four while both levels sit in the truncation regime
    assert 3.0 <= ratio <= 5.0, f"halving ratio {ratio:.2f}"

    m0, r0 = make_example(3)
    sigma_bar, _ = find_sigma_s(m0, r0, tol_sigma=1e-6)
    sol0 = integrate_halfplane(m0, r0, sigma_bar, max_du=1e-3)
    gmap0 = build_G(sol0, 0.1, m=m0)
    prof0 = invert_profile(gmap0, np.linspace(*gmap0.xi_window(), 4001))
    rep = check_jumps(prof0, m0, sigma_bar)
    ident = abs(rep.h_residuals[0] - rep.rh_residuals[0])
    assert ident <= 1e-12, "height continuity must equal Rankine-Hugoniot"
    _report("criterion 7", f"residual {res[1e-3]:.1e} at h=1e-3, halving "
            f"ratio {ratio:.2f}, jump identity gap {ident:.1e}",
            time.monotonic() - t0, 30.0)


def test_criterion_8_pde_cross_check():
    t0 = time.monotonic()
    m, r = linear_flux(1.0), logistic_reaction(1.0)
    traj = simulate_front(m, r, SimGrid(h=0.05, L=200.0, T=60.0))
    meas = measure_speed(traj)
    rel = abs(meas.speed - 2.0) / 2.0
    assert rel <= 0.05, f"front speed {meas.speed:.4f} off by {rel:.2%}"
    assert meas.spread <= 0.02, f"level spread {meas.spread:.2%}"
    _report("criterion 8", f"front speed {meas.speed:.4f} ({rel:.2%} from 2), "
            f"level spread {meas.spread:.2%}", time.monotonic() - t0, 180.0)
