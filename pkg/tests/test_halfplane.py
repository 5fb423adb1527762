import math

import numpy as np
import pytest

from _frozen import BAND_JUMP, BAND_SIGMA_BAR, FISHER_V_25
from _oracles import fisher_slope_at_one, linear_V_refined

from rdwaves import (
    compare_speed_solutions,
    integrate_halfplane,
    phi_extended,
    quadratic_roots,
    slope_at_zero,
)


def test_fisher_classic_matches_oracle(fisher):
    m, r = fisher
    sol = integrate_halfplane(m, r, 2.5, mode="classic")
    pts = sorted(FISHER_V_25, reverse=True)
    V = np.asarray(sol.V_at(np.array(pts)))
    expect = np.array([FISHER_V_25[u] for u in pts])
    assert np.max(np.abs(V - expect)) < 1e-8
    assert sol.alpha == 0.0
    assert sol.V0 <= 1e-9


def test_fisher_other_speed_against_fresh_oracle(fisher):
    # different speed than the frozen table, oracle evaluated on the spot
    m, r = fisher
    sigma = 3.1
    sol = integrate_halfplane(m, r, sigma, mode="classic")
    pts = np.array([0.7, 0.35, 0.1])
    V_orc, spread = linear_V_refined(sigma, pts)
    V_lib = np.asarray(sol.V_at(pts[::-1]))[::-1]  # oracle returns descending
    assert spread < 1e-10
    assert np.max(np.abs(np.sort(V_lib) - np.sort(V_orc))) < 1e-8


def test_fisher_below_threshold_stalls(fisher):
    m, r = fisher
    sol = integrate_halfplane(m, r, 1.5, mode="classic")
    # no classic connection below the threshold: the run cannot reach the
    # leading edge with V -> 0
    assert (sol.alpha or 0.0) > 0.0 or sol.V0 > 1e-3


def test_slope_at_zero_fisher(fisher):
    m, r = fisher
    for sigma in (2.2, 2.5, 3.0):
        sol = integrate_halfplane(m, r, sigma)
        w, err = slope_at_zero(sol)
        w_minus = quadratic_roots(sigma, 1.0).w_minus
        assert w == pytest.approx(w_minus, rel=2e-3)
        assert err < 0.05 * w_minus


def test_dense_output_consistency(fisher):
    m, r = fisher
    sol = integrate_halfplane(m, r, 2.5, mode="classic")
    # Hermite dense output must be continuous across nodes and match the
    # node values exactly
    u = sol.u_grid
    V_nodes = np.sqrt(np.maximum(sol.R_values, 0.0))
    assert np.allclose(np.asarray(sol.V_at(u)), V_nodes, atol=1e-13)
    mid = 0.5 * (u[:-1] + u[1:])
    V_mid = np.asarray(sol.V_at(mid))
    assert np.all(V_mid >= -1e-12)
    # between-node values stay between a generous envelope of the endpoints
    lo = np.minimum(V_nodes[:-1], V_nodes[1:]) - 5e-3
    hi = np.maximum(V_nodes[:-1], V_nodes[1:]) + 5e-3
    assert np.all(V_mid >= lo) and np.all(V_mid <= hi)


def test_speed_ordering(fisher):
    m, r = fisher
    slow = integrate_halfplane(m, r, 2.2)
    fast = integrate_halfplane(m, r, 2.9)
    report = compare_speed_solutions(slow, fast)
    assert report.passed
    assert report.max_violation <= 1e-9


def test_extended_run_saturates_on_band(band):
    m, r = band
    sol = integrate_halfplane(m, r, BAND_SIGMA_BAR)
    assert sol.mode == "extended"
    assert sol.saturated_spans, "threshold run must have a saturated stretch"
    lo = sol.saturated_spans[0][0]
    hi = sol.saturated_spans[-1][1]
    assert lo == pytest.approx(BAND_JUMP[0], abs=2e-4)
    assert hi == pytest.approx(BAND_JUMP[1], abs=2e-4)
    # the saturated stretch moves along V = sigma*u + c: check the slope
    us = np.linspace(lo + 0.02, hi - 0.02, 7)
    Vs = np.asarray(sol.V_at(us))
    slopes = np.diff(Vs) / np.diff(us)
    assert np.max(np.abs(slopes - BAND_SIGMA_BAR)) < 1e-6


def test_phi_extended_branches(fisher):
    m, r = fisher
    # classic branch: R' = 2 V (sigma - f/g) with g = V for the linear flux
    sigma, u, R = 2.5, 0.5, 0.04
    val = phi_extended(m, r, u, R, sigma)
    V = math.sqrt(R)
    expect = 2.0 * V * (sigma - r.f(u) / V)
    assert val == pytest.approx(expect, rel=1e-12)
    # nonpositive R: the flow pushes back down when f > 0
    assert phi_extended(m, r, 0.5, -1e-6, sigma) == pytest.approx(
        -2.0 * r.f(0.5), rel=1e-12)


def test_slope_structure_at_one(fisher):
    # near u = 1 the profile leaves the rest state along the unique positive
    # eigen-direction; compare against the quadratic-balance slope
    m, r = fisher
    sol = integrate_halfplane(m, r, 2.5, mode="classic")
    w1 = fisher_slope_at_one(2.5)
    eps = 1e-3
    V = float(sol.V_at(1.0 - eps))
    assert V / eps == pytest.approx(w1, rel=1e-2)
