import math

import numpy as np
import pytest

from _frozen import BAND_JUMP, BAND_SIGMA_BAR, FISHER_G_INC
from _oracles import fisher_slope_at_one

from rdwaves import (
    AnchorOnPlateau,
    DomainViolation,
    build_G,
    check_jumps,
    integrate_halfplane,
    invert_profile,
    invert_flux,
    residual_classic,
)


@pytest.fixture(scope="module")
def fisher_sol(fisher):
    m, r = fisher
    return integrate_halfplane(m, r, 2.5, max_du=1e-3)


@pytest.fixture(scope="module")
def fisher_map(fisher, fisher_sol):
    m, _ = fisher
    return build_G(fisher_sol, 0.5, m=m)


@pytest.fixture(scope="module")
def band_sol(band):
    m, r = band
    return integrate_halfplane(m, r, BAND_SIGMA_BAR, max_du=1e-3)


@pytest.fixture(scope="module")
def band_map(band, band_sol):
    m, _ = band
    return build_G(band_sol, 0.1, m=m)


def test_map_increments_match_oracle(fisher_map):
    for (ua, ub), expect in FISHER_G_INC.items():
        inc = float(fisher_map.G_at(ub) - fisher_map.G_at(ua))
        assert inc == pytest.approx(expect, abs=5e-9)


def test_map_anchor_and_divergence(fisher_map):
    assert float(fisher_map.G_at(0.5)) == pytest.approx(0.0, abs=1e-13)
    assert fisher_map.diverges == (True, True)
    assert fisher_map.plateaus == ()
    # per-decade growth rates at the ends are the reciprocal departure slopes
    lo_rate, hi_rate = fisher_map.end_rates
    assert lo_rate == pytest.approx(2.0, rel=1e-3)          # 1 / w_minus(2.5)
    assert hi_rate == pytest.approx(1.0 / fisher_slope_at_one(2.5), rel=1e-3)


def test_map_translation_invariance(fisher, fisher_sol, fisher_map):
    m, _ = fisher
    shifted = build_G(fisher_sol, 0.3, m=m)
    us = np.array([0.05, 0.2, 0.5, 0.8, 0.95])
    diff = np.asarray(shifted.G_at(us)) - np.asarray(fisher_map.G_at(us))
    assert np.max(np.abs(diff - diff[0])) < 1e-11


def test_inversion_exactness(fisher_map):
    lo, hi = fisher_map.xi_window()
    xi = np.linspace(lo, hi, 4001)
    prof = invert_profile(fisher_map, xi)
    assert prof.kind == "classic"
    assert np.all(np.diff(prof.u_values) >= 0.0)
    live = (prof.u_values > 1e-4) & (prof.u_values < 1.0 - 1e-4)
    back = np.asarray(fisher_map.G_at(prof.u_values[live]))
    assert np.max(np.abs(back - xi[live])) < 1e-10


def test_profile_slope_identity(fisher, fisher_sol, fisher_map):
    # d u / d xi equals the gradient level g(u, V) carried by the flow;
    # for the linear flux that gradient is V itself
    xi = np.linspace(-6.0, 8.0, 14001)
    prof = invert_profile(fisher_map, xi)
    h = xi[1] - xi[0]
    du = (prof.u_values[2:] - prof.u_values[:-2]) / (2.0 * h)
    u_mid = prof.u_values[1:-1]
    V = np.asarray(fisher_sol.V_at(u_mid))
    keep = (u_mid > 1e-3) & (u_mid < 1.0 - 1e-3)
    assert np.max(np.abs(du[keep] - V[keep])) < 1e-5


def test_band_profile_single_jump(band, band_map, tmp_path):
    m, _ = band
    assert len(band_map.plateaus) == 1
    lo, hi = band_map.xi_window()
    xi = np.linspace(lo, hi, 4001)
    prof = invert_profile(band_map, xi)
    assert prof.kind == "flux-saturated"
    assert len(prof.saturation_points) == 1
    _, mu, nu = prof.saturation_points[0]
    assert mu == pytest.approx(BAND_JUMP[0], abs=2e-4)
    assert nu == pytest.approx(BAND_JUMP[1], abs=2e-4)
    # the emitted csv marks exactly one grid interval as the jump
    path = tmp_path / "band.csv"
    prof.write_csv(path)
    marked = sum(int(line.rsplit(",", 1)[1])
                 for line in path.read_text().splitlines()[1:])
    assert marked == 1


def test_band_jump_conditions(band, band_map):
    m, _ = band
    lo, hi = band_map.xi_window()
    prof = invert_profile(band_map, np.linspace(lo, hi, 4001))
    report = check_jumps(prof, m, BAND_SIGMA_BAR)
    assert report.rh_ok and report.bdp_ok and report.h_ok
    assert report.rh_residuals[0] <= 1e-6 * BAND_SIGMA_BAR
    assert report.bdp_margins[0] == 0.0
    # the height-continuity residual is the same algebra as Rankine-Hugoniot
    assert abs(report.h_residuals[0] - report.rh_residuals[0]) <= 1e-12


def test_jump_steepens_one_sided_slopes(band_map):
    # the secant across the jump carries the full height over one cell, so
    # it scales like 1/h while the smooth flanks stay bounded
    xi_k = band_map.plateaus[0][2]
    height = BAND_JUMP[1] - BAND_JUMP[0]
    for h in (1e-3, 1e-4, 1e-5):
        xi = np.array([xi_k - 2 * h, xi_k - h, xi_k + h, xi_k + 2 * h])
        prof = invert_profile(band_map, xi)
        secant = (prof.u_values[2] - prof.u_values[1]) / (2 * h)
        flank = (prof.u_values[1] - prof.u_values[0]) / h
        assert secant > 0.9 * height / (2 * h)
        assert flank < 10.0


def test_anchor_on_plateau_rejected(band, band_sol):
    m, _ = band
    with pytest.raises(AnchorOnPlateau):
        build_G(band_sol, 0.5, m=m)


def test_subthreshold_run_rejected(fisher):
    m, r = fisher
    sol = integrate_halfplane(m, r, 1.5)
    with pytest.raises(DomainViolation, match="below the singular threshold"):
        build_G(sol, 0.5, m=m)


def test_residual_classic_small_on_fisher(fisher, fisher_map):
    m, r = fisher
    xi_lo, xi_hi = fisher_map.xi_window(u_min=1e-4, u_max=1.0 - 1e-4)
    n = int(round((xi_hi - xi_lo) / 2e-3)) + 1
    prof = invert_profile(fisher_map, np.linspace(xi_lo, xi_hi, n))
    res = residual_classic(prof, m, r, 2.5)
    assert res < 1e-6


def test_residual_classic_grid_requirements(fisher, fisher_map, fisher_sol):
    m, r = fisher
    bad = invert_profile(fisher_map, np.array([0.0, 0.1, 0.3, 0.6, 1.0, 1.5]))
    with pytest.raises(DomainViolation):
        residual_classic(bad, m, r, 2.5)
    tiny = invert_profile(fisher_map, np.linspace(0.0, 0.1, 4))
    with pytest.raises(DomainViolation):
        residual_classic(tiny, m, r, 2.5)


def test_profile_csv_roundtrip(tmp_path, fisher_map):
    prof = invert_profile(fisher_map, np.linspace(-4.0, 4.0, 101))
    path = tmp_path / "profile.csv"
    prof.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "xi,u,is_jump"
    assert len(lines) == 102
    xi0, u0, j0 = lines[1].split(",")
    assert float(xi0) == pytest.approx(-4.0)
    assert 0.0 <= float(u0) <= 1.0
    assert j0 in ("0", "1")
