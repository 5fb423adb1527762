"""Speed thresholds by bisection over the half-plane solver.

Two thresholds are computed: the classic threshold sigma_r (smallest speed
at which the backward run never meets the saturation curve and lands at
V = 0) and the singular threshold sigma_s (same landing condition for the
extended run, which is allowed to pass through saturated stretches).  Both
predicates are monotone in sigma, so plain bisection applies.  A run that
lands at V = 0 does so along one of two linear rays at the origin; the
boundary slope tells a speed at the singular threshold from one above it.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

from .errors import (
    BracketNotClosed,
    Degenerate,
    HypothesisViolation,
    Inconclusive,
    NoRealRoots,
)
from .halfplane import U_MIN, SpeedSolution, integrate_halfplane, slope_at_zero
from .model import FluxModel, ReactionModel, gamma_zero, lower_speed_bound

SIGMA_CAP = 1e4
TOL_SIGMA = 1e-6


@dataclass(frozen=True)
class QuadraticRoots:
    """Roots of w^2 - sigma*w + gamma0 = 0, the admissible boundary slopes."""

    w_minus: float
    w_plus: float
    discriminant: float


class SpeedClass(enum.Enum):
    BELOW_SIGMA_S = "below_sigma_s"
    AT_SIGMA_S = "at_sigma_s"
    ABOVE_SIGMA_S = "above_sigma_s"


@dataclass
class ProbeRecord:
    """Evidence retained from one bisection probe."""

    sigma: float
    mode: str
    passed: bool
    V0: float | None
    alpha: float | None
    v0_err: float

    def as_dict(self):
        return {
            "sigma": self.sigma, "mode": self.mode, "passed": self.passed,
            "V0": self.V0, "alpha": self.alpha, "v0_err": self.v0_err,
        }


@dataclass
class SpeedReport:
    sigma_s: float
    sigma_r: float | None
    lower_bound: float
    gamma0: float
    bracket_history: list[tuple[float, bool]] = field(default_factory=list)
    attainment_hint: str = "unknown"
    probes: list[ProbeRecord] = field(default_factory=list)

    def to_json(self, **kw) -> str:
        return json.dumps({
            "sigma_s": self.sigma_s,
            "sigma_r": self.sigma_r,
            "lower_bound": self.lower_bound,
            "gamma0": self.gamma0,
            "attainment_hint": self.attainment_hint,
            "bracket_history": [[s, bool(p)] for s, p in self.bracket_history],
            "probes": [p.as_dict() for p in self.probes],
        }, **kw)


def quadratic_roots(sigma: float, gamma0: float) -> QuadraticRoots:
    """Boundary slopes at u = 0, in the numerically stable root form."""
    if gamma0 < 0:
        raise ValueError("gamma0 must be nonnegative")
    disc = sigma * sigma - 4.0 * gamma0
    if disc < 0:
        raise NoRealRoots(
            f"sigma = {sigma} is below 2*sqrt(gamma0) = {2 * math.sqrt(gamma0)}")
    q = 0.5 * sigma + 0.5 * math.sqrt(disc)
    w_minus = gamma0 / q if q > 0 else 0.0
    return QuadraticRoots(w_minus=w_minus, w_plus=q, discriminant=disc)


def _c_sep(sigma: float) -> float:
    # midpoint of the two boundary slopes; their sum is sigma identically,
    # so the separator does not need the discriminant at all
    return 0.5 * sigma


def _lands_at_zero(sol: SpeedSolution, sigma: float) -> bool:
    return sol.V0 is not None and sol.V0 <= _c_sep(sigma) * U_MIN


def classify_speed(m: FluxModel, r: ReactionModel, sigma: float) -> SpeedClass:
    """Place sigma relative to the singular threshold via the landing slope.

    A run with V0 > 0 is below the threshold.  A run landing at V = 0 does
    so along the steep ray w_plus exactly at the threshold and along the
    shallow ray w_minus above it; the measured slope is matched to the
    nearer root, with a dead band around the midpoint sized by the slope
    error estimate.
    """
    if m.in_ltd(0.0):
        raise Degenerate("flux is totally degenerate at u = 0")
    sol = integrate_halfplane(m, r, sigma)
    if not _lands_at_zero(sol, sigma):
        return SpeedClass.BELOW_SIGMA_S
    g0 = gamma_zero(m, r)
    roots = quadratic_roots(sigma, g0)
    est = slope_at_zero(sol)
    if est is None:
        raise Inconclusive(f"no boundary slope available at sigma = {sigma}")
    w0, err = est
    sep = 0.5 * (roots.w_plus - roots.w_minus)
    band = max(10.0 * err, 1e-3 * max(1.0, roots.w_plus))
    if sep <= band:
        raise Inconclusive(
            f"boundary slopes {roots.w_minus:.6g} and {roots.w_plus:.6g} are "
            f"too close to separate at resolution {band:.2g}")
    if abs(w0 - roots.w_minus) <= sep - band:
        return SpeedClass.ABOVE_SIGMA_S
    if abs(w0 - roots.w_plus) <= sep - band:
        return SpeedClass.AT_SIGMA_S
    raise Inconclusive(
        f"slope {w0:.6g} falls between the admissible roots "
        f"{roots.w_minus:.6g} and {roots.w_plus:.6g}")


def _close_bracket(predicate, lo: float, history) -> tuple[float, float]:
    """Grow an upper end from lo+1 by doubling until the predicate holds."""
    hi = lo + 1.0
    while True:
        if predicate(hi):
            return lo, hi
        lo = hi
        hi *= 2.0
        if hi > SIGMA_CAP:
            raise BracketNotClosed(
                f"predicate still false at sigma = {lo:.6g} (cap {SIGMA_CAP:.0e}); "
                "the threshold may be infinite")


def _bisect(predicate, lo: float, hi: float, tol: float) -> float:
    # return the passing end, not the midpoint, so the predicate is known to
    # hold at the reported threshold and downstream runs at it land cleanly
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def find_sigma_s(m: FluxModel, r: ReactionModel, tol_sigma: float = TOL_SIGMA,
                 ) -> tuple[float, SpeedReport]:
    """Singular threshold: smallest speed whose extended run lands at V = 0."""
    probes: list[ProbeRecord] = []
    history: list[tuple[float, bool]] = []

    def P(sigma: float) -> bool:
        sol = integrate_halfplane(m, r, sigma)
        ok = _lands_at_zero(sol, sigma)
        history.append((sigma, ok))
        probes.append(ProbeRecord(sigma, "extended", ok, sol.V0, sol.alpha, sol.v0_err))
        return ok

    if m.in_ltd(0.0):
        # no boundary slope law applies; only the upper end can be bracketed
        lb, g0 = 0.0, 0.0
    else:
        lb = lower_speed_bound(m, r)
        g0 = gamma_zero(m, r)

    lo, hi = _close_bracket(P, lb, history)
    sigma_s = _bisect(P, lo, hi, tol_sigma)
    report = SpeedReport(sigma_s=sigma_s, sigma_r=None, lower_bound=lb,
                         gamma0=g0, bracket_history=history, probes=probes)
    return sigma_s, report


def _require_regular(m: FluxModel) -> None:
    if m.ltd_intervals:
        raise HypothesisViolation(
            "flux_regular", "flux degenerates on a totally degenerate set")
    if m.classification is not None and not m.classification.regular:
        raise HypothesisViolation(
            "flux_regular", "flux classification reports a degenerate diffusivity")


def find_sigma_r(m: FluxModel, r: ReactionModel, tol_sigma: float = TOL_SIGMA,
                 ) -> tuple[float, str, SpeedReport]:
    """Classic threshold: smallest speed whose classic run reaches u = 0
    unobstructed and lands at V = 0.  Also returns an attainment hint from
    the behavior of the stall level just below the threshold.
    """
    _require_regular(m)
    probes: list[ProbeRecord] = []
    history: list[tuple[float, bool]] = []

    def classic_alpha(sigma: float):
        sol = integrate_halfplane(m, r, sigma, mode="classic")
        return sol

    def Q(sigma: float) -> bool:
        sol = classic_alpha(sigma)
        ok = (sol.alpha == 0.0) and _lands_at_zero(sol, sigma)
        history.append((sigma, ok))
        probes.append(ProbeRecord(sigma, "classic", ok, sol.V0, sol.alpha, sol.v0_err))
        return ok

    lb = lower_speed_bound(m, r)
    g0 = gamma_zero(m, r)
    lo, hi = _close_bracket(Q, lb, history)
    sigma_r = _bisect(Q, lo, hi, tol_sigma)

    # attainment hint: a stall level that stays bounded away from zero just
    # below the threshold signals a tangency, so the infimum is not a speed
    # of any classic wave; a stall level vanishing continuously signals the
    # threshold wave itself exists
    hint = "unknown"
    sol_m = classic_alpha(max(sigma_r - tol_sigma, lb))
    a_m = sol_m.alpha if sol_m.alpha is not None else 1.0
    if a_m <= 1e-3:
        hint = "attained"
    else:
        sol_m2 = classic_alpha(max(sigma_r - 0.1 * tol_sigma, lb))
        a_m2 = sol_m2.alpha if sol_m2.alpha is not None else 1.0
        hint = "not-attained" if a_m2 >= 0.5 * a_m else "unknown"

    report = SpeedReport(sigma_s=math.nan, sigma_r=sigma_r, lower_bound=lb,
                         gamma0=g0, bracket_history=history,
                         attainment_hint=hint, probes=probes)
    return sigma_r, hint, report


@dataclass
class ViscositySweep:
    """Speeds of the viscosity-regularized problem and their limit."""

    eps: list[float]
    sigma: list[float]
    limit: float
    limit_err: float
    monotone: bool

    def rows(self):
        return list(zip(self.eps, self.sigma))


def viscosity_sweep(m: FluxModel, r: ReactionModel, eps_list,
                    tol_sigma: float = TOL_SIGMA) -> ViscositySweep:
    """Classic speeds of a + eps*s for decreasing eps, extrapolated to 0.

    Each regularized flux is over-elliptic, so its classic and singular
    thresholds coincide and find_sigma_r is the natural probe.  The column
    is nonincreasing as eps decreases and converges to the singular
    threshold of the original flux from above.
    """
    from .model import with_viscosity

    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly decreasing")

    sigmas = []
    for eps in eps_list:
        m_eps = with_viscosity(m, eps)
        s_eps, _, _ = find_sigma_r(m_eps, r, tol_sigma)
        sigmas.append(s_eps)

    monotone = all(b <= a + tol_sigma for a, b in zip(sigmas, sigmas[1:]))
    limit, err = _extrapolate(eps_list, sigmas, tol_sigma)
    return ViscositySweep(eps=eps_list, sigma=sigmas, limit=limit,
                          limit_err=err, monotone=monotone)


def _extrapolate(eps, sig, tol_sigma):
    """Aitken delta-squared on the tail of the sweep, with a spread-based
    error estimate; falls back to the last entry when too short."""
    if len(sig) < 3:
        return sig[-1], abs(sig[-1] - sig[0]) + tol_sigma
    accels = []
    for i in range(len(sig) - 2):
        d1 = sig[i + 1] - sig[i]
        d2 = sig[i + 2] - sig[i + 1]
        denom = d2 - d1
        if abs(denom) < 1e-15:
            accels.append(sig[i + 2])
        else:
            accels.append(sig[i + 2] - d2 * d2 / denom)
    limit = accels[-1]
    spread = abs(accels[-1] - accels[-2]) if len(accels) >= 2 else abs(sig[-1] - limit)
    err = spread + tol_sigma
    return limit, err
