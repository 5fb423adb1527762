"""Independent front-speed measurement by direct time stepping.

The solvers elsewhere in the package never integrate the parabolic equation
itself; they work on the reduced level problem.  This module provides the
cross-check: an explicit conservative discretization of

    u_t = (a(u, u_x))_x + f(u)

on a line segment, started from a monotone step, with the front position
x_c(t) of each reference level read off by linear interpolation.  The
asymptotic slope of x_c(t) is the empirical wave speed.

Only over-elliptic fluxes are accepted.  For saturating fluxes the Cauchy
theory is much weaker and an explicit scheme proves nothing; wrap such
models in a small viscosity first.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (CFLViolation, HypothesisViolation, InsufficientWindow,
                     NonMonotoneProfile)
from .model import FluxModel, ReactionModel, classify_flux

LEVELS = (0.1, 0.5, 0.9)
CFL_SAFETY = 0.45


@dataclass
class SimGrid:
    """Space-time grid and initial condition for one front run.

    ``dt`` of None picks the largest stable step times ``CFL_SAFETY``.
    ``ic`` is "step" (u = 1 left of the origin) or "bump" (u = 1 on the
    middle half of the left side, fronts on both flanks).
    """

    h: float = 0.05
    L: float = 200.0
    T: float = 60.0
    dt: float | None = None
    ic: str = "step"
    n_out: int = 400


@dataclass
class FrontTrajectory:
    """Level-crossing positions over time for one simulation."""

    t: np.ndarray
    x: dict[float, np.ndarray]
    levels: tuple[float, ...]
    grid: SimGrid
    n_clipped: int
    monotone: bool
    label: str = ""

    def write_csv(self, path) -> None:
        cols = ",".join(f"x_{c:g}" for c in self.levels)
        with open(path, "w", newline="") as fh:
            fh.write(f"t,{cols}\n")
            for i, t in enumerate(self.t):
                row = ",".join(f"{self.x[c][i]:.12e}" for c in self.levels)
                fh.write(f"{t:.12e},{row}\n")


@dataclass
class SpeedMeasurement:
    """Least-squares front speed with its per-level scatter."""

    speed: float
    stderr: float
    per_level: dict[float, float] = field(default_factory=dict)
    spread: float = 0.0


def _max_gradient_slope(m: FluxModel, n: int = 41) -> float:
    """Sampled bound on da/ds, the stiffness scale of the explicit step."""
    cls = m.classification or classify_flux(m)
    best = 0.0
    if cls.m_bound is not None and math.isfinite(cls.m_bound):
        best = cls.m_bound
    ugrid = np.linspace(0.0, 1.0, n)
    sgrid = np.concatenate(([0.0], np.geomspace(1e-3, 1e3, n)))
    for u in ugrid:
        for s in sgrid:
            d = m.da_ds(float(u), float(s))
            if math.isfinite(d) and d > best:
                best = d
    return best


def _require_over_elliptic(m: FluxModel) -> None:
    cls = m.classification or classify_flux(m)
    if cls.over_elliptic is None:
        raise HypothesisViolation(
            "flux_over_elliptic",
            f"{m.label or 'flux'} saturates; the explicit oracle only "
            "handles over-elliptic fluxes (wrap in with_viscosity first)")


def _initial_state(x: np.ndarray, ic: str) -> np.ndarray:
    if ic == "step":
        return np.where(x < 0.0, 1.0, 0.0)
    if ic == "bump":
        L = x[-1]
        return np.where((x > -0.75 * L) & (x < -0.25 * L), 1.0, 0.0)
    raise ValueError(f"unknown initial condition {ic!r}")


def _crossings(x: np.ndarray, u: np.ndarray, levels, side: str) -> dict:
    """Linear-interpolation positions of each level on a monotone front.

    ``side="right"`` reads the rightmost downward crossing, ``side="left"``
    the leftmost upward one (for bump data).
    """
    out = {}
    for c in levels:
        above = u >= c
        if not above.any() or above.all():
            out[c] = math.nan
            continue
        if side == "right":
            i = int(np.max(np.nonzero(above)[0]))
            if i + 1 >= len(u):
                out[c] = math.nan
                continue
            u0, u1 = u[i], u[i + 1]
            out[c] = x[i] + (x[i + 1] - x[i]) * (u0 - c) / max(u0 - u1, 1e-300)
        else:
            i = int(np.min(np.nonzero(above)[0]))
            if i == 0:
                out[c] = math.nan
                continue
            u0, u1 = u[i - 1], u[i]
            out[c] = x[i - 1] + (x[i] - x[i - 1]) * (c - u0) / max(u1 - u0, 1e-300)
    return out


def simulate_front(m: FluxModel, r: ReactionModel, grid: SimGrid | None = None,
                   levels=LEVELS, side: str = "right") -> FrontTrajectory:
    """Explicit conservative march of the reaction-diffusion front.

    Face gradients are central, the flux is evaluated at face midpoint
    values, and the reaction is pointwise explicit Euler.  The stability
    bound dt <= h^2 / (2 max da/ds) is enforced, not assumed.
    """
    grid = grid or SimGrid()
    _require_over_elliptic(m)
    slope = _max_gradient_slope(m)
    if slope <= 0.0:
        raise HypothesisViolation("flux_over_elliptic", "da/ds sampled as 0")
    dt_max = grid.h * grid.h / (2.0 * slope)
    dt = grid.dt if grid.dt is not None else CFL_SAFETY * dt_max
    if dt > dt_max:
        raise CFLViolation(
            f"dt = {dt:g} exceeds the stability bound {dt_max:g} "
            f"(h = {grid.h:g}, max da/ds = {slope:g})")

    x = np.arange(-grid.L, grid.L + 0.5 * grid.h, grid.h)
    u = _initial_state(x, grid.ic)
    a_np = m.a_np
    if a_np is None:
        a_scalar = m.a
        a_np = np.vectorize(lambda uu, ss: a_scalar(float(uu), float(ss)))
    f_np = r.f_np
    if f_np is None:
        f_scalar = r.f
        f_np = np.vectorize(lambda uu: f_scalar(float(uu)))

    n_steps = max(1, int(math.ceil(grid.T / dt)))
    dt = grid.T / n_steps
    out_every = max(1, n_steps // max(grid.n_out, 1))

    t_rec, x_rec = [], {c: [] for c in levels}
    n_clipped = 0
    monotone = True
    inv_h = 1.0 / grid.h

    def record(t_now, u_now):
        nonlocal monotone
        pos = _crossings(x, u_now, levels, side)
        t_rec.append(t_now)
        for c in levels:
            x_rec[c].append(pos[c])
        if grid.ic == "step" and np.any(np.diff(u_now) > 1e-10):
            monotone = False

    record(0.0, u)
    for k in range(1, n_steps + 1):
        s_face = (u[1:] - u[:-1]) * inv_h
        u_face = 0.5 * (u[1:] + u[:-1])
        flux = a_np(u_face, s_face)
        du = np.zeros_like(u)
        du[1:-1] = (flux[1:] - flux[:-1]) * inv_h
        u = u + dt * (du + f_np(u))
        # rest states are pinned at the ends of the segment
        u[0], u[-1] = (1.0, 0.0) if grid.ic == "step" else (0.0, 0.0)
        bad = (u < 0.0) | (u > 1.0)
        if bad.any():
            n_clipped += int(np.count_nonzero(bad))
            u = np.clip(u, 0.0, 1.0)
        if k % out_every == 0 or k == n_steps:
            record(k * dt, u)

    if not monotone:
        warnings.warn("front lost monotonicity in x", NonMonotoneProfile)
    return FrontTrajectory(
        t=np.array(t_rec), x={c: np.array(v) for c, v in x_rec.items()},
        levels=tuple(levels), grid=grid, n_clipped=n_clipped,
        monotone=monotone, label=m.label)


def measure_speed(traj: FrontTrajectory, fit_start: float = 0.25,
                  fit_end: float = 1.0) -> SpeedMeasurement:
    """Least-squares slope of x_c(t) over the late-time window.

    The window is a fraction of the run, starting after the transient; the
    first quarter is always excluded.  Per-level slopes and their relative
    spread quantify level independence.
    """
    fit_start = max(fit_start, 0.25)
    T = traj.t[-1]
    sel = (traj.t >= fit_start * T) & (traj.t <= fit_end * T)
    per_level = {}
    errs = []
    for c in traj.levels:
        xc = traj.x[c]
        ok = sel & np.isfinite(xc)
        if int(ok.sum()) < 8:
            raise InsufficientWindow(
                f"only {int(ok.sum())} usable samples for level {c:g}; "
                "lengthen the run or widen the window")
        A = np.stack([traj.t[ok], np.ones(int(ok.sum()))], axis=1)
        coef, res, *_ = np.linalg.lstsq(A, xc[ok], rcond=None)
        per_level[c] = float(coef[0])
        dof = max(int(ok.sum()) - 2, 1)
        rss = float(res[0]) if len(res) else 0.0
        tvar = float(np.sum((traj.t[ok] - traj.t[ok].mean()) ** 2))
        errs.append(math.sqrt(rss / dof / max(tvar, 1e-300)))
    speeds = np.array(list(per_level.values()))
    mean = float(np.mean(speeds))
    spread = float((speeds.max() - speeds.min()) / max(abs(mean), 1e-300))
    return SpeedMeasurement(speed=mean, stderr=float(np.max(errs)),
                            per_level=per_level, spread=spread)
