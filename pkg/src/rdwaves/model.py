"""Flux and reaction models for equations u_t = (a(u, u_x))_x + f(u).

A flux model holds the flow a(u, s), odd and nondecreasing in the gradient
s, together with its saturation level a_plus(u) = lim_{s->inf} a(u, s) and
the gradient domain bound omega_plus(u).  A reaction model holds a source
f with f(0) = f(1) = 0 and f > 0 in between.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import (
    Degenerate,
    DomainViolation,
    HypothesisViolation,
    ParseError,
    Saturated,
    SymmetryViolation,
)

TOL_G = 1e-12    # absolute tolerance (flow units) for gradient inversion
TOL_TD = 1e-10   # flow threshold below which a level counts as totally degenerate

_FD_H = 1e-4     # one-sided difference step for endpoint reaction slopes


# ---------------------------------------------------------------------------
# gradient limiters (the bounded, odd shape functions used by separable fluxes)

@dataclass(frozen=True)
class FluxLimiter:
    """Odd, strictly increasing gradient response with phi(s) -> 1 as s -> inf."""

    name: str
    phi: Callable[[float], float]
    dphi: Callable[[float], float]
    inv: Callable[[float], float]      # inverse of phi on [0, 1)
    dphi0: float                       # phi'(0)
    phi_np: Callable[[np.ndarray], np.ndarray]


def ratio_limiter(p: float = 2.0) -> FluxLimiter:
    """phi(s) = s / (1 + |s|^p)^(1/p)."""
    if p < 2.0:
        raise ParseError(f"ratio limiter needs p >= 2, got {p}")
    ip = 1.0 / p

    def phi(s: float) -> float:
        return s / (1.0 + abs(s) ** p) ** ip

    def dphi(s: float) -> float:
        return (1.0 + abs(s) ** p) ** (-(p + 1.0) * ip)

    def inv(w: float) -> float:
        if w >= 1.0:
            return math.inf
        return w / (1.0 - w ** p) ** ip

    def phi_np(s):
        return s / (1.0 + np.abs(s) ** p) ** ip

    return FluxLimiter(f"ratio_{p:g}", phi, dphi, inv, 1.0, phi_np)


def atan_limiter() -> FluxLimiter:
    """phi(s) = (2/pi) atan(s)."""
    c = 2.0 / math.pi

    def phi(s: float) -> float:
        return c * math.atan(s)

    def dphi(s: float) -> float:
        return c / (1.0 + s * s)

    def inv(w: float) -> float:
        if w >= 1.0:
            return math.inf
        return math.tan(w / c)

    def phi_np(s):
        return c * np.arctan(s)

    return FluxLimiter("atan", phi, dphi, inv, c, phi_np)


_LIMITERS = {"ratio_p": ratio_limiter, "atan": atan_limiter}


# ---------------------------------------------------------------------------
# classification record

@dataclass(frozen=True)
class FluxClassification:
    """Structural flags for a flux model, from parameters or dense sampling.

    ``linear_growth`` holds a witness pair (abar, atilde) with
    |a(u, s)| <= abar |s| + atilde, or None when growth is superlinear.
    ``elliptic`` holds (k1, k2) with k1 s^2 <= a(u, s) s <= k2 s^2,
    ``over_elliptic`` holds the one-sided constant k1.  ``ltd_intervals``
    lists the closed u-intervals where a(u, .) vanishes identically and
    ``m_bound`` bounds |da/ds| when finite.
    """

    regular: bool
    a_plus_continuous: bool
    linear_growth: tuple[float, float] | None
    elliptic: tuple[float, float] | None
    over_elliptic: float | None
    ultra_degenerate: bool
    ltd_intervals: tuple[tuple[float, float], ...]
    m_bound: float | None


# ---------------------------------------------------------------------------
# model containers

@dataclass(frozen=True)
class FluxModel:
    """Divergence-form flow a(u, s) with its structural metadata.

    ``inverse``, when set, solves a(u, g) = v for g analytically; otherwise
    :func:`invert_flux` falls back to safeguarded bracketed root finding.
    ``a_np`` is a vectorized evaluation used by the PDE oracle.
    """

    a: Callable[[float, float], float]
    da_ds: Callable[[float, float], float]
    a_plus: Callable[[float], float]
    omega_plus: Callable[[float], float]
    kind_hint: str
    ltd_intervals: tuple[tuple[float, float], ...] = ()
    inverse: Callable[[float, float], float] | None = None
    da_ds0: Callable[[float], float] | None = None
    a_np: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)
    label: str = ""
    classification: FluxClassification | None = None

    def slope_at_rest(self, u: float) -> float:
        """da/ds at s = 0, the diffusivity seen by vanishing gradients."""
        if self.da_ds0 is not None:
            return self.da_ds0(u)
        return self.da_ds(u, 0.0)

    def in_ltd(self, u: float) -> bool:
        for lo, hi in self.ltd_intervals:
            if lo <= u <= hi:
                return True
        return False


@dataclass(frozen=True)
class ReactionModel:
    """Source term f on [0, 1] with f(0) = f(1) = 0 and f > 0 inside."""

    f: Callable[[float], float]
    df0: float     # f'(0) >= 0
    df1: float     # f'(1) <= 0
    f_np: Callable[[np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)
    label: str = ""


@dataclass(frozen=True)
class ModelConfig:
    """Parsed run configuration: flux spec, reaction spec, optional viscosity."""

    flux: dict
    reaction: dict
    viscosity: float | None = None
    tolerances: dict = field(default_factory=dict)
    source: str = ""


# ---------------------------------------------------------------------------
# constructors

def linear_flux(d: float = 1.0) -> FluxModel:
    """a(u, s) = d * s, the classic constant diffusivity."""
    if d <= 0:
        raise ParseError(f"linear flux needs d > 0, got {d}")
    return FluxModel(
        a=lambda u, s: d * s,
        da_ds=lambda u, s: d,
        a_plus=lambda u: math.inf,
        omega_plus=lambda u: math.inf,
        kind_hint="linear",
        inverse=lambda u, v: v / d,
        da_ds0=lambda u: d,
        a_np=lambda u, s: d * s,
        params={"d": d},
        label=f"linear(d={d:g})",
    )


def separable_flux(
    D: Callable[[float], float],
    phi: FluxLimiter,
    *,
    ltd: tuple[tuple[float, float], ...] = (),
    D_np: Callable[[np.ndarray], np.ndarray] | None = None,
    params: dict | None = None,
    label: str = "",
    kind_hint: str = "separable",
) -> FluxModel:
    """a(u, s) = D(u) * phi(s) with D >= 0 and a bounded limiter phi."""
    Dn = D_np if D_np is not None else np.vectorize(D)

    def inverse(u: float, v: float) -> float:
        Du = D(u)
        if Du <= 0.0:
            return math.inf if v > 0 else 0.0
        w = v / Du
        return phi.inv(min(w, 1.0 - 1e-16)) if w < 1.0 else math.inf

    return FluxModel(
        a=lambda u, s: D(u) * phi.phi(s),
        da_ds=lambda u, s: D(u) * phi.dphi(s),
        a_plus=D,
        omega_plus=lambda u: math.inf,
        kind_hint=kind_hint,
        ltd_intervals=tuple(ltd),
        inverse=inverse,
        da_ds0=lambda u: D(u) * phi.dphi0,
        a_np=lambda u, s: Dn(u) * phi.phi_np(s),
        params=dict(params or {}),
        label=label or f"separable({phi.name})",
    )


def custom_flux(
    a: Callable[[float, float], float],
    da_ds: Callable[[float, float], float] | None = None,
    a_plus: Callable[[float], float] | None = None,
    omega_plus: Callable[[float], float] | None = None,
    *,
    ltd: tuple[tuple[float, float], ...] = (),
    a_np=None,
    label: str = "custom",
) -> FluxModel:
    """Wrap raw callables; missing derivatives fall back to central differences."""
    if da_ds is None:
        def da_ds(u, s, _a=a):
            h = 1e-6 * max(1.0, abs(s))
            return (_a(u, s + h) - _a(u, s - h)) / (2.0 * h)
    if a_plus is None:
        a_plus = lambda u: math.inf
    if omega_plus is None:
        omega_plus = lambda u: math.inf
    return FluxModel(
        a=a, da_ds=da_ds, a_plus=a_plus, omega_plus=omega_plus,
        kind_hint="custom", ltd_intervals=tuple(ltd), a_np=a_np, label=label,
    )


def tabulated_flux(u_knots, s_knots, values, *, label: str = "tabulated") -> FluxModel:
    """Flux from a value table on (u_knots x s_knots), s_knots >= 0.

    Monotone cubic interpolation in s, cubic in u; odd extension to s < 0.
    Beyond the last gradient knot the flow is clamped at the last column,
    which acts as the saturation level.
    """
    from scipy.interpolate import CubicSpline, PchipInterpolator

    uk = np.asarray(u_knots, dtype=float)
    sk = np.asarray(s_knots, dtype=float)
    tab = np.asarray(values, dtype=float)
    if uk.ndim != 1 or sk.ndim != 1 or tab.shape != (uk.size, sk.size):
        raise ParseError("tabulated flux needs values shaped (len(u_knots), len(s_knots))")
    if np.any(np.diff(uk) <= 0) or np.any(np.diff(sk) <= 0):
        raise ParseError("tabulated flux knots must be strictly increasing")
    if sk[0] != 0.0:
        raise ParseError("tabulated flux needs s_knots[0] == 0")
    if np.any(np.abs(tab[:, 0]) > TOL_G):
        raise HypothesisViolation("flux_symmetry", "a(u, 0) must vanish")
    if np.any(np.diff(tab, axis=1) < 0):
        raise HypothesisViolation("flux_monotone", "table must be nondecreasing in s")

    cols = [CubicSpline(uk, tab[:, j]) for j in range(sk.size)]

    def _row(u: float) -> np.ndarray:
        return np.array([c(u) for c in cols], dtype=float)

    def a(u: float, s: float) -> float:
        m = abs(s)
        row = _row(u)
        if m >= sk[-1]:
            val = row[-1]
        else:
            val = float(PchipInterpolator(sk, row)(m))
        return math.copysign(val, s) if s != 0.0 else 0.0

    def da_ds(u: float, s: float) -> float:
        m = abs(s)
        if m >= sk[-1]:
            return 0.0
        return float(PchipInterpolator(sk, _row(u)).derivative()(m))

    def a_plus(u: float) -> float:
        return max(float(cols[-1](u)), 0.0)

    return FluxModel(
        a=a, da_ds=da_ds, a_plus=a_plus, omega_plus=lambda u: math.inf,
        kind_hint="custom",
        a_np=np.vectorize(a),
        params={"u_knots": uk.tolist(), "s_knots": sk.tolist()},
        label=label,
    )


def logistic_reaction(k: float = 1.0) -> ReactionModel:
    """f(u) = k u (1 - u)."""
    if k <= 0:
        raise ParseError(f"logistic reaction needs k > 0, got {k}")
    return ReactionModel(
        f=lambda u: k * u * (1.0 - u),
        df0=k,
        df1=-k,
        f_np=lambda u: k * u * (1.0 - u),
        params={"k": k},
        label=f"logistic(k={k:g})",
    )


def poly_reaction(coeffs) -> ReactionModel:
    """f(u) = u (1 - u) P(u) with P the polynomial given by ``coeffs``.

    ``coeffs`` are ascending-power coefficients of P.  P must stay positive
    on [0, 1]; endpoint slopes follow analytically: f'(0) = P(0) and
    f'(1) = -P(1).
    """
    c = [float(x) for x in coeffs]
    if not c:
        raise ParseError("poly reaction needs at least one coefficient")

    def P(u: float) -> float:
        acc = 0.0
        for cj in reversed(c):
            acc = acc * u + cj
        return acc

    def f(u: float) -> float:
        return u * (1.0 - u) * P(u)

    r = ReactionModel(
        f=f, df0=P(0.0), df1=-P(1.0),
        f_np=lambda u: u * (1.0 - u) * np.polyval(c[::-1], u),
        params={"coeffs": c},
        label="poly",
    )
    check_reaction(r)
    return r


def custom_reaction(f: Callable[[float], float], f_np=None, label: str = "custom") -> ReactionModel:
    """Wrap a raw source callable; endpoint slopes by one-sided differences.

    Fourth-order one-sided stencils with step 1e-4, per the interface contract
    for sources given only as black boxes.
    """
    h = _FD_H

    def d_forward(x0: float) -> float:
        return (-25 * f(x0) + 48 * f(x0 + h) - 36 * f(x0 + 2 * h)
                + 16 * f(x0 + 3 * h) - 3 * f(x0 + 4 * h)) / (12 * h)

    def d_backward(x0: float) -> float:
        return (25 * f(x0) - 48 * f(x0 - h) + 36 * f(x0 - 2 * h)
                - 16 * f(x0 - 3 * h) + 3 * f(x0 - 4 * h)) / (12 * h)

    r = ReactionModel(f=f, df0=d_forward(0.0), df1=d_backward(1.0),
                      f_np=f_np or np.vectorize(f), label=label)
    check_reaction(r)
    return r


def check_reaction(r: ReactionModel, n: int = 1001) -> None:
    """Raise HypothesisViolation("reaction_sign") unless f is a valid source."""
    if abs(r.f(0.0)) > 1e-10 or abs(r.f(1.0)) > 1e-10:
        raise HypothesisViolation("reaction_sign", "f must vanish at u = 0 and u = 1")
    for u in np.linspace(0.0, 1.0, n)[1:-1]:
        if r.f(float(u)) <= 0.0:
            raise HypothesisViolation("reaction_sign", f"f({u:.4f}) <= 0")
    if r.df0 < 0 or r.df1 > 0:
        raise HypothesisViolation("reaction_sign", "endpoint slopes have wrong sign")


# ---------------------------------------------------------------------------
# operations

def eval_flux(m: FluxModel, u: float, s: float) -> float:
    """Evaluate the flow a(u, s), checking the declared domain."""
    if not 0.0 <= u <= 1.0:
        raise DomainViolation(f"u = {u} outside [0, 1]")
    if abs(s) >= m.omega_plus(u):
        raise DomainViolation(f"|s| = {abs(s)} at or beyond omega_plus(u)")
    return m.a(u, s)


def invert_flux(m: FluxModel, u: float, v: float, s_guess: float | None = None) -> float:
    """Solve a(u, g) = v for the gradient g >= 0.

    Uses the model's analytic inverse when available, otherwise a bracketed
    hybrid of secant and bisection steps after geometric bracket growth.
    """
    if v == 0.0:
        return 0.0
    if v < 0.0:
        raise DomainViolation(f"flow value v = {v} must be nonnegative")
    if m.in_ltd(u):
        raise Degenerate(f"u = {u} lies on a totally degenerate level")
    if v >= m.a_plus(u):
        raise Saturated(f"v = {v} >= a_plus({u}) = {m.a_plus(u)}")
    if m.inverse is not None:
        return m.inverse(u, v)
    return _invert_numeric(m.a, m.da_ds, u, v, s_guess)


def _invert_numeric(af, daf, u: float, v: float, s_guess: float | None = None) -> float:
    # bracket [lo, hi] with a(u, lo) < v <= a(u, hi), grown geometrically
    slope0 = daf(u, 0.0)
    hi = s_guess if (s_guess and s_guess > 0) else (v / slope0 if slope0 > 0 else 1.0)
    hi = max(hi, 1e-12)
    lo = 0.0
    fhi = af(u, hi) - v
    grow = 0
    while fhi < 0.0:
        lo, hi = hi, hi * 2.0
        fhi = af(u, hi) - v
        grow += 1
        if grow > 220:
            raise Saturated(f"no gradient reaches flow v = {v} at u = {u}")
    flo = af(u, lo) - v
    if flo >= 0.0:   # guess overshot downward; only possible at lo = 0 with v <= 0
        return lo
    # hybrid Newton/bisection, safeguarded by the bracket
    s = 0.5 * (lo + hi)
    for _ in range(200):
        fs = af(u, s) - v
        if abs(fs) <= TOL_G:
            return s
        if fs > 0.0:
            hi = s
        else:
            lo = s
        d = daf(u, s)
        step_ok = False
        if d > 0.0:
            s_new = s - fs / d
            if lo < s_new < hi:
                s = s_new
                step_ok = True
        if not step_ok:
            s = 0.5 * (lo + hi)
        if hi - lo < 1e-15 * max(1.0, hi):
            return s
    return s


def h_reciprocal(m: FluxModel, u: float, V: float) -> float:
    """Reciprocal gradient 1 / g(u, V), extended by 0 at and beyond saturation."""
    if V <= 0.0:
        raise DomainViolation("h_reciprocal needs V > 0")
    if m.in_ltd(u):
        return 0.0
    if V >= m.a_plus(u):
        return 0.0
    g = m.inverse(u, V) if m.inverse is not None else _invert_numeric(m.a, m.da_ds, u, V)
    if not math.isfinite(g) or g <= 0.0:
        return 0.0
    return 1.0 / g


def with_viscosity(m: FluxModel, eps: float) -> FluxModel:
    """Regularized flux a(u, s) + eps * s; over-elliptic for any eps > 0."""
    if eps <= 0:
        raise ParseError(f"viscosity needs eps > 0, got {eps}")
    base_a, base_da = m.a, m.da_ds
    base_np = m.a_np

    def a(u, s):
        return base_a(u, s) + eps * s

    def da_ds(u, s):
        return base_da(u, s) + eps

    def inverse(u, v, _a=a, _da=da_ds):
        return _invert_numeric(_a, _da, u, v)

    return FluxModel(
        a=a,
        da_ds=da_ds,
        a_plus=lambda u: math.inf,
        omega_plus=lambda u: math.inf,
        kind_hint="viscosity-wrapped",
        ltd_intervals=(),
        inverse=None,          # generic bracketed inversion (sum breaks closed forms)
        da_ds0=lambda u: m.slope_at_rest(u) + eps,
        a_np=(lambda u, s: base_np(u, s) + eps * s) if base_np is not None else None,
        params={"eps": eps, "base": m.label},
        label=f"{m.label}+visc({eps:g})",
    )


def lower_speed_bound(m: FluxModel, r: ReactionModel) -> float:
    """2 sqrt(da/ds(0,0) * f'(0)), the linearized threshold at the leading edge."""
    if m.in_ltd(0.0):
        raise Degenerate("leading edge u = 0 sits on a totally degenerate level")
    prod = max(m.slope_at_rest(0.0), 0.0) * max(r.df0, 0.0)
    return 2.0 * math.sqrt(prod)


def gamma_zero(m: FluxModel, r: ReactionModel) -> float:
    """Leading-edge product da/ds(0,0) * f'(0) entering the slope quadratic."""
    return m.slope_at_rest(0.0) * r.df0


# ---------------------------------------------------------------------------
# classification

_S_MAGS = None


def _sample_mags(n: int) -> np.ndarray:
    return np.concatenate([[0.0], np.logspace(-6, 6, n)])


def classify_flux(m: FluxModel, n: int = 128) -> FluxClassification:
    """Classify a flux by dense sampling, honouring declared degeneracy.

    Sampling covers a u-grid of ``n`` points and gradient magnitudes up to
    1e6.  Declared ``ltd_intervals`` are trusted verbatim (the built-in
    families know their degenerate set exactly); otherwise degenerate levels
    are detected by merging grid cells where the flow stays below TOL_TD.
    Margins: ellipticity constants need k1 > 1e-9 and k2 < 1e9 to count.
    """
    ugrid = np.linspace(0.0, 1.0, n)
    mags = _sample_mags(n)

    k1 = math.inf
    k2 = 0.0
    m_bound = 0.0
    d_min = math.inf
    max_abs_a = 0.0
    ratio_tail = 0.0   # |a|/|s| at the largest magnitude
    ratio_mid = 0.0    # |a|/|s| at s ~ 1e3
    row_max = np.zeros(n)

    for i, u in enumerate(ugrid):
        uu = float(u)
        om = m.omega_plus(uu)
        for s in mags[1:]:
            if s >= om:
                break
            ss = float(s)
            av = m.a(uu, ss)
            an = m.a(uu, -ss)
            if abs(av + an) > 1e-12 * (1.0 + abs(av)):
                raise SymmetryViolation(f"a({uu:.3f}, +-{ss:.3e}) not odd")
            ratio = av / ss
            k1 = min(k1, ratio)
            k2 = max(k2, ratio)
            dv = m.da_ds(uu, ss)
            m_bound = max(m_bound, abs(dv))
            d_min = min(d_min, dv)
            max_abs_a = max(max_abs_a, abs(av))
            row_max[i] = max(row_max[i], abs(av))
            if ss >= 1e6:
                ratio_tail = max(ratio_tail, ratio)
            elif 5e2 <= ss <= 2e3:
                ratio_mid = max(ratio_mid, ratio)
        d0 = m.da_ds(uu, 0.0)
        m_bound = max(m_bound, abs(d0))
        d_min = min(d_min, d0)

    if m.ltd_intervals:
        ltd = tuple(m.ltd_intervals)
    else:
        ltd = _merge_degenerate_cells(ugrid, row_max)

    # zero diffusivity inside declared degenerate levels does not spoil
    # regularity elsewhere, but any such level means the model is not regular
    regular = (d_min > 0.0) and not ltd

    ap = np.array([m.a_plus(float(u)) for u in ugrid])
    finite = np.isfinite(ap)
    if not finite.any():
        a_plus_continuous = True
    elif finite.all():
        jumps = np.abs(np.diff(ap))
        scale = max(ap.max(), 1.0)
        a_plus_continuous = bool(jumps.max() <= 80.0 * scale / n)
    else:
        a_plus_continuous = False

    superlinear = ratio_mid > 0 and ratio_tail > 1.5 * ratio_mid
    linear_growth = None
    if not superlinear:
        abar = max(k2, 0.0)
        atilde = max(max_abs_a * 1e-6, 1e-12)   # slack; |a| <= k2 |s| already
        linear_growth = (abar, atilde)

    # a finite saturation level anywhere forces a(u,s)/s -> 0, so a one-sided
    # ellipticity constant cannot exist no matter what the sampled ratios say
    bounded_somewhere = any(math.isfinite(m.a_plus(float(u))) for u in ugrid)
    over_elliptic = k1 if (k1 > 1e-9 and not bounded_somewhere) else None
    elliptic = (k1, k2) if (over_elliptic is not None and k2 < 1e9) else None

    return FluxClassification(
        regular=regular,
        a_plus_continuous=a_plus_continuous,
        linear_growth=linear_growth,
        elliptic=elliptic,
        over_elliptic=over_elliptic,
        ultra_degenerate=bool(ltd),
        ltd_intervals=ltd,
        m_bound=m_bound if math.isfinite(m_bound) else None,
    )


def _merge_degenerate_cells(ugrid, row_max) -> tuple[tuple[float, float], ...]:
    dead = row_max < TOL_TD
    out = []
    i = 0
    n = len(ugrid)
    while i < n:
        if dead[i]:
            j = i
            while j + 1 < n and dead[j + 1]:
                j += 1
            out.append((float(ugrid[i]), float(ugrid[j])))
            i = j + 1
        else:
            i += 1
    return tuple(out)


# ---------------------------------------------------------------------------
# configuration loading

def parse_config(text: str) -> ModelConfig:
    """Parse a JSON model configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ParseError("configuration must be a JSON object")
    if "flux" not in raw or "reaction" not in raw:
        raise ParseError("configuration needs 'flux' and 'reaction' sections")
    flux = raw["flux"]
    reaction = raw["reaction"]
    if not isinstance(flux, dict) or "kind" not in flux:
        raise ParseError("'flux' must be an object with a 'kind'")
    if not isinstance(reaction, dict) or "kind" not in reaction:
        raise ParseError("'reaction' must be an object with a 'kind'")
    visc = raw.get("viscosity")
    if visc is not None:
        try:
            visc = float(visc)
        except (TypeError, ValueError):
            raise ParseError("'viscosity' must be a number") from None
        if visc <= 0:
            raise ParseError("'viscosity' must be positive")
    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ParseError("'tolerances' must be an object")
    return ModelConfig(flux=flux, reaction=reaction, viscosity=visc, tolerances=tol)


def _poly_callable(coeffs):
    c = [float(x) for x in coeffs]

    def D(u: float) -> float:
        acc = 0.0
        for cj in reversed(c):
            acc = acc * u + cj
        return acc

    return D, (lambda u: np.polyval(c[::-1], u))


def _build_reaction(spec: dict) -> ReactionModel:
    kind = spec["kind"]
    if kind == "logistic":
        return logistic_reaction(float(spec.get("k", 1.0)))
    if kind == "poly":
        if "coeffs" not in spec:
            raise ParseError("poly reaction needs 'coeffs'")
        return poly_reaction(spec["coeffs"])
    raise ParseError(f"unknown reaction kind {kind!r}")


def _build_flux(spec: dict) -> FluxModel:
    kind = spec["kind"]
    if kind == "linear":
        return linear_flux(float(spec.get("d", 1.0)))
    if kind == "separable":
        dspec = spec.get("D")
        if not isinstance(dspec, dict):
            raise ParseError("separable flux needs a 'D' object")
        if dspec.get("kind", "poly") != "poly":
            raise ParseError(f"unknown D kind {dspec.get('kind')!r}")
        D, D_np = _poly_callable(dspec.get("coeffs", [1.0]))
        phi = _build_limiter(spec.get("phi", {"kind": "ratio_p", "p": 2}))
        samples = np.linspace(0.0, 1.0, 501)
        vals = np.array([D(float(u)) for u in samples])
        if np.any(vals < 0):
            raise ParseError("separable flux needs D >= 0 on [0, 1]")
        return separable_flux(D, phi, D_np=D_np,
                              params={"D": dspec, "phi": spec.get("phi")},
                              label=f"separable({phi.name})")
    if kind == "tabulated":
        for key in ("u_knots", "s_knots", "values"):
            if key not in spec:
                raise ParseError(f"tabulated flux needs '{key}'")
        return tabulated_flux(spec["u_knots"], spec["s_knots"], spec["values"])
    if kind in ("example1", "example2", "example3", "example4", "limited"):
        from . import presets
        flux, _ = presets.flux_from_config(spec)
        return flux
    raise ParseError(f"unknown flux kind {kind!r}")


def _build_limiter(spec: dict) -> FluxLimiter:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ParseError("'phi' must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "ratio_p":
        return ratio_limiter(float(spec.get("p", 2.0)))
    if kind == "atan":
        return atan_limiter()
    raise ParseError(f"unknown limiter kind {kind!r}")


def build_models(cfg: ModelConfig) -> tuple[FluxModel, ReactionModel]:
    """Construct and validate the (flux, reaction) pair for a configuration."""
    m = _build_flux(cfg.flux)
    r = _build_reaction(cfg.reaction)
    check_reaction(r)
    if cfg.viscosity is not None:
        m = with_viscosity(m, cfg.viscosity)
    cls = classify_flux(m)
    m = replace(m, classification=cls,
                ltd_intervals=m.ltd_intervals or cls.ltd_intervals)
    return m, r


def load_model(text: str) -> tuple[FluxModel, ReactionModel]:
    """Parse a JSON configuration and build validated, classified models."""
    return build_models(parse_config(text))
