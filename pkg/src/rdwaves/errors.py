"""Exception types shared across the package."""


class RdwavesError(Exception):
    """Base class for all errors raised by this package."""


class DomainViolation(RdwavesError):
    """An argument left the domain a model is defined on."""


class Saturated(RdwavesError):
    """Requested a gradient for a flow value at or beyond the saturation level."""


class Degenerate(RdwavesError):
    """Operation undefined on a totally degenerate diffusivity level."""


class SymmetryViolation(RdwavesError):
    """Flux fails the odd-symmetry requirement a(u, -s) = -a(u, s)."""


class HypothesisViolation(RdwavesError):
    """A structural hypothesis on the model does not hold.

    The first argument names the hypothesis, e.g. ``"reaction_sign"``,
    ``"flux_symmetry"``, ``"flux_monotone"``, ``"flux_over_elliptic"``,
    ``"flux_regular"``.
    """

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        self.detail = detail
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)


class ParseError(RdwavesError):
    """Model configuration could not be parsed or has out-of-range entries."""


class SpecViolation(RdwavesError):
    """A preset family specification breaks its structural constraints."""


class StepFailure(RdwavesError):
    """Adaptive integrator could not proceed above the step floor."""


class NonFinite(RdwavesError):
    """A non-finite value appeared during integration."""


class InsufficientResolution(RdwavesError):
    """Too few samples near u = 0 to extrapolate the boundary slope."""


class NoRealRoots(RdwavesError):
    """Slope quadratic has negative discriminant."""


class Inconclusive(RdwavesError):
    """Speed classification fell inside the dead band."""


class BracketNotClosed(RdwavesError):
    """Predicate bracket search hit the speed cap without closing."""


class RootNotBracketed(RdwavesError):
    """Characteristic-value root finder could not bracket a sign change."""


class AnchorOnPlateau(RdwavesError):
    """Profile anchor placed inside a saturated plateau.

    Carries the plateau interval as ``lo``/``hi`` so callers can pick a
    replacement level outside it.
    """

    def __init__(self, message: str, lo: float = float("nan"),
                 hi: float = float("nan")):
        super().__init__(message)
        self.lo = lo
        self.hi = hi


class UnboundedAPlus(RdwavesError):
    """Jump condition queried for a flux with infinite saturation level."""


class CFLViolation(RdwavesError):
    """Requested time step violates the explicit stability bound."""


class InsufficientWindow(RdwavesError):
    """Not enough trajectory samples in the fit window to measure a speed."""


class NonMonotoneProfile(UserWarning):
    """Simulated front lost monotonicity in x (warning, not an error)."""
