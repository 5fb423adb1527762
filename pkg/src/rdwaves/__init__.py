"""Front-speed thresholds and saturated wave profiles for reaction-diffusion
equations u_t = (a(u, u_x))_x + f(u) with a monotone, possibly bounded flux.

The package answers three questions about monostable fronts connecting the
rest states u = 0 and u = 1: above which speed does a classic (smooth,
strictly monotone) front exist, above which speed does any front exist at
all once saturation-induced jumps are admitted, and what does the wave
profile look like at a given admissible speed.
"""

from .errors import (
    AnchorOnPlateau,
    BracketNotClosed,
    CFLViolation,
    Degenerate,
    DomainViolation,
    HypothesisViolation,
    Inconclusive,
    InsufficientResolution,
    InsufficientWindow,
    NoRealRoots,
    NonFinite,
    NonMonotoneProfile,
    ParseError,
    RdwavesError,
    RootNotBracketed,
    Saturated,
    SpecViolation,
    StepFailure,
    SymmetryViolation,
    UnboundedAPlus,
)
from .model import (
    FluxClassification,
    FluxModel,
    ModelConfig,
    ReactionModel,
    atan_limiter,
    check_reaction,
    classify_flux,
    custom_flux,
    custom_reaction,
    eval_flux,
    gamma_zero,
    h_reciprocal,
    invert_flux,
    linear_flux,
    load_model,
    logistic_reaction,
    lower_speed_bound,
    parse_config,
    poly_reaction,
    ratio_limiter,
    separable_flux,
    tabulated_flux,
    with_viscosity,
)
from .halfplane import (
    SpeedSolution,
    compare_speed_solutions,
    integrate_halfplane,
    phi_extended,
    slope_at_zero,
)
from .speeds import (
    SpeedClass,
    SpeedReport,
    ViscositySweep,
    classify_speed,
    find_sigma_r,
    find_sigma_s,
    quadratic_roots,
    viscosity_sweep,
)
from .presets import (
    CharacteristicValues,
    DegenerateFamilySpec,
    characteristic_values,
    default_family,
    limited_flux,
    make_example,
    make_example4,
)
from .profile import (
    JumpCheckReport,
    MonotoneMap,
    WaveProfile,
    build_G,
    check_bertsch_dalpasso,
    check_h_continuity,
    check_jumps,
    check_rankine_hugoniot,
    invert_profile,
    residual_classic,
)
from .pde import (
    FrontTrajectory,
    SimGrid,
    SpeedMeasurement,
    measure_speed,
    simulate_front,
)

__version__ = "0.1.0"
