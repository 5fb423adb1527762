"""Expected values frozen from independent oracles and tuning runs.

Each constant notes its source.  Regenerate the first group with
``python tests/_oracles.py`` (offset-start RK4 plus Simpson quadrature,
internal refinement spread below 1e-13) and the preset group with
``python tools/tune_presets.py``.  Tests compare library output against
these numbers so silent drift in the solvers shows up as a diff here.
"""

# V(u) for the linear flux d = 1, logistic k = 1, at sigma = 2.5.
# Source: linear_V_refined in _oracles.py, spread 2.7e-14.
FISHER_V_25 = {
    0.8: 0.058547545577,
    0.5: 0.098840850295,
    0.2: 0.070550296816,
    0.05: 0.022786665794,
}

# Anchor-free spatial-map increments for the same trajectory.
# Source: fisher_G_increments in _oracles.py (Simpson, n = 40001).
FISHER_G_INC = {
    (0.1, 0.5): 5.1113614852,
    (0.5, 0.9): 5.9052716141,
}

# Singular threshold of the bounded-dip preset at tol 1e-6.  Frozen after
# three cross-checks: the boundary slope at the threshold matches the
# steep quadratic root w_plus to 0.4%, the viscosity sweep extrapolates
# back to it within its own error estimate, and the value is stable under
# solver-tolerance refinement.
LIMITED_SIGMA_S = 1.07994747

# Degenerate band family (default spec), from tools/tune_presets.py at
# bisection tol 1e-9; the jump geometry is validated independently by the
# Rankine-Hugoniot identity in the profile tests.
BAND_SIGMA_BAR = 0.34860967
BAND_TAU = 1.868552
BAND_SIGMA_TILDE = 0.392880
BAND_JUMP = (0.220627, 0.911268)

# PDE oracle fixtures.  The pushed reaction u(1-u)(1+8u) on the linear
# flux has the exact threshold 2.5 (sqrt(a/2) + sqrt(2/a) at a = 8) and
# its front converges in time exponentially fast, so the measured-speed
# error is grid-dominated and refinement must shrink it.
PUSHED_A = 8.0
PUSHED_SIGMA = 2.5
