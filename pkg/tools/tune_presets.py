"""One-off parameter search for the degenerate-band family defaults.

Run from the repo root:  python3 tools/tune_presets.py

Finds a spec for which the interesting regime is realized:
  * the ceiling-only threshold sits strictly above its linear lower bound
    (pushed front), with margin;
  * ordering  sigma_s(ceiling) < sigma_tilde < tau  with margins, so the
    band family's threshold flow develops exactly one saturated interval
    whose jump straddles the band;
  * bump support [delta, kappa] fits strictly inside the jump interval's
    complement constraints gamma < delta < u2 < u1 < kappa < alpha.

Prints the frozen numbers that go into presets._DEFAULTS and the test
fixtures.  Not part of the installed package.
"""

import math
import sys
import time

sys.path.insert(0, "src")

from rdwaves.halfplane import integrate_halfplane
from rdwaves.model import gamma_zero, lower_speed_bound
from rdwaves.presets import (
    DegenerateFamilySpec,
    characteristic_values,
    lam_thresholds,
    make_example,
    make_example4,
    saturation_line,
)
from rdwaves.speeds import find_sigma_r, find_sigma_s


def report(spec: DegenerateFamilySpec) -> None:
    print(f"spec: u1={spec.u1} u2={spec.u2} c1={spec.c1} c2={spec.c2} "
          f"p={spec.p} k={spec.k} push={spec.push}")

    t0 = time.time()
    m2, r = make_example(2, spec)
    lb2 = lower_speed_bound(m2, r)
    s2, rep2 = find_sigma_s(m2, r)
    print(f"  ceiling: lb={lb2:.6f} sigma_s={s2:.6f} "
          f"margin={(s2 - lb2):.6f} probes={len(rep2.probes)} "
          f"[{time.time()-t0:.1f}s]")

    t0 = time.time()
    cv = characteristic_values(spec, tol=1e-7)
    print(f"  floor: tau={cv.tau:.6f} sigma_tilde={cv.sigma_tilde:.6f} "
          f"[{time.time()-t0:.1f}s]")
    ok = s2 < cv.sigma_tilde < cv.tau
    print(f"  ordering sigma_s2 < sigma_tilde < tau: {ok}")
    if not ok:
        return

    t0 = time.time()
    m3, _ = make_example(3, spec)
    sbar, rep3 = find_sigma_s(m3, r)
    print(f"  band: sigma_bar={sbar:.8f} probes={len(rep3.probes)} "
          f"[{time.time()-t0:.1f}s]")
    in_window = s2 - 2e-6 <= sbar < cv.sigma_tilde
    print(f"  sigma_bar in [sigma_s2, sigma_tilde): {in_window}")

    gamma, alpha, c_bar = saturation_line(spec, sbar)
    beta_bar = -c_bar / sbar
    print(f"  jump interval: gamma={gamma:.6f} alpha={alpha:.6f} "
          f"c_bar={c_bar:.6f} beta_bar={beta_bar:.6f}")
    print(f"  support fit: gamma<delta: {gamma < spec.delta}  "
          f"kappa<alpha: {spec.kappa < alpha}")

    lam_se, lam_fail = lam_thresholds(spec, sbar)
    print(f"  lam_se={lam_se:.6f} lam_fail={lam_fail:.6f}")
    lam_small = 0.5 * lam_se
    lam_large = 1.2 * lam_fail
    print(f"  -> lam_small={lam_small:.6f} lam_large={lam_large:.6f}")

    for lam, tag in ((lam_small, "small"), (lam_large, "large")):
        t0 = time.time()
        m4, _ = make_example4(
            DegenerateFamilySpec(**{**spec.__dict__, "lam": lam}))
        s4, _ = find_sigma_s(m4, r)
        line = f"  lam_{tag}={lam:.6f}: sigma_s={s4:.8f} (vs {sbar:.8f})"
        if tag == "small":
            t1 = time.time()
            sr4, hint, _ = find_sigma_r(m4, r)
            line += f" sigma_r={sr4:.8f} hint={hint} [r:{time.time()-t1:.1f}s]"
        print(line + f" [{time.time()-t0:.1f}s]")

    # pushed-front check for the small-lam coincidence: the descent slope
    # at the origin must be the steep root, i.e. head slope of the
    # threshold flow at 0 equals w_plus
    g0 = gamma_zero(m2, r)
    wps = 0.5 * (sbar + math.sqrt(sbar * sbar - 4.0 * g0))
    sol = integrate_halfplane(m3, r, sbar)
    print(f"  head slope at 0: {sol.slope0} vs w_plus(sigma_bar)={wps:.6f} "
          f"(gamma0={g0:.6f}, lb2={lb2:.6f})")


if __name__ == "__main__":
    spec = DegenerateFamilySpec()
    if len(sys.argv) > 1:
        kv = dict(kv.split("=") for kv in sys.argv[1:])
        fields = {k: (int(v) if k == "p" else float(v)) for k, v in kv.items()}
        spec = DegenerateFamilySpec(**{**spec.__dict__, **fields})
    report(spec)
