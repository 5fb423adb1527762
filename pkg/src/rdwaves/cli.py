"""Command-line interface and artifact emission.

Every command loads a JSON model configuration, drives the solver modules,
and writes its results as plain CSV/JSON files plus a manifest that lists
all artifacts together with the resolved configuration, so a run can be
reproduced from the manifest alone.  Floats in CSV output use fixed-width
scientific notation so regression fixtures diff cleanly; plotting is left
to external tools.

Exit codes: 0 success, 2 configuration or usage error, 3 hypothesis
violation (the model falls outside what the requested solver handles),
4 bracketing failure in a threshold search, 5 requested wave speed below
the singular threshold.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .errors import (
    AnchorOnPlateau,
    BracketNotClosed,
    HypothesisViolation,
    ParseError,
    RdwavesError,
    RootNotBracketed,
    SpecViolation,
)
from .halfplane import integrate_halfplane
from .model import build_models, parse_config
from .pde import SimGrid, measure_speed, simulate_front
from .profile import build_G, check_jumps, invert_profile
from .speeds import TOL_SIGMA, find_sigma_r, find_sigma_s, viscosity_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_BRACKET = 4
EXIT_BELOW_THRESHOLD = 5

_EXAMPLE_CONFIGS = {
    "fisher": {
        "flux": {"kind": "linear", "d": 1.0},
        "reaction": {"kind": "logistic", "k": 1.0},
    },
    "limited": {
        "flux": {"kind": "limited"},
        "reaction": {"kind": "poly", "coeffs": [1.0, 16.0]},
    },
    "band": {
        "flux": {"kind": "example3"},
        "reaction": {"kind": "poly", "coeffs": [1.0, 40.0]},
    },
    "band-lifted-small": {
        "flux": {"kind": "example4", "lam": 0.048},
        "reaction": {"kind": "poly", "coeffs": [1.0, 40.0]},
    },
    "band-lifted-large": {
        "flux": {"kind": "example4", "lam": 0.75},
        "reaction": {"kind": "poly", "coeffs": [1.0, 40.0]},
    },
    "limited-viscous": {
        "flux": {"kind": "limited"},
        "reaction": {"kind": "poly", "coeffs": [1.0, 16.0]},
        "viscosity": 0.1,
    },
}


def _fmt(x: float) -> str:
    return "%.12e" % float(x)


class _Run:
    """Collects artifacts and resolved settings for the manifest."""

    def __init__(self, command: str, out_dir: Path, args: argparse.Namespace):
        self.command = command
        self.out_dir = out_dir
        self.t0 = time.monotonic()
        self.outputs: list[str] = []
        self.config: dict | None = None
        self.extras: dict = {}
        resolved = {}
        for key, val in vars(args).items():
            if key == "func":
                continue
            resolved[key] = str(val) if isinstance(val, Path) else val
        self.resolved_args = resolved
        self.tol = float(args.tol)
        self.seed = getattr(args, "seed", None)

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.outputs.append(name)
        return p

    def write_json(self, name: str, payload) -> Path:
        p = self.path(name)
        with open(p, "w", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return p

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "args": self.resolved_args,
            "config": self.config,
            "tolerances": {"sigma": self.tol},
            "seed": self.seed,
            "outputs": sorted(self.outputs),
            "extras": self.extras,
            "wall_time_s": round(time.monotonic() - self.t0, 3),
        }
        with open(self.out_dir / "manifest.json", "w", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load(args, run: _Run):
    """Read, apply overrides to, and build the configured model pair."""
    path = Path(args.model)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read model config {path}: {e}") from None
    cfg = parse_config(text)
    lam = getattr(args, "lam", None)
    if lam is not None:
        if cfg.flux.get("kind") != "example4":
            raise ParseError("--lambda only applies to example4 flux configs")
        cfg.flux["lam"] = float(lam)
    run.config = {"flux": cfg.flux, "reaction": cfg.reaction,
                  "viscosity": cfg.viscosity}
    return build_models(cfg)


def _cmd_speeds(args, run: _Run) -> int:
    m, r = _load(args, run)
    sigma_s, report = find_sigma_s(m, r, tol_sigma=run.tol)
    sigma_r = None
    hint = report.attainment_hint
    try:
        sigma_r, hint, report_r = find_sigma_r(m, r, tol_sigma=run.tol)
        report.sigma_r = sigma_r
        report.attainment_hint = hint
        report.bracket_history += report_r.bracket_history
        report.probes += report_r.probes
    except HypothesisViolation as e:
        # the classic threshold needs a regular flux; the singular one does
        # not, so report it alone rather than failing the whole run
        run.extras["sigma_r_unavailable"] = str(e)

    payload = json.loads(report.to_json())
    payload["tol_sigma"] = run.tol
    if "sigma_r_unavailable" in run.extras:
        payload["sigma_r_note"] = run.extras["sigma_r_unavailable"]
    run.write_json("speeds.json", payload)

    line = f"sigma_s={sigma_s:.6f}"
    if sigma_r is not None:
        line += f" sigma_r={sigma_r:.6f}"
        if sigma_s < sigma_r - run.tol:
            line += (f" gap={sigma_r - sigma_s:.6f}"
                     " [sigma_s < sigma_r: no classic wave at the threshold]")
    line += f" lower_bound={report.lower_bound:.6f} hint={hint}"
    print(line)
    return EXIT_OK


def _widest_free_level(blocked: list[tuple[float, float]]) -> float:
    """Midpoint of the widest level stretch not covered by known plateaus."""
    lo, hi = 1e-3, 1.0 - 1e-3
    edges = sorted({lo, hi, *(v for pair in blocked for v in pair)})
    best, width = None, 0.0
    for a, b in zip(edges, edges[1:]):
        mid = 0.5 * (a + b)
        if not lo <= mid <= hi:
            continue
        if any(p <= mid <= q for p, q in blocked):
            continue
        if b - a > width:
            best, width = mid, b - a
    if best is None:
        raise AnchorOnPlateau("no level outside the profile's jumps")
    return best


def _cmd_profile(args, run: _Run) -> int:
    m, r = _load(args, run)
    sigma = float(args.sigma)
    sigma_s, _ = find_sigma_s(m, r, tol_sigma=run.tol)
    if sigma < sigma_s - run.tol:
        print(f"requested speed {sigma:.6f} is below the singular threshold "
              f"{sigma_s:.6f}; no wave profile exists there "
              f"(rerun with --sigma >= {sigma_s:.6f})", file=sys.stderr)
        return EXIT_BELOW_THRESHOLD

    sol = integrate_halfplane(m, r, sigma, max_du=1e-3)
    # the anchor only fixes the profile's translation, so when the
    # requested level is swallowed by a jump, move it to the widest
    # remaining stretch rather than failing the run
    anchor, blocked = float(args.anchor), []
    while True:
        try:
            gmap = build_G(sol, anchor, m=m)
            break
        except AnchorOnPlateau as e:
            if not (math.isfinite(e.lo) and math.isfinite(e.hi)):
                raise
            blocked.append((e.lo, e.hi))
            if len(blocked) > 8:
                raise
            anchor = _widest_free_level(blocked)
    if anchor != float(args.anchor):
        print(f"anchor {args.anchor:g} sits on a jump of this profile; "
              f"using {anchor:.6g} instead", file=sys.stderr)
        run.extras["anchor"] = {"requested": float(args.anchor),
                                "used": anchor}
    if args.window is not None:
        xi_lo, xi_hi = args.window
    else:
        xi_lo, xi_hi = gmap.xi_window()
    if not xi_lo < xi_hi:
        raise ParseError("--window must satisfy LO < HI")
    xi = np.linspace(xi_lo, xi_hi, args.points)
    profile = invert_profile(gmap, xi)
    profile.write_csv(run.path("profile.csv"))

    checks = check_jumps(profile, m, sigma)
    checks.write_csv(run.path("jumps.csv"))
    run.write_json("checks.json", {
        "sigma": sigma,
        "sigma_s": sigma_s,
        "kind": profile.kind,
        "n_jumps": len(checks.points),
        "rh_residuals": list(checks.rh_residuals),
        "bdp_margins": list(checks.bdp_margins),
        "h_residuals": list(checks.h_residuals),
        "rh_ok": checks.rh_ok,
        "bdp_ok": checks.bdp_ok,
        "h_ok": checks.h_ok,
    })
    print(f"kind={profile.kind} jumps={len(checks.points)} "
          f"rh_ok={checks.rh_ok} bdp_ok={checks.bdp_ok}")
    return EXIT_OK


def _cmd_sweep(args, run: _Run) -> int:
    m, r = _load(args, run)
    sweep = viscosity_sweep(m, r, args.eps, tol_sigma=run.tol)
    with open(run.path("sweep.csv"), "w", newline="\n") as fh:
        fh.write("eps,sigma_eps,monotone\n")
        prev = None
        for eps, sig in sweep.rows():
            ok = 1 if (prev is None or sig <= prev + run.tol) else 0
            fh.write(f"{_fmt(eps)},{_fmt(sig)},{ok}\n")
            prev = sig
    run.extras["limit"] = sweep.limit
    print(f"limit={sweep.limit:.6f} +- {sweep.limit_err:.2e} "
          f"monotone={sweep.monotone}")
    return EXIT_OK


def _cmd_validate(args, run: _Run) -> int:
    m, r = _load(args, run)
    sigma_s, _ = find_sigma_s(m, r, tol_sigma=run.tol)
    grid = SimGrid(h=args.grid_h, L=args.grid_L, T=args.grid_T)
    traj = simulate_front(m, r, grid)
    traj.write_csv(run.path("trajectory.csv"))
    meas = measure_speed(traj)
    rel_err = abs(meas.speed - sigma_s) / max(abs(sigma_s), 1e-30)
    passed = rel_err <= args.speed_tol and meas.spread <= args.spread_tol
    run.write_json("validate.json", {
        "sigma_s": sigma_s,
        "pde_speed": meas.speed,
        "pde_stderr": meas.stderr,
        "per_level": {str(k): v for k, v in meas.per_level.items()},
        "spread": meas.spread,
        "rel_err": rel_err,
        "speed_tol": args.speed_tol,
        "spread_tol": args.spread_tol,
        "grid": {"h": grid.h, "L": grid.L, "T": grid.T},
        "passed": bool(passed),
    })
    print(f"sigma_s={sigma_s:.6f} pde_speed={meas.speed:.6f} "
          f"rel_err={rel_err:.4f} spread={meas.spread:.4f} passed={passed}")
    return EXIT_OK


def _cmd_example(args, run: _Run) -> int:
    cfg = _EXAMPLE_CONFIGS[args.name]
    run.config = cfg
    path = run.write_json(f"{args.name}.json", cfg)
    print(path)
    return EXIT_OK


def _eps_list(text: str) -> list[float]:
    vals = [v for v in (part.strip() for part in text.split(",")) if v]
    if not vals:
        raise argparse.ArgumentTypeError("empty eps list")
    try:
        return [float(v) for v in vals]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected LO,HI")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdwaves",
        description="Wave-speed thresholds and profiles for degenerate "
                    "saturating reaction-diffusion models.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", type=Path, help="model config JSON")
    common.add_argument("--tol", type=float, default=TOL_SIGMA,
                        help="speed tolerance (default %(default)g)")
    common.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (default current)")
    common.add_argument("--threads", type=int, default=1,
                        help="solver thread budget, recorded in the manifest")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for randomized suites, recorded")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("speeds", parents=[common],
                       help="singular and classic speed thresholds")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="bump amplitude override for example4 configs")
    p.set_defaults(func=_cmd_speeds)

    p = sub.add_parser("profile", parents=[common],
                       help="reconstruct a wave profile and check its jumps")
    p.add_argument("--sigma", type=float, required=True, help="wave speed")
    p.add_argument("--anchor", type=float, default=0.5,
                   help="level placed at xi = 0 (default %(default)s)")
    p.add_argument("--window", type=_window, default=None,
                   help="xi range LO,HI (default from the profile map)")
    p.add_argument("--points", type=int, default=2001,
                   help="uniform grid size (default %(default)s)")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("sweep", parents=[common],
                       help="viscosity sweep toward the singular threshold")
    p.add_argument("--eps", type=_eps_list, required=True,
                   help="comma-separated decreasing viscosities")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate", parents=[common],
                       help="cross-check the threshold against a PDE run")
    p.add_argument("--grid-h", type=float, default=0.05)
    p.add_argument("--grid-L", type=float, default=200.0)
    p.add_argument("--grid-T", type=float, default=60.0)
    p.add_argument("--speed-tol", type=float, default=0.05)
    p.add_argument("--spread-tol", type=float, default=0.02)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("example", parents=[common],
                       help="write a ready-made model config")
    p.add_argument("name", choices=sorted(_EXAMPLE_CONFIGS))
    p.set_defaults(func=_cmd_example)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "example" and args.model is None:
        parser.error(f"{args.command} requires --model")
    if args.threads < 1:
        parser.error("--threads must be positive")

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"cannot create output directory: {e}", file=sys.stderr)
        return EXIT_CONFIG

    run = _Run(args.command, out_dir, args)
    try:
        code = args.func(args, run)
    except (ParseError, SpecViolation) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolation as e:
        print(f"hypothesis violation: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (BracketNotClosed, RootNotBracketed) as e:
        print(f"bracketing failure: {e}", file=sys.stderr)
        return EXIT_BRACKET
    except RdwavesError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if code == EXIT_OK:
        run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
