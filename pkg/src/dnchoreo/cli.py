"""Command line entry point: ``dnchoreo {solve,verify,curves,sweep}``."""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, with_overrides
from .dynamics import build_configuration, rotating_to_inertial
from .errors import ChoreoError, ConfigError, ResonantMode, SolverError
from .serialize import (
    dump_json,
    load_solution,
    render_svg,
    save_curve,
    save_solution,
    write_configuration_csv,
)
from .solver import (
    SolveReport,
    default_amplitudes,
    homotopy_continuation,
    initial_guess,
    newton_solve,
)
from .spectral import check_nonresonance
from .symmetry import SymmetrySpec, symmetry_defect, winding_number
from .verify import verify_solution

log = logging.getLogger("dnchoreo")

FIG1_PAIRS = ((3, 4), (4, 5), (5, 6), (5, 11), (6, 13), (7, 22))
TRAJECTORY_SAMPLES = 256
SWEEP_FIELDS = ("n", "W", "alpha", "Omega", "m", "converged", "residual", "min_separation",
                "winding", "h1_norm", "R0", "error")
_SWEEPABLE = ("n", "W", "alpha", "Omega", "m")


def example_config_path() -> Path:
    return Path(str(resources.files("dnchoreo") / "data" / "example_3_4.toml"))


# -- solve ---------------------------------------------------------------------


def nonresonance_guard(run: RunConfig):
    """Raise ResonantMode if Omega hits omega k for an active |k| <= K_max (k = 0 excluded)."""
    res = check_nonresonance(run.spec.omega, run.params.Omega, run.solver.K_max)
    bad = [k for k in res.offending if k != 0]
    if bad:
        k = min(bad, key=abs)
        raise ResonantMode(k, abs(abs(run.spec.omega * k) - abs(run.params.Omega)))


def starting_curve(run: RunConfig):
    """Initial guess from the configured amplitudes, perturbed reproducibly when asked."""
    amps = dict(run.amplitudes)
    if run.perturbation:
        rng = np.random.default_rng(run.seed)
        for k in sorted(amps):
            amps[k] = amps[k] * (1.0 + run.perturbation * rng.standard_normal())
    return initial_guess(run.spec, amps, run.solver.K_max)


def run_solve(run: RunConfig):
    """Solve per ``run.strategy``; returns (curve, report, error message or None)."""
    nonresonance_guard(run)
    u0 = starting_curve(run)
    try:
        if run.strategy == "newton":
            curve, report = newton_solve(u0, run.params, run.spec, run.solver)
        else:
            curve, report = homotopy_continuation(u0, run.params, run.spec, run.solver)
    except SolverError as exc:
        return exc.curve, exc.report or SolveReport(), str(exc)
    return curve, report, None


def write_solution_artifacts(out: Path, curve, report, run: RunConfig, error=None):
    out.mkdir(parents=True, exist_ok=True)
    data = report.to_dict()
    data["error"] = error
    data["config"] = {
        "n": run.spec.n, "W": run.spec.W, "T": run.spec.T,
        "alpha": run.params.alpha, "m": run.params.m, "Omega": run.params.Omega,
        "strategy": run.strategy, "K_max": run.solver.K_max,
        "lambda_schedule": list(run.solver.lambda_schedule), "seed": run.seed,
        "amplitudes": {str(k): v for k, v in sorted(run.amplitudes.items())},
    }
    dump_json(out / "report.json", data)
    if curve is None:
        return
    save_solution(out / "solution.json", curve, run.spec, run.params)
    save_curve(out / "curve.json", curve)
    rot = build_configuration(curve, run.spec, TRAJECTORY_SAMPLES)
    write_configuration_csv(out / "trajectories_rotating.csv", rot)
    write_configuration_csv(out / "trajectories_inertial.csv", rotating_to_inertial(rot, run.params.Omega))


def _load_run(args) -> RunConfig:
    path = args.config or example_config_path()
    run = load_config(path)
    if args.seed is not None:
        run = with_overrides(run, seed=args.seed)
    return run


def cmd_solve(args) -> int:
    run = _load_run(args)
    try:
        nonresonance_guard(run)
    except ResonantMode as exc:
        print(f"error: nonresonance check failed before solving: {exc}", file=sys.stderr)
        return 2
    curve, report, error = run_solve(run)
    out = Path(args.out)
    write_solution_artifacts(out, curve, report, run, error)
    if error:
        print(f"error: {error}", file=sys.stderr)
    ok = bool(report.converged) and error is None
    print(f"converged={ok} iterations={report.iterations} residual={report.final_residual_L2:.3e} "
          f"winding={report.winding} min_separation={report.min_separation:.4g} "
          f"h1_norm={report.h1_norm:.6g} R0={report.apriori_R0}")
    print(f"artifacts written to {out}")
    return 0 if ok else 1


# -- verify ------------------------------------------------------------------------


def cmd_verify(args) -> int:
    curve, spec, params = load_solution(args.solution)
    result = verify_solution(curve, params, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(out / "verification.json", result)
    for name, chk in result["checks"].items():
        flag = "PASS" if chk["passed"] else "FAIL"
        print(f"{flag}  {name}: {chk['value']} (threshold {chk['threshold']})")
    if not result["passed"]:
        print("failed checks: " + ", ".join(result["failed"]), file=sys.stderr)
        return 1
    return 0


# -- curves ------------------------------------------------------------------------


def _parse_amplitudes(text: str) -> dict:
    """'1:0.3,4:1' -> {1: 0.3, 4: 1.0}."""
    amps = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        k, _, a = item.partition(":")
        if not _:
            raise ValueError(f"amplitude entry {item!r} is not of the form k:a")
        amps[int(k)] = float(a)
    return amps


def render_curve(n: int, W: int, amplitudes: dict | None, path: Path, K_max: int = 64) -> dict:
    """Write one generating-curve SVG; returns its checks (winding, symmetry, closure)."""
    spec = SymmetrySpec(n, W)
    amps = amplitudes or default_amplitudes(n, W)
    curve = initial_guess(spec, amps, K_max)
    _, pts = render_svg(curve, spec, path)
    closure = float(np.linalg.norm(curve.evaluate(curve.T) - curve.evaluate(0.0)))
    rot, refl = symmetry_defect(curve, n)
    return {"n": n, "W": W, "file": path.name, "winding": winding_number(curve),
            "symmetry_shift": rot, "symmetry_reflection": refl, "closure_gap": closure,
            "samples": len(pts)}


def cmd_curves(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.preset == "fig1":
        jobs = [(n, W, None) for n, W in FIG1_PAIRS]
    elif args.n is not None and args.W is not None:
        amps = _parse_amplitudes(args.amplitudes) if args.amplitudes else None
        jobs = [(args.n, args.W, amps)]
    else:
        print("error: give --preset fig1 or both --n and --W", file=sys.stderr)
        return 2
    summary = []
    for n, W, amps in jobs:
        info = render_curve(n, W, amps, out / f"curve_n{n}_W{W}.svg")
        summary.append(info)
        print(f"n={n} W={W}: winding={info['winding']} -> {out / info['file']}")
    dump_json(out / "curves.json", summary)
    return 0


# -- sweep -------------------------------------------------------------------------


def sweep_runs(run: RunConfig) -> list:
    """Cartesian product of the [sweep] lists, in declaration order."""
    table = run.sweep
    if not table:
        raise ConfigError("config has no [sweep] table")
    unknown = set(table) - set(_SWEEPABLE)
    if unknown:
        raise ConfigError(f"unknown key(s) in [sweep]: {', '.join(sorted(unknown))}")
    keys = [k for k in _SWEEPABLE if k in table]
    values = [v if isinstance(v, list) else [v] for v in (table[k] for k in keys)]
    return [with_overrides(run, **dict(zip(keys, combo))) for combo in itertools.product(*values)]


def sweep_job(run: RunConfig) -> dict:
    row = {"n": run.spec.n, "W": run.spec.W, "alpha": run.params.alpha,
           "Omega": run.params.Omega, "m": run.params.m}
    try:
        _, report, error = run_solve(run)
    except (ChoreoError, ValueError) as exc:
        report, error = SolveReport(), str(exc)
    row.update(converged=bool(report.converged) and error is None,
               residual=report.final_residual_L2, min_separation=report.min_separation,
               winding=report.winding, h1_norm=report.h1_norm, R0=report.apriori_R0,
               error=error or "")
    return row


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def cmd_sweep(args) -> int:
    runs = sweep_runs(_load_run(args))
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(sweep_job, runs))
    else:
        rows = [sweep_job(r) for r in runs]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_FIELDS)
        for row in rows:
            w.writerow([_cell(row[f]) for f in SWEEP_FIELDS])
    done = sum(r["converged"] for r in rows)
    print(f"{done}/{len(rows)} runs converged -> {out / 'sweep.csv'}")
    return 0


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dnchoreo", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", type=Path, help="TOML run configuration (default: bundled 3-body example)")
            sp.add_argument("--seed", type=int, help="seed for the optional initial-guess perturbation")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    s = sub.add_parser("solve", help="solve one configuration")
    common(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run every oracle on a solution file")
    v.add_argument("solution", type=Path)
    common(v, config=False)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("curves", help="render generating curves as SVG")
    c.add_argument("--preset", choices=["fig1"])
    c.add_argument("--n", type=int)
    c.add_argument("--W", type=int)
    c.add_argument("--amplitudes", help="comma-separated k:a pairs, e.g. 1:0.3,4:1")
    common(c, config=False)
    c.set_defaults(func=cmd_curves)

    w = sub.add_parser("sweep", help="solve every combination in the [sweep] table")
    common(w)
    w.add_argument("--workers", type=int, default=1)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ChoreoError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
