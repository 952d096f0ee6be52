"""Command-line entry point.

    roughwet solve CONFIG.toml --set surface.eps=0.03125
    roughwet sweep CONFIG.toml --out results/
    roughwet run CONFIG.toml          # scenario taken from the file

Exit codes: 0 success, 1 configuration error, 2 solver non-convergence,
3 validation failure.  Output goes to ``--out``, else ``$ROUGHWET_OUTPUT``,
else ``./roughwet-output``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from .checks import validation_suite
from .config import SCENARIOS, ConfigError, RunConfig, load_config
from .contactline import (
    TotalWettingError,
    apparent_angle,
    apparent_cosine,
    lift_contact_line,
    modified_cassie,
    modified_wenzel,
    partial_wetting_margin,
)
from .homogenize import convergence_study, error_norms, fit_linear, bound_checks, y_average
from .hysteresis import angle_vs_offset, hysteresis_range
from .solver import SolverError, identity_residual, solve_free, write_solution_csv
from .surface import cassie_area_average, roughness_factor

log = logging.getLogger("roughwet")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3
OUTPUT_ENV = "ROUGHWET_OUTPUT"


def _deg(x: float) -> str:
    return "nan" if math.isnan(x) else f"{math.degrees(x):.6f}"


def _cos(x: float) -> str:
    return "nan" if math.isnan(x) else f"{math.cos(x):.9f}"


def _write_rows(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


# ---------------------------------------------------------------------------
# scenarios: each returns (exit code, artifacts, extra manifest entries)
# ---------------------------------------------------------------------------

def _solve(cfg: RunConfig, out: Path):
    spec = cfg.surface.build()
    scfg = cfg.solver_config()
    rows, arts, code = [], [], EXIT_OK
    for i, h0 in enumerate(cfg.seed_heights):
        sol = solve_free(spec, h0, scfg)
        arts += write_solution_csv(sol, out / f"solution_{i}.csv")
        fit = fit_linear(*y_average(sol))
        est1, est2 = error_norms(sol, fit)
        try:
            formula = apparent_angle(sol.contact_line)
        except TotalWettingError:
            formula = float("nan")
        bounds = bound_checks(sol)
        rows.append([i, f"{h0:.9g}", int(sol.converged), sol.status, sol.outer_iterations,
                     _deg(fit.theta_a), _cos(fit.theta_a), _deg(formula), _cos(formula),
                     f"{float(sol.contact_line.psi.mean()):.9g}", f"{sol.nu:.6f}",
                     f"{sol.energy.total:.12g}", f"{sol.young_residual:.3e}",
                     f"{identity_residual(sol):.3e}", f"{est1:.3e}", f"{est2:.3e}",
                     int(all(c.ok for c in bounds))])
        if not sol.converged:
            code = EXIT_SOLVER
    arts.append(_write_rows(out / "summary.csv", [
        "run", "seed_height", "converged", "status", "outer_iterations",
        "theta_meas_deg", "cos_theta_meas", "theta_formula_deg", "cos_theta_formula",
        "line_height", "nu", "energy", "young_residual", "identity_residual",
        "est1", "est2", "bounds_ok"], rows))
    return code, arts, {}


def _sweep(cfg: RunConfig, out: Path):
    rep = convergence_study(cfg.surface.build, cfg.surface.eps_list, cfg.solver_config(),
                            cfg.seed_heights[0], workers=cfg.workers)
    arts = [rep.write_csv(out / "convergence.csv"),
            rep.write_plot_data(out / "convergence_loglog.csv")]
    extra = {"slope_est1": rep.slope, "C1": rep.C1, "C2": rep.C2,
             "C2_proof_bound": rep.C2_bound, "partial": rep.partial}
    return (EXIT_SOLVER if rep.partial else EXIT_OK), arts, extra


def _hysteresis(cfg: RunConfig, out: Path):
    spec = cfg.surface.build()
    table = angle_vs_offset(spec, cfg.n_offsets)
    arts = [table.write_csv(out / "angles.csv")]
    hr = hysteresis_range(table)
    arts.append(_write_rows(out / "range.csv", [
        "kind", "theta_deg", "cos_theta", "offset"], [
        ["advancing", _deg(hr.advancing), _cos(hr.advancing), f"{hr.advancing_offset:.12g}"],
        ["receding", _deg(hr.receding), _cos(hr.receding), f"{hr.receding_offset:.12g}"],
    ]))
    return EXIT_OK, arts, {"advancing_deg": math.degrees(hr.advancing),
                           "receding_deg": math.degrees(hr.receding)}


def _formula(cfg: RunConfig, out: Path):
    spec = cfg.surface.build()
    cl = lift_contact_line(spec, cfg.surface.line_height)

    def attempt(fn):
        try:
            return fn(cl)
        except (TotalWettingError, ValueError):
            return float("nan")

    theta = attempt(apparent_angle)
    cassie = attempt(modified_cassie)
    wenzel = attempt(modified_wenzel)
    r = roughness_factor(spec)
    row = [f"{cfg.surface.line_height:.9g}", _deg(theta), _cos(theta),
           f"{apparent_cosine(cl):.9f}", f"{partial_wetting_margin(cl):.6f}",
           _deg(cassie), _deg(wenzel), f"{r:.9f}", f"{cassie_area_average(spec):.9f}"]
    arts = [_write_rows(out / "formula.csv", [
        "line_height", "theta_a_deg", "cos_theta_a", "line_average", "nu",
        "modified_cassie_deg", "modified_wenzel_deg", "roughness_factor",
        "cassie_area_average"], [row])]
    return EXIT_OK, arts, {}


def _validate(cfg: RunConfig, out: Path):
    results = validation_suite(cfg.seed, cfg.solver_config())
    arts = [_write_rows(out / "validation.csv", ["check", "value", "limit", "passed"],
                        [[r.name, f"{r.value:.6e}", f"{r.limit:.6e}", int(r.passed)]
                         for r in results])]
    failed = [r.name for r in results if not r.passed]
    for name in failed:
        log.error("validation failed: %s", name)
    return (EXIT_VALIDATION if failed else EXIT_OK), arts, {"failed_checks": failed}


SCENARIO_FUNCS = {"solve": _solve, "sweep": _sweep, "hysteresis": _hysteresis,
                  "formula": _formula, "validate": _validate}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(cfg: RunConfig, out: str | Path | None = None) -> int:
    """Execute ``cfg.scenario`` and write a manifest next to its outputs."""
    out = Path(out or cfg.output or os.environ.get(OUTPUT_ENV) or "roughwet-output")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("cannot create output directory %s: %s", out, exc)
        return EXIT_CONFIG
    try:
        code, arts, extra = SCENARIO_FUNCS[cfg.scenario](cfg, out)
    except SolverError as exc:
        log.error("solver failure: %s", exc)
        code, arts, extra = EXIT_SOLVER, sorted(p for p in out.glob("*.csv")), {"error": str(exc)}
    try:
        pkg_version = version("roughwet")
    except PackageNotFoundError:
        pkg_version = "unknown"
    manifest = {
        "scenario": cfg.scenario,
        "config_sha256": cfg.digest(),
        "config": cfg.as_dict(),
        "version": pkg_version,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "exit_code": code,
        "artifacts": [{"file": p.name, "sha256": _sha256(p)} for p in arts],
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roughwet", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)
    for name in (*SCENARIOS, "run"):
        sp = sub.add_parser(name, help=f"run the {name} scenario" if name != "run"
                            else "run the scenario named in the config")
        sp.add_argument("config", nargs="?", help="TOML configuration file")
        sp.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key, e.g. surface.eps=0.125")
        sp.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV})")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else
                        logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides,
                          None if args.command == "run" else args.command)
    except ConfigError as exc:
        print(f"roughwet: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = run(cfg, args.out)
    print(f"roughwet {cfg.scenario}: exit {code}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
