"""Command-line front end: run, validate, modes, static.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 failed check under --check.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .basis import make_basis
from .config import ScenarioConfig, load_config, read_initial_file
from .core import ConfigError, ContinuationStall, InextError, NewtonDivergence, ProjectionFailure, UnsupportedMode
from .dynamics import MULTIPLIER, SemiDiscreteSystem, first_mode_ic, recover_fields, simulate
from .output import (SNAPSHOT_SCHEMA, TRAJECTORY_SCHEMA, write_csv, write_json, write_manifest,
                     write_snapshot, write_svg, write_trajectory)
from .residuals import interior_residual
from .statics import linear_modes, solve_static

log = logging.getLogger("inextensible")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4
SOLVER_ERRORS = (NewtonDivergence, ProjectionFailure, ContinuationStall, np.linalg.LinAlgError,
                 FloatingPointError)
PLOT_POINTS = 41


def _out_dir(cfg: ScenarioConfig, override: str | None) -> Path:
    out = Path(override) if override else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = out / "manifest.json"
    if manifest.exists():
        manifest.unlink()  # a new run owns the directory
    return out


def _probe_rows(basis, probes) -> np.ndarray | None:
    if not probes:
        return None
    rows = []
    for p in probes:
        rx = basis.x.evaluate(0, [p[0]])[0]
        rows.append(rx if basis.ndim == 1 else np.kron(rx, basis.y.evaluate(0, [p[1]])[0]))
    return np.array(rows)


def fit_modal(basis, table: dict, column: str) -> np.ndarray:
    """Least-squares modal coefficients of tabulated samples."""
    rx = basis.x.evaluate(0, table["x"])
    if basis.ndim == 1:
        A = rx
    else:
        if "y" not in table:
            raise ConfigError("initial.file: plate fields need a y column")
        ry = basis.y.evaluate(0, table["y"])
        A = np.einsum("pi,pj->pij", rx, ry).reshape(len(table["x"]), -1)
    return np.linalg.lstsq(A, table[column], rcond=None)[0]


def _initial_data(cfg: ScenarioConfig, system: SemiDiscreteSystem) -> tuple:
    if cfg.initial_file is not None:
        table = read_initial_file(cfg.initial_file)
        w0 = fit_modal(system.basis, table, "w")
        w1 = fit_modal(system.basis, table, "w_t") if "w_t" in table else np.zeros_like(w0)
        return w0, w1
    shape, _ = first_mode_ic(system, 1.0, cfg.initial_mode)
    return cfg.amplitude * shape, cfg.velocity * shape


def _field_grid(basis, q):
    x = np.linspace(0.0, basis.x.length, PLOT_POINTS)
    if basis.ndim == 1:
        return x, None, basis.x.evaluate(0, x) @ q
    y = np.linspace(0.0, basis.y.length, (PLOT_POINTS + 1) // 2)
    Q = q.reshape(basis.x.n_modes, basis.y.n_modes)
    return x, y, basis.x.evaluate(0, x) @ Q @ basis.y.evaluate(0, y).T


def _relative_drift(total: np.ndarray) -> float:
    dev = float(np.max(np.abs(total - total[0])))
    ref = abs(float(total[0]))
    if dev == 0.0:
        return 0.0
    return dev / ref if ref > 0 else float("inf")


def run_checks(cfg: ScenarioConfig, system: SemiDiscreteSystem, traj) -> tuple:
    """Invariant checks for a dynamics run; values and pass flags."""
    checks = {"completed": traj.failure is None}
    vals = {"energy_drift": _relative_drift(traj.array("total"))}
    checks["energy_drift_le_1e-4"] = vals["energy_drift"] <= 1e-4
    if system.mode == MULTIPLIER:
        vals["constraint_max"] = float(np.max(traj.array("constraint_inf")))
        checks["constraint_le_1e-9"] = vals["constraint_max"] <= 1e-9
    if not np.any(traj.q[0]) and not np.any(traj.qdot[0]):
        checks["zero_state_preserved"] = not np.any(traj.array("q"))
    return checks, vals


def _final_residuals(system: SemiDiscreteSystem, traj) -> dict:
    q, qd = traj.q[-1], traj.qdot[-1]
    state, mult = recover_fields(system, q, qd)
    rep = interior_residual(state, mult, system.model)
    return {k: v["sup"] for k, v in rep.norms.items()}


def cmd_run(cfg: ScenarioConfig, out: Path, check: bool) -> int:
    t0 = time.perf_counter()
    system = SemiDiscreteSystem(cfg.model, mode=cfg.constraint_mode, nx=cfg.nx, ny=cfg.ny,
                                nqx=cfg.nqx, nqy=cfg.nqy)
    w0, w1 = _initial_data(cfg, system)
    traj = simulate(system, w0, w1, cfg.dt, cfg.t_end, cfg.scheme, raise_on_failure=False,
                    newton_tol=cfg.newton_tol)
    artifacts = []
    if "csv" in cfg.formats:
        artifacts.append(write_trajectory(out / "trajectory.csv", traj, _probe_rows(system.basis, cfg.probes)))
        times = traj.array("t")
        for k, ts in enumerate(cfg.snapshots):
            idx = int(np.argmin(np.abs(times - ts)))
            x, y, w = _field_grid(system.basis, traj.q[idx][: system.n_w])
            artifacts.append(write_snapshot(out / f"snapshot_{k:03d}.csv", x, y, w))
    checks, vals = run_checks(cfg, system, traj)
    if "json" in cfg.formats:
        lam = traj.array("lambda_root")
        diag = {"schema": {"trajectory": TRAJECTORY_SCHEMA, "snapshot": SNAPSHOT_SCHEMA},
                "model": cfg.model.to_dict(), "steps": len(traj) - 1,
                "final_time": traj.times[-1], "values": vals,
                "lambda_root": {"min": float(lam.min()), "max": float(lam.max()), "final": float(lam[-1])},
                "checks": checks,
                "residual_sup_final": _final_residuals(system, traj),
                "failure": None if traj.failure is None else
                {"type": type(traj.failure).__name__, "message": str(traj.failure),
                 "step_index": getattr(traj.failure, "step_index", None)}}
        artifacts.append(write_json(out / "diagnostics.json", diag))
    if "svg" in cfg.formats:
        t = traj.array("t")
        artifacts.append(write_svg(out / "energy.svg", t, {"E_K + E_P": traj.array("total"),
                                                           "E_K": traj.array("kinetic"),
                                                           "E_P": traj.array("potential")},
                                   "Energy history", "t", "energy"))
        artifacts.append(write_svg(out / "tip.svg", t, {"tip": traj.array("tip")},
                                   "Tip deflection", "t", "w"))
    status = "complete" if traj.failure is None else "partial"
    write_manifest(out / "manifest.json", cfg.config_hash(), __version__, time.perf_counter() - t0,
                   checks, artifacts, status, None if traj.failure is None else str(traj.failure))
    if traj.failure is not None:
        log.error("solver failure: %s", traj.failure)
        return EXIT_SOLVER
    return _check_exit(checks, check)


def _check_exit(checks: dict, check: bool) -> int:
    failed = [k for k, v in checks.items() if not v]
    for k in failed:
        log.warning("check failed: %s", k)
    return EXIT_CHECK if (check and failed) else EXIT_OK


def cmd_modes(cfg: ScenarioConfig, out: Path, check: bool) -> int:
    t0 = time.perf_counter()
    rep = linear_modes(cfg.model, cfg.n_modes, cfg.nx, cfg.ny)
    f = rep.frequencies
    checks = {"nonnegative": bool(np.all(f >= 0)), "sorted": bool(np.all(np.diff(f) >= 0))}
    if cfg.model.is_beam:
        p = cfg.model.params
        linear = 1.87510407 ** 2 * np.sqrt(p.stiffness) / p.length ** 2
        checks["first_frequency_matches_cantilever"] = abs(f[0] / linear - 1) <= 1e-4
    artifacts = []
    if "csv" in cfg.formats:
        artifacts.append(write_csv(out / "modes.csv", ["index", "omega"], enumerate(f)))
    if "json" in cfg.formats:
        artifacts.append(write_json(out / "modes.json", {"frequencies": f, "shapes": rep.shapes,
                                                         "checks": checks}))
    write_manifest(out / "manifest.json", cfg.config_hash(), __version__, time.perf_counter() - t0,
                   checks, artifacts)
    for k, w in enumerate(f):
        print(f"mode {k}: omega = {w:.10g}")
    return _check_exit(checks, check)


def cmd_static(cfg: ScenarioConfig, out: Path, check: bool) -> int:
    t0 = time.perf_counter()
    error = None
    try:
        rep = solve_static(cfg.model, cfg.load, cfg.nx, cfg.ny)
    except ContinuationStall as exc:
        rep, error = exc.last_report, exc
    checks = {"converged": error is None}
    artifacts = []
    if rep is not None:
        checks.update({"optimality_le_1e-10": rep.optimality <= 1e-10,
                       "constraint_le_1e-10": rep.constraint_inf <= 1e-10,
                       "stable_branch": not (rep.min_reduced_eig < -1e-8)})
        doc = {"load": {"kind": rep.load.kind, "magnitude": rep.load.magnitude},
               "load_level": rep.load_level, "tip": rep.tip, "corner": rep.corner,
               "optimality": rep.optimality, "constraint_inf": rep.constraint_inf,
               "potential": rep.energy.potential, "work": rep.work,
               "min_reduced_hessian_eig": rep.min_reduced_eig, "iterations": rep.iterations,
               "q": rep.q, "multipliers": rep.multipliers, "checks": checks}
        if "json" in cfg.formats:
            artifacts.append(write_json(out / "static.json", doc))
        if "csv" in cfg.formats:
            x, y, w = _field_grid(make_basis(cfg.model, cfg.nx, cfg.ny), rep.q[: cfg.nx * cfg.ny])
            artifacts.append(write_snapshot(out / "static_field.csv", x, y, w))
        print(f"tip deflection = {rep.tip:.10g} (load level {rep.load_level:g})")
    write_manifest(out / "manifest.json", cfg.config_hash(), __version__, time.perf_counter() - t0,
                   checks, artifacts, "complete" if error is None else "partial",
                   None if error is None else str(error))
    if error is not None:
        log.error("solver failure: %s", error)
        return EXIT_SOLVER
    return _check_exit(checks, check)


def cmd_validate(cfg: ScenarioConfig) -> int:
    print("valid")
    print("effective defaults:")
    for line in cfg.defaults_used:
        print(f"  {line}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="inextensible",
                                description="Inextensible beam and plate simulations.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", required=True)
    for verb, text in (("run", "integrate a dynamics scenario"),
                       ("validate", "check a configuration without running"),
                       ("modes", "linear modes about the flat state"),
                       ("static", "static equilibrium under the configured load")):
        s = sub.add_parser(verb, help=text)
        s.add_argument("--config", required=True, metavar="PATH")
        if verb != "validate":
            s.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
            s.add_argument("--check", action="store_true", help="exit 4 when an invariant check fails")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.verb == "validate":
            return cmd_validate(cfg)
        out = _out_dir(cfg, args.out)
        handler = {"run": cmd_run, "modes": cmd_modes, "static": cmd_static}[args.verb]
        return handler(cfg, out, args.check)
    except (ConfigError, UnsupportedMode) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except InextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
