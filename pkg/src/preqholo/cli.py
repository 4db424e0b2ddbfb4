"""Scenario runner: executes configured computations and writes result files.

Exit codes: 0 on success with all suites passing, 1 for configuration
errors, 2 for numerical failures (loop non-closure, unwrap failure, step
control breakdown) or failing verification checks.  Output files are
deterministic for a fixed (config, seed): no timestamps or durations are
recorded.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, Scenario, build_family, build_loop, resolve_base_points
from .dynamics import IntegrationError, LoopClosureError
from .families import UnwrapError, omega_eval as family_omega, phase_lift
from .holonomy import kappa
from .sphere import OrbitSphere, spherical_coords, sphere_point
from .verify import verify_suite

log = logging.getLogger("preqholo")

_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _configure_logging():
    level = os.environ.get("PREQ_LOG", "info").lower()
    if level not in _LOG_LEVELS:
        level = "info"
    logging.basicConfig(level=_LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s")


def _meta(scenario: Scenario) -> dict:
    return {
        "package": "preqholo",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seed": scenario.seed,
        "config": scenario.echo(),
    }


def _write_results(record: dict, out_dir: str) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / "results.json"
    target.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return target


def _write_phases_csv(rows, out_dir: str) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / "phases.csv"
    lines = ["s,phase_rev,kappa_re,kappa_im"]
    for s, phase in rows:
        z = np.exp(2j * np.pi * phase)
        lines.append(f"{float(s)!r},{float(phase)!r},{float(z.real)!r},{float(z.imag)!r}")
    target.write_text("\n".join(lines) + "\n")
    return target


def _write_points_csv(points_data, out_dir: str) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / "points.csv"
    lines = ["theta,phi,phase_rev,kappa_re,kappa_im"]
    for entry in points_data:
        lines.append(
            f"{entry['theta']!r},{entry['phi']!r},{entry['phase_rev']!r},"
            f"{entry['kappa_re']!r},{entry['kappa_im']!r}"
        )
    target.write_text("\n".join(lines) + "\n")
    return target


def _point_records(points, phases) -> list[dict]:
    out = []
    for q, phase in zip(points, phases):
        theta, phi = spherical_coords(q)
        z = np.exp(2j * np.pi * phase)
        out.append(
            {
                "theta": theta,
                "phi": phi,
                "phase_rev": float(phase),
                "kappa_re": float(z.real),
                "kappa_im": float(z.imag),
            }
        )
    return out


def _spread(phases) -> float:
    vals = np.asarray(phases, dtype=float)
    diffs = np.abs(vals[:, None] - vals[None, :]) % 1.0
    return float(np.max(np.minimum(diffs, 1.0 - diffs))) if len(vals) else 0.0


def _run_kappa_task(scenario: Scenario, threads: int) -> dict:
    M = OrbitSphere(scenario.n)
    loop = build_loop(M, scenario.hamiltonian, scenario.tolerances)
    points = resolve_base_points(scenario.base_points, scenario.seed)
    rel = scenario.tolerances.flow_rel_tol

    def one(q):
        return kappa(M, loop, q, rel_tol=rel).value

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            phases = list(pool.map(one, points))
    else:
        phases = [one(q) for q in points]

    record = {
        "task": scenario.task,
        "n": scenario.n,
        "loop": loop.label,
        "points": _point_records(points, phases),
        "spread": _spread(phases),
        "meta": _meta(scenario),
    }
    if scenario.task == "action":
        record["action_rev"] = [float(p) for p in phases]
    return record


def _unwrap_rows(svals, phases, jump_tol=0.25):
    """Continuous lift of ordered phase samples; large jumps are an error."""
    phases = np.asarray(phases, dtype=float) % 1.0
    diffs = ((np.diff(phases) + 0.5) % 1.0) - 0.5
    if diffs.size and np.max(np.abs(diffs)) >= jump_tol:
        raise UnwrapError(
            f"adjacent phase jumps reach {np.max(np.abs(diffs)):.3f} revolutions; "
            "increase s_samples"
        )
    lift = np.concatenate([[phases[0]], phases[0] + np.cumsum(diffs)])
    return [(float(s), float(p)) for s, p in zip(svals, lift)]


def _run_omega_task(scenario: Scenario) -> dict:
    M = OrbitSphere(scenario.n)
    fam = build_family(M, scenario.family, scenario.tolerances)
    points = resolve_base_points(scenario.base_points, scenario.seed)
    rel = scenario.tolerances.flow_rel_tol
    svals = np.linspace(0.0, 1.0, scenario.s_samples + 1)

    omega_rows = []
    for s in svals:
        vals = [family_omega(M, fam, float(s), q, rel_tol=rel) for q in points[: min(3, len(points))]]
        omega_rows.append(
            {"s": float(s), "omega": float(np.mean(vals)), "q_spread": float(np.ptp(vals))}
        )
    phases = [kappa(M, fam.loop_at(float(s)), points[0], rel_tol=rel).value for s in svals]
    phase_rows = _unwrap_rows(svals, phases)
    return {
        "task": "omega",
        "n": scenario.n,
        "family": fam.label,
        "omega": omega_rows,
        "phase_rows": phase_rows,
        "meta": _meta(scenario),
    }


def _run_winding_task(scenario: Scenario) -> dict:
    M = OrbitSphere(scenario.n)
    fam = build_family(M, scenario.family, scenario.tolerances)
    if not fam.closed:
        raise ConfigError(f"winding requires a closed family, '{fam.label}' is not")
    points = resolve_base_points(scenario.base_points, scenario.seed)
    rel = scenario.tolerances.flow_rel_tol
    svals, lift = phase_lift(M, fam, points[0], s_samples=scenario.s_samples, rel_tol=rel)
    total = float(lift[-1] - lift[0])
    winding = int(round(total))
    return {
        "task": "winding",
        "n": scenario.n,
        "family": fam.label,
        "winding": winding,
        "degree": -winding,
        "lift_residual": abs(total - winding),
        "phase_rows": [(float(s), float(p)) for s, p in zip(svals, lift)],
        "meta": _meta(scenario),
    }


def _run_su2_demo(n: int, seed: int, out_dir: str) -> dict:
    scenario = Scenario(n=n, task="su2-demo", seed=seed, out_dir=out_dir)
    M = OrbitSphere(n)
    tol = scenario.tolerances
    rel = tol.flow_rel_tol
    from .su2 import DIR_A, DIR_B, AlgebraDirection, invariant_loop

    axes = {
        "A": DIR_A,
        "B": DIR_B,
        "3-4-5": AlgebraDirection(0.6, 0.8),
    }
    ref_points = {
        "north-pole": sphere_point(0.0, 0.0),
        "equator-0": sphere_point(np.pi / 2, 0.0),
        "equator-90": sphere_point(np.pi / 2, np.pi / 2),
    }
    table = {}
    for axis_name, direction in axes.items():
        loop = invariant_loop(M, direction, closure_tol=tol.closure_tol)
        table[axis_name] = {
            pt_name: kappa(M, loop, q, rel_tol=rel).value for pt_name, q in ref_points.items()
        }
    return {
        "task": "su2-demo",
        "n": n,
        "expected_phase": (n % 2) / 2.0,
        "holonomy_phases": table,
        "meta": _meta(scenario),
    }


def run_scenario(scenario: Scenario, threads: int = 1) -> tuple[dict, int]:
    """Execute one scenario; returns (record, exit_status)."""
    if scenario.task in ("kappa", "action"):
        record = _run_kappa_task(scenario, threads)
        status = 0
    elif scenario.task == "omega":
        record = _run_omega_task(scenario)
        status = 0
    elif scenario.task == "winding":
        record = _run_winding_task(scenario)
        status = 0
    elif scenario.task == "verify":
        record = verify_suite(scenario.n_values, seed=scenario.seed, tol=scenario.tolerances)
        record["meta"] = _meta(scenario)
        status = 0 if record["all_passed"] else 2
    elif scenario.task == "su2-demo":
        record = _run_su2_demo(scenario.n, scenario.seed, scenario.out_dir)
        status = 0
    else:  # pragma: no cover - guarded by validation
        raise ConfigError(f"unhandled task {scenario.task!r}")

    _write_results(record, scenario.out_dir)
    if "phase_rows" in record:
        _write_phases_csv(record.pop("phase_rows"), scenario.out_dir)
        _write_results(record, scenario.out_dir)
    if scenario.out_format == "csv" and "points" in record:
        _write_points_csv(record["points"], scenario.out_dir)
    return record, status


def _error_record(kind: str, message: str, element: str = "") -> dict:
    return {"error": {"kind": kind, "message": message, "element": element}}


def main(argv=None) -> int:
    _configure_logging()
    parser = argparse.ArgumentParser(
        prog="preqholo",
        description="Holonomy, action, loop-space one-form and winding computations "
        "on the integer-level sphere.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a JSON scenario")
    p_run.add_argument("config", help="path to the scenario JSON file")
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, default=None, help="seed (overrides config)")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads per point fan-out")

    p_verify = sub.add_parser("verify", help="run the structural verification suite")
    p_verify.add_argument("--n", default="1,2,3", help="comma-separated levels, e.g. 1,2,3")
    p_verify.add_argument("--out", default="out", help="output directory")
    p_verify.add_argument("--seed", type=int, default=0)

    p_demo = sub.add_parser("su2-demo", help="holonomy of the reference loops at level n")
    p_demo.add_argument("--n", type=int, default=1)
    p_demo.add_argument("--out", default="out", help="output directory")
    p_demo.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    out_dir = getattr(args, "out", None) or "out"

    try:
        if args.command == "run":
            scenario = Scenario.load(args.config)
            if args.out is not None:
                scenario.out_dir = args.out
            if args.seed is not None:
                scenario.seed = args.seed
            out_dir = scenario.out_dir
            record, status = run_scenario(scenario, threads=max(1, args.threads))
            log.info("task %s finished with status %d", scenario.task, status)
            return status
        if args.command == "verify":
            try:
                n_values = [int(v) for v in str(args.n).split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --n list: {exc}") from exc
            scenario = Scenario.from_dict(
                {"task": "verify", "n": n_values[0] if n_values else 0, "n_values": n_values,
                 "output": {"dir": args.out}}
            )
            scenario.seed = args.seed
            record, status = run_scenario(scenario)
            for level in record["levels"]:
                for check in level["checks"]:
                    log.info(
                        "n=%d %-32s %s residual=%.3e threshold=%.3e",
                        level["n"],
                        check["name"],
                        "pass" if check["passed"] else "FAIL",
                        check["residual"],
                        check["threshold"],
                    )
            print("all checks passed" if record["all_passed"] else "SOME CHECKS FAILED")
            return status
        if args.command == "su2-demo":
            record = _run_su2_demo(args.n, args.seed, args.out)
            _write_results(record, args.out)
            print(json.dumps(record["holonomy_phases"], indent=2, sort_keys=True))
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        _write_results(_error_record("config", str(exc)), out_dir)
        return 1
    except LoopClosureError as exc:
        log.error("closure failure: %s", exc)
        _write_results(_error_record("numerical", str(exc), "hamiltonian"), out_dir)
        return 2
    except UnwrapError as exc:
        log.error("unwrap failure: %s", exc)
        _write_results(_error_record("numerical", str(exc), "family"), out_dir)
        return 2
    except IntegrationError as exc:
        log.error("integration failure: %s", exc)
        _write_results(_error_record("numerical", str(exc), "flow"), out_dir)
        return 2


if __name__ == "__main__":
    sys.exit(main())
