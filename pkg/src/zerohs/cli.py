"""Command-line front end: TOML config in, CSV tables and JSON reports out.

Every run is deterministic: identical configs (and flags) produce
byte-identical output files. Each output file starts with a comment line
carrying the SHA-256 of the raw config file. Exit codes: 0 the run passed,
2 the run completed but a verification failed, 1 the config or the run
itself was invalid.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .ansatz import FieldOffset, KinkState, PeakonState, ZERO_OFFSET, \
    eval_kink_field, eval_peakon_field
from .closed_form import KinkPairParams, coincident_peakon_flow, \
    matched_kink_flow, stationary_kink_flow
from .dynamics import IntegratorConfig, Trajectory, integrate, pack_state
from .quadrature import QuadratureConfig
from .symmetry import SymmetryTransform, apply_transform, verify_symmetry
from .util import format_float
from .verify import ODE_TOLERANCE, WEAK_TOLERANCE, compare_to_oracle, \
    conservation_drift, make_battery, ode_residual, weak_residual

MODES = ("simulate-peakon", "simulate-kink", "verify", "symmetry", "closed-form")
SCHEMA_VERSION = 1


class CliError(Exception):
    """Config or runtime problem; the message is the one-line reason."""


def _fail(reason: str):
    raise CliError(reason)


def _require(table: dict, key: str, context: str):
    if key not in table:
        _fail(f"missing key {key!r} in [{context}]" if context else f"missing key {key!r}")
    return table[key]


def _floats(value, name: str) -> list[float]:
    if not isinstance(value, list) or not value or \
            not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        _fail(f"{name} must be a nonempty list of numbers")
    return [float(v) for v in value]


@dataclass
class RunConfig:
    mode: str
    b: int
    raw: dict
    sha256: str
    state: tuple[PeakonState | KinkState, FieldOffset] | None
    integrator: IntegratorConfig | None
    verify: dict
    symmetry: dict
    closed_form: dict
    output: dict


def load_config(path: Path) -> RunConfig:
    try:
        blob = path.read_bytes()
    except OSError as exc:
        _fail(f"cannot read config {path}: {exc.strerror or exc}")
    try:
        doc = tomllib.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        _fail(f"config is not valid TOML: {exc}")
    return parse_config(doc, hashlib.sha256(blob).hexdigest())


def parse_config(doc: dict, sha256: str = "") -> RunConfig:
    if doc.get("schema") != SCHEMA_VERSION:
        _fail(f"schema must be {SCHEMA_VERSION}")
    mode = _require(doc, "mode", "")
    if mode not in MODES:
        _fail(f"mode must be one of {', '.join(MODES)}")
    b = _require(doc, "b", "")
    if not isinstance(b, int) or isinstance(b, bool) or b < 1:
        _fail("b must be a positive integer")

    state = None
    if mode != "closed-form":
        state = _parse_state(doc.get("state"), mode, b)
    integrator = None
    if "integrator" in doc or mode != "closed-form":
        integrator = _parse_integrator(doc.get("integrator"))
    if mode == "closed-form" and integrator is None:
        _fail("closed-form mode requires an [integrator] block for the sample grid")

    verify_block = _parse_verify(doc.get("verify", {}))
    symmetry_block = _parse_symmetry(doc.get("symmetry"), mode)
    closed_block = _parse_closed_form(doc.get("closed_form"), mode, b)
    output = _parse_output(doc.get("output", {}), mode)

    return RunConfig(mode=mode, b=b, raw=doc, sha256=sha256, state=state,
                     integrator=integrator, verify=verify_block,
                     symmetry=symmetry_block, closed_form=closed_block,
                     output=output)


def _parse_state(table, mode: str, b: int):
    if not isinstance(table, dict):
        _fail("missing [state] block")
    du = float(table.get("du", 0.0))
    dv = float(table.get("dv", 0.0))
    offset = FieldOffset(du, dv)
    is_peakon = "P" in table
    if mode == "simulate-peakon" and not is_peakon:
        _fail("simulate-peakon requires a peakon [state] with keys p, q, P, Q")
    if mode == "simulate-kink" and is_peakon:
        _fail("simulate-kink requires a kink [state] with keys c, p, ctilde, q")
    try:
        if is_peakon:
            state = PeakonState(b, _floats(_require(table, "p", "state"), "state.p"),
                                _floats(_require(table, "q", "state"), "state.q"),
                                _floats(_require(table, "P", "state"), "state.P"),
                                _floats(_require(table, "Q", "state"), "state.Q"))
        else:
            state = KinkState(b, _floats(_require(table, "c", "state"), "state.c"),
                              _floats(_require(table, "p", "state"), "state.p"),
                              _floats(_require(table, "ctilde", "state"), "state.ctilde"),
                              _floats(_require(table, "q", "state"), "state.q"))
    except ValueError as exc:
        _fail(str(exc))
    return state, offset


def _parse_integrator(table) -> IntegratorConfig:
    if not isinstance(table, dict):
        _fail("missing [integrator] block")
    span = _floats(_require(table, "t_span", "integrator"), "integrator.t_span")
    if len(span) != 2:
        _fail("integrator.t_span must be [t0, t1]")
    try:
        return IntegratorConfig(
            dt=float(table.get("dt", 1e-3)),
            t_span=(span[0], span[1]),
            method=table.get("method", "rk4"),
            tol=float(table.get("tol", 1e-10)),
            event_policy=table.get("event_policy", "halt"),
        )
    except ValueError as exc:
        _fail(str(exc))


def _parse_verify(table) -> dict:
    if not isinstance(table, dict):
        _fail("[verify] must be a table")
    checkers = table.get("checkers", ["weak", "ode"])
    if not isinstance(checkers, list) or \
            not all(c in ("weak", "ode", "conservation") for c in checkers):
        _fail("verify.checkers entries must be 'weak', 'ode' or 'conservation'")
    return {
        "checkers": checkers,
        "battery_size": int(table.get("battery_size", 20)),
        "battery_seed": int(table.get("battery_seed", 0)),
        "weak_tol": float(table.get("weak_tol", WEAK_TOLERANCE)),
        "ode_tol": float(table.get("ode_tol", ODE_TOLERANCE)),
        "quad_rtol": float(table.get("quad_rtol", 1e-8)),
        "drift_tol": float(table.get("drift_tol", 1e-8)),
    }


def _parse_symmetry(table, mode: str) -> dict:
    if mode != "symmetry":
        return {}
    if not isinstance(table, dict):
        _fail("symmetry mode requires a [symmetry] block")
    try:
        transform = SymmetryTransform(_require(table, "kind", "symmetry"),
                                      float(table.get("epsilon", 0.0)))
    except ValueError as exc:
        _fail(str(exc))
    checker = table.get("checker", "ode")
    if checker not in ("ode", "weak"):
        _fail("symmetry.checker must be 'ode' or 'weak'")
    return {"transform": transform, "checker": checker,
            "factor": float(table.get("factor", 10.0))}


def _parse_closed_form(table, mode: str, b: int) -> dict:
    if mode != "closed-form":
        return {}
    if not isinstance(table, dict):
        _fail("closed-form mode requires a [closed_form] block")
    family = _require(table, "family", "closed_form")
    try:
        if family == "coincident-peakon":
            flow = coincident_peakon_flow(b, float(_require(table, "c", "closed_form")),
                                          float(table.get("q0", 0.0)),
                                          bool(table.get("opposite", False)))
        elif family == "stationary-kink":
            flow = stationary_kink_flow(b, float(_require(table, "c", "closed_form")),
                                        float(_require(table, "ctilde", "closed_form")),
                                        float(table.get("k", 0.0)))
        elif family == "matched-kink-pair":
            params = KinkPairParams(b, float(_require(table, "a1", "closed_form")),
                                    float(_require(table, "a2", "closed_form")),
                                    float(table.get("x0", 0.0)))
            flow = matched_kink_flow(params, table.get("convention", "ode"))
        else:
            _fail("closed_form.family must be 'coincident-peakon', "
                  "'stationary-kink' or 'matched-kink-pair'")
    except ValueError as exc:
        _fail(str(exc))
    return {"family": family, "flow": flow,
            "oracle_tol": float(table.get("oracle_tol", 1e-8))}


def _parse_output(table, mode: str) -> dict:
    if not isinstance(table, dict):
        _fail("[output] must be a table")
    out = {
        "trajectory": table.get("trajectory",
                                "trajectory.csv" if mode != "verify" else None),
        "fields": table.get("fields"),
        "report": table.get("report",
                            "report.json" if mode in ("verify", "symmetry",
                                                      "closed-form") else None),
        "field_times": None,
        "grid": None,
    }
    if out["fields"] is not None:
        grid = _floats(_require(table, "grid", "output"), "output.grid")
        if len(grid) != 3 or not grid[2] == int(grid[2]) or int(grid[2]) < 2 \
                or not (math.isfinite(grid[0]) and math.isfinite(grid[1])) \
                or grid[1] <= grid[0]:
            _fail("output.grid must be [lo, hi, n] with finite lo < hi and n >= 2")
        out["grid"] = (grid[0], grid[1], int(grid[2]))
        out["field_times"] = _floats(_require(table, "field_times", "output"),
                                     "output.field_times")
    return out


# --- emission ---------------------------------------------------------------

def _write_text(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        _fail(f"cannot write {path}: {exc.strerror or exc}")


def emit_csv(path: Path, header: list[str], rows, sha256: str):
    """CSV with LF endings and shortest round-trip float formatting."""
    lines = [f"# config-sha256={sha256}", ",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(x) for x in row))
    _write_text(path, "\n".join(lines) + "\n")


def parse_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Read back an emitted CSV (comments skipped); exact float round-trip."""
    header: list[str] = []
    rows: list[list[float]] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        if not header:
            header = line.split(",")
            continue
        rows.append([float(tok) for tok in line.split(",")])
    return header, np.array(rows)


def trajectory_columns(traj: Trajectory) -> list[str]:
    t = traj.template
    if traj.kind == "peakon":
        amps = [f"p{i+1}" for i in range(t.n_u)] + [f"P{j+1}" for j in range(t.n_v)]
        pos = [f"q{i+1}" for i in range(t.n_u)] + [f"Q{j+1}" for j in range(t.n_v)]
    else:
        amps = [f"c{i+1}" for i in range(t.n_u)] + [f"ct{j+1}" for j in range(t.n_v)]
        pos = [f"p{i+1}" for i in range(t.n_u)] + [f"q{j+1}" for j in range(t.n_v)]
    return ["t"] + amps + pos


def emit_trajectory(traj: Trajectory, path: Path, sha256: str):
    rows = (np.concatenate([[t], row]) for t, row in zip(traj.times, traj.samples))
    emit_csv(path, trajectory_columns(traj), rows, sha256)


def emit_fields(traj: Trajectory, path: Path, sha256: str,
                grid: tuple[float, float, int], times: list[float]):
    lo, hi, n = grid
    x = np.linspace(lo, hi, n)
    rows = []
    for t in times:
        state = traj.state_at(t)
        if traj.kind == "peakon":
            u, v = eval_peakon_field(state, x, traj.offset)
        else:
            u, v = eval_kink_field(state, x, traj.offset)
        for xi, ui, vi in zip(x, u, v):
            rows.append((t, xi, ui, vi))
    emit_csv(path, ["t", "x", "u", "v"], rows, sha256)


def emit_report(path: Path, payload: dict, sha256: str):
    payload = dict(payload)
    payload["config_sha256"] = sha256
    body = json.dumps(payload, indent=2, sort_keys=True)
    _write_text(path, f"# config-sha256={sha256}\n" + body + "\n")


# --- run orchestration -------------------------------------------------------

def _out_path(out_dir: Path, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else out_dir / p


def _echo_settings(cfg: RunConfig, seed: int) -> dict:
    return {"mode": cfg.mode, "b": cfg.b, "battery_seed": seed,
            "config": cfg.raw}


def run(cfg: RunConfig, out_dir: Path, seed_override: int | None = None,
        quiet: bool = False) -> int:
    """Execute one configured run; returns the process exit code."""
    seed = cfg.verify["battery_seed"] if seed_override is None else seed_override
    quad = QuadratureConfig(rtol=cfg.verify["quad_rtol"])

    def say(msg: str):
        if not quiet:
            print(msg)

    if cfg.mode in ("simulate-peakon", "simulate-kink", "verify", "symmetry"):
        state, offset = cfg.state
        traj = integrate(state, cfg.integrator)
        traj = traj.replace(offset=offset)
    else:
        flow = cfg.closed_form["flow"]
        t0, t1 = cfg.integrator.t_span
        n = max(2, int(round((t1 - t0) / cfg.integrator.dt)) + 1)
        traj = flow.sample(np.linspace(t0, t1, n))

    passed = True
    results: dict = {"events": [
        {"t": ev.t, "kind": ev.kind, "i": ev.i, "j": ev.j} for ev in traj.events]}

    if cfg.mode == "verify":
        for checker in cfg.verify["checkers"]:
            if checker == "weak":
                rep = weak_residual(traj, make_battery(traj, cfg.verify["battery_size"], seed),
                                    quad=quad, tolerance=cfg.verify["weak_tol"])
                results["weak"] = rep.to_dict()
                passed &= rep.passed
            elif checker == "ode":
                rep = ode_residual(traj, tolerance=cfg.verify["ode_tol"])
                results["ode"] = rep.to_dict()
                passed &= rep.passed
            else:
                drift = conservation_drift(traj)
                ok = drift <= cfg.verify["drift_tol"]
                results["conservation"] = {"drift": drift,
                                           "tolerance": cfg.verify["drift_tol"],
                                           "passed": ok}
                passed &= ok
    elif cfg.mode == "symmetry":
        transform = cfg.symmetry["transform"]
        rep = verify_symmetry(transform, traj, checker=cfg.symmetry["checker"],
                              factor=cfg.symmetry["factor"],
                              battery_size=cfg.verify["battery_size"],
                              battery_seed=seed)
        results["symmetry"] = rep.to_dict()
        passed = rep.passed
        traj = apply_transform(transform, traj)   # emit the transformed path
    elif cfg.mode == "closed-form":
        flow = cfg.closed_form["flow"]
        numeric = integrate(flow.state_at(float(traj.times[0])), cfg.integrator)
        err = compare_to_oracle(numeric, flow)
        ok = err <= cfg.closed_form["oracle_tol"]
        results["closed_form"] = {"family": cfg.closed_form["family"],
                                  "max_error_vs_integrator": err,
                                  "tolerance": cfg.closed_form["oracle_tol"],
                                  "passed": ok, "notes": list(flow.notes)}
        passed = ok

    if cfg.output["trajectory"]:
        path = _out_path(out_dir, cfg.output["trajectory"])
        emit_trajectory(traj, path, cfg.sha256)
        say(f"wrote {path} ({len(traj)} samples)")
    if cfg.output["fields"]:
        path = _out_path(out_dir, cfg.output["fields"])
        emit_fields(traj, path, cfg.sha256, cfg.output["grid"],
                    cfg.output["field_times"])
        say(f"wrote {path}")
    if cfg.output["report"]:
        path = _out_path(out_dir, cfg.output["report"])
        emit_report(path, {"schema": SCHEMA_VERSION,
                           "settings": _echo_settings(cfg, seed),
                           "results": results, "passed": passed}, cfg.sha256)
        say(f"wrote {path}")

    say("PASS" if passed else "FAIL")
    return 0 if passed else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zerohs",
        description="Simulate and verify multipeakon/multikink solutions of "
                    "the two-component zero-stretching Holm-Staley system.")
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode, help=f"run a {mode} config")
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, default=Path("."))
        sp.add_argument("--seed", type=int, default=None,
                        help="override the verify battery seed")
        sp.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if cfg.mode != args.command:
            _fail(f"config mode {cfg.mode!r} does not match subcommand {args.command!r}")
        return run(cfg, args.out, args.seed, args.quiet)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures also map to exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
