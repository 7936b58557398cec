"""Command-line runner.

Reads a JSON config describing geometry, molecule parameters and one
scenario (simulate | compile | bell | sweep), executes it, and writes JSON
or CSV. Identical (config, seed) pairs produce byte-identical output, also
under concurrent trial execution. Exit codes: 0 ok, 1 usage/config error,
2 physics precondition violation, 3 completed with budget warnings.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .electrostatics import (LayoutGeometry, Topology, background_interaction,
                             h_cc, nnn_coupling_ratio, pair_coupling)
from .measurement import BELL_LABELS, bell_measure, bell_state
from .physics import MoleculeParams, adiabatic_angle, charge_branch_energies, sin_sq_mixing
from .register import state_json
from .scheduler import (Gate, ScheduleProgram, compile_circuit, init_schedule,
                        simulate_program, time_budget, validate_program)
from .streams import stream_token, substream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PHYSICS = 2
EXIT_BUDGET_WARNINGS = 3


class ConfigError(Exception):
    """Bad config file, bad flags, or unparseable circuit text."""


@dataclass(frozen=True)
class RunConfig:
    geometry: LayoutGeometry
    params: MoleculeParams
    scenario: dict
    seed: int = 0
    out_format: str = "json"
    echo: bool = False
    workers: int = 1
    safety_factor: float = 10.0

    def __post_init__(self):
        if self.out_format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, not {self.out_format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.safety_factor < 1:
            raise ConfigError("safety_factor must be >= 1")


def _build_topology(data: dict) -> Topology:
    kind = data.get("kind", "line")
    if kind == "line":
        return Topology.line(int(data.get("n", 2)))
    if kind == "grid":
        return Topology.grid(int(data["rows"]), int(data["cols"]),
                             diagonal=bool(data.get("diagonal", True)))
    raise ConfigError(f"unknown topology kind {kind!r}")


def load_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    overrides = overrides or {}
    try:
        geometry = LayoutGeometry(
            topology=_build_topology(data.get("geometry", {}).get("topology", {})),
            **{k: v for k, v in data.get("geometry", {}).items() if k != "topology"})
        params = MoleculeParams(**data.get("params", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad geometry or params: {exc}") from exc
    scenario = data.get("scenario")
    if not isinstance(scenario, dict) or "kind" not in scenario:
        raise ConfigError("config needs a scenario object with a 'kind'")
    if scenario["kind"] not in ("simulate", "compile", "bell", "sweep"):
        raise ConfigError(f"unknown scenario kind {scenario['kind']!r}")
    _validate_scenario(scenario, path.parent)
    cfg = dict(
        seed=int(data.get("seed", 0)),
        out_format=str(data.get("format", "json")),
        echo=bool(data.get("echo", False)),
        workers=int(data.get("workers", 1)),
        safety_factor=float(data.get("safety_factor", 10.0)),
    )
    for key in ("seed", "out_format", "echo"):
        if overrides.get(key) is not None:
            cfg[key] = overrides[key]
    return RunConfig(geometry=geometry, params=params, scenario=scenario, **cfg)


def _validate_scenario(scenario: dict, base: Path):
    kind = scenario["kind"]
    if kind in ("simulate", "compile"):
        circuit = scenario.get("circuit")
        if not circuit:
            raise ConfigError(f"{kind} scenario needs a 'circuit' file")
        if not (base / circuit).is_file() and not Path(circuit).is_file():
            raise ConfigError(f"circuit file {circuit!r} does not exist")
    elif kind == "bell":
        if scenario.get("input") not in BELL_LABELS:
            raise ConfigError(f"bell scenario needs input in {BELL_LABELS}")
        if int(scenario.get("trials", 0)) < 1:
            raise ConfigError("bell scenario needs trials >= 1")
    elif kind == "sweep":
        for key in ("start", "stop"):
            value = scenario.get(key)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"sweep scenario needs finite {key!r}")
        if int(scenario.get("points", 0)) < 2:
            raise ConfigError("sweep scenario needs points >= 2")
        if "observable" not in scenario or "parameter" not in scenario:
            raise ConfigError("sweep scenario needs 'parameter' and 'observable'")


def parse_circuit(text: str) -> list[Gate]:
    """Parse circuit text: one gate per line, '#' comments.

    H i | Z i phi | XZ i axis phi | CNOT i j | CZ i j | MEASURE i | BELL i j
    """
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        op, args = tokens[0].upper(), tokens[1:]

        def ints(k):
            if len(args) != k:
                raise ConfigError(f"line {lineno}: {op} takes {k} argument(s)")
            try:
                return [int(a) for a in args]
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad index in {line!r}") from exc

        try:
            if op == "H":
                gates.append(Gate("h", (ints(1)[0],)))
            elif op == "Z":
                if len(args) != 2:
                    raise ConfigError(f"line {lineno}: Z takes qubit and angle")
                gates.append(Gate("z", (int(args[0]),), angle=float(args[1])))
            elif op == "XZ":
                if len(args) != 3:
                    raise ConfigError(f"line {lineno}: XZ takes qubit, axis, angle")
                gates.append(Gate("xz", (int(args[0]),),
                                  axis_angle=float(args[1]), angle=float(args[2])))
            elif op in ("CNOT", "CZ", "BELL"):
                i, j = ints(2)
                gates.append(Gate(op.lower(), (i, j)))
            elif op == "MEASURE":
                gates.append(Gate("measure", (ints(1)[0],)))
            else:
                raise ConfigError(f"line {lineno}: unknown gate {op!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return gates


# --- scenario execution ---

def _budget_json(report) -> dict:
    return {"limit": report.limit,
            "elapsed": {str(m): report.elapsed[m] for m in sorted(report.elapsed)},
            "read_counts": {str(m): report.read_counts[m]
                            for m in sorted(report.read_counts)},
            "violations": [{"molecule": v.molecule, "rule": v.rule,
                            "message": v.message} for v in report.violations]}


def _load_gates(config: RunConfig, config_dir: Path) -> list[Gate]:
    circuit = config.scenario["circuit"]
    path = (config_dir / circuit) if (config_dir / circuit).is_file() else Path(circuit)
    return parse_circuit(path.read_text())


def _run_compile(config: RunConfig, config_dir: Path) -> tuple[int, dict]:
    gates = _load_gates(config, config_dir)
    program = compile_circuit(gates, config.geometry, config.params,
                              config.safety_factor)
    findings = validate_program(program, config.geometry.topology.adjacency())
    report = time_budget(program, config.params, echo=config.echo)
    payload = {"scenario": "compile", "schedule": program.to_json(),
               "validation": [v.message for v in findings],
               "budget": _budget_json(report)}
    return (EXIT_OK if report.ok else EXIT_BUDGET_WARNINGS), payload


def _run_simulate(config: RunConfig, config_dir: Path) -> tuple[int, dict]:
    gates = _load_gates(config, config_dir)
    prologue = init_schedule(config.geometry.topology, config.params,
                             config.safety_factor)
    compiled = compile_circuit(gates, config.geometry, config.params,
                               config.safety_factor)
    program = ScheduleProgram(prologue.steps + compiled.steps,
                              config.geometry.topology.size)
    rng = substream(config.seed, "simulate")
    state, events = simulate_program(program, config.geometry, config.params, rng)
    report = time_budget(program, config.params, echo=config.echo)
    payload = {"scenario": "simulate",
               "final_state": state_json(state),
               "charge_flags": list(state.charge_flags),
               "events": events,
               "budget": _budget_json(report)}
    return (EXIT_OK if report.ok else EXIT_BUDGET_WARNINGS), payload


def _run_bell(config: RunConfig) -> tuple[int, dict]:
    label = config.scenario["input"]
    trials = int(config.scenario["trials"])
    if config.geometry.topology.size < 2:
        raise ValueError("bell scenario needs at least two molecules")

    def one(trial: int) -> dict:
        rng = substream(config.seed, "bell", label, trial)
        outcome = bell_measure(bell_state(label), 0, 1, config.geometry,
                               config.params, rng,
                               safety_factor=config.safety_factor)
        return {"trial": trial, "seed": stream_token("bell", label, trial),
                "input": label, "round1": outcome.round1,
                "round2": outcome.round2,
                "classification": outcome.classification,
                "phi": outcome.phi}

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(one, range(trials)))
    else:
        outcomes = [one(t) for t in range(trials)]
    payload = {"scenario": "bell", "input": label, "trials": trials,
               "outcomes": outcomes}
    return EXIT_OK, payload


_EPSILON_OBSERVABLES = {
    "h_cc": lambda e, cfg: h_cc(adiabatic_angle(e, cfg.params.tunnel_coupling),
                                cfg.geometry),
    "sin_sq_theta": lambda e, cfg: sin_sq_mixing(e, cfg.params.tunnel_coupling),
    "adiabatic_angle": lambda e, cfg: adiabatic_angle(e, cfg.params.tunnel_coupling),
    "branch_gap": lambda e, cfg: (lambda lo_hi: lo_hi[1] - lo_hi[0])(
        charge_branch_energies(e, cfg.params.tunnel_coupling)),
}

_DISTANCE_OBSERVABLES = {
    "coupling_max": lambda g: pair_coupling(g).coupling_max,
    "background_interaction": background_interaction,
    "nnn_ratio": nnn_coupling_ratio,
}


def _run_sweep(config: RunConfig) -> tuple[int, dict]:
    sc = config.scenario
    parameter, observable = sc["parameter"], sc["observable"]
    start, stop, points = float(sc["start"]), float(sc["stop"]), int(sc["points"])
    values = [start + (stop - start) * k / (points - 1) for k in range(points)]
    rows = []
    if parameter == "epsilon":
        fn = _EPSILON_OBSERVABLES.get(observable)
        if fn is None:
            raise ValueError(f"unknown epsilon observable {observable!r}; "
                             f"choose from {sorted(_EPSILON_OBSERVABLES)}")
        lo, hi = config.params.detuning_min, config.params.detuning_max
        if start < lo or stop > hi:
            raise ValueError(f"epsilon sweep must stay within [{lo:g}, {hi:g}] ueV")
        rows = [[v, float(fn(v, config))] for v in values]
    elif parameter == "inter_molecule_distance":
        fn = _DISTANCE_OBSERVABLES.get(observable)
        if fn is None:
            raise ValueError(f"unknown distance observable {observable!r}; "
                             f"choose from {sorted(_DISTANCE_OBSERVABLES)}")
        for v in values:
            g = LayoutGeometry(
                intra_dot_distance=config.geometry.intra_dot_distance,
                inter_molecule_distance=v, layout=config.geometry.layout,
                topology=config.geometry.topology,
                relative_permittivity=config.geometry.relative_permittivity)
            rows.append([v, float(fn(g))])
    else:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    payload = {"scenario": "sweep", "parameter": parameter,
               "observable": observable, "rows": rows}
    return EXIT_OK, payload


def _render(payload: dict, out_format: str) -> bytes:
    if out_format == "json":
        if payload.get("scenario") == "bell":
            # one self-contained JSON record per trial: appending trials
            # never rewrites earlier lines
            return ("\n".join(json.dumps(row, sort_keys=True)
                              for row in payload["outcomes"]) + "\n").encode()
        return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    kind = payload.get("scenario")
    if kind == "sweep":
        writer.writerow([payload["parameter"], payload["observable"]])
        writer.writerows(payload["rows"])
    elif kind == "bell":
        writer.writerow(["trial", "seed", "input", "round1", "round2",
                         "classification", "phi"])
        for row in payload["outcomes"]:
            writer.writerow([row["trial"], row["seed"], row["input"],
                             row["round1"], row["round2"] or "",
                             row["classification"], repr(row["phi"])])
    elif kind == "simulate":
        writer.writerow(["index", "re", "im"])
        for index, (re, im) in enumerate(payload["final_state"]):
            writer.writerow([index, repr(re), repr(im)])
    else:
        raise ConfigError(f"scenario {kind!r} has no CSV rendering; use json")
    return buf.getvalue().encode()


def run(config: RunConfig, config_dir: Path) -> tuple[int, bytes]:
    """Execute one scenario; returns (exit_code, output_bytes)."""
    kind = config.scenario["kind"]
    if kind == "compile":
        code, payload = _run_compile(config, config_dir)
    elif kind == "simulate":
        code, payload = _run_simulate(config, config_dir)
    elif kind == "bell":
        code, payload = _run_bell(config)
    else:
        code, payload = _run_sweep(config)
    return code, _render(payload, config.out_format)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dotmol",
        description="Simulate and schedule double-dot molecule qubit registers.")
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override root seed")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default=None,
                        help="override output format")
    parser.add_argument("--echo", action="store_true", default=None,
                        help="budget against the echo-extended coherence window")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    try:
        config = load_config(args.config, overrides={
            "seed": args.seed, "out_format": args.format, "echo": args.echo})
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        code, output = run(config, Path(args.config).parent)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        output = (json.dumps(record, sort_keys=True, indent=2) + "\n").encode()
        if args.out:
            Path(args.out).write_bytes(output)
        else:
            sys.stdout.buffer.write(output)
        return EXIT_PHYSICS

    if args.out:
        Path(args.out).write_bytes(output)
    else:
        sys.stdout.buffer.write(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
