"""Command-line interface: solve, validate, check, oracle, bench.

Machine-readable results go to stdout, diagnostics to stderr. Exit codes:
0 success, 1 bad input (parse, type, load or bounds errors), 2 no solution
within the timeout (solve) or an invalid solution (validate).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import secrets
import sys
from pathlib import Path

from .archgraph import ArchError, ArchGraph, parse_arch
from .circuit import Circuit, CircuitParseError, parse_circuit
from .marol.program import MarolProgram, load_program
from .marol.syntax import MarolSyntaxError
from .marol.typecheck import MarolTypeError
from .marol.values import MarolRuntimeError, ValueDecodeError
from .problems import NAMES, gen_arch, load_builtin
from .solver import (
    OracleBounds, OracleBoundsError, SolveResult, SolverConfig, UnsatisfiableInstance,
    brute_force_oracle, solve,
)
from .statemachine import CircuitProgramMismatch, SolutionFormatError, StateMachine, solution_from_json

THRESHOLDS = (0.05, 0.10, 0.25)


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def load_program_arg(spec: str) -> MarolProgram:
    """A path to a .marol file, or the name of a built-in problem."""
    if spec in NAMES and not os.path.exists(spec):
        return load_builtin(spec)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"program '{spec}' is neither a file nor a built-in ({', '.join(NAMES)})")
    return load_program(path.read_text(encoding="utf-8"), name=path.stem)


def load_arch_arg(spec: str) -> ArchGraph:
    """A path to an arch JSON file, or a generator spec such as ``line:4`` or ``grid:3,3``."""
    path = Path(spec)
    if path.exists():
        return parse_arch(path.read_text(encoding="utf-8"))
    if ":" in spec:
        kind, _, params = spec.partition(":")
        try:
            nums = [int(x) for x in params.replace("x", ",").split(",") if x]
        except ValueError:
            raise UsageError(f"bad arch generator spec '{spec}'") from None
        try:
            return parse_arch(gen_arch(kind, *nums))
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad arch generator spec '{spec}': {exc}") from None
    raise UsageError(f"arch '{spec}' is not a file or generator spec")


def load_circuit_arg(spec: str) -> Circuit:
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"circuit file '{spec}' not found")
    return parse_circuit(path.read_text(encoding="utf-8"))


def _load_instance(args) -> tuple[MarolProgram, StateMachine, Circuit]:
    program = load_program_arg(args.program)
    sm = StateMachine(program, load_arch_arg(args.arch))
    circuit = load_circuit_arg(args.circuit)
    sm.check_circuit(circuit)
    return program, sm, circuit


def time_to_threshold(result: SolveResult, frac: float) -> float | None:
    """Earliest time the global best was within ``frac`` of the final best cost."""
    if not result.log:
        return None
    final = result.log[-1].best_cost
    for r in result.log:
        if r.best_cost <= final * (1.0 + frac) + 1e-12:
            return r.wall_seconds
    return None


def _num(x: float | None):
    if x is None or (isinstance(x, float) and math.isinf(x)):
        return None
    return x


def _status(result: SolveResult) -> str:
    if result.ok:
        return "ok"
    return "invalid" if result.solution is not None else "no-solution"


def run_report(result: SolveResult, config: SolverConfig, instance: dict, solution_path: str | None,
               log_path: str | None) -> dict:
    return {
        "instance": instance,
        "status": _status(result),
        "best_cost": _num(result.cost),
        "states": len(result.solution.steps) if result.solution is not None else None,
        "time_to_best": result.time_to_best,
        "wall_time": result.wall_time,
        "validation": "ok" if result.ok else (result.violations or result.message),
        "solution_path": solution_path,
        "log_path": log_path,
        "seed": config.seed,
        "config": config.to_json(),
    }


def _make_config(args) -> SolverConfig:
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    return SolverConfig(
        seed=seed,
        timeout=args.timeout,
        jobs=args.jobs,
        warm_start=not args.no_warm_start,
        criticality_weighting=not args.no_criticality,
    )


def cmd_solve(args) -> int:
    program, sm, circuit = _load_instance(args)
    config = _make_config(args)
    fixed = None
    if args.fixed_map:
        fixed = {int(k): int(v) for k, v in json.loads(args.fixed_map).items()}
    result = solve(program, sm.graph, circuit, config, fixed_map=fixed)
    if result.solution is not None and args.out:
        Path(args.out).write_text(result.solution.dumps(program) + "\n", encoding="utf-8")
    if args.log:
        Path(args.log).write_text(result.log_csv(), encoding="utf-8")
    report = run_report(result, config, {"program": args.program, "arch": args.arch, "circuit": args.circuit},
                        args.out if result.solution is not None else None, args.log)
    if result.solution is not None and not args.out:
        report["solution"] = result.solution.to_json(program)
    print(json.dumps(report, indent=1))
    if result.violations:
        _err("internal error: the best solution failed validation:")
        for v in result.violations:
            _err("  " + v)
        return 1
    if result.solution is None:
        _err(result.message)
        return 2
    return 0


def cmd_validate(args) -> int:
    program, sm, circuit = _load_instance(args)
    sol, total = solution_from_json(Path(args.solution).read_text(encoding="utf-8"), program)
    violations = sm.validate_solution(circuit, sol, total)
    for v in violations:
        print(v)
    if violations:
        return 2
    print(f"ok: {len(sol.steps)} states, total cost {sol.total_cost:g}")
    return 0


def cmd_check(args) -> int:
    program = load_program_arg(args.program)
    print("non-interfering" if program.noninterfering else "interfering")
    return 0


def _parse_bounds(text: str | None) -> OracleBounds:
    if not text:
        return OracleBounds()
    parts = [int(x) for x in text.split(",")]
    if len(parts) != 4:
        raise UsageError("--bounds takes four integers: qubits,locations,instructions,fanout")
    return OracleBounds(*parts)


def cmd_oracle(args) -> int:
    _, sm, circuit = _load_instance(args)
    cost = brute_force_oracle(sm, circuit, _parse_bounds(args.bounds))
    if math.isinf(cost):
        print("inf")
        return 2
    print(f"{cost:g}")
    return 0


BENCH_COLUMNS = ["instance", "program", "arch", "circuit", "seed", "timeout", "status", "best_cost",
                 "states", "time_to_best", "t_5pct", "t_10pct", "t_25pct", "wall_time", "validation"]


def cmd_bench(args) -> int:
    manifest_path = Path(args.suite)
    entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    if not isinstance(entries, list):
        raise UsageError("suite manifest must be a JSON array")
    base = manifest_path.parent
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def resolve(p: str) -> str:
        q = base / p
        return str(q) if q.exists() else p

    rows = []
    for k, entry in enumerate(entries):
        prog_spec = entry["program"]
        program = load_program_arg(prog_spec if prog_spec in NAMES else resolve(prog_spec))
        arch = load_arch_arg(resolve(entry["arch"]))
        circuit = load_circuit_arg(resolve(entry["circuit"]))
        config = SolverConfig(seed=int(entry.get("seed", 0)), timeout=float(entry.get("timeout", 10.0)),
                              jobs=int(entry.get("jobs", 1)))
        result = solve(program, arch, circuit, config)
        stem = f"{k:03d}"
        if result.solution is not None:
            (out_dir / f"{stem}.solution.json").write_text(result.solution.dumps(program) + "\n", encoding="utf-8")
        (out_dir / f"{stem}.log.csv").write_text(result.log_csv(), encoding="utf-8")
        t = [time_to_threshold(result, f) for f in THRESHOLDS]
        rows.append({
            "instance": stem, "program": prog_spec, "arch": entry["arch"], "circuit": entry["circuit"],
            "seed": config.seed, "timeout": config.timeout,
            "status": _status(result),
            "best_cost": _num(result.cost),
            "states": len(result.solution.steps) if result.solution is not None else None,
            "time_to_best": result.time_to_best,
            "t_5pct": t[0], "t_10pct": t[1], "t_25pct": t[2],
            "wall_time": round(result.wall_time, 6),
            "validation": "ok" if result.ok else "; ".join(result.violations) or result.message,
        })
        _err(f"[{k + 1}/{len(entries)}] {prog_spec} {entry['circuit']}: {rows[-1]['status']} cost={rows[-1]['best_cost']}")
    csv_path = out_dir / "bench.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.items()})
    print(str(csv_path))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmrgen", description="Qubit mapping and routing from Marol problem definitions.")
    sub = ap.add_subparsers(dest="command", required=True)

    def instance_args(p, circuit=True):
        p.add_argument("--program", required=True, help="Marol file or built-in name (nisqmr, nisq_ve, scmr)")
        p.add_argument("--arch", required=True, help="arch JSON file or generator spec like line:4, grid:3,3")
        if circuit:
            p.add_argument("--circuit", required=True, help="circuit file, one '<gate> <qubit>...' per line")

    p = sub.add_parser("solve", help="map and route a circuit")
    instance_args(p)
    p.add_argument("--timeout", type=float, default=10.0, help="seconds (default 10)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: drawn from OS entropy and reported)")
    p.add_argument("--jobs", type=int, default=1, help="independent search workers (default 1)")
    p.add_argument("--out", help="write the solution JSON here (otherwise it is embedded in the report)")
    p.add_argument("--log", help="write the convergence CSV here")
    p.add_argument("--no-warm-start", action="store_true", help="start every worker from a random map")
    p.add_argument("--no-criticality", action="store_true", help="count routed gates without criticality weights")
    p.add_argument("--fixed-map", help='force the initial map, JSON like {"0": 3, "1": 4}')
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a solution file against the program's semantics")
    instance_args(p)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="parse and typecheck a program, report interference")
    p.add_argument("--program", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="exact optimum for tiny instances")
    instance_args(p)
    p.add_argument("--bounds", help="qubits,locations,instructions,fanout (default 4,5,8,8)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="solve every instance of a suite manifest")
    p.add_argument("--suite", required=True, help="JSON array of {program, arch, circuit, timeout, seed}")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MarolSyntaxError as exc:
        _err(f"syntax error: {exc}")
    except MarolTypeError as exc:
        _err("type errors:")
        for e in exc.errors:
            _err(f"  {e}")
    except (CircuitParseError, ArchError, CircuitProgramMismatch, UnsatisfiableInstance, OracleBoundsError,
            SolutionFormatError, ValueDecodeError, UsageError, MarolRuntimeError, KeyError, ValueError,
            OSError) as exc:
        _err(f"error: {exc}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
