"""The anytime driver: independent annealing workers, best-of merge, final validation."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

from ..archgraph import ArchGraph
from ..circuit import Circuit, parse_circuit
from ..marol.program import MarolProgram, load_program
from ..marol.values import QubitMap
from ..statemachine import Solution, StateMachine
from .anneal import LogRecord, MapAnnealer, UnsatisfiableInstance, WorkerResult
from .config import SolverConfig
from .isomorphism import incremental_isomorphism
from .maxstate import MaxStateRunner


@dataclass
class SolveResult:
    solution: Solution | None
    cost: float
    log: list[LogRecord] = field(default_factory=list)
    worker_logs: dict[int, list[LogRecord]] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)
    seed: int = 0
    wall_time: float = 0.0
    workers: list[WorkerResult] = field(default_factory=list)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.solution is not None and not self.violations

    @property
    def time_to_best(self) -> float | None:
        return self.log[-1].wall_seconds if self.log else None

    def log_csv(self, per_worker: bool = True) -> str:
        """Convergence records as CSV ``wall_seconds,worker_id,best_cost``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["wall_seconds", "worker_id", "best_cost"])
        rows = self.log
        if per_worker:
            rows = sorted((r for recs in self.worker_logs.values() for r in recs),
                          key=lambda r: (r.worker_id, r.wall_seconds))
        for r in rows:
            w.writerow([f"{r.wall_seconds:.6f}", r.worker_id, repr(r.best_cost)])
        return buf.getvalue()


def warm_start_map(sm: StateMachine, circuit: Circuit, config: SolverConfig) -> QubitMap:
    adj = {l: sm.graph.adj_sets[l] for l in range(sm.graph.n)}
    return QubitMap(incremental_isomorphism(circuit, sm.locs, adj, config.iso_node_budget))


def run_worker(program: MarolProgram, arch: ArchGraph, circuit: Circuit, config: SolverConfig,
               worker_id: int, wall_deadline: float, clock_zero: float,
               fixed_map: Mapping[int, int] | None = None) -> WorkerResult:
    deadline = time.monotonic() + (wall_deadline - time.time())
    sm = StateMachine(program, arch)
    runner = MaxStateRunner(sm, circuit, config)
    annealer = MapAnnealer(runner, config, worker_id, clock_zero)
    if fixed_map is not None:
        return annealer.fixed(QubitMap(fixed_map), deadline)
    start = None
    if worker_id == 0 and config.warm_start and circuit.qubits:
        start = warm_start_map(sm, circuit, config)
    return annealer.search(deadline, start)


def _worker_entry(args) -> WorkerResult:
    source, name, arch_json, circuit_text, config_json, worker_id, wall_deadline, clock_zero, fixed = args
    program = load_program(source, name=name)
    from ..archgraph import parse_arch

    arch = parse_arch(arch_json)
    circuit = parse_circuit(circuit_text)
    return run_worker(program, arch, circuit, SolverConfig.from_json(config_json), worker_id,
                      wall_deadline, clock_zero, fixed)


def merge_logs(results: list[WorkerResult]) -> list[LogRecord]:
    """Global running minimum over all worker records, in time order."""
    recs = sorted((r for res in results for r in res.log), key=lambda r: (r.wall_seconds, r.worker_id))
    out: list[LogRecord] = []
    best = math.inf
    for r in recs:
        if r.best_cost < best:
            best = r.best_cost
            out.append(r)
    return out


def solve(program: MarolProgram, arch: ArchGraph, circuit: Circuit, config: SolverConfig,
          fixed_map: Mapping[int, int] | None = None) -> SolveResult:
    """Run ``config.jobs`` independent workers until the timeout and return the best validated solution.

    With ``fixed_map`` the initial map is forced and only one MaxState run is made.
    """
    clock_zero = time.time()
    wall_deadline = clock_zero + config.timeout
    sm = StateMachine(program, arch)
    sm.check_circuit(circuit)
    if circuit.qubit_count > len(sm.locs):
        raise UnsatisfiableInstance(
            f"{circuit.qubit_count} circuit qubits cannot be placed on {len(sm.locs)} locations")
    jobs = 1 if fixed_map is not None else config.jobs
    if jobs == 1:
        results = [run_worker(program, sm.graph, circuit, config, 0, wall_deadline, clock_zero, fixed_map)]
    else:
        payload = [
            (program.source, program.name, sm.graph.to_json(), circuit.to_text(), config.to_json(),
             w, wall_deadline, clock_zero, None)
            for w in range(jobs)
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker_entry, payload))
    best: WorkerResult | None = None
    for res in results:
        if res.best is not None and (best is None or res.best_cost < best.best_cost):
            best = res
    out = SolveResult(
        solution=best.best if best else None,
        cost=best.best_cost if best else math.inf,
        log=merge_logs(results),
        worker_logs={r.worker_id: r.log for r in results},
        seed=config.seed,
        wall_time=time.time() - clock_zero,
        workers=results,
    )
    if best is None:
        reasons = sorted({r.last_error for r in results if r.last_error})
        timed_out = out.wall_time >= config.timeout
        out.message = "no complete solution found " + (
            "before the timeout" if timed_out else "from any initial map the search evaluated")
        if reasons:
            out.message += " (" + "; ".join(reasons) + ")"
        return out
    out.violations = sm.validate_solution(circuit, best.best, best.best_cost)
    if out.violations:
        out.message = "best solution failed validation"
    return out
