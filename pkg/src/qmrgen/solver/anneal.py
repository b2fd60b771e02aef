"""Simulated annealing over initial qubit maps (one worker's anytime search)."""

from __future__ import annotations

import math
import random
import time
from collections import OrderedDict
from dataclasses import dataclass, field

from ..marol.values import MarolRuntimeError, QubitMap
from ..statemachine import Solution, solution_cost
from .config import SolverConfig, acceptance_probability, stream_seed
from .maxstate import MaxStateRunner, RunAborted


class UnsatisfiableInstance(ValueError):
    """More circuit qubits than locations."""


@dataclass
class LogRecord:
    wall_seconds: float
    worker_id: int
    best_cost: float


@dataclass
class WorkerResult:
    worker_id: int
    best: Solution | None = None
    best_cost: float = math.inf
    log: list[LogRecord] = field(default_factory=list)
    runs: int = 0
    evaluations: int = 0
    iterations: int = 0
    failures: int = 0
    last_error: str = ""


def random_map(qubits: list[int], locs: list[int], rng: random.Random) -> QubitMap:
    chosen = rng.sample(locs, len(qubits))
    return QubitMap(dict(zip(qubits, chosen)))


def neighbor_map(qmap: QubitMap, qubits: list[int], locs: list[int], rng: random.Random) -> QubitMap:
    """Swap two qubits' locations or move one qubit to an unused location (each move type equally likely)."""
    used = set(qmap.locations())
    can_swap = len(qubits) >= 2
    can_move = len(qubits) >= 1 and len(used) < len(locs)
    if not can_swap and not can_move:
        return qmap
    d = qmap.as_dict()
    if can_swap and (not can_move or rng.random() < 0.5):
        a, b = rng.sample(qubits, 2)
        d[a], d[b] = d[b], d[a]
    else:
        q = qubits[rng.randrange(len(qubits))]
        free = [l for l in locs if l not in used]
        d[q] = free[rng.randrange(len(free))]
    return QubitMap(d)


class MapAnnealer:
    """One worker: anneals the initial map, scoring each candidate with a full MaxState run.

    The run for a map draws its randomness from a stream keyed by (worker
    seed, map), so a map's cost is a fixed function within the worker and is
    memoized; revisits cost a dictionary lookup.
    """

    def __init__(self, runner: MaxStateRunner, config: SolverConfig, worker_id: int,
                 clock_zero: float | None = None):
        self.runner = runner
        self.config = config
        self.worker_id = worker_id
        self.worker_seed = stream_seed(config.seed, "worker", worker_id)
        self.rng = random.Random(self.worker_seed)
        self.qubits = runner.circuit.qubits
        self.locs = sorted(runner.sm.locs)
        if len(self.qubits) > len(self.locs):
            raise UnsatisfiableInstance(
                f"{len(self.qubits)} circuit qubits cannot be placed on {len(self.locs)} locations")
        self.cache: OrderedDict = OrderedDict()
        self.clock_zero = time.time() if clock_zero is None else clock_zero
        self.result = WorkerResult(worker_id)

    def _run_rng(self, qmap: QubitMap) -> random.Random:
        return random.Random(stream_seed(self.worker_seed, "run", qmap.key()))

    def evaluate(self, qmap: QubitMap, deadline: float) -> float:
        key = qmap.key()
        hit = self.cache.get(key)
        if hit is not None:
            self.cache.move_to_end(key)
            return hit
        res = self.result
        res.runs += 1
        try:
            sol = self.runner.run(qmap, self._run_rng(qmap), deadline)
            cost = solution_cost(sol)
        except RunAborted as exc:
            if "deadline" in str(exc):
                return math.inf  # not cached: the map was not really evaluated
            sol, cost = None, math.inf
            res.failures += 1
            res.last_error = str(exc)
        except MarolRuntimeError as exc:
            sol, cost = None, math.inf
            res.failures += 1
            res.last_error = f"evaluation failed: {exc}"
        self.cache[key] = cost
        if len(self.cache) > self.config.run_cache_size:
            self.cache.popitem(last=False)
        if sol is not None and cost < res.best_cost:
            res.best, res.best_cost = sol, cost
            res.log.append(LogRecord(time.time() - self.clock_zero, self.worker_id, cost))
        return cost

    def search(self, deadline: float, start_map: QubitMap | None = None) -> WorkerResult:
        sched = self.config.sa_map
        res = self.result
        try:
            if time.monotonic() > deadline:
                return res
            current = start_map if start_map is not None else random_map(self.qubits, self.locs, self.rng)
            cur_cost = self.evaluate(current, deadline)
            tau = sched.tau_i
            cool = 1.0 - sched.rate
            for _ in range(sched.iterations):
                if time.monotonic() > deadline:
                    break
                cand = neighbor_map(current, self.qubits, self.locs, self.rng)
                c = self.evaluate(cand, deadline)
                res.evaluations += 1
                if self.rng.random() < acceptance_probability(c, cur_cost, tau):
                    current, cur_cost = cand, c
                tau *= cool
                res.iterations += 1
        except KeyboardInterrupt:
            pass
        return res

    def fixed(self, qmap: QubitMap, deadline: float) -> WorkerResult:
        """Evaluate one given initial map (no map search)."""
        self.evaluate(qmap, deadline)
        return self.result
