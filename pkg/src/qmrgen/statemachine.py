"""Device states, realizability, transitions, and solution validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .archgraph import ArchGraph
from .circuit import Circuit
from .marol.evaluator import ArchValue
from .marol.program import MarolProgram
from .marol.values import MarolRuntimeError, QubitMap, RouteEntry, StateValue, StructValue

COST_TOL = 1e-9


class CircuitProgramMismatch(ValueError):
    """The circuit uses a multi-qubit gate the program cannot route."""


@dataclass(frozen=True)
class DeviceState:
    """A qubit map plus the routed instructions, kept in the order they were added."""

    map: QubitMap
    routes: tuple[tuple[int, StructValue], ...] = ()

    def routed(self) -> list[int]:
        return [i for i, _ in self.routes]


@dataclass
class Step:
    state: DeviceState
    nonrouted: tuple[int, ...] = ()
    transition: Any = None  # outgoing transition; None on the final step
    transition_cost: float = 0.0
    state_cost: float = 0.0


@dataclass
class Solution:
    steps: list[Step] = field(default_factory=list)

    @property
    def total_cost(self) -> float:
        return solution_cost(self)

    @property
    def initial_map(self) -> QubitMap | None:
        return self.steps[0].state.map if self.steps else None

    def to_json(self, program: MarolProgram) -> dict:
        steps = []
        for s in self.steps:
            steps.append({
                "map": {str(q): l for q, l in s.state.map.items()},
                "routes": [
                    {"instr": i, "realization": program.realization_to_json(r), "order": k}
                    for k, (i, r) in enumerate(s.state.routes)
                ],
                "nonrouted": list(s.nonrouted),
                "transition": None if s.transition is None else program.transition_to_json(s.transition),
                "transition_cost": s.transition_cost,
                "state_cost": s.state_cost,
            })
        return {"steps": steps, "total_cost": self.total_cost}

    def dumps(self, program: MarolProgram) -> str:
        return json.dumps(self.to_json(program), indent=1, sort_keys=True)


class SolutionFormatError(ValueError):
    pass


def solution_from_json(data: dict | str, program: MarolProgram) -> tuple[Solution, float | None]:
    """Decode a solution file; returns the solution and its recorded total cost."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        steps = []
        for raw in data["steps"]:
            qmap = QubitMap({int(q): int(l) for q, l in raw["map"].items()})
            routes = sorted(raw.get("routes", []), key=lambda r: r.get("order", 0))
            state = DeviceState(qmap, tuple(
                (int(r["instr"]), program.realization_from_json(r["realization"])) for r in routes
            ))
            t = raw.get("transition")
            steps.append(Step(
                state,
                tuple(int(i) for i in raw.get("nonrouted", [])),
                None if t is None else program.transition_from_json(t),
                float(raw.get("transition_cost", 0.0)),
                float(raw.get("state_cost", 0.0)),
            ))
    except (KeyError, TypeError, ValueError) as exc:
        raise SolutionFormatError(f"malformed solution: {exc}") from exc
    total = data.get("total_cost")
    return Solution(steps), None if total is None else float(total)


def solution_cost(sol: Solution) -> float:
    return math.fsum(s.transition_cost + s.state_cost for s in sol.steps)


class StateMachine:
    """A program bound to an arch: the device state machine it defines."""

    def __init__(self, program: MarolProgram, arch: ArchGraph | ArchValue | str | dict):
        self.program = program
        self.arch = arch if isinstance(arch, ArchValue) else program.bind_arch(arch)
        self.locs: list[int] = program.locations(self.arch)
        self.loc_set = frozenset(self.locs)

    @property
    def graph(self) -> ArchGraph:
        return self.arch.graph

    def check_circuit(self, circuit: Circuit) -> None:
        for ins in circuit.instructions:
            if ins.gate not in self.program.routed_gates and len(ins.qubits) > 1:
                raise CircuitProgramMismatch(
                    f"instruction {ins.index} ({ins}) is a multi-qubit gate the program does not route "
                    f"(routed gates: {', '.join(sorted(self.program.routed_gates))})"
                )
        if circuit.qubit_count > len(self.locs):
            raise CircuitProgramMismatch(
                f"circuit uses {circuit.qubit_count} qubits but the arch has only {len(self.locs)} locations"
            )

    def is_routed(self, ins) -> bool:
        return ins.gate in self.program.routed_gates

    # -- semantics ---------------------------------------------------------------

    def state_value(self, state: DeviceState, circuit: Circuit) -> StateValue:
        return StateValue(state.map, tuple(RouteEntry(circuit[i], r) for i, r in state.routes))

    def realize(self, qmap: QubitMap, entries: tuple[RouteEntry, ...], ins) -> tuple[StructValue, ...]:
        return self.program.realize_gate(self.arch, StateValue(qmap, entries), ins)

    def check_real(self, state: DeviceState, circuit: Circuit) -> str | None:
        """None if the state is realizable, else the reason it is not."""
        for q, l in state.map.items():
            if l not in self.loc_set:
                return f"qubit {q} is mapped to {l}, which is not a location"
        entries: list[RouteEntry] = []
        seen: set[int] = set()
        for i, r in state.routes:
            if not 0 <= i < len(circuit):
                return f"routed instruction {i} is not in the circuit"
            if i in seen:
                return f"instruction {i} is routed twice"
            seen.add(i)
            ins = circuit[i]
            if not self.is_routed(ins):
                return f"instruction {i} ({ins.gate}) is not a routed gate"
            try:
                cands = self.realize(state.map, tuple(entries), ins)
            except MarolRuntimeError as exc:
                return f"realize_gate failed for instruction {i}: {exc}"
            if r not in cands:
                return f"realization {r!r} of instruction {i} is not produced by realize_gate"
            entries.append(RouteEntry(ins, r))
        return None

    def is_real(self, state: DeviceState, circuit: Circuit) -> bool:
        return self.check_real(state, circuit) is None

    def transitions(self, state: DeviceState, circuit: Circuit) -> tuple:
        return self.program.get_transitions(self.arch, self.state_value(state, circuit))

    def step(self, qmap: QubitMap, trans) -> tuple[QubitMap, float]:
        return self.program.apply(trans, qmap, self.arch), self.program.cost(trans, self.arch)

    def state_cost(self, state: DeviceState, circuit: Circuit) -> float:
        return self.program.state_cost(self.state_value(state, circuit), self.arch)

    # -- validation --------------------------------------------------------------

    def validate_solution(self, circuit: Circuit, sol: Solution, total_cost: float | None = None) -> list[str]:
        """Every rule a solution breaks, one message per violation (empty list = valid)."""
        out: list[str] = []
        n = len(circuit)
        step_of: dict[int, int] = {}
        routed_in: dict[int, bool] = {}
        for k, s in enumerate(sol.steps):
            # (a) realizability
            why = self.check_real(s.state, circuit)
            if why:
                out.append(f"step {k}: not realizable: {why}")
            # (b) each instruction exactly once
            for i, routed in [(i, True) for i, _ in s.state.routes] + [(i, False) for i in s.nonrouted]:
                if not 0 <= i < n:
                    out.append(f"step {k}: instruction {i} does not exist")
                    continue
                if i in step_of:
                    out.append(f"step {k}: instruction repeated: g{i} already in step {step_of[i]}")
                    continue
                step_of[i] = k
                routed_in[i] = routed
                if not routed and self.is_routed(circuit[i]):
                    out.append(f"step {k}: instruction g{i} ({circuit[i].gate}) must be routed, not attached")
        for i in range(n):
            if i not in step_of:
                out.append(f"step -: instruction missing: g{i} ({circuit[i]}) appears in no step")
        # (c) dependency order; routed instructions of one step form a layer
        for i, k in step_of.items():
            for p in circuit.predecessors[i]:
                if p in step_of and step_of[p] > k:
                    out.append(f"step {k}: dependency order: g{i} runs before its predecessor g{p} (step {step_of[p]})")
        for k, s in enumerate(sol.steps):
            members = {i for i, st in step_of.items() if st == k}
            routed = [i for i, _ in s.state.routes if step_of.get(i) == k]
            for i in routed:
                # walk backwards inside the step looking for another routed instruction
                stack, seen = list(circuit.predecessors[i]), set()
                while stack:
                    p = stack.pop()
                    if p in seen or p not in members:
                        continue
                    seen.add(p)
                    if routed_in.get(p):
                        out.append(f"step {k}: dependency order: routed g{i} depends on g{p} in the same step")
                        break
                    stack.extend(circuit.predecessors[p])
        # (d) transitions and costs
        for k, s in enumerate(sol.steps):
            last = k == len(sol.steps) - 1
            try:
                sc = self.state_cost(s.state, circuit)
                if abs(sc - s.state_cost) > COST_TOL:
                    out.append(f"step {k}: cost mismatch: state cost recorded {s.state_cost}, program gives {sc}")
            except (MarolRuntimeError, KeyError) as exc:
                out.append(f"step {k}: state cost failed: {exc}")
            if last:
                if s.transition is not None:
                    out.append(f"step {k}: final step must not carry a transition")
                elif s.transition_cost != 0.0:
                    out.append(f"step {k}: cost mismatch: final step has transition cost {s.transition_cost}")
                continue
            if s.transition is None:
                out.append(f"step {k}: transition missing between step {k} and step {k + 1}")
                continue
            try:
                allowed = self.transitions(s.state, circuit)
                if s.transition not in allowed:
                    out.append(f"step {k}: transition {s.transition!r} is not offered by get_transitions")
                    continue
                new_map, c = self.step(s.state.map, s.transition)
            except (MarolRuntimeError, ValueError) as exc:
                out.append(f"step {k}: transition failed: {exc}")
                continue
            if new_map != sol.steps[k + 1].state.map:
                out.append(f"step {k}: transition result {new_map!r} differs from the map of step {k + 1}")
            if abs(c - s.transition_cost) > COST_TOL:
                out.append(f"step {k}: cost mismatch: transition cost recorded {s.transition_cost}, program gives {c}")
        # (e) total
        if total_cost is not None:
            actual = solution_cost(sol)
            if abs(actual - total_cost) > COST_TOL:
                out.append(f"step -: cost mismatch: total cost recorded {total_cost}, steps sum to {actual}")
        return out


def attach_ready_nonrouted(sm: StateMachine, circuit: Circuit, done: set[int], pending: Sequence[int]) -> list[int]:
    """Unrouted single-qubit instructions whose predecessors are all done, closed under chaining.

    ``pending`` lists the not-yet-placed unrouted instructions in index order;
    returned instructions are added to ``done``.
    """
    out = []
    changed = True
    while changed:
        changed = False
        for i in pending:
            if i in done:
                continue
            if all(p in done for p in circuit.predecessors[i]):
                done.add(i)
                out.append(i)
                changed = True
    return sorted(out)
