"""Exact minimum-cost search for tiny instances; a test oracle for the heuristic solver."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

from ..circuit import Circuit
from ..marol.values import QubitMap, RouteEntry
from ..statemachine import DeviceState, StateMachine


class OracleBoundsError(ValueError):
    pass


@dataclass(frozen=True)
class OracleBounds:
    max_qubits: int = 4
    max_locs: int = 5
    max_instructions: int = 8
    max_fanout: int = 8


def _derivable_states(sm: StateMachine, circuit: Circuit, front: list[int], qmap: QubitMap):
    """Every realizable state whose routes are a subset of ``front``, deduplicated."""
    seen = set()
    out = []

    def grow(entries: tuple, routes: tuple, used: frozenset):
        key = frozenset(routes)
        if key in seen:
            return
        seen.add(key)
        out.append(DeviceState(qmap, routes))
        for i in front:
            if i in used:
                continue
            ins = circuit[i]
            for r in sm.realize(qmap, entries, ins):
                grow(entries + (RouteEntry(ins, r),), routes + ((i, r),), used | {i})

    grow((), (), frozenset())
    return out


def brute_force_oracle(sm: StateMachine, circuit: Circuit, bounds: OracleBounds = OracleBounds()) -> float:
    """Minimum total cost over all solutions (inf when none exists)."""
    n = len(circuit)
    qubits = circuit.qubits
    if len(qubits) > bounds.max_qubits:
        raise OracleBoundsError(f"{len(qubits)} qubits exceeds the oracle bound {bounds.max_qubits}")
    if len(sm.locs) > bounds.max_locs:
        raise OracleBoundsError(f"{len(sm.locs)} locations exceeds the oracle bound {bounds.max_locs}")
    if n > bounds.max_instructions:
        raise OracleBoundsError(f"{n} instructions exceeds the oracle bound {bounds.max_instructions}")
    sm.check_circuit(circuit)
    if n == 0:
        return 0.0
    routed = [sm.is_routed(ins) for ins in circuit.instructions]
    preds = circuit.predecessors

    def closure(done: frozenset) -> frozenset:
        d = set(done)
        changed = True
        while changed:
            changed = False
            for i in range(n):
                if i not in d and not routed[i] and all(p in d for p in preds[i]):
                    d.add(i)
                    changed = True
        return frozenset(d)

    everything = frozenset(range(n))
    tie = itertools.count()
    heap: list = []
    for locs in itertools.permutations(sm.locs, len(qubits)):
        heapq.heappush(heap, (0.0, next(tie), QubitMap(dict(zip(qubits, locs))), frozenset()))
    settled = set()
    while heap:
        cost, _, qmap, done = heapq.heappop(heap)
        if qmap is None:
            return cost  # goal marker
        key = (qmap, done)
        if key in settled:
            continue
        settled.add(key)
        pre = closure(done)
        front = [i for i in range(n) if routed[i] and i not in pre and all(p in pre for p in preds[i])]
        for state in _derivable_states(sm, circuit, front, qmap):
            after = closure(pre | {i for i, _ in state.routes})
            sc = sm.state_cost(state, circuit)
            if after == everything:
                heapq.heappush(heap, (cost + sc, next(tie), None, None))
                continue
            trans = sm.transitions(state, circuit)
            if len(trans) > bounds.max_fanout:
                raise OracleBoundsError(f"{len(trans)} transitions exceeds the fan-out bound {bounds.max_fanout}")
            for t in trans:
                new_map, c = sm.step(qmap, t)
                if (new_map, after) not in settled:
                    heapq.heappush(heap, (cost + sc + c, next(tie), new_map, after))
    return math.inf
