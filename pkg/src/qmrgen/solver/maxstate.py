"""Maximal-state construction, transition selection, and single MaxState runs."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from typing import Sequence

from ..circuit import Circuit, criticality
from ..marol.values import QubitMap, RouteEntry, StructValue
from ..statemachine import DeviceState, Solution, StateMachine, Step
from .config import SolverConfig, acceptance_probability


def route_one_pass(sm: StateMachine, circuit: Circuit, layer: Sequence[int], qmap: QubitMap,
                   rng: random.Random | None = None) -> DeviceState:
    """Route the layer greedily in the given order; each routable gate takes one candidate.

    With several candidates the choice is uniform under ``rng`` (first candidate without one).
    """
    entries: list[RouteEntry] = []
    routes: list[tuple[int, StructValue]] = []
    for i in layer:
        ins = circuit[i]
        cands = sm.realize(qmap, tuple(entries), ins)
        if not cands:
            continue
        r = cands[0] if rng is None or len(cands) == 1 else cands[rng.randrange(len(cands))]
        entries.append(RouteEntry(ins, r))
        routes.append((i, r))
    return DeviceState(qmap, tuple(routes))


def objective(state: DeviceState, weights: dict[int, float]) -> float:
    return float(sum(weights[i] for i, _ in state.routes))


def gate_weights(circuit: Circuit, weighting: bool) -> dict[int, float]:
    if not weighting:
        return {i: 1.0 for i in range(len(circuit))}
    return {i: 1.0 + c for i, c in criticality(circuit).items()}


def max_state_search(sm: StateMachine, circuit: Circuit, layer: Sequence[int], qmap: QubitMap,
                     rng: random.Random, config: SolverConfig, weights: dict[int, float],
                     deadline: float = math.inf) -> DeviceState:
    """Best maximal state over orderings of ``layer``.

    Non-interfering programs have a unique maximal state, so one pass in index
    order suffices. Otherwise simulated annealing over orderings (neighbor: swap
    two positions) runs the main schedule and the reduced-rate ladder
    round-robin, stopping once every gate is routed or the evaluation budget
    is spent.
    """
    order = sorted(layer)
    if sm.program.noninterfering or len(order) <= 1:
        return route_one_pass(sm, circuit, order, qmap, rng)
    # most critical first is a strong starting ordering
    order.sort(key=lambda i: (-weights[i], i))
    full = sum(weights[i] for i in order)
    best = route_one_pass(sm, circuit, order, qmap, rng)
    best_val = objective(best, weights)
    if best_val >= full:
        return best
    # small layers have few orderings; a handful of tries per ordering covers realization choices
    budget = min(config.perm_eval_budget, config.perm_evals_per_order * math.factorial(min(len(order), 6))) - 1
    searches = []
    for sched in config.perm_schedules():
        searches.append({"perm": list(order), "val": best_val, "tau": sched.tau_i,
                         "cool": 1.0 - sched.rate, "left": sched.iterations, "tau_f": sched.tau_f})
    n = len(order)
    while budget > 0 and any(s["left"] > 0 for s in searches):
        for s in searches:
            if s["left"] <= 0 or budget <= 0:
                continue
            if time.monotonic() > deadline:
                return best
            a, b = rng.sample(range(n), 2)
            perm = list(s["perm"])
            perm[a], perm[b] = perm[b], perm[a]
            cand = route_one_pass(sm, circuit, perm, qmap, rng)
            val = objective(cand, weights)
            budget -= 1
            s["left"] -= 1
            if val > best_val:
                best, best_val = cand, val
                if best_val >= full:
                    return best
            # maximizing: cost is the negated objective
            if rng.random() < acceptance_probability(-val, -s["val"], s["tau"]):
                s["perm"], s["val"] = perm, val
            s["tau"] *= s["cool"]
    return best


def _gate_distance(sm: StateMachine, circuit: Circuit, i: int, qmap: QubitMap) -> float:
    qs = circuit[i].qubits
    g = sm.graph
    return sum(g.distance(qmap[a], qmap[b]) for a, b in zip(qs, qs[1:]))


def _distance_sum(sm: StateMachine, circuit: Circuit, gates: Sequence[int], qmap: QubitMap) -> float:
    return sum(_gate_distance(sm, circuit, i, qmap) for i in gates)


@dataclass
class _Choice:
    trans: object
    new_map: QubitMap
    cost: float
    next_state: DeviceState | None = None
    fallback: bool = False


class RunAborted(Exception):
    """A run cannot finish: the state machine is stuck or the deadline passed."""


class MaxStateRunner:
    """Runs MaxState from given initial maps for one (program, arch, circuit)."""

    def __init__(self, sm: StateMachine, circuit: Circuit, config: SolverConfig):
        self.sm = sm
        self.circuit = circuit
        self.config = config
        sm.check_circuit(circuit)
        self.weights = gate_weights(circuit, config.criticality_weighting)
        self.crit_order = sorted(range(len(circuit)), key=lambda i: (-self.weights[i], i))
        self.routed_mask = [sm.is_routed(ins) for ins in circuit.instructions]
        n_locs = max(1, len(sm.locs))
        self.stall_cap = config.stall_cap if config.stall_cap is not None else 4 * n_locs + 20

    # -- transition selection --------------------------------------------------

    def select_transition(self, state: DeviceState, next_front: list[int], rng: random.Random,
                          prev_fallback_map: QubitMap | None, stall: int) -> _Choice:
        sm, circuit = self.sm, self.circuit
        trans = sm.transitions(state, circuit)
        qmap = state.map
        evaluated: list[_Choice] = []
        for t in trans:
            new_map, c = sm.step(qmap, t)
            evaluated.append(_Choice(t, new_map, c))
        if len(evaluated) == 1:
            return evaluated[0]
        # score each transition by the next state it enables, net of its cost
        best_score, best = -math.inf, []
        any_progress = False
        for ch in evaluated:
            if self.config.transition_search == "full":
                nxt = max_state_search(sm, circuit, next_front, ch.new_map, rng, self.config, self.weights)
            else:
                nxt = route_one_pass(sm, circuit, sorted(next_front), ch.new_map, rng)
            ch.next_state = nxt
            obj = objective(nxt, self.weights)
            if obj > 0:
                any_progress = True
            score = obj - ch.cost
            if score > best_score + 1e-12:
                best_score, best = score, [ch]
            elif abs(score - best_score) <= 1e-12:
                best.append(ch)
        if any_progress:
            return best[0] if len(best) == 1 else best[rng.randrange(len(best))]
        return self._fallback(evaluated, next_front, qmap, rng, prev_fallback_map, stall)

    def _fallback(self, evaluated: list[_Choice], front: list[int], qmap: QubitMap,
                  rng: random.Random, prev_fallback_map: QubitMap | None, stall: int) -> _Choice:
        sm, circuit = self.sm, self.circuit
        multi = [i for i in front if len(circuit[i].qubits) > 1]
        moving = [ch for ch in evaluated if ch.new_map != qmap]
        if not moving:
            raise RunAborted("no transition changes the qubit map and no gate can be routed")
        if stall >= self.config.stall_limit and multi:
            # focused mode: bring the most critical front gate strictly closer
            target = min(multi, key=lambda i: (-self.weights[i], i))
            d0 = _gate_distance(sm, circuit, target, qmap)
            closer = [ch for ch in moving if _gate_distance(sm, circuit, target, ch.new_map) < d0]
            if closer:
                key = lambda ch: (_gate_distance(sm, circuit, target, ch.new_map),
                                  _distance_sum(sm, circuit, multi, ch.new_map), ch.cost)
                return self._pick_min(closer, key, rng, fallback=True)
        cands = [ch for ch in moving if prev_fallback_map is None or ch.new_map != prev_fallback_map]
        if not cands:
            return self._pick_min(moving, lambda ch: (ch.cost,), rng, fallback=True)
        key = lambda ch: (_distance_sum(sm, circuit, multi, ch.new_map), ch.cost)
        return self._pick_min(cands, key, rng, fallback=True)

    @staticmethod
    def _pick_min(cands: list[_Choice], key, rng: random.Random, fallback: bool) -> _Choice:
        keys = [key(ch) for ch in cands]
        low = min(keys)
        ties = [ch for ch, k in zip(cands, keys) if k == low]
        ch = ties[0] if len(ties) == 1 else ties[rng.randrange(len(ties))]
        ch.fallback = fallback
        ch.next_state = None
        return ch

    # -- one run -----------------------------------------------------------------

    def run(self, initial_map: QubitMap, rng: random.Random, deadline: float = math.inf) -> Solution:
        """One pass of MaxState from ``initial_map``; raises RunAborted if it cannot finish."""
        sm, circuit = self.sm, self.circuit
        n = len(circuit)
        if n == 0:
            return Solution([])
        preds_left = [len(circuit.predecessors[i]) for i in range(n)]
        done = [False] * n
        n_done = 0
        ready_routed: set[int] = set()
        ready_plain: list[int] = []
        for i in range(n):
            if preds_left[i] == 0:
                (ready_routed.add(i) if self.routed_mask[i] else ready_plain.append(i))

        def finish(i: int) -> None:
            nonlocal n_done
            done[i] = True
            n_done += 1
            for s in circuit.successors[i]:
                preds_left[s] -= 1
                if preds_left[s] == 0:
                    (ready_routed.add(s) if self.routed_mask[s] else ready_plain.append(s))

        def attach() -> list[int]:
            out = []
            while ready_plain:
                i = ready_plain.pop()
                finish(i)
                out.append(i)
            return sorted(out)

        steps: list[Step] = []
        qmap = initial_map
        pending_attach = attach()
        next_state: DeviceState | None = None
        prev_fallback_map: QubitMap | None = None
        stall = 0
        noninterfering = sm.program.noninterfering
        while True:
            if time.monotonic() > deadline:
                raise RunAborted("deadline reached")
            front = sorted(ready_routed)
            if next_state is not None and noninterfering:
                state = next_state
            else:
                state = max_state_search(sm, circuit, front, qmap, rng, self.config, self.weights, deadline)
            for i, _ in state.routes:
                ready_routed.discard(i)
                finish(i)
            nonrouted = tuple(pending_attach + attach())
            pending_attach = []
            sc = sm.state_cost(state, circuit)
            step = Step(state, nonrouted, None, 0.0, sc)
            steps.append(step)
            if n_done == n:
                return Solution(steps)
            if state.routes:
                stall = 0
                prev_fallback_map = None
            else:
                stall += 1
                if stall > self.stall_cap:
                    raise RunAborted("too many consecutive states without progress")
            ch = self.select_transition(state, sorted(ready_routed), rng, prev_fallback_map, stall)
            if not state.routes and ch.new_map == qmap:
                raise RunAborted("stuck: empty state and the chosen transition leaves the map unchanged")
            step.transition = ch.trans
            step.transition_cost = ch.cost
            prev_fallback_map = qmap if ch.fallback else None
            qmap = ch.new_map
            next_state = ch.next_state
