from __future__ import annotations

import copy
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmrgen.archgraph import parse_arch
from qmrgen.circuit import parse_circuit
from qmrgen.marol import IdTrans, QubitMap, StructValue
from qmrgen.problems import gen_arch
from qmrgen.statemachine import (
    CircuitProgramMismatch, DeviceState, Solution, SolutionFormatError, StateMachine, Step,
    attach_ready_nonrouted, solution_from_json,
)


def edge(name, u, v):
    return StructValue(name, (("edge", (u, v)),))


@pytest.fixture
def sm(nisqmr, line4):
    return StateMachine(nisqmr, line4)


@pytest.fixture
def swap_solution():
    """Identity map, route g0 and g1, swap locations 1 and 2, route g2 and g3: one swap in total."""
    m0 = QubitMap({0: 0, 1: 1, 2: 2, 3: 3})
    m1 = QubitMap({0: 0, 1: 2, 2: 1, 3: 3})
    return Solution([
        Step(DeviceState(m0, ((0, edge("GateRealization", 0, 1)), (1, edge("GateRealization", 2, 3)))),
             transition=edge("Transition", 1, 2), transition_cost=1.0),
        Step(DeviceState(m1, ((2, edge("GateRealization", 2, 3)), (3, edge("GateRealization", 0, 1))))),
    ])


def test_hand_built_solution_is_valid(sm, cycle_circuit, swap_solution):
    assert sm.validate_solution(cycle_circuit, swap_solution, 1.0) == []
    assert swap_solution.total_cost == 1.0


def test_realize_examples(sm, cycle_circuit):
    ident = QubitMap({0: 0, 1: 1, 2: 2, 3: 3})
    assert sm.realize(ident, (), cycle_circuit[0]) == (edge("GateRealization", 0, 1),)
    assert sm.realize(ident, (), cycle_circuit[2]) == ()  # qubits 1 and 3 sit two apart
    assert sm.realize(QubitMap({0: 1, 1: 0}), (), cycle_circuit[0]) == (edge("GateRealization", 1, 0),)


def test_transitions_and_steps(sm, scmr, grid3, cycle_circuit):
    state = DeviceState(QubitMap({0: 0, 1: 1}))
    ts = sm.transitions(state, cycle_circuit)
    assert ts == (IdTrans, edge("Transition", 0, 1), edge("Transition", 1, 2), edge("Transition", 2, 3))
    assert sm.step(state.map, IdTrans) == (state.map, 0.0)
    assert sm.step(state.map, ts[2]) == (QubitMap({0: 0, 1: 2}), 1.0)
    sc = StateMachine(scmr, _magic_grid())
    assert sc.transitions(DeviceState(QubitMap({0: 0})), parse_circuit("t 0")) == (IdTrans,)
    assert sc.state_cost(DeviceState(QubitMap({0: 0})), parse_circuit("t 0")) == 1.0


def _magic_grid():
    data = gen_arch("grid", 3, 3)
    data["vertex_labels"]["magic_state"] = [False] * 8 + [True]
    data["vertex_labels"]["map_location"] = [True] * 8 + [False]
    return parse_arch(data)


def test_scmr_locations_skip_magic_patches(scmr):
    assert StateMachine(scmr, _magic_grid()).locs == list(range(8))


def test_check_circuit(sm):
    with pytest.raises(CircuitProgramMismatch, match="does not route"):
        sm.check_circuit(parse_circuit("ccx 0 1 2"))
    with pytest.raises(CircuitProgramMismatch, match="only 4 locations"):
        sm.check_circuit(parse_circuit("cx 0 1\ncx 2 3\ncx 4 0"))
    sm.check_circuit(parse_circuit("h 0\ncx 0 1"))


def test_realizability_reasons(sm, cycle_circuit):
    ident = QubitMap({0: 0, 1: 1, 2: 2, 3: 3})
    bad = DeviceState(ident, ((2, edge("GateRealization", 1, 2)),))
    assert "not produced by realize_gate" in sm.check_real(bad, cycle_circuit)
    twice = DeviceState(ident, ((0, edge("GateRealization", 0, 1)), (0, edge("GateRealization", 0, 1))))
    assert "routed twice" in sm.check_real(twice, cycle_circuit)
    off = DeviceState(QubitMap({0: 7}))
    assert "not a location" in sm.check_real(off, cycle_circuit)


# -- validator messages -------------------------------------------------------------

def _tamper(sol, fn):
    sol = copy.deepcopy(sol)
    fn(sol)
    return sol


def test_validator_reports_missing_instruction(sm, cycle_circuit, swap_solution):
    def drop(s):
        s.steps[1].state = DeviceState(s.steps[1].state.map, s.steps[1].state.routes[:1])
    msgs = sm.validate_solution(cycle_circuit, _tamper(swap_solution, drop))
    assert any(m.startswith("step -: instruction missing: g3") for m in msgs)


def test_validator_reports_repeats(sm, cycle_circuit, swap_solution):
    def dup(s):
        st = s.steps[1].state
        s.steps[1].state = DeviceState(st.map, st.routes + ((0, edge("GateRealization", 0, 1)),))
    msgs = sm.validate_solution(cycle_circuit, _tamper(swap_solution, dup))
    assert any("instruction repeated: g0" in m for m in msgs)


def test_validator_reports_dependency_order(sm, cycle_circuit, swap_solution):
    # swap the two layers: g2 depends on g0 and g1 but would run first
    def swap(s):
        a, b = s.steps[0].state.routes, s.steps[1].state.routes
        s.steps[0].state = DeviceState(s.steps[0].state.map, b)
        s.steps[1].state = DeviceState(s.steps[1].state.map, a)
    msgs = sm.validate_solution(cycle_circuit, _tamper(swap_solution, swap))
    assert any("dependency order" in m for m in msgs)


def test_validator_reports_same_step_dependency(nisqmr, line4):
    sm = StateMachine(nisqmr, line4)
    c = parse_circuit("cx 0 1\ncx 0 1")
    m = QubitMap({0: 0, 1: 1})
    sol = Solution([Step(DeviceState(m, ((0, edge("GateRealization", 0, 1)), (1, edge("GateRealization", 0, 1)))))])
    msgs = sm.validate_solution(c, sol)
    assert msgs == ["step 0: dependency order: routed g1 depends on g0 in the same step"]


def test_validator_reports_cost_mismatches(sm, cycle_circuit, swap_solution):
    def cheap(s):
        s.steps[0].transition_cost = 0.5
    msgs = sm.validate_solution(cycle_circuit, _tamper(swap_solution, cheap))
    assert msgs == ["step 0: cost mismatch: transition cost recorded 0.5, program gives 1.0"]
    msgs = sm.validate_solution(cycle_circuit, swap_solution, total_cost=3.0)
    assert msgs == ["step -: cost mismatch: total cost recorded 3.0, steps sum to 1.0"]


def test_validator_reports_bad_transitions(sm, cycle_circuit, swap_solution):
    def wrong(s):
        s.steps[0].transition = edge("Transition", 0, 1)
    msgs = sm.validate_solution(cycle_circuit, _tamper(swap_solution, wrong))
    assert any("differs from the map of step 1" in m for m in msgs)

    def absent(s):
        s.steps[0].transition = edge("Transition", 0, 3)
    msgs = sm.validate_solution(cycle_circuit, _tamper(swap_solution, absent))
    assert any("not offered by get_transitions" in m for m in msgs)

    def trailing(s):
        s.steps[1].transition = IdTrans
    msgs = sm.validate_solution(cycle_circuit, _tamper(swap_solution, trailing))
    assert msgs == ["step 1: final step must not carry a transition"]


def test_unrouted_gates_attach_but_routed_gates_cannot(sm):
    c = parse_circuit("h 0\ncx 0 1")
    m = QubitMap({0: 0, 1: 1})
    ok = Solution([Step(DeviceState(m, ((1, edge("GateRealization", 0, 1)),)), nonrouted=(0,))])
    assert sm.validate_solution(c, ok) == []
    bad = Solution([Step(DeviceState(m), nonrouted=(0, 1))])
    assert any("must be routed" in m for m in sm.validate_solution(c, bad))


def test_attach_ready_nonrouted_chains(sm):
    c = parse_circuit("h 0\ncx 0 1\nh 1\nt 1\nh 2")
    done = {1}
    assert attach_ready_nonrouted(sm, c, done, [0, 2, 3, 4]) == [0, 2, 3, 4]
    done = set()
    assert attach_ready_nonrouted(sm, c, done, [0, 2, 3, 4]) == [0, 4]


# -- JSON ------------------------------------------------------------------------------

def test_solution_json_round_trip(nisqmr, sm, cycle_circuit, swap_solution):
    text = swap_solution.dumps(nisqmr)
    back, total = solution_from_json(text, nisqmr)
    assert total == 1.0
    assert back == swap_solution
    assert sm.validate_solution(cycle_circuit, back, total) == []
    assert json.loads(text)["steps"][0]["transition"] == {"$struct": "Transition", "edge": [1, 2]}


@pytest.mark.parametrize("data", [{}, {"steps": [{"map": {"x": 0}}]}, {"steps": [{"map": {}, "transition": 5}]}])
def test_malformed_solutions(nisqmr, data):
    with pytest.raises((SolutionFormatError, ValueError)):
        solution_from_json(data, nisqmr)


# -- properties ----------------------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(st.permutations(range(5)), st.integers(1, 5), st.lists(st.integers(0, 3), max_size=8))
def test_applying_transitions_keeps_maps_injective(nisqmr, perm, k, swaps):
    sm = StateMachine(nisqmr, parse_arch(gen_arch("line", 5)))
    qmap = QubitMap({q: perm[q] for q in range(k)})
    for e in swaps:
        qmap, c = sm.step(qmap, edge("Transition", e, e + 1))
        assert c == 1.0
        assert len(set(qmap.as_dict().values())) == k
        assert sorted(qmap.as_dict()) == list(range(k))
