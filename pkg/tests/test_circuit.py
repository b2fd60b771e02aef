from __future__ import annotations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmrgen.circuit import (
    Circuit, CircuitParseError, Instruction, criticality, front_layer, interaction_edges, parse_circuit,
)


def test_parse_cycle_dependencies(cycle_circuit):
    c = cycle_circuit
    assert len(c) == 4 and c.qubits == [0, 1, 2, 3]
    # g0 and g1 are independent; g2 and g3 each wait on both
    assert c.predecessors == ((), (), (0, 1), (0, 1))
    assert [ins.index for ins in front_layer(c, set())] == [0, 1]
    assert [ins.index for ins in front_layer(c, {0, 1})] == [2, 3]
    assert criticality(c) == {0: 2, 1: 2, 2: 1, 3: 1}


def test_parse_comments_blank_lines_and_case():
    c = parse_circuit("# header\n\nCX 0 1   # trailing\n  h 2\n")
    assert [(i.gate, i.qubits) for i in c.instructions] == [("cx", (0, 1)), ("h", (2,))]
    assert c.to_text() == "cx 0 1\nh 2\n"


@pytest.mark.parametrize("text, fragment", [
    ("cx 0 0", "duplicate qubit"),
    ("cx", "has no qubits"),
    ("cx 0 a", "bad qubit id"),
    ("h -1", "non-negative"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(CircuitParseError, match=fragment) as info:
        parse_circuit("h 0\n" + text)
    assert info.value.line == 2


def test_instruction_invariants():
    with pytest.raises(ValueError):
        Instruction(0, "cx", (1, 1))
    with pytest.raises(ValueError):
        Instruction(0, "h", ())
    assert str(Instruction(3, "cx", (2, 5))) == "cx 2 5"


def test_empty_circuit():
    c = parse_circuit("")
    assert len(c) == 0 and c.qubits == [] and criticality(c) == {}


def test_interaction_edges_dedup_and_order():
    c = parse_circuit("cx 1 0\nh 2\ncx 0 1\ncx 2 1\nccx 0 1 3")
    assert interaction_edges(c) == [(0, 1), (1, 2), (0, 3), (1, 3)]


def test_depends_directly_is_definitional(cycle_circuit):
    assert cycle_circuit.depends_directly(0, 2)
    assert not cycle_circuit.depends_directly(2, 0)
    assert not cycle_circuit.depends_directly(0, 1)


circuits = st.lists(
    st.one_of(
        st.tuples(st.just("h"), st.lists(st.integers(0, 5), min_size=1, max_size=1)),
        st.tuples(st.just("cx"), st.lists(st.integers(0, 5), min_size=2, max_size=2, unique=True)),
    ),
    max_size=25,
).map(Circuit.from_instructions)


def _definitional_dag(c: Circuit) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(len(c)))
    for j in range(len(c)):
        for i in range(j):
            if c.depends_directly(i, j):
                g.add_edge(i, j)
    return g


@settings(max_examples=150, deadline=None)
@given(circuits)
def test_stored_edges_have_the_definitional_closure(c):
    stored = nx.DiGraph()
    stored.add_nodes_from(range(len(c)))
    stored.add_edges_from((p, i) for i in range(len(c)) for p in c.predecessors[i])
    full = _definitional_dag(c)
    assert set(nx.transitive_closure_dag(stored).edges) == set(nx.transitive_closure_dag(full).edges)
    for i in range(len(c)):
        assert tuple(sorted(c.successors[i])) == tuple(sorted(stored.successors(i)))


@settings(max_examples=150, deadline=None)
@given(circuits)
def test_criticality_matches_longest_path(c):
    g = _definitional_dag(c)
    crit = criticality(c)
    for i in range(len(c)):
        # every descendant is reachable from i, so the longest path in this subgraph starts at i
        longest = nx.dag_longest_path_length(g.subgraph(nx.descendants(g, i) | {i}))
        assert crit[i] == longest + 1


@settings(max_examples=100, deadline=None)
@given(circuits, st.randoms(use_true_random=False))
def test_peeling_front_layers_covers_every_instruction_once(c, rng):
    removed: set[int] = set()
    while len(removed) < len(c):
        layer = front_layer(c, removed)
        assert layer, "a non-empty remainder always has a front"
        qs = [q for ins in layer for q in ins.qubits]
        assert len(qs) == len(set(qs)), "front-layer gates act on disjoint qubits"
        removed.add(rng.choice(layer).index)
