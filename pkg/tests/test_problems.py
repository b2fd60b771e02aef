from __future__ import annotations

import math

import pytest

from qmrgen.archgraph import parse_arch
from qmrgen.marol import load_program
from qmrgen.problems import NAMES, builtin, gen_arch, gen_ve_errors, load_builtin, with_ve_errors
from qmrgen.statemachine import StateMachine


def test_builtins_load_and_classify():
    for name in NAMES:
        b = builtin(name)
        assert load_program(b.source).noninterfering == b.noninterfering
    assert load_builtin("nisqmr") is load_builtin("nisqmr")
    with pytest.raises(KeyError, match="unknown built-in"):
        builtin("nope")


def test_line_and_grid():
    assert parse_arch(gen_arch("line", 3)).edge_list() == [(0, 1), (1, 2)]
    g = parse_arch(gen_arch("grid", 3, 2))
    assert g.n == 6 and len(g.edge_list()) == 7
    assert g.fields["width"] == 3 and g.fields["height"] == 2


def test_compact_layout(scmr):
    data = gen_arch("compact", 4)
    g = parse_arch(data)
    w = g.fields["width"]
    assert (w, g.fields["height"]) == (7, 3)
    magic = [v for v, m in enumerate(data["vertex_labels"]["magic_state"]) if m]
    assert magic == [0, 6, 7, 13, 14, 20]
    sm = StateMachine(scmr, g)
    assert sm.locs == [2, 4, 16, 18]  # even inner columns of the top and bottom rows


def test_compact_magic_column(scmr):
    data = gen_arch("compact_magic_column", 2, 3)
    magic = [v for v, m in enumerate(data["vertex_labels"]["magic_state"]) if m]
    assert magic == [2, 5, 8]
    assert StateMachine(scmr, parse_arch(data)).locs == [0, 1, 3, 4, 6, 7]


@pytest.mark.parametrize("kind, params", [("ring", (3,)), ("line", (0,)), ("grid", (2, -1))])
def test_bad_generator_arguments(kind, params):
    with pytest.raises(ValueError):
        gen_arch(kind, *params)


def test_ve_errors_are_symmetric_and_in_range():
    arch = gen_arch("grid", 3, 3)
    cost, rates = gen_ve_errors(arch, 5)
    g = parse_arch(arch)
    assert set(rates) == set(g.edge_list())
    for (u, v), p in rates.items():
        assert 1e-3 <= p <= 1e-1
        assert cost[u][v] == cost[v][u] == pytest.approx(-math.log(1 - p))
    assert all(cost[u][v] == 0.0 for u in range(9) for v in range(9) if (min(u, v), max(u, v)) not in rates)
    assert gen_ve_errors(arch, 5) == (cost, rates)
    assert gen_ve_errors(arch, 6)[1] != rates


def test_with_ve_errors_binds_to_nisq_ve(nisq_ve):
    arch, rates = with_ve_errors(gen_arch("line", 3), 1)
    sm = StateMachine(nisq_ve, parse_arch(arch))
    assert len(rates) == 2 and sm.locs == [0, 1, 2]
