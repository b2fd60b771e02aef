from __future__ import annotations

import itertools
import math

import networkx as nx
import pytest
from fuzz import random_connected_arch
from hypothesis import given, settings
from hypothesis import strategies as st

from qmrgen.archgraph import (
    ArchError, ArchGraph, PathBounds, horizontal_neighbors, parse_arch, to_2d, vertical_neighbors,
)
from qmrgen.problems import gen_arch


def nx_graph(g: ArchGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edge_list())
    return h


def min_steiner_size(g: ArchGraph, terminals, blocked=()) -> int | None:
    """Exhaustive: the smallest connected vertex set containing the terminals."""
    h = nx_graph(g)
    free = [v for v in range(g.n) if v not in set(terminals) and v not in set(blocked)]
    for extra in range(len(free) + 1):
        for add in itertools.combinations(free, extra):
            verts = set(terminals) | set(add)
            if nx.is_connected(h.subgraph(verts)):
                return len(verts)
    return None


graphs = st.builds(
    lambda seed, n, p: parse_arch(random_connected_arch(__import__("random").Random(seed), n, p)),
    st.integers(0, 10**6), st.integers(1, 9), st.floats(0.0, 0.6),
)


def test_line4_and_json_round_trip(line4):
    assert line4.edge_list() == [(0, 1), (1, 2), (2, 3)]
    assert parse_arch(line4.to_json()).edge_list() == line4.edge_list()


def test_empty_arch_is_valid():
    g = parse_arch('{"n": 0, "edges": []}')
    assert g.n == 0 and g.edge_list() == []


def test_complete_k3_edges_are_lexicographic_and_undirected():
    g = parse_arch({"n": 3, "edges": [[2, 1], [0, 2], [1, 0]]})
    assert g.edge_list() == [(0, 1), (0, 2), (1, 2)]


@pytest.mark.parametrize("data, fragment", [
    ({"n": 4, "edges": [[0, 9]]}, "outside"),
    ({"n": 4, "edges": [[1, 1]]}, "self-loop"),
    ({"n": 4, "edges": [[0, 1], [1, 0]]}, "duplicate edge"),
    ({"n": 2, "edges": [], "vertex_labels": {"magic": [True]}}, "length 2"),
    ({"edges": []}, "'n'"),
])
def test_parse_errors(data, fragment):
    with pytest.raises(ArchError, match=fragment):
        parse_arch(data)


def test_declared_fields_are_checked():
    from qmrgen.marol.types import BOOL, INT, TList
    decl = {"width": INT, "magic_state": TList(BOOL)}
    ok = gen_arch("grid", 2, 2)
    ok["vertex_labels"]["magic_state"] = [False] * 4
    parse_arch(ok, decl)
    with pytest.raises(ArchError, match="missing field 'depth'"):
        parse_arch(ok, {"depth": INT})
    bad = dict(ok, fields={"width": "two", "height": 2})
    with pytest.raises(ArchError, match="width"):
        parse_arch(bad, decl)


def test_edges_between(line4):
    assert line4.edges_between(0, 1) == [(0, 1)]
    assert line4.edges_between(1, 0) == [(1, 0)]
    assert line4.edges_between(0, 2) == []
    assert line4.edges_between(2, 2) == []
    with pytest.raises(ArchError):
        line4.edges_between(0, 4)


def test_distance_examples(line4):
    assert line4.distance(0, 3) == 3 and line4.distance(2, 2) == 0
    split = parse_arch({"n": 4, "edges": [[0, 1], [2, 3]]})
    assert math.isinf(split.distance(0, 3))


def test_all_paths_contains_one_bend_path(grid3):
    # control at 0 leaves through its vertical neighbor 3; target at 4 is entered from 3 or 5
    paths = grid3.all_paths(vertical_neighbors(0, 3, 3), horizontal_neighbors(4, 3), [0, 4])
    assert (3,) in paths
    assert paths == sorted(paths, key=len)
    # blocking the straight route forces a detour around through 6 and 7 or the top row
    detour = grid3.all_paths([3], [5], [0, 4, 1])
    assert detour[0] == (3, 6, 7, 8, 5)


def test_all_paths_trivial_cases(grid3):
    assert grid3.all_paths([4], [4], []) == [(4,)]
    assert grid3.all_paths([4], [5], [4]) == []
    assert grid3.all_paths([], [5], []) == []
    assert parse_arch({"n": 2, "edges": []}).all_paths([0], [1], []) == []


def test_all_paths_respects_the_cap():
    g = ArchGraph.build(9, gen_arch("grid", 3, 3)["edges"], bounds=PathBounds(max_paths=3))
    assert len(g.all_paths([0], [8], [])) == 3


def test_steiner_examples(grid3):
    assert grid3.steiner_trees([4], []) == [(4,)]
    assert grid3.steiner_trees([0, 1], [])[0] == (0, 1)
    corners = grid3.steiner_trees([0, 2, 6], [])
    # exhaustive search: the path 2-1-0-3-6 has five vertices and nothing smaller connects the corners
    assert min_steiner_size(grid3, [0, 2, 6]) == 5
    assert corners[0] == (0, 1, 2, 3, 6)
    assert grid3.steiner_trees([0, 8], [0]) == []
    with pytest.raises(ArchError):
        grid3.steiner_trees([], [])


def test_grid_helpers():
    assert to_2d(4, 3) == (1, 1)
    assert to_2d(5, 3) == (1, 2)
    assert horizontal_neighbors(0, 3) == [1]
    assert horizontal_neighbors(4, 3) == [3, 5]
    assert vertical_neighbors(4, 3, 3) == [1, 7]
    assert vertical_neighbors(0, 3, 3) == [3]
    with pytest.raises(ArchError):
        vertical_neighbors(9, 3, 3)
    with pytest.raises(ArchError):
        to_2d(1, 0)


@settings(max_examples=60, deadline=None)
@given(graphs)
def test_distances_match_networkx(g):
    ref = dict(nx.all_pairs_shortest_path_length(nx_graph(g)))
    for u in range(g.n):
        for v in range(g.n):
            assert g.distance(u, v) == ref[u].get(v, math.inf)
            assert g.distance(u, v) == g.distance(v, u)
            for w in range(g.n):
                assert g.distance(u, w) <= g.distance(u, v) + g.distance(v, w)


@settings(max_examples=60, deadline=None)
@given(graphs, st.data())
def test_all_paths_are_simple_and_avoid_blocked(g, data):
    verts = list(range(g.n))
    srcs = data.draw(st.lists(st.sampled_from(verts), max_size=3))
    tgts = data.draw(st.lists(st.sampled_from(verts), max_size=3))
    blocked = data.draw(st.lists(st.sampled_from(verts), max_size=3))
    h = nx_graph(g)
    paths = g.all_paths(srcs, tgts, blocked)
    assert len(paths) == len(set(paths))
    for p in paths:
        assert p[0] in srcs and p[-1] in tgts
        assert len(set(p)) == len(p)
        assert not set(p) & set(blocked)
        assert all(h.has_edge(a, b) for a, b in zip(p, p[1:]))
    assert [len(p) for p in paths] == sorted(len(p) for p in paths)
    # below the caps the enumeration is complete: compare with networkx on the unblocked subgraph
    free = h.subgraph(v for v in verts if v not in set(blocked))
    expected = set()
    for s in set(srcs) - set(blocked):
        for t in set(tgts) - set(blocked):
            if s == t:
                expected.add((s,))
            elif nx.has_path(free, s, t):
                expected |= {tuple(p) for p in nx.all_simple_paths(free, s, t)}
    if expected:
        d = min(g.distance(s, t) for s in srcs for t in tgts)
        limit = min(2 * d + 4, g.n - 1)
        expected = {p for p in expected if len(p) - 1 <= limit}
    if len(expected) < g.bounds.max_paths:
        assert set(paths) == expected


@settings(max_examples=40, deadline=None)
@given(graphs, st.data())
def test_steiner_trees_are_connected_and_cover_terminals(g, data):
    verts = list(range(g.n))
    terms = data.draw(st.lists(st.sampled_from(verts), min_size=1, max_size=3, unique=True))
    blocked = data.draw(st.lists(st.sampled_from([v for v in verts if v not in terms] or [None]), max_size=2))
    blocked = [b for b in blocked if b is not None]
    h = nx_graph(g)
    trees = g.steiner_trees(terms, blocked)
    for t in trees:
        assert set(terms) <= set(t)
        assert not set(t) & set(blocked)
        assert nx.is_connected(h.subgraph(t))
    assert [len(t) for t in trees] == sorted(len(t) for t in trees)
    best = min_steiner_size(g, terms, blocked)
    if best is None:
        assert trees == []
    else:
        assert trees and len(trees[0]) >= best
        if len(terms) <= 2:
            assert len(trees[0]) == best  # a shortest path is an optimal tree for two terminals
