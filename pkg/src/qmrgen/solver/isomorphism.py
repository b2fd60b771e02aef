"""Warm-start qubit maps from subgraph monomorphisms of the interaction graph."""

from __future__ import annotations

from typing import Sequence

from ..circuit import Circuit, interaction_edges


class BudgetExceeded(Exception):
    pass


def find_monomorphism(pattern_nodes: Sequence[int], pattern_edges: Sequence[tuple[int, int]],
                      target_nodes: Sequence[int], target_adj: dict[int, frozenset[int]],
                      node_budget: int = 20000) -> dict[int, int] | None:
    """Injective map of pattern nodes onto target nodes sending every pattern edge to a target edge.

    The image need not be an induced subgraph. Returns None when no embedding
    exists; raises BudgetExceeded when the search visits more than
    ``node_budget`` partial assignments.
    """
    padj: dict[int, set[int]] = {v: set() for v in pattern_nodes}
    for a, b in pattern_edges:
        padj[a].add(b)
        padj[b].add(a)
    tdeg = {v: len(target_adj.get(v, ())) for v in target_nodes}
    if len(pattern_nodes) > len(target_nodes):
        return None
    # connectivity-first order: each next vertex has as many placed neighbors as possible
    order: list[int] = []
    remaining = set(pattern_nodes)
    while remaining:
        placed = set(order)
        v = max(remaining, key=lambda x: (len(padj[x] & placed), len(padj[x]), -x))
        order.append(v)
        remaining.discard(v)
    target_sorted = sorted(target_nodes)
    target_set = set(target_nodes)
    assign: dict[int, int] = {}
    used: set[int] = set()
    visits = 0

    def extend(k: int) -> bool:
        nonlocal visits
        if k == len(order):
            return True
        v = order[k]
        mapped_nbrs = [assign[u] for u in padj[v] if u in assign]
        if mapped_nbrs:
            cands = set(target_adj[mapped_nbrs[0]]) & target_set
            for w in mapped_nbrs[1:]:
                cands &= target_adj[w]
            cands = sorted(cands)
        else:
            cands = target_sorted
        need = len(padj[v])
        for t in cands:
            if t in used or tdeg[t] < need:
                continue
            visits += 1
            if visits > node_budget:
                raise BudgetExceeded()
            assign[v] = t
            used.add(t)
            if extend(k + 1):
                return True
            del assign[v]
            used.discard(t)
        return False

    return dict(assign) if extend(0) else None


def incremental_isomorphism(circuit: Circuit, locs: Sequence[int], adj: dict[int, frozenset[int]],
                            node_budget: int = 20000) -> dict[int, int]:
    """Embed growing prefixes of the interaction graph; return the last embedding that worked.

    Qubits outside that embedding are placed on the lowest free locations.
    """
    loc_set = set(locs)
    target_adj = {l: frozenset(x for x in adj.get(l, ()) if x in loc_set) for l in locs}
    edges: list[tuple[int, int]] = []
    best: dict[int, int] = {}
    for e in interaction_edges(circuit):
        edges.append(e)
        nodes = sorted({q for edge in edges for q in edge})
        try:
            found = find_monomorphism(nodes, edges, locs, target_adj, node_budget)
        except BudgetExceeded:
            found = None
        if found is None:
            break
        best = found
    used = set(best.values())
    free = [l for l in sorted(locs) if l not in used]
    out = dict(best)
    for q in circuit.qubits:
        if q not in out:
            out[q] = free.pop(0)
    return out
