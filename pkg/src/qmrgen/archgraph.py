"""QPU graphs and the graph routines exposed to Marol programs."""

from __future__ import annotations

import itertools
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Sequence

INF = math.inf


class ArchError(ValueError):
    pass


@dataclass
class PathBounds:
    """Enumeration caps for all_paths/steiner_trees; exact search is exponential."""

    max_paths: int = 256
    max_trees: int = 64
    max_orderings: int = 5040
    slack_factor: int = 2
    slack_add: int = 4


@dataclass
class ArchGraph:
    n: int
    edges: frozenset[tuple[int, int]]
    vertex_labels: dict[str, list[Any]] = field(default_factory=dict)
    fields: dict[str, Any] = field(default_factory=dict)
    bounds: PathBounds = field(default_factory=PathBounds)

    def __post_init__(self):
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        self.adj: list[tuple[int, ...]] = [tuple(sorted(a)) for a in adj]
        self.adj_sets = [frozenset(a) for a in self.adj]
        self._dist = self._all_pairs_bfs()

    @classmethod
    def build(cls, n: int, edge_list, vertex_labels=None, fields=None, bounds=None) -> "ArchGraph":
        if n < 0:
            raise ArchError("n must be non-negative")
        es = set()
        for e in edge_list:
            if len(e) != 2:
                raise ArchError(f"edge {list(e)} must have two endpoints")
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise ArchError(f"edge [{u}, {v}] has an endpoint outside 0..{n - 1}")
            if u == v:
                raise ArchError(f"self-loop at {u}")
            key = (min(u, v), max(u, v))
            if key in es:
                raise ArchError(f"duplicate edge [{u}, {v}]")
            es.add(key)
        labels = dict(vertex_labels or {})
        for name, vals in labels.items():
            if not isinstance(vals, list) or len(vals) != n:
                raise ArchError(f"vertex label '{name}' must be a list of length {n}")
        return cls(n, frozenset(es), labels, dict(fields or {}), bounds or PathBounds())

    def _all_pairs_bfs(self) -> list[list[float]]:
        dist = []
        for s in range(self.n):
            row = [INF] * self.n
            row[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                for w in self.adj[u]:
                    if row[w] == INF:
                        row[w] = row[u] + 1
                        q.append(w)
            dist.append(row)
        return dist

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "edges": [list(e) for e in self.edge_list()],
            "vertex_labels": self.vertex_labels,
            "fields": self.fields,
        }

    # -- library functions -------------------------------------------------

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def check_loc(self, u: int) -> None:
        if not (0 <= u < self.n):
            raise ArchError(f"location {u} out of range 0..{self.n - 1}")

    def edges_between(self, u: int, v: int) -> list[tuple[int, int]]:
        self.check_loc(u)
        self.check_loc(v)
        return [(u, v)] if v in self.adj_sets[u] else []

    def distance(self, u: int, v: int) -> float:
        return self._dist[u][v]

    def all_paths(self, sources: Sequence[int], targets: Sequence[int], blocked: Sequence[int]) -> list[tuple[int, ...]]:
        """Simple paths from any source to any target avoiding ``blocked``.

        Paths come out shortest first, lexicographic within a length. The
        length cap depends only on the unblocked arch distance, so growing the
        blocked set can only remove paths from the result (before truncation).
        """
        srcs = sorted(set(sources))
        tgts = set(targets)
        if not srcs or not tgts:
            return []
        d = min(self._dist[s][t] for s in srcs for t in tgts)
        if d == INF:
            return []
        b = self.bounds
        max_len = min(b.slack_factor * int(d) + b.slack_add, self.n - 1)
        blocked_set = set(blocked)
        # distance to the target set inside the unblocked subgraph, for pruning
        to_t = {t: 0 for t in tgts if t not in blocked_set}
        q = deque(to_t)
        while q:
            u = q.popleft()
            for w in self.adj[u]:
                if w not in blocked_set and w not in to_t:
                    to_t[w] = to_t[u] + 1
                    q.append(w)
        starts = [s for s in srcs if s in to_t]
        out: list[tuple[int, ...]] = []
        cap = b.max_paths
        for length in range(0, max_len + 1):
            for s in starts:
                if to_t[s] > length:
                    continue
                path = [s]
                on_path = {s}
                self._dfs_paths(path, on_path, length, tgts, to_t, out, cap)
                if len(out) >= cap:
                    return out
        return out

    def _dfs_paths(self, path, on_path, length, tgts, to_t, out, cap) -> None:
        u = path[-1]
        depth = len(path) - 1
        if depth == length:
            if u in tgts:
                out.append(tuple(path))
            return
        for w in self.adj[u]:
            if w in on_path or w not in to_t:
                continue
            if depth + 1 + to_t[w] > length:
                continue
            path.append(w)
            on_path.add(w)
            self._dfs_paths(path, on_path, length, tgts, to_t, out, cap)
            path.pop()
            on_path.discard(w)
            if len(out) >= cap:
                return

    def _bfs_path_to_tree(self, tree: set[int], target: int, blocked: set[int]) -> list[int] | None:
        if target in tree:
            return []
        prev = {target: None}
        q = deque([target])
        while q:
            u = q.popleft()
            for w in self.adj[u]:
                if w in prev or w in blocked:
                    continue
                prev[w] = u
                if w in tree:
                    path = []
                    x = u
                    while x is not None:
                        path.append(x)
                        x = prev[x]
                    return path
                q.append(w)
        return None

    def _connected(self, verts: set[int]) -> bool:
        if not verts:
            return False
        start = next(iter(verts))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self.adj[u]:
                if w in verts and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(verts)

    def _prune(self, verts: set[int], terms: set[int]) -> set[int]:
        changed = True
        while changed:
            changed = False
            for v in sorted(verts - terms):
                rest = verts - {v}
                if self._connected(rest):
                    verts = rest
                    changed = True
        return verts

    def steiner_trees(self, terminals: Sequence[int], blocked: Sequence[int]) -> list[tuple[int, ...]]:
        """Candidate connected vertex sets spanning ``terminals``, smallest first.

        Shortest-path heuristic over terminal orderings followed by single-vertex
        prunes. Orderings beyond ``max_orderings`` are sampled with a fixed seed.
        """
        terms = list(dict.fromkeys(terminals))
        if not terms:
            raise ArchError("steiner_trees needs at least one terminal")
        blocked_set = set(blocked)
        if blocked_set & set(terms):
            return []
        b = self.bounds
        if math.factorial(len(terms)) <= b.max_orderings:
            orderings = itertools.permutations(terms)
        else:
            rng = random.Random(0)
            orderings = (tuple(rng.sample(terms, len(terms))) for _ in range(b.max_orderings))
        found: set[frozenset[int]] = set()
        tset = set(terms)
        for order in orderings:
            tree = {order[0]}
            ok = True
            for t in order[1:]:
                path = self._bfs_path_to_tree(tree, t, blocked_set)
                if path is None:
                    ok = False
                    break
                tree.update(path)
            if not ok:
                return []
            found.add(frozenset(self._prune(tree, tset)))
        ranked = sorted((tuple(sorted(s)) for s in found), key=lambda s: (len(s), s))
        return ranked[: b.max_trees]


def parse_arch(text: str | dict, arch_decl: dict | None = None) -> ArchGraph:
    """Load an arch JSON object; ``arch_decl`` maps declared ArchInfo field names to types."""
    data = json.loads(text) if isinstance(text, str) else text
    if not isinstance(data, dict) or "n" not in data:
        raise ArchError("arch JSON must be an object with an 'n' entry")
    arch = ArchGraph.build(
        int(data["n"]),
        data.get("edges", []),
        data.get("vertex_labels") or {},
        data.get("fields") or {},
    )
    if arch_decl:
        validate_arch_fields(arch, arch_decl)
    return arch


def validate_arch_fields(arch: ArchGraph, arch_decl: dict) -> None:
    """Check that every declared ArchInfo field is present with the declared type."""
    from .marol.types import check_json_value

    for name, ty in arch_decl.items():
        if name in arch.fields:
            value = arch.fields[name]
        elif name in arch.vertex_labels:
            value = arch.vertex_labels[name]
        else:
            raise ArchError(f"arch is missing field '{name}' declared in ArchInfo")
        problem = check_json_value(value, ty)
        if problem:
            raise ArchError(f"arch field '{name}': {problem}")


# -- grid helpers (row-major) ------------------------------------------------

def to_2d(l: int, width: int) -> tuple[int, int]:
    if width <= 0 or l < 0:
        raise ArchError(f"to_2d({l}, {width}) out of range")
    return divmod(l, width)


def horizontal_neighbors(l: int, width: int) -> list[int]:
    row, col = to_2d(l, width)
    out = []
    if col > 0:
        out.append(l - 1)
    if col < width - 1:
        out.append(l + 1)
    return out


def vertical_neighbors(l: int, width: int, height: int) -> list[int]:
    if height <= 0 or l >= width * height:
        raise ArchError(f"vertical_neighbors({l}, {width}, {height}) out of range")
    row, col = to_2d(l, width)
    out = []
    if row > 0:
        out.append(l - width)
    if row < height - 1:
        out.append(l + width)
    return out
