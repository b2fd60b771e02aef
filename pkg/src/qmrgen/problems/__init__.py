"""Built-in Marol problem definitions and arch generators."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any

from ..archgraph import ArchGraph, parse_arch
from ..marol.program import MarolProgram, load_program

NAMES = ("nisqmr", "nisq_ve", "scmr")


@dataclass(frozen=True)
class ProblemBundle:
    name: str
    source: str
    arch_kind: str
    noninterfering: bool
    doc: str

    def load(self) -> MarolProgram:
        return load_program(self.source, name=self.name)


@lru_cache(maxsize=None)
def _manifest() -> dict:
    return json.loads(resources.files(__name__).joinpath("manifest.json").read_text())


def builtin(name: str) -> ProblemBundle:
    entry = _manifest().get(name)
    if entry is None:
        raise KeyError(f"unknown built-in problem '{name}' (known: {', '.join(NAMES)})")
    source = resources.files(__name__).joinpath(entry["file"]).read_text()
    return ProblemBundle(name, source, entry["arch"], entry["noninterfering"], entry["doc"])


@lru_cache(maxsize=None)
def load_builtin(name: str) -> MarolProgram:
    return builtin(name).load()


# -- arch generators -------------------------------------------------------------

def _grid_edges(width: int, height: int) -> list[list[int]]:
    edges = []
    for r in range(height):
        for c in range(width):
            v = r * width + c
            if c + 1 < width:
                edges.append([v, v + 1])
            if r + 1 < height:
                edges.append([v, v + width])
    return edges


def _grid_json(width: int, height: int, magic: list[bool], mapping: list[bool]) -> dict:
    return {
        "n": width * height,
        "edges": _grid_edges(width, height),
        "vertex_labels": {"magic_state": magic, "map_location": mapping},
        "fields": {"width": width, "height": height},
    }


def gen_arch(kind: str, *params: int) -> dict:
    """Arch JSON for ``line(n)``, ``grid(w, h)``, ``compact(n)`` or ``compact_magic_column(w, h)``.

    Grids are row-major. ``compact(n)`` is three rows high: map locations at the
    even inner columns of the top and bottom rows, a routing row between them,
    and magic-state columns on the left and right edges.
    ``compact_magic_column(w, h)`` is a w-by-h grid of map locations with one
    extra column of magic states on the right.
    """
    if any((not isinstance(p, int)) or p <= 0 for p in params):
        raise ValueError(f"{kind} parameters must be positive integers, got {params}")
    if kind == "line":
        (n,) = params
        return {"n": n, "edges": [[i, i + 1] for i in range(n - 1)], "vertex_labels": {}, "fields": {}}
    if kind == "grid":
        w, h = params
        n = w * h
        return _grid_json(w, h, [False] * n, [True] * n)
    if kind == "compact":
        (n,) = params
        k = math.ceil(n / 2)
        w, h = 2 * k + 3, 3
        magic = [False] * (w * h)
        mapping = [False] * (w * h)
        for r in range(h):
            magic[r * w] = magic[r * w + w - 1] = True
        slots = [r * w + c for r in (0, 2) for c in range(2, 2 * k + 1, 2)]
        for v in slots[:n]:
            mapping[v] = True
        return _grid_json(w, h, magic, mapping)
    if kind == "compact_magic_column":
        w, h = params
        width = w + 1
        magic = [False] * (width * h)
        mapping = [False] * (width * h)
        for r in range(h):
            for c in range(width):
                if c == w:
                    magic[r * width + c] = True
                else:
                    mapping[r * width + c] = True
        return _grid_json(width, h, magic, mapping)
    raise ValueError(f"unknown arch kind '{kind}' (line, grid, compact, compact_magic_column)")


def gen_ve_errors(arch: ArchGraph | dict, seed: int) -> tuple[list[list[float]], dict[tuple[int, int], float]]:
    """Sample an error rate p ~ U[1e-3, 1e-1] per edge; cost matrix entries are -log(1 - p).

    Returns the symmetric ``edge_cost`` matrix (0 off the edges) and the rates by edge.
    """
    g = arch if isinstance(arch, ArchGraph) else parse_arch(arch)
    rng = random.Random(seed)
    cost = [[0.0] * g.n for _ in range(g.n)]
    rates = {}
    for u, v in g.edge_list():
        p = rng.uniform(1e-3, 1e-1)
        rates[(u, v)] = p
        cost[u][v] = cost[v][u] = -math.log1p(-p)
    return cost, rates


def with_ve_errors(arch: dict, seed: int) -> tuple[dict, dict[tuple[int, int], float]]:
    """Copy of an arch JSON with an ``edge_cost`` field sampled by gen_ve_errors."""
    cost, rates = gen_ve_errors(arch, seed)
    out: dict[str, Any] = dict(arch)
    out["fields"] = {**arch.get("fields", {}), "edge_cost": cost}
    return out, rates
