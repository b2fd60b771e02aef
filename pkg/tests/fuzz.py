"""Random instance generators shared by the property and acceptance tests."""

from __future__ import annotations

import random

from qmrgen.circuit import Circuit
from qmrgen.problems import gen_arch, with_ve_errors

SINGLE_QUBIT = ("h", "t", "s", "x")


def random_connected_arch(rng: random.Random, n: int, extra: float = 0.3) -> dict:
    """Random spanning tree plus each remaining pair with probability ``extra``."""
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for k in range(1, n):
        u, v = order[k], order[rng.randrange(k)]
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < extra:
                edges.add((u, v))
    return {"n": n, "edges": sorted([list(e) for e in edges]), "vertex_labels": {}, "fields": {}}


def random_circuit(rng: random.Random, n_qubits: int, n_gates: int, two_qubit: tuple[str, ...] = ("cx",),
                   single: tuple[str, ...] = SINGLE_QUBIT, p_single: float = 0.3) -> Circuit:
    instrs = []
    for _ in range(n_gates):
        if n_qubits >= 2 and rng.random() >= p_single:
            a, b = rng.sample(range(n_qubits), 2)
            instrs.append((rng.choice(two_qubit), (a, b)))
        else:
            instrs.append((rng.choice(single), (rng.randrange(n_qubits),)))
    return Circuit.from_instructions(instrs)


def fuzz_instance(rng: random.Random, program: str) -> tuple[dict, Circuit, dict | None]:
    """(arch JSON, circuit, VE error rates or None) for one of the built-in programs."""
    if program in ("nisqmr", "nisq_ve"):
        n = rng.randint(2, 7)
        arch = random_connected_arch(rng, n)
        q = rng.randint(2, n) if n >= 2 else 1
        circ = random_circuit(rng, q, rng.randint(0, 10))
        rates = None
        if program == "nisq_ve":
            arch, rates = with_ve_errors(arch, rng.randrange(2**31))
        return arch, circ, rates
    kind = rng.choice(("grid", "compact", "magic"))
    if kind == "grid":
        arch = gen_arch("grid", rng.randint(2, 4), rng.randint(2, 4))
        locs = arch["n"]
        q = rng.randint(1, max(1, locs // 3))
        # plain grids have no magic states, so T gates would never route
        circ = random_circuit(rng, q, rng.randint(0, 6), single=("h", "s"))
    elif kind == "compact":
        q = rng.randint(1, 5)
        arch = gen_arch("compact", q)
        circ = random_circuit(rng, q, rng.randint(0, 6), single=("h", "t", "s"))
    else:
        w, h = rng.randint(1, 3), rng.randint(2, 3)
        arch = gen_arch("compact_magic_column", w, h)
        q = rng.randint(1, max(1, (w * h) // 2))
        circ = random_circuit(rng, q, rng.randint(0, 6), single=("h", "t"))
    return arch, circ, None
