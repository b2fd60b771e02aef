"""Circuits as indexed instruction sequences with their dependency DAG."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


class CircuitParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Instruction:
    index: int
    gate: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if not self.qubits:
            raise ValueError("instruction acts on no qubits")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubit in {self.gate} {list(self.qubits)}")

    def __str__(self) -> str:
        return f"{self.gate} " + " ".join(str(q) for q in self.qubits)


@dataclass(frozen=True)
class Circuit:
    """An immutable circuit.

    Only the wire-adjacent dependency edges are stored (each instruction points
    at the previous instruction on each of its qubits). Their transitive
    closure is exactly the dependency order, so front layers and longest
    chains are unaffected.
    """

    instructions: tuple[Instruction, ...]
    predecessors: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())
    successors: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())

    @classmethod
    def from_instructions(cls, instrs: Iterable[tuple[str, Iterable[int]]]) -> "Circuit":
        built = tuple(
            Instruction(i, gate.lower(), tuple(qs)) for i, (gate, qs) in enumerate(instrs)
        )
        last_on_wire: dict[int, int] = {}
        preds: list[tuple[int, ...]] = []
        succs: list[list[int]] = [[] for _ in built]
        for ins in built:
            p = sorted({last_on_wire[q] for q in ins.qubits if q in last_on_wire})
            preds.append(tuple(p))
            for j in p:
                succs[j].append(ins.index)
            for q in ins.qubits:
                last_on_wire[q] = ins.index
        return cls(built, tuple(preds), tuple(tuple(s) for s in succs))

    def __len__(self) -> int:
        return len(self.instructions)

    def __getitem__(self, i: int) -> Instruction:
        return self.instructions[i]

    @property
    def qubits(self) -> list[int]:
        return sorted({q for ins in self.instructions for q in ins.qubits})

    @property
    def qubit_count(self) -> int:
        return len(self.qubits)

    def depends_directly(self, i: int, j: int) -> bool:
        """Direct dependency in the definitional sense: i < j and shared qubits."""
        return i < j and bool(set(self.instructions[i].qubits) & set(self.instructions[j].qubits))

    def to_text(self) -> str:
        return "".join(str(ins) + "\n" for ins in self.instructions)


def parse_circuit(text: str) -> Circuit:
    """Parse the line format ``<gate> <qubit> [<qubit> ...]`` with ``#`` comments."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        gate, args = parts[0], parts[1:]
        if not args:
            raise CircuitParseError(f"instruction '{gate}' has no qubits", lineno)
        try:
            qubits = [int(a) for a in args]
        except ValueError:
            raise CircuitParseError(f"bad qubit id in '{line}'", lineno) from None
        if any(q < 0 for q in qubits):
            raise CircuitParseError("qubit ids must be non-negative", lineno)
        if len(set(qubits)) != len(qubits):
            raise CircuitParseError(f"duplicate qubit in '{line}'", lineno)
        rows.append((gate, qubits))
    return Circuit.from_instructions(rows)


def front_layer(circuit: Circuit, removed: set[int] | frozenset[int]) -> list[Instruction]:
    """Remaining instructions whose predecessors have all been removed, in index order."""
    return [
        ins
        for ins in circuit.instructions
        if ins.index not in removed and all(p in removed for p in circuit.predecessors[ins.index])
    ]


def criticality(circuit: Circuit) -> dict[int, int]:
    """Length of the longest dependency chain starting at each instruction (itself included)."""
    crit: dict[int, int] = {}
    for ins in reversed(circuit.instructions):
        succ = circuit.successors[ins.index]
        crit[ins.index] = 1 + max((crit[s] for s in succ), default=0)
    return crit


def interaction_edges(circuit: Circuit) -> list[tuple[int, int]]:
    """Qubit pairs touched by multi-qubit instructions, in order of first appearance."""
    seen: set[tuple[int, int]] = set()
    out = []
    for ins in circuit.instructions:
        qs = ins.qubits
        for a in range(len(qs)):
            for b in range(a + 1, len(qs)):
                e = (min(qs[a], qs[b]), max(qs[a], qs[b]))
                if e not in seen:
                    seen.add(e)
                    out.append(e)
    return out
