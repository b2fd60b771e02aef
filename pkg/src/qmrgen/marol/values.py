"""Runtime values of the Marol evaluator and their JSON encoding.

Locations and qubits are plain ints, lists and pairs are tuples, and strings
and numbers are Python scalars. Struct instances, qubit maps, route entries,
states and the identity transition get small immutable classes below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .types import (
    BOOL, FLOAT, INT, LOC, QUBIT, STRING, TList, TPair, TStruct, Type, resolve,
)


class MarolRuntimeError(Exception):
    """Evaluation got stuck; ``op`` names the failing operation."""

    def __init__(self, op: str, message: str):
        self.op = op
        super().__init__(f"{op}: {message}")


@dataclass(frozen=True)
class StructValue:
    name: str
    fields: tuple[tuple[str, Any], ...]

    def get(self, key: str) -> Any:
        for k, v in self.fields:
            if k == key:
                return v
        raise MarolRuntimeError("field access", f"{self.name} has no field '{key}'")

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.fields)
        return f"{self.name}{{{inner}}}"


class _IdTrans:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "IdTrans"

    def __reduce__(self):
        return (_IdTrans, ())


IdTrans = _IdTrans()


class QubitMap:
    """Immutable injective map from circuit qubits to locations."""

    __slots__ = ("_fwd", "_inv", "_hash")

    def __init__(self, mapping: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        fwd = dict(mapping)
        inv = {}
        for q, l in fwd.items():
            if l in inv:
                raise ValueError(f"qubit map is not injective: qubits {inv[l]} and {q} both at location {l}")
            inv[l] = q
        self._fwd = fwd
        self._inv = inv
        self._hash = None

    @classmethod
    def _raw(cls, fwd: dict[int, int], inv: dict[int, int]) -> "QubitMap":
        m = cls.__new__(cls)
        m._fwd, m._inv, m._hash = fwd, inv, None
        return m

    def __getitem__(self, q: int) -> int:
        try:
            return self._fwd[q]
        except KeyError:
            raise MarolRuntimeError("map lookup", f"qubit {q} is not mapped") from None

    def get(self, q: int, default=None):
        return self._fwd.get(q, default)

    def __contains__(self, q: int) -> bool:
        return q in self._fwd

    def __len__(self) -> int:
        return len(self._fwd)

    def items(self):
        return sorted(self._fwd.items())

    def qubit_at(self, l: int) -> int | None:
        return self._inv.get(l)

    def locations(self) -> list[int]:
        return sorted(self._inv)

    def as_dict(self) -> dict[int, int]:
        return dict(self._fwd)

    def value_swap(self, l1: int, l2: int) -> "QubitMap":
        """Exchange whatever sits at ``l1`` and ``l2``; a qubit moves into an empty location."""
        q1, q2 = self._inv.get(l1), self._inv.get(l2)
        if (q1 is None and q2 is None) or l1 == l2:
            return self
        fwd, inv = dict(self._fwd), dict(self._inv)
        inv.pop(l1, None)
        inv.pop(l2, None)
        if q1 is not None:
            fwd[q1] = l2
            inv[l2] = q1
        if q2 is not None:
            fwd[q2] = l1
            inv[l1] = q2
        return QubitMap._raw(fwd, inv)

    def key(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self._fwd.items()))

    def __eq__(self, other) -> bool:
        return isinstance(other, QubitMap) and self._fwd == other._fwd

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._fwd.items()))
        return self._hash

    def __repr__(self) -> str:
        return "QubitMap{" + ", ".join(f"q{q}->{l}" for q, l in self.items()) + "}"

    def __reduce__(self):
        return (QubitMap, (self._fwd,))


@dataclass(frozen=True)
class RouteEntry:
    """One element of ``State.route``: a routed instruction with its realization."""

    instr: Any  # circuit.Instruction
    realization: StructValue

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.instr.qubits

    @property
    def gate_type(self) -> str:
        return self.instr.gate


@dataclass(frozen=True)
class StateValue:
    map: QubitMap
    route: tuple[RouteEntry, ...]


# -- JSON ----------------------------------------------------------------------

def to_json(v: Any) -> Any:
    if v is IdTrans:
        return "id"
    if isinstance(v, StructValue):
        out = {"$struct": v.name}
        for k, x in v.fields:
            out[k] = to_json(x)
        return out
    if isinstance(v, tuple):
        return [to_json(x) for x in v]
    if isinstance(v, QubitMap):
        return {str(q): l for q, l in v.items()}
    return v


class ValueDecodeError(ValueError):
    pass


def from_json(data: Any, ty: Type, structs: Mapping[str, Mapping[str, Type]]) -> Any:
    """Decode JSON produced by ``to_json`` back into a value of type ``ty``."""
    ty = resolve(ty)
    if isinstance(ty, TStruct):
        if ty.name == "Transition" and data == "id":
            return IdTrans
        if not isinstance(data, dict) or data.get("$struct") != ty.name:
            raise ValueDecodeError(f"expected a {ty.name} object, found {data!r}")
        decl = structs[ty.name]
        keys = set(data) - {"$struct"}
        if keys != set(decl):
            raise ValueDecodeError(f"{ty.name} fields {sorted(keys)} do not match declaration {sorted(decl)}")
        return StructValue(ty.name, tuple((k, from_json(data[k], t, structs)) for k, t in decl.items()))
    if isinstance(ty, TList):
        if not isinstance(data, list):
            raise ValueDecodeError(f"expected a list, found {data!r}")
        return tuple(from_json(x, ty.elem, structs) for x in data)
    if isinstance(ty, TPair):
        if not isinstance(data, list) or len(data) != 2:
            raise ValueDecodeError(f"expected a pair, found {data!r}")
        return (from_json(data[0], ty.first, structs), from_json(data[1], ty.second, structs))
    if ty in (INT, LOC, QUBIT):
        if isinstance(data, bool) or not isinstance(data, int):
            raise ValueDecodeError(f"expected an integer, found {data!r}")
        return data
    if ty == FLOAT:
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            raise ValueDecodeError(f"expected a number, found {data!r}")
        return float(data)
    if ty == BOOL:
        if not isinstance(data, bool):
            raise ValueDecodeError(f"expected a boolean, found {data!r}")
        return data
    if ty == STRING:
        if not isinstance(data, str):
            raise ValueDecodeError(f"expected a string, found {data!r}")
        return data
    raise ValueDecodeError(f"values of type {ty} have no JSON form")


def arch_field_value(data: Any, ty: Type) -> Any:
    """Convert validated arch JSON data into a runtime value (lists become tuples)."""
    ty = resolve(ty)
    if isinstance(ty, (TList, TPair)):
        sub = (lambda i: ty.elem) if isinstance(ty, TList) else (lambda i: (ty.first, ty.second)[i])
        return tuple(arch_field_value(x, sub(i)) for i, x in enumerate(data))
    if ty == FLOAT:
        return float(data)
    return data
