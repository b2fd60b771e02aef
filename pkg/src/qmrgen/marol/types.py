"""Marol types, type variables for per-call-site instantiation, and unification."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any


class Type:
    pass


@dataclass(frozen=True)
class TBase(Type):
    name: str

    def __str__(self) -> str:
        return "Qubit -> Loc" if self.name == "QubitMap" else self.name


@dataclass(frozen=True)
class TList(Type):
    elem: Type

    def __str__(self) -> str:
        return f"List[{self.elem}]"


@dataclass(frozen=True)
class TPair(Type):
    first: Type
    second: Type

    def __str__(self) -> str:
        return f"({self.first}, {self.second})"


@dataclass(frozen=True)
class TFun(Type):
    params: tuple[Type, ...]
    ret: Type

    def __str__(self) -> str:
        ps = ", ".join(str(p) for p in self.params)
        return f"({ps}) -> {self.ret}"


@dataclass(frozen=True)
class TStruct(Type):
    name: str

    def __str__(self) -> str:
        return self.name


_var_ids = itertools.count()


@dataclass(eq=False)
class TVar(Type):
    """A unification variable; ``numeric`` ones only bind to Int or Float."""

    numeric: bool = False
    ref: Type | None = None

    def __post_init__(self):
        self.id = next(_var_ids)

    def __str__(self) -> str:
        r = resolve(self)
        if r is not self:
            return str(r)
        return "?" if not self.numeric else "Number"


LOC = TBase("Loc")
INT = TBase("Int")
FLOAT = TBase("Float")
BOOL = TBase("Bool")
STRING = TBase("String")
ARCH = TBase("ArchT")
INSTR = TBase("InstrT")
QUBIT = TBase("Qubit")
STATE = TBase("StateT")
ROUTE = TBase("Route")
QUBITMAP = TBase("QubitMap")
REALIZATION = TStruct("GateRealization")
TRANSITION = TStruct("Transition")

BASE_NAMES = {
    "Loc": LOC,
    "Int": INT,
    "Float": FLOAT,
    "Bool": BOOL,
    "String": STRING,
    "ArchT": ARCH,
    "InstrT": INSTR,
    "Qubit": QUBIT,
    "StateT": STATE,
    "Route": ROUTE,
    "QubitMap": QUBITMAP,
}


def resolve(t: Type) -> Type:
    while isinstance(t, TVar) and t.ref is not None:
        t = t.ref
    return t


def zonk(t: Type) -> Type:
    """Fully substitute solved variables."""
    t = resolve(t)
    if isinstance(t, TList):
        return TList(zonk(t.elem))
    if isinstance(t, TPair):
        return TPair(zonk(t.first), zonk(t.second))
    if isinstance(t, TFun):
        return TFun(tuple(zonk(p) for p in t.params), zonk(t.ret))
    return t


def _occurs(v: TVar, t: Type) -> bool:
    t = resolve(t)
    if t is v:
        return True
    if isinstance(t, TList):
        return _occurs(v, t.elem)
    if isinstance(t, TPair):
        return _occurs(v, t.first) or _occurs(v, t.second)
    if isinstance(t, TFun):
        return any(_occurs(v, p) for p in t.params) or _occurs(v, t.ret)
    return False


def unify(a: Type, b: Type) -> bool:
    a, b = resolve(a), resolve(b)
    if a is b:
        return True
    if isinstance(a, TVar) and isinstance(b, TVar):
        b.numeric = b.numeric or a.numeric
        a.ref = b
        return True
    if isinstance(b, TVar):
        a, b = b, a
    if isinstance(a, TVar):
        if a.numeric and b not in (INT, FLOAT):
            return False
        if _occurs(a, b):
            return False
        a.ref = b
        return True
    if isinstance(a, TBase) and isinstance(b, TBase):
        return a.name == b.name
    if isinstance(a, TStruct) and isinstance(b, TStruct):
        return a.name == b.name
    if isinstance(a, TList) and isinstance(b, TList):
        return unify(a.elem, b.elem)
    if isinstance(a, TPair) and isinstance(b, TPair):
        return unify(a.first, b.first) and unify(a.second, b.second)
    if isinstance(a, TFun) and isinstance(b, TFun):
        return len(a.params) == len(b.params) and all(
            unify(x, y) for x, y in zip(a.params, b.params)
        ) and unify(a.ret, b.ret)
    return False


def check_json_value(value: Any, ty: Type) -> str | None:
    """Return a description of the mismatch between JSON data and a declared type, or None."""
    ty = resolve(ty)
    if ty in (INT, LOC, QUBIT):
        if isinstance(value, bool) or not isinstance(value, int):
            return f"expected {ty}, found {value!r}"
        if ty in (LOC, QUBIT) and value < 0:
            return f"expected {ty}, found negative {value}"
        return None
    if ty == FLOAT:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return f"expected Float, found {value!r}"
        return None
    if ty == BOOL:
        return None if isinstance(value, bool) else f"expected Bool, found {value!r}"
    if ty == STRING:
        return None if isinstance(value, str) else f"expected String, found {value!r}"
    if isinstance(ty, TList):
        if not isinstance(value, list):
            return f"expected {ty}, found {type(value).__name__}"
        for i, v in enumerate(value):
            p = check_json_value(v, ty.elem)
            if p:
                return f"[{i}]: {p}"
        return None
    if isinstance(ty, TPair):
        if not isinstance(value, list) or len(value) != 2:
            return f"expected {ty}, found {value!r}"
        return check_json_value(value[0], ty.first) or check_json_value(value[1], ty.second)
    return f"type {ty} cannot be supplied as arch data"
