"""Loaded Marol programs: parse, typecheck, compile, and call the definitions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from ..archgraph import ArchGraph, parse_arch, validate_arch_fields
from . import syntax as S
from .evaluator import DEFAULT_FUEL, ArchValue, Fuel, compile_expr
from .typecheck import TypedProgram, typecheck
from .types import TRANSITION, REALIZATION
from .values import (
    IdTrans, MarolRuntimeError, QubitMap, RouteEntry, StateValue, StructValue,
    arch_field_value, from_json, to_json,
)


def analyze_noninterference(ast: S.ProgramAST) -> bool:
    """True when realize_gate reads nothing of State except ``State.map``.

    Any other use of State (``State.route`` in particular, even in a dead
    branch) classifies the program as interfering; this over-approximates
    the semantic property, so a True answer is always safe.
    """
    uses = 0
    map_reads = 0
    for node in S.walk(ast.route.realize_gate):
        if isinstance(node, S.Const) and node.name == "State":
            uses += 1
        elif (isinstance(node, S.Field) and node.name == "map"
              and isinstance(node.obj, S.Const) and node.obj.name == "State"):
            map_reads += 1
    return uses == map_reads


@dataclass
class MarolProgram:
    source: str
    ast: S.ProgramAST
    typed: TypedProgram
    name: str = ""
    fuel_limit: int = DEFAULT_FUEL
    _fuel: Fuel = field(init=False, repr=False)

    def __post_init__(self):
        self._fuel = Fuel(self.fuel_limit)
        f = self._fuel
        ast = self.ast
        self._realize = compile_expr(self.typed, ast.route.realize_gate, f)
        self._transitions = compile_expr(self.typed, ast.transition.get_transitions, f)
        self._apply = compile_expr(self.typed, ast.transition.apply, f)
        self._cost = compile_expr(self.typed, ast.transition.cost, f)
        self._locations = None
        if ast.arch is not None and ast.arch.get_locations is not None:
            self._locations = compile_expr(self.typed, ast.arch.get_locations, f)
        self._state_cost = None
        if ast.state is not None:
            self._state_cost = compile_expr(self.typed, ast.state.cost, f)
        self.routed_gates = frozenset(ast.route.routed_gates)
        self.noninterfering = analyze_noninterference(ast)

    def __getstate__(self):
        return {"source": self.source, "name": self.name, "fuel_limit": self.fuel_limit}

    def __setstate__(self, state):
        other = load_program(state["source"], name=state["name"], fuel_limit=state["fuel_limit"])
        self.__dict__.update(other.__dict__)

    # -- declarations --------------------------------------------------------

    @property
    def arch_decl(self) -> dict:
        return self.typed.structs["Arch"]

    @property
    def has_state_cost(self) -> bool:
        return self._state_cost is not None

    def bind_arch(self, arch: ArchGraph | str | dict) -> ArchValue:
        """Validate an arch against the ArchInfo declaration and build its runtime value."""
        if not isinstance(arch, ArchGraph):
            arch = parse_arch(arch, self.arch_decl)
        else:
            validate_arch_fields(arch, self.arch_decl)
        values = {}
        for name, ty in self.arch_decl.items():
            raw = arch.fields[name] if name in arch.fields else arch.vertex_labels[name]
            values[name] = arch_field_value(raw, ty)
        return ArchValue(arch, values)

    # -- calls -----------------------------------------------------------------

    def _run(self, fn, ctx: dict) -> Any:
        self._fuel.left = self.fuel_limit
        return fn(ctx)

    def realize_gate(self, arch: ArchValue, state: StateValue, instr) -> tuple[StructValue, ...]:
        return self._run(self._realize, {"Arch": arch, "State": state, "Instr": instr})

    def get_transitions(self, arch: ArchValue, state: StateValue) -> tuple:
        """Program transitions with IdTrans prepended (it is always available)."""
        ts = self._run(self._transitions, {"Arch": arch, "State": state})
        return (IdTrans,) + tuple(t for t in ts if t is not IdTrans)

    def apply(self, trans, qmap: QubitMap, arch: ArchValue) -> QubitMap:
        if trans is IdTrans:
            return qmap
        out = self._run(self._apply, {"Trans": trans, "QubitMap": qmap, "Arch": arch})
        if len(out) != len(qmap):
            raise MarolRuntimeError("apply", "transition changed the set of mapped qubits")
        return out

    def cost(self, trans, arch: ArchValue) -> float:
        c = float(self._run(self._cost, {"Trans": trans, "Arch": arch}))
        if math.isnan(c) or c < 0:
            raise MarolRuntimeError("cost", f"transition cost must be finite and non-negative, got {c}")
        return c

    def state_cost(self, state: StateValue, arch: ArchValue) -> float:
        if self._state_cost is None:
            return 0.0
        c = float(self._run(self._state_cost, {"State": state, "Arch": arch}))
        if math.isnan(c) or c < 0:
            raise MarolRuntimeError("state cost", f"state cost must be finite and non-negative, got {c}")
        return c

    def locations(self, arch: ArchValue) -> list[int]:
        if self._locations is None:
            return list(range(arch.graph.n))
        locs = self._run(self._locations, {"Arch": arch})
        for l in locs:
            if not 0 <= l < arch.graph.n:
                raise MarolRuntimeError("get_locations", f"location {l} is not an arch vertex")
        return sorted(set(locs))

    # -- value JSON --------------------------------------------------------------

    def realization_to_json(self, v: StructValue) -> Any:
        return to_json(v)

    def realization_from_json(self, data: Any) -> StructValue:
        return from_json(data, REALIZATION, self.typed.structs)

    def transition_to_json(self, v) -> Any:
        return to_json(v)

    def transition_from_json(self, data: Any):
        return from_json(data, TRANSITION, self.typed.structs)

    def pretty(self) -> str:
        return S.pretty_program(self.ast)


def make_state(qmap: QubitMap, routes: Sequence[RouteEntry] = ()) -> StateValue:
    return StateValue(qmap, tuple(routes))


def load_program(source: str, name: str = "", fuel_limit: int = DEFAULT_FUEL) -> MarolProgram:
    """Parse, typecheck and compile Marol source.

    Raises ``MarolSyntaxError`` or ``MarolTypeError``.
    """
    ast = S.parse_program(source)
    typed = typecheck(ast)
    return MarolProgram(source, ast, typed, name=name, fuel_limit=fuel_limit)


def evaluate(text: str, env: dict[str, Any] | None = None,
             structs: dict[str, dict] | None = None, fuel_limit: int = DEFAULT_FUEL) -> Any:
    """Typecheck and evaluate a standalone expression.

    ``env`` binds implicit names (Arch, State, Instr, Trans, QubitMap) to runtime
    values; their types are fixed by the language. ``structs`` gives the field
    types of GateRealization, Transition and Arch when the expression needs them.
    """
    from .typecheck import Checker, MarolTypeError, TypeErrorInfo, _Fail

    env = dict(env or {})
    structs = {"GateRealization": {}, "Transition": {}, "Arch": {}, **(structs or {})}
    e = S.parse_expr(text)
    checker = Checker(structs)
    checker.consts = tuple(env)
    try:
        checker.infer(e, {})
    except _Fail as f:
        raise MarolTypeError([TypeErrorInfo(f.span, f.message, "expression")]) from None
    typed = TypedProgram(None, structs, checker.types)
    return compile_expr(typed, e, Fuel(fuel_limit))(env)
