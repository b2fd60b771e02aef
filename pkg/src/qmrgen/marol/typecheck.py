"""Static typing of Marol programs.

Library functions are polymorphic only through fresh type variables created
at each call site; lambdas passed to them are checked against the parameter
types the signature expects, so ``map(|x| -> x.qubits, State.route)`` types
``x`` as ``Route`` without annotations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax as S
from .types import (
    ARCH, BOOL, FLOAT, INSTR, INT, LOC, QUBIT, QUBITMAP, REALIZATION, ROUTE,
    STATE, STRING, TRANSITION, TFun, TList, TPair, TStruct, TVar, Type,
    resolve, unify, zonk,
)


@dataclass
class TypeErrorInfo:
    span: S.Span
    message: str
    definition: str = ""

    def __str__(self) -> str:
        where = f"{self.definition}: " if self.definition else ""
        return f"{self.span}: {where}{self.message}"


class MarolTypeError(Exception):
    def __init__(self, errors: list[TypeErrorInfo]):
        self.errors = errors
        super().__init__("\n".join(str(e) for e in errors))


class _Fail(Exception):
    def __init__(self, span: S.Span, message: str):
        self.span, self.message = span, message


def _sig(name: str) -> tuple[tuple[Type, ...], Type]:
    a, b = TVar(), TVar()
    la = TList(a)
    locs = TList(LOC)
    table = {
        "push": ((la, a), la),
        "concat": ((la, la), la),
        "contains": ((la, a), BOOL),
        "combinations": ((la, INT), TList(la)),
        "map": ((TFun((a,), b), la), TList(b)),
        "fold": ((b, TFun((b, a), b), la), b),
        "len": ((la,), INT),
        "edges": ((ARCH,), TList(TPair(LOC, LOC))),
        "edges_between": ((ARCH, LOC, LOC), TList(TPair(LOC, LOC))),
        "all_paths": ((ARCH, locs, locs, locs), TList(locs)),
        "steiner_trees": ((ARCH, locs, locs), TList(locs)),
        "vertices": ((ARCH,), locs),
        "qubits": ((INSTR,), TList(QUBIT)),
        "gate_type": ((INSTR,), STRING),
        "horizontal_neighbors": ((LOC, INT), locs),
        "vertical_neighbors": ((LOC, INT, INT), locs),
        "to_2d": ((LOC, INT), TPair(INT, INT)),
        "value_swap": ((QUBITMAP, LOC, LOC), QUBITMAP),
        "mapped_locations": ((QUBITMAP,), locs),
    }
    return table[name]


CONST_TYPES = {
    "Arch": ARCH, "Instr": INSTR, "State": STATE, "Trans": TRANSITION,
    "QubitMap": QUBITMAP, "IdTrans": TRANSITION,
}

STATE_FIELDS = {"map": QUBITMAP, "route": TList(ROUTE)}
INSTR_FIELDS = {"qubits": TList(QUBIT), "gate_type": STRING}
ROUTE_FIELDS = {"instr": INSTR, "qubits": TList(QUBIT), "gate_type": STRING, "realization": REALIZATION}

# implicit constants in scope for each definition, and its result type
DEFINITION_ENVS = {
    "realize_gate": (("Arch", "State", "Instr"), TList(REALIZATION)),
    "get_transitions": (("Arch", "State"), TList(TRANSITION)),
    "apply": (("Trans", "QubitMap", "Arch"), QUBITMAP),
    "cost": (("Trans", "Arch"), FLOAT),
    "get_locations": (("Arch",), TList(LOC)),
    "state_cost": (("State", "Arch"), FLOAT),
}


def show(t: Type) -> str:
    return str(zonk(t))


class Checker:
    def __init__(self, structs: dict[str, dict[str, Type]]):
        # structs: GateRealization / Transition / Arch -> field types
        self.structs = structs
        self.types: dict[int, Type] = {}

    def check_definition(self, name: str, expr: S.Expr) -> None:
        consts, result = DEFINITION_ENVS[name]
        self.consts = consts
        t = self.infer(expr, {})
        if not unify(t, result):
            raise _Fail(expr.span, f"expected {result}, found {show(t)}")

    def _record(self, e: S.Expr, t: Type) -> Type:
        self.types[id(e)] = t
        return t

    def expect(self, e: S.Expr, want: Type, scope) -> Type:
        t = self.infer(e, scope)
        if not unify(t, want):
            raise _Fail(e.span, f"expected {show(want)}, found {show(t)}")
        return t

    def infer(self, e: S.Expr, scope: dict[str, Type]) -> Type:
        return self._record(e, self._infer(e, scope))

    def _infer(self, e: S.Expr, scope: dict[str, Type]) -> Type:
        if isinstance(e, S.Num):
            return FLOAT if isinstance(e.value, float) else INT
        if isinstance(e, S.BoolLit):
            return BOOL
        if isinstance(e, S.Str):
            return STRING
        if isinstance(e, S.Var):
            if e.name not in scope:
                raise _Fail(e.span, f"unbound variable '{e.name}'")
            return scope[e.name]
        if isinstance(e, S.Const):
            if e.name != "IdTrans" and e.name not in self.consts:
                raise _Fail(e.span, f"'{e.name}' is not available here (in scope: {', '.join(self.consts)})")
            return CONST_TYPES[e.name]
        if isinstance(e, S.Field):
            return self._field(e, scope)
        if isinstance(e, S.Proj):
            t = resolve(self.infer(e.obj, scope))
            if isinstance(t, TVar):
                a, b = TVar(), TVar()
                unify(t, TPair(a, b))
                t = resolve(t)
            if not isinstance(t, TPair):
                raise _Fail(e.span, f"projection .({e.index}) expects a pair, found {show(t)}")
            return t.first if e.index == 0 else t.second
        if isinstance(e, S.Index):
            t = resolve(self.infer(e.obj, scope))
            if isinstance(t, TVar):
                unify(t, TList(TVar()))
                t = resolve(t)
            if t == QUBITMAP:
                it = resolve(self.infer(e.index, scope))
                if not (unify(it, QUBIT) or it == INT):
                    raise _Fail(e.index.span, f"qubit map index must be Qubit, found {show(it)}")
                return LOC
            if isinstance(t, TList):
                it = resolve(self.infer(e.index, scope))
                if it not in (INT, LOC) and not unify(it, INT):
                    raise _Fail(e.index.span, f"list index must be Int or Loc, found {show(it)}")
                return t.elem
            raise _Fail(e.span, f"cannot index a value of type {show(t)}")
        if isinstance(e, S.Apply):
            ft = resolve(self.infer(e.fn, scope))
            if not isinstance(ft, TFun):
                raise _Fail(e.span, f"cannot apply a value of type {show(ft)}")
            if len(ft.params) != len(e.args):
                raise _Fail(e.span, f"function expects {len(ft.params)} arguments, got {len(e.args)}")
            for a, p in zip(e.args, ft.params):
                self.expect(a, p, scope)
            return ft.ret
        if isinstance(e, S.LibCall):
            return self._libcall(e, scope)
        if isinstance(e, S.ListLit):
            elem: Type = TVar()
            for item in e.items:
                self.expect(item, elem, scope)
            return TList(elem)
        if isinstance(e, S.PairLit):
            return TPair(self.infer(e.first, scope), self.infer(e.second, scope))
        if isinstance(e, S.Lambda):
            params = tuple(TVar() for _ in e.params)
            body = self.infer(e.body, {**scope, **dict(zip(e.params, params))})
            return TFun(params, body)
        if isinstance(e, S.If):
            self.expect(e.cond, BOOL, scope)
            t = self.infer(e.then, scope)
            f = self.infer(e.orelse, scope)
            if not unify(t, f):
                raise _Fail(e.span, f"branches of 'if' differ: {show(t)} and {show(f)}")
            return t
        if isinstance(e, S.BinOp):
            return self._binop(e, scope)
        if isinstance(e, S.UnOp):
            t = resolve(self.infer(e.operand, scope))
            if e.op == "!":
                if not unify(t, BOOL):
                    raise _Fail(e.span, f"'!' expects Bool, found {show(t)}")
                return BOOL
            if t not in (INT, FLOAT):
                raise _Fail(e.span, f"unary '-' expects Int or Float, found {show(t)}")
            return t
        if isinstance(e, S.StructLit):
            decl = self.structs.get(e.name)
            if decl is None:
                raise _Fail(e.span, f"struct {e.name} is not declared")
            given = [k for k, _ in e.fields]
            if len(set(given)) != len(given):
                raise _Fail(e.span, f"{e.name} literal repeats a field")
            missing = [k for k in decl if k not in given]
            extra = [k for k in given if k not in decl]
            if missing or extra:
                parts = []
                if missing:
                    parts.append(f"missing field(s) {', '.join(missing)}")
                if extra:
                    parts.append(f"unknown field(s) {', '.join(extra)}")
                raise _Fail(e.span, f"{e.name} literal: {'; '.join(parts)}")
            for k, v in e.fields:
                self.expect(v, decl[k], scope)
            return TStruct(e.name)
        if isinstance(e, S.LocOf):
            t = resolve(self.infer(e.operand, scope))
            if t not in (INT, LOC) and not unify(t, INT):
                raise _Fail(e.span, f"loc() expects Int, found {show(t)}")
            return LOC
        raise _Fail(getattr(e, "span", S.NOSPAN), f"unsupported expression {type(e).__name__}")

    def _field(self, e: S.Field, scope) -> Type:
        t = resolve(self.infer(e.obj, scope))
        if t == ARCH:
            table = self.structs.get("Arch", {})
        elif t == STATE:
            table = STATE_FIELDS
        elif t == INSTR:
            table = INSTR_FIELDS
        elif t == ROUTE:
            table = ROUTE_FIELDS
        elif isinstance(t, TStruct):
            table = self.structs.get(t.name, {})
        elif isinstance(t, TVar):
            raise _Fail(e.span, f"cannot determine the type whose field '{e.name}' is accessed")
        else:
            raise _Fail(e.span, f"type {show(t)} has no fields")
        if e.name not in table:
            if t == ARCH:
                raise _Fail(e.span, f"Arch has no declared field or library function '{e.name}'")
            raise _Fail(e.span, f"{show(t)} has no field '{e.name}'")
        return table[e.name]

    def _libcall(self, e: S.LibCall, scope) -> Type:
        params, ret = _sig(e.name)
        if len(params) != len(e.args):
            raise _Fail(e.span, f"{e.name} expects {len(params)} arguments, got {len(e.args)}")
        # non-lambda arguments first so lambda parameters get their types from the signature
        order = sorted(range(len(params)), key=lambda i: isinstance(e.args[i], S.Lambda))
        for i in order:
            arg, want = e.args[i], params[i]
            if isinstance(arg, S.Lambda):
                fw = resolve(want)
                if not isinstance(fw, TFun):
                    raise _Fail(arg.span, f"{e.name} argument {i + 1}: expected {show(want)}, found a function")
                if len(fw.params) != len(arg.params):
                    raise _Fail(arg.span, f"{e.name} argument {i + 1}: expected a function of "
                                          f"{len(fw.params)} parameter(s), found {len(arg.params)}")
                inner = {**scope, **dict(zip(arg.params, fw.params))}
                body = self.infer(arg.body, inner)
                if not unify(body, fw.ret):
                    raise _Fail(arg.body.span, f"{e.name} argument {i + 1}: function returns {show(body)}, "
                                               f"expected {show(fw.ret)}")
                self._record(arg, fw)
                continue
            if isinstance(arg, S.Num) and isinstance(arg.value, int):
                # integer literals passed straight to a library function may stand for floats
                t: Type = self._record(arg, TVar(numeric=True))
            else:
                t = self.infer(arg, scope)
            if not unify(t, want):
                raise _Fail(arg.span, f"{e.name} argument {i + 1}: expected {show(want)}, found {show(t)}")
        return ret

    def _binop(self, e: S.BinOp, scope) -> Type:
        op = e.op
        if op in ("&&", "||"):
            self.expect(e.left, BOOL, scope)
            self.expect(e.right, BOOL, scope)
            return BOOL
        lt = self.infer(e.left, scope)
        rt = self.infer(e.right, scope)
        if not unify(lt, rt):
            raise _Fail(e.span, f"operands of '{op}' differ: {show(lt)} and {show(rt)}")
        t = resolve(lt)
        if op in ("==", "!="):
            return BOOL
        if op in ("<", "<=", ">", ">="):
            if t not in (INT, FLOAT, LOC, QUBIT, STRING) and not unify(t, INT):
                raise _Fail(e.span, f"'{op}' cannot compare values of type {show(t)}")
            return BOOL
        if op == "%":
            if not unify(t, INT):
                raise _Fail(e.span, f"'%' expects Int operands, found {show(t)}")
            return INT
        if isinstance(t, TVar):
            unify(t, INT)
            t = INT
        if t not in (INT, FLOAT):
            raise _Fail(e.span, f"'{op}' expects Int or Float operands, found {show(t)}")
        return t


@dataclass
class TypedProgram:
    ast: S.ProgramAST
    structs: dict[str, dict[str, Type]]
    types: dict[int, Type] = field(repr=False)

    def type_of(self, e: S.Expr) -> Type:
        return zonk(self.types[id(e)])


_DATA_TYPES = (LOC, INT, FLOAT, BOOL, STRING, QUBIT)


def _check_decl_type(t: Type, allow_handles: bool) -> bool:
    if isinstance(t, TList):
        return _check_decl_type(t.elem, allow_handles)
    if isinstance(t, TPair):
        return _check_decl_type(t.first, allow_handles) and _check_decl_type(t.second, allow_handles)
    if isinstance(t, TFun):
        return False
    if isinstance(t, TStruct):
        return allow_handles and t.name == "GateRealization"
    return t in _DATA_TYPES or allow_handles


def typecheck(p: S.ProgramAST) -> TypedProgram:
    """Typecheck a parsed program; raises MarolTypeError listing every failing definition."""
    errors: list[TypeErrorInfo] = []
    structs = {
        "GateRealization": p.route.decl.field_types(),
        "Transition": p.transition.decl.field_types(),
        "Arch": p.arch.decl.field_types() if p.arch else {},
    }
    decls = [p.route.decl, p.transition.decl] + ([p.arch.decl] if p.arch else [])
    for d in decls:
        for fname, ft in d.fields:
            if not _check_decl_type(ft, allow_handles=d.name != "Arch"):
                what = "arch data" if d.name == "Arch" else "a struct field"
                errors.append(TypeErrorInfo(d.span, f"field '{fname}' of type {ft} cannot be {what}", d.name))
    for g in p.route.routed_gates:
        if not g:
            errors.append(TypeErrorInfo(S.NOSPAN, "empty gate name in routed_gates", "routed_gates"))
    checker = Checker(structs)
    definitions = [
        ("realize_gate", p.route.realize_gate),
        ("get_transitions", p.transition.get_transitions),
        ("apply", p.transition.apply),
        ("cost", p.transition.cost),
    ]
    if p.arch is not None and p.arch.get_locations is not None:
        definitions.append(("get_locations", p.arch.get_locations))
    if p.state is not None:
        definitions.append(("state_cost", p.state.cost))
    for name, expr in definitions:
        try:
            checker.check_definition(name, expr)
        except _Fail as f:
            errors.append(TypeErrorInfo(f.span, f.message, name))
    if errors:
        raise MarolTypeError(errors)
    return TypedProgram(p, structs, checker.types)
