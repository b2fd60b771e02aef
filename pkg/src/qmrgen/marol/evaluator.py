"""Evaluate typed Marol expressions.

Each expression is compiled once into a tree of Python closures taking a
context dict (implicit constants plus lambda parameters). The language has
no recursion, so big-step evaluation agrees with the small-step rules; the
fuel counter is a backstop against pathological inputs such as
``combinations`` over a huge list.
"""

from __future__ import annotations

import itertools
import math
from typing import Any, Callable

from ..archgraph import ArchError, ArchGraph, horizontal_neighbors, to_2d, vertical_neighbors
from . import syntax as S
from .typecheck import TypedProgram
from .types import ARCH, FLOAT, INSTR, QUBITMAP, ROUTE, STATE, TStruct, resolve
from .values import IdTrans, MarolRuntimeError, StructValue

Compiled = Callable[[dict], Any]

DEFAULT_FUEL = 2_000_000


class ArchValue:
    """An arch graph together with the runtime values of its declared ArchInfo fields."""

    __slots__ = ("graph", "fields", "memo")

    def __init__(self, graph: ArchGraph, fields: dict[str, Any]):
        self.graph = graph
        self.fields = fields
        # values of subexpressions that depend on nothing but Arch, keyed by node id
        self.memo: dict[int, Any] = {}

    def __repr__(self) -> str:
        return f"ArchValue(n={self.graph.n})"


class Fuel:
    __slots__ = ("left",)

    def __init__(self, amount: int = DEFAULT_FUEL):
        self.left = amount

    def burn(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise MarolRuntimeError("fuel", "evaluation step budget exhausted")


def _graph_call(op: str, fn, *args):
    try:
        return fn(*args)
    except ArchError as exc:
        raise MarolRuntimeError(op, str(exc)) from None


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise MarolRuntimeError("/", "division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _int_mod(a: int, b: int) -> int:
    if b == 0:
        raise MarolRuntimeError("%", "modulo by zero")
    return a - b * _int_div(a, b)


def _float_div(a: float, b: float) -> float:
    if b == 0:
        raise MarolRuntimeError("/", "division by zero")
    return a / b


def free_names(e: S.Expr) -> set[str]:
    """Implicit constants and variables that ``e`` reads from its context."""
    if isinstance(e, S.Const):
        return set() if e.name == "IdTrans" else {e.name}
    if isinstance(e, S.Var):
        return {e.name}
    if isinstance(e, S.Lambda):
        return free_names(e.body) - set(e.params)
    out: set[str] = set()
    for child in _children(e):
        out |= free_names(child)
    return out


def _children(e: S.Expr) -> list[S.Expr]:
    if isinstance(e, (S.Field, S.Proj)):
        return [e.obj]
    if isinstance(e, S.Index):
        return [e.obj, e.index]
    if isinstance(e, S.Apply):
        return [e.fn, *e.args]
    if isinstance(e, S.LibCall):
        return list(e.args)
    if isinstance(e, S.ListLit):
        return list(e.items)
    if isinstance(e, S.PairLit):
        return [e.first, e.second]
    if isinstance(e, S.If):
        return [e.cond, e.then, e.orelse]
    if isinstance(e, S.BinOp):
        return [e.left, e.right]
    if isinstance(e, (S.UnOp, S.LocOf)):
        return [e.operand]
    if isinstance(e, S.StructLit):
        return [v for _, v in e.fields]
    return []


def _memoized(key: int, fn: Compiled) -> Compiled:
    # pure and Arch-only, so the value can be computed once per arch
    def memo(ctx):
        cache = ctx["Arch"].memo
        try:
            return cache[key]
        except KeyError:
            v = cache[key] = fn(ctx)
            return v
    return memo


class Compiler:
    def __init__(self, typed: TypedProgram, fuel: Fuel):
        self.typed = typed
        self.fuel = fuel
        self.struct_order = {name: list(decl) for name, decl in typed.structs.items()}

    def ty(self, e: S.Expr):
        return resolve(self.typed.types[id(e)])

    def compile(self, e: S.Expr) -> Compiled:
        fn = getattr(self, "c_" + type(e).__name__)(e)
        if isinstance(e, (S.LibCall, S.Field, S.Index, S.If, S.BinOp)) and free_names(e) == {"Arch"}:
            return _memoized(id(e), fn)
        return fn

    # literals and names
    def c_Num(self, e: S.Num) -> Compiled:
        t = self.ty(e)
        v = float(e.value) if t == FLOAT else e.value
        return lambda ctx: v

    def c_BoolLit(self, e: S.BoolLit) -> Compiled:
        v = e.value
        return lambda ctx: v

    def c_Str(self, e: S.Str) -> Compiled:
        v = e.value
        return lambda ctx: v

    def c_Var(self, e: S.Var) -> Compiled:
        name = e.name
        return lambda ctx: ctx[name]

    def c_Const(self, e: S.Const) -> Compiled:
        if e.name == "IdTrans":
            return lambda ctx: IdTrans
        name = e.name
        return lambda ctx: ctx[name]

    # access
    def c_Field(self, e: S.Field) -> Compiled:
        obj = self.compile(e.obj)
        t = self.ty(e.obj)
        name = e.name
        if t == ARCH:
            def arch_field(ctx):
                fields = obj(ctx).fields
                if name not in fields:
                    raise MarolRuntimeError("field access", f"arch has no data for field '{name}'")
                return fields[name]
            return arch_field
        if t == STATE:
            if name == "map":
                return lambda ctx: obj(ctx).map
            return lambda ctx: obj(ctx).route
        if t == INSTR:
            if name == "qubits":
                return lambda ctx: obj(ctx).qubits
            return lambda ctx: obj(ctx).gate
        if t == ROUTE:
            if name == "instr":
                return lambda ctx: obj(ctx).instr
            if name == "realization":
                return lambda ctx: obj(ctx).realization
            if name == "qubits":
                return lambda ctx: obj(ctx).instr.qubits
            return lambda ctx: obj(ctx).instr.gate
        assert isinstance(t, TStruct)
        pos = self.struct_order[t.name].index(name)
        sname = t.name

        def struct_field(ctx):
            v = obj(ctx)
            if v is IdTrans:
                raise MarolRuntimeError("field access", f"IdTrans has no field '{name}'")
            if not isinstance(v, StructValue) or v.name != sname:
                raise MarolRuntimeError("field access", f"expected {sname}, found {v!r}")
            return v.fields[pos][1]
        return struct_field

    def c_Proj(self, e: S.Proj) -> Compiled:
        obj = self.compile(e.obj)
        i = e.index
        return lambda ctx: obj(ctx)[i]

    def c_Index(self, e: S.Index) -> Compiled:
        obj = self.compile(e.obj)
        idx = self.compile(e.index)
        if self.ty(e.obj) == QUBITMAP:
            return lambda ctx: obj(ctx)[idx(ctx)]

        def list_index(ctx):
            seq = obj(ctx)
            i = idx(ctx)
            if 0 <= i < len(seq):
                return seq[i]
            raise MarolRuntimeError("list index", f"index {i} out of bounds for length {len(seq)}")
        return list_index

    # functions
    def c_Lambda(self, e: S.Lambda) -> Compiled:
        body = self.compile(e.body)
        params = e.params
        fuel = self.fuel

        def make(ctx):
            def closure(*args):
                fuel.burn()
                if len(args) != len(params):
                    raise MarolRuntimeError("application", f"expected {len(params)} arguments, got {len(args)}")
                local = dict(ctx)
                local.update(zip(params, args))
                return body(local)
            return closure
        return make

    def c_Apply(self, e: S.Apply) -> Compiled:
        fn = self.compile(e.fn)
        args = [self.compile(a) for a in e.args]
        return lambda ctx: fn(ctx)(*[a(ctx) for a in args])

    def c_LibCall(self, e: S.LibCall) -> Compiled:
        impl = getattr(self, "lib_" + e.name)(e)
        args = [self.compile(a) for a in e.args]
        if len(args) == 1:
            a0 = args[0]
            return lambda ctx: impl(a0(ctx))
        if len(args) == 2:
            a0, a1 = args
            return lambda ctx: impl(a0(ctx), a1(ctx))
        return lambda ctx: impl(*[a(ctx) for a in args])

    # constructors
    def c_ListLit(self, e: S.ListLit) -> Compiled:
        items = [self.compile(a) for a in e.items]
        return lambda ctx: tuple(a(ctx) for a in items)

    def c_PairLit(self, e: S.PairLit) -> Compiled:
        a, b = self.compile(e.first), self.compile(e.second)
        return lambda ctx: (a(ctx), b(ctx))

    def c_StructLit(self, e: S.StructLit) -> Compiled:
        given = {k: self.compile(v) for k, v in e.fields}
        # evaluate in source order, store in declaration order
        src_order = [k for k, _ in e.fields]
        decl_order = self.struct_order[e.name]
        name = e.name

        def build(ctx):
            vals = {k: given[k](ctx) for k in src_order}
            return StructValue(name, tuple((k, vals[k]) for k in decl_order))
        return build

    def c_LocOf(self, e: S.LocOf) -> Compiled:
        inner = self.compile(e.operand)

        def loc(ctx):
            v = inner(ctx)
            if v < 0:
                raise MarolRuntimeError("loc", f"negative location {v}")
            return v
        return loc

    # control and operators
    def c_If(self, e: S.If) -> Compiled:
        c, a, b = self.compile(e.cond), self.compile(e.then), self.compile(e.orelse)
        return lambda ctx: a(ctx) if c(ctx) else b(ctx)

    def c_UnOp(self, e: S.UnOp) -> Compiled:
        x = self.compile(e.operand)
        if e.op == "!":
            return lambda ctx: not x(ctx)
        return lambda ctx: -x(ctx)

    def c_BinOp(self, e: S.BinOp) -> Compiled:
        l, r = self.compile(e.left), self.compile(e.right)
        op = e.op
        if op == "&&":
            return lambda ctx: l(ctx) and r(ctx)
        if op == "||":
            return lambda ctx: l(ctx) or r(ctx)
        if op == "==":
            return lambda ctx: l(ctx) == r(ctx)
        if op == "!=":
            return lambda ctx: l(ctx) != r(ctx)
        if op == "<":
            return lambda ctx: l(ctx) < r(ctx)
        if op == "<=":
            return lambda ctx: l(ctx) <= r(ctx)
        if op == ">":
            return lambda ctx: l(ctx) > r(ctx)
        if op == ">=":
            return lambda ctx: l(ctx) >= r(ctx)
        is_float = self.ty(e) == FLOAT
        if op == "+":
            return lambda ctx: l(ctx) + r(ctx)
        if op == "-":
            return lambda ctx: l(ctx) - r(ctx)
        if op == "*":
            return lambda ctx: l(ctx) * r(ctx)
        if op == "/":
            div = _float_div if is_float else _int_div
            return lambda ctx: div(l(ctx), r(ctx))
        if op == "%":
            return lambda ctx: _int_mod(l(ctx), r(ctx))
        raise AssertionError(op)

    # library functions: each lib_X returns the Python implementation
    def lib_push(self, e):
        return lambda xs, x: xs + (x,)

    def lib_concat(self, e):
        return lambda xs, ys: xs + ys

    def lib_contains(self, e):
        fuel = self.fuel

        def contains(xs, x):
            fuel.burn(len(xs))
            return x in xs
        return contains

    def lib_combinations(self, e):
        fuel = self.fuel

        def combinations(xs, k):
            if k < 0:
                raise MarolRuntimeError("combinations", f"negative size {k}")
            n = len(xs)
            if k <= n:
                count = math.comb(n, k)
                fuel.burn(count)
            return tuple(itertools.combinations(xs, k))
        return combinations

    def lib_map(self, e):
        def map_(f, xs):
            return tuple([f(x) for x in xs])
        return map_

    def lib_fold(self, e):
        coerce = self.ty(e) == FLOAT

        def fold(init, f, xs):
            acc = float(init) if coerce else init
            for x in xs:
                acc = f(acc, x)
            return acc
        return fold

    def lib_len(self, e):
        return len

    def lib_edges(self, e):
        return lambda a: tuple(a.graph.edge_list())

    def lib_edges_between(self, e):
        return lambda a, u, v: tuple(_graph_call("edges_between", a.graph.edges_between, u, v))

    def lib_all_paths(self, e):
        fuel = self.fuel

        def all_paths(a, srcs, tgts, blocked):
            paths = _graph_call("all_paths", a.graph.all_paths, srcs, tgts, blocked)
            fuel.burn(len(paths))
            return tuple(tuple(p) for p in paths)
        return all_paths

    def lib_steiner_trees(self, e):
        def steiner_trees(a, terms, blocked):
            if not terms:
                raise MarolRuntimeError("steiner_trees", "terminal list is empty")
            trees = _graph_call("steiner_trees", a.graph.steiner_trees, terms, blocked)
            return tuple(tuple(t) for t in trees)
        return steiner_trees

    def lib_vertices(self, e):
        return lambda a: tuple(range(a.graph.n))

    def lib_qubits(self, e):
        return lambda ins: ins.qubits

    def lib_gate_type(self, e):
        return lambda ins: ins.gate

    def lib_horizontal_neighbors(self, e):
        return lambda l, w: tuple(_graph_call("horizontal_neighbors", horizontal_neighbors, l, w))

    def lib_vertical_neighbors(self, e):
        return lambda l, w, h: tuple(_graph_call("vertical_neighbors", vertical_neighbors, l, w, h))

    def lib_to_2d(self, e):
        return lambda l, w: _graph_call("to_2d", to_2d, l, w)

    def lib_value_swap(self, e):
        return lambda m, l1, l2: m.value_swap(l1, l2)

    def lib_mapped_locations(self, e):
        return lambda m: tuple(m.locations())


def compile_expr(typed: TypedProgram, e: S.Expr, fuel: Fuel) -> Compiled:
    return Compiler(typed, fuel).compile(e)
