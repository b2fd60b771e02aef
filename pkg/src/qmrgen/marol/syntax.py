"""Lexer, AST, parser and pretty-printer for Marol source files."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .types import BASE_NAMES, QUBIT, LOC, QUBITMAP, TList, TPair, TFun, TStruct, Type


class MarolSyntaxError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}" if line else message)


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOSPAN = Span(0, 0)

# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<string>"[^"\n]*")
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|==|!=|<=|>=|&&|\|\||[-+*/%<>=!|.,:;()\[\]{}])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # name, int, float, string, op, eof
    text: str
    span: Span


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise MarolSyntaxError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        span = Span(line, pos - line_start + 1)
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, span))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return tokens


# -- AST ---------------------------------------------------------------------

@dataclass(eq=True)
class Expr:
    pass


def _meta():
    return field(default=NOSPAN, compare=False, repr=False)


@dataclass(eq=True)
class Num(Expr):
    value: int | float
    span: Span = _meta()


@dataclass(eq=True)
class BoolLit(Expr):
    value: bool
    span: Span = _meta()


@dataclass(eq=True)
class Str(Expr):
    value: str
    span: Span = _meta()


@dataclass(eq=True)
class Var(Expr):
    name: str
    span: Span = _meta()


IMPLICIT = ("Arch", "Instr", "State", "Trans", "QubitMap", "IdTrans")


@dataclass(eq=True)
class Const(Expr):
    """One of the implicit constants (Arch, Instr, State, Trans, QubitMap, IdTrans)."""

    name: str
    span: Span = _meta()


@dataclass(eq=True)
class Field(Expr):
    obj: Expr
    name: str
    span: Span = _meta()


@dataclass(eq=True)
class Proj(Expr):
    obj: Expr
    index: int
    span: Span = _meta()


@dataclass(eq=True)
class Index(Expr):
    obj: Expr
    index: Expr
    span: Span = _meta()


@dataclass(eq=True)
class Apply(Expr):
    fn: Expr
    args: tuple[Expr, ...]
    span: Span = _meta()


@dataclass(eq=True)
class LibCall(Expr):
    name: str
    args: tuple[Expr, ...]
    span: Span = _meta()


@dataclass(eq=True)
class ListLit(Expr):
    items: tuple[Expr, ...]
    span: Span = _meta()


@dataclass(eq=True)
class PairLit(Expr):
    first: Expr
    second: Expr
    span: Span = _meta()


@dataclass(eq=True)
class Lambda(Expr):
    params: tuple[str, ...]
    body: Expr
    span: Span = _meta()


@dataclass(eq=True)
class If(Expr):
    cond: Expr
    then: Expr
    orelse: Expr
    span: Span = _meta()


@dataclass(eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    span: Span = _meta()


@dataclass(eq=True)
class UnOp(Expr):
    op: str
    operand: Expr
    span: Span = _meta()


@dataclass(eq=True)
class StructLit(Expr):
    name: str
    fields: tuple[tuple[str, Expr], ...]
    span: Span = _meta()


@dataclass(eq=True)
class LocOf(Expr):
    operand: Expr
    span: Span = _meta()


@dataclass(eq=True)
class StructDecl:
    name: str
    fields: tuple[tuple[str, Type], ...]
    span: Span = _meta()

    def field_types(self) -> dict[str, Type]:
        return dict(self.fields)


@dataclass(eq=True)
class RouteInfo:
    decl: StructDecl
    routed_gates: tuple[str, ...]
    realize_gate: Expr


@dataclass(eq=True)
class TransitionInfo:
    decl: StructDecl
    get_transitions: Expr
    apply: Expr
    cost: Expr


@dataclass(eq=True)
class ArchInfo:
    decl: StructDecl
    get_locations: Optional[Expr] = None


@dataclass(eq=True)
class StateInfo:
    cost: Expr


@dataclass(eq=True)
class ProgramAST:
    route: RouteInfo
    transition: TransitionInfo
    arch: Optional[ArchInfo] = None
    state: Optional[StateInfo] = None


# library functions callable as F(args) or receiver.F(args)
LIBRARY = (
    "push", "concat", "contains", "combinations", "map", "fold", "len",
    "edges", "edges_between", "all_paths", "steiner_trees", "vertices",
    "qubits", "gate_type",
    "horizontal_neighbors", "vertical_neighbors", "to_2d", "value_swap",
    "mapped_locations",
)

BLOCKS = ("RouteInfo", "TransitionInfo", "ArchInfo", "StateInfo")
DEFINITIONS = {
    "RouteInfo": ("routed_gates", "realize_gate"),
    "TransitionInfo": ("get_transitions", "apply", "cost"),
    "ArchInfo": ("get_locations",),
    "StateInfo": ("cost",),
}
DECL_NAMES = {"RouteInfo": "GateRealization", "TransitionInfo": "Transition", "ArchInfo": "Arch"}
STRUCT_LITERALS = ("GateRealization", "Transition")
KEYWORDS = {"if", "then", "else", "true", "false", "loc"}
COMPARISONS = ("==", "!=", "=", "<", "<=", ">", ">=")


# -- parser ------------------------------------------------------------------

class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("op", "name") and t.text == text

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if not self.at(text):
            shown = t.text or "end of input"
            raise MarolSyntaxError(f"expected '{text}', found '{shown}'", t.span.line, t.span.col)
        return self.advance()

    def expect_name(self) -> Token:
        t = self.peek()
        if t.kind != "name":
            raise MarolSyntaxError(f"expected a name, found '{t.text}'", t.span.line, t.span.col)
        return self.advance()

    def error(self, msg: str, tok: Token | None = None) -> MarolSyntaxError:
        tok = tok or self.peek()
        return MarolSyntaxError(msg, tok.span.line, tok.span.col)

    # program structure
    def parse_program(self) -> ProgramAST:
        blocks: dict[str, dict] = {}
        while self.peek().kind != "eof":
            head = self.peek()
            if not (head.kind == "name" and head.text in BLOCKS and self.at(":", 1)):
                raise self.error(f"expected a block header ({', '.join(BLOCKS)}), found '{head.text}'")
            self.advance()
            self.advance()
            if head.text in blocks:
                raise self.error(f"duplicate {head.text} block", head)
            blocks[head.text] = self.parse_block(head)
        for required in ("RouteInfo", "TransitionInfo"):
            if required not in blocks:
                raise MarolSyntaxError(f"missing mandatory {required} block")
        r = blocks["RouteInfo"]
        route = RouteInfo(r["decl"], r["routed_gates"], r["realize_gate"])
        t = blocks["TransitionInfo"]
        trans = TransitionInfo(t["decl"], t["get_transitions"], t["apply"], t["cost"])
        arch = None
        if "ArchInfo" in blocks:
            a = blocks["ArchInfo"]
            arch = ArchInfo(a["decl"], a.get("get_locations"))
        state = StateInfo(blocks["StateInfo"]["cost"]) if "StateInfo" in blocks else None
        return ProgramAST(route, trans, arch, state)

    def _item_start(self) -> bool:
        t = self.peek()
        if t.kind == "eof":
            return False
        if t.kind == "name" and t.text in BLOCKS and self.at(":", 1):
            return False
        return True

    def parse_block(self, head: Token) -> dict:
        block = head.text
        allowed = DEFINITIONS[block]
        items: dict = {}
        while self._item_start():
            t = self.peek()
            if t.kind == "name" and self.at("{", 1):
                want = DECL_NAMES.get(block)
                if t.text != want:
                    raise self.error(f"{block} declares '{want}', not '{t.text}'", t)
                if "decl" in items:
                    raise self.error(f"duplicate {want} declaration", t)
                items["decl"] = self.parse_struct_decl()
            elif t.kind == "name" and self.at("=", 1):
                if t.text not in allowed:
                    raise self.error(f"'{t.text}' is not a {block} definition (expected one of {', '.join(allowed)})", t)
                if t.text in items:
                    raise self.error(f"duplicate definition of '{t.text}'", t)
                self.advance()
                self.advance()
                if t.text == "routed_gates":
                    items[t.text] = self.parse_gate_list()
                else:
                    items[t.text] = self.parse_expr()
            else:
                raise self.error(f"unexpected '{t.text}' in {block} block")
            while self.at(";"):
                self.advance()
        required = {
            "RouteInfo": ("decl", "routed_gates", "realize_gate"),
            "TransitionInfo": ("decl", "get_transitions", "apply", "cost"),
            "ArchInfo": ("decl",),
            "StateInfo": ("cost",),
        }[block]
        for name in required:
            if name not in items:
                what = f"{DECL_NAMES[block]} declaration" if name == "decl" else f"definition '{name}'"
                raise MarolSyntaxError(f"{block} block is missing its {what}", head.span.line, head.span.col)
        return items

    def parse_gate_list(self) -> tuple[str, ...]:
        self.expect("[")
        names = []
        while not self.at("]"):
            names.append(self.expect_name().text.lower())
            if not self.at("]"):
                self.expect(",")
        self.expect("]")
        return tuple(names)

    def parse_struct_decl(self) -> StructDecl:
        name = self.advance()
        self.expect("{")
        fields = []
        while not self.at("}"):
            fname = self.expect_name().text
            self.expect(":")
            fields.append((fname, self.parse_type()))
            if not self.at("}"):
                self.expect(",")
        self.expect("}")
        names = [f for f, _ in fields]
        if len(set(names)) != len(names):
            raise self.error(f"duplicate field in {name.text} declaration", name)
        return StructDecl(name.text, tuple(fields), name.span)

    def parse_type(self) -> Type:
        t = self.parse_type_atom()
        if self.at("->"):
            self.advance()
            ret = self.parse_type()
            if t == QUBIT and ret == LOC:
                return QUBITMAP
            return TFun((t,), ret)
        return t

    def parse_type_atom(self) -> Type:
        t = self.peek()
        if self.at("("):
            self.advance()
            a = self.parse_type()
            if self.at(","):
                self.advance()
                b = self.parse_type()
                self.expect(")")
                return TPair(a, b)
            self.expect(")")
            return a
        name = self.expect_name().text
        if name == "List":
            self.expect("[")
            elem = self.parse_type()
            self.expect("]")
            return TList(elem)
        if name in BASE_NAMES:
            return BASE_NAMES[name]
        if name in ("GateRealization", "Transition"):
            return TStruct(name)
        raise MarolSyntaxError(f"unknown type '{name}'", t.span.line, t.span.col)

    # expressions
    def parse_expr(self) -> Expr:
        t = self.peek()
        if self.at("|") or self.at("||"):
            return self.parse_lambda()
        if self.at("if"):
            self.advance()
            c = self.parse_expr()
            self.expect("then")
            a = self.parse_expr()
            self.expect("else")
            b = self.parse_expr()
            return If(c, a, b, t.span)
        return self.parse_or()

    def parse_lambda(self) -> Lambda:
        start = self.advance()
        params: list[str] = []
        if start.text == "|":
            while not self.at("|"):
                p = self.expect_name()
                if p.text in LIBRARY or p.text in IMPLICIT or p.text in KEYWORDS or p.text == "Gate":
                    raise self.error(f"'{p.text}' cannot be used as a parameter name", p)
                params.append(p.text)
                if not self.at("|"):
                    self.expect(",")
            self.expect("|")
        if len(set(params)) != len(params):
            raise self.error("duplicate lambda parameter", start)
        self.expect("->")
        return Lambda(tuple(params), self.parse_expr(), start.span)

    def _binary(self, ops, sub) -> Expr:
        left = sub()
        while self.peek().kind == "op" and self.peek().text in ops:
            op = self.advance()
            right = sub()
            left = BinOp(op.text, left, right, op.span)
        return left

    def parse_or(self) -> Expr:
        return self._binary(("||",), self.parse_and)

    def parse_and(self) -> Expr:
        return self._binary(("&&",), self.parse_cmp)

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        t = self.peek()
        if t.kind == "op" and t.text in COMPARISONS:
            self.advance()
            right = self.parse_add()
            op = "==" if t.text == "=" else t.text
            return BinOp(op, left, right, t.span)
        return left

    def parse_add(self) -> Expr:
        return self._binary(("+", "-"), self.parse_mul)

    def parse_mul(self) -> Expr:
        return self._binary(("*", "/", "%"), self.parse_unary)

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text in ("-", "!"):
            self.advance()
            operand = self.parse_unary()
            if t.text == "-" and isinstance(operand, Num):
                return Num(-operand.value, t.span)
            return UnOp(t.text, operand, t.span)
        return self.parse_postfix()

    def parse_args(self) -> tuple[Expr, ...]:
        self.expect("(")
        args = []
        while not self.at(")"):
            args.append(self.parse_expr())
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return tuple(args)

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            t = self.peek()
            if self.at("."):
                self.advance()
                if self.at("("):
                    self.advance()
                    idx = self.peek()
                    if idx.kind != "int":
                        raise self.error("projection index must be 0 or 1", idx)
                    self.advance()
                    self.expect(")")
                    if int(idx.text) not in (0, 1):
                        raise self.error("projection index must be 0 or 1", idx)
                    e = Proj(e, int(idx.text), t.span)
                    continue
                name = self.expect_name()
                if name.text in LIBRARY and self.at("("):
                    e = LibCall(name.text, (e,) + self.parse_args(), name.span)
                else:
                    e = Field(e, name.text, name.span)
            elif self.at("["):
                self.advance()
                idx = self.parse_expr()
                self.expect("]")
                e = Index(e, idx, t.span)
            elif self.at("("):
                e = Apply(e, self.parse_args(), t.span)
            else:
                return e

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.advance()
            return Num(int(t.text), t.span)
        if t.kind == "float":
            self.advance()
            return Num(float(t.text), t.span)
        if t.kind == "string":
            self.advance()
            return Str(t.text[1:-1].lower(), t.span)
        if self.at("("):
            self.advance()
            a = self.parse_expr()
            if self.at(","):
                self.advance()
                b = self.parse_expr()
                self.expect(")")
                return PairLit(a, b, t.span)
            self.expect(")")
            return a
        if self.at("["):
            self.advance()
            items = []
            while not self.at("]"):
                items.append(self.parse_expr())
                if not self.at("]"):
                    self.expect(",")
            self.expect("]")
            return ListLit(tuple(items), t.span)
        if t.kind == "name":
            name = t.text
            if name in ("true", "false"):
                self.advance()
                return BoolLit(name == "true", t.span)
            if name == "loc":
                self.advance()
                args = self.parse_args()
                if len(args) != 1:
                    raise self.error("loc takes exactly one argument", t)
                return LocOf(args[0], t.span)
            if name in ("then", "else", "if"):
                raise self.error(f"unexpected '{name}'")
            if name in STRUCT_LITERALS and self.at("{", 1):
                return self.parse_struct_lit()
            if name in LIBRARY and self.at("(", 1):
                self.advance()
                return LibCall(name, self.parse_args(), t.span)
            self.advance()
            if name == "Gate":
                return Const("Instr", t.span)
            if name in IMPLICIT:
                return Const(name, t.span)
            return Var(name, t.span)
        raise self.error(f"unexpected '{t.text or 'end of input'}' in expression")

    def parse_struct_lit(self) -> StructLit:
        name = self.advance()
        self.expect("{")
        fields = []
        while not self.at("}"):
            fname = self.expect_name().text
            self.expect("=")
            fields.append((fname, self.parse_expr()))
            if not self.at("}"):
                self.expect(",")
        self.expect("}")
        return StructLit(name.text, tuple(fields), name.span)


def parse_program(src: str) -> ProgramAST:
    return Parser(src).parse_program()


def parse_expr(src: str) -> Expr:
    p = Parser(src)
    e = p.parse_expr()
    if p.peek().kind != "eof":
        raise p.error(f"unexpected '{p.peek().text}' after expression")
    return e


# -- pretty printer -----------------------------------------------------------

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
         "+": 4, "-": 4, "*": 5, "/": 5, "%": 5}


def _type_src(t: Type) -> str:
    if isinstance(t, TList):
        return f"List[{_type_src(t.elem)}]"
    if isinstance(t, TPair):
        return f"({_type_src(t.first)}, {_type_src(t.second)})"
    if isinstance(t, TFun):
        return f"{_type_src(t.params[0])} -> {_type_src(t.ret)}"
    return str(t) if str(t) != "Qubit -> Loc" else "Qubit -> Loc"


def _prec(e: Expr) -> int:
    if isinstance(e, (If, Lambda)):
        return 0
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, UnOp):
        return 6
    if isinstance(e, Num) and e.value < 0:
        return 6
    return 7


def pretty_expr(e: Expr, min_prec: int = 0) -> str:
    s = _pretty(e)
    return f"({s})" if _prec(e) < min_prec else s


def _pretty(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value) if isinstance(e.value, float) else str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Str):
        return f'"{e.value}"'
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Field):
        return f"{pretty_expr(e.obj, 7)}.{e.name}"
    if isinstance(e, Proj):
        return f"{pretty_expr(e.obj, 7)}.({e.index})"
    if isinstance(e, Index):
        return f"{pretty_expr(e.obj, 7)}[{pretty_expr(e.index)}]"
    if isinstance(e, Apply):
        return f"{pretty_expr(e.fn, 7)}({', '.join(pretty_expr(a) for a in e.args)})"
    if isinstance(e, LibCall):
        return f"{e.name}({', '.join(pretty_expr(a) for a in e.args)})"
    if isinstance(e, ListLit):
        return "[" + ", ".join(pretty_expr(a) for a in e.items) + "]"
    if isinstance(e, PairLit):
        return f"({pretty_expr(e.first)}, {pretty_expr(e.second)})"
    if isinstance(e, Lambda):
        return f"|{', '.join(e.params)}| -> {pretty_expr(e.body)}"
    if isinstance(e, If):
        return f"if {pretty_expr(e.cond)} then {pretty_expr(e.then)} else {pretty_expr(e.orelse)}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        # comparisons are non-associative; arithmetic is left-associative
        lp = p + 1 if p == 3 else p
        return f"{pretty_expr(e.left, lp)} {e.op} {pretty_expr(e.right, p + 1)}"
    if isinstance(e, UnOp):
        return f"{e.op}{pretty_expr(e.operand, 6)}"
    if isinstance(e, StructLit):
        inner = ", ".join(f"{k} = {pretty_expr(v)}" for k, v in e.fields)
        return f"{e.name}{{{inner}}}"
    if isinstance(e, LocOf):
        return f"loc({pretty_expr(e.operand)})"
    raise TypeError(f"cannot print {e!r}")


def _decl_src(d: StructDecl) -> str:
    inner = ", ".join(f"{k} : {_type_src(t)}" for k, t in d.fields)
    return f"{d.name}{{{inner}}}"


def pretty_program(p: ProgramAST) -> str:
    lines = [
        "RouteInfo:",
        f"  {_decl_src(p.route.decl)}",
        f"  routed_gates = [{', '.join(g.upper() for g in p.route.routed_gates)}]",
        f"  realize_gate = {pretty_expr(p.route.realize_gate)}",
        "TransitionInfo:",
        f"  {_decl_src(p.transition.decl)}",
        f"  get_transitions = {pretty_expr(p.transition.get_transitions)}",
        f"  apply = {pretty_expr(p.transition.apply)}",
        f"  cost = {pretty_expr(p.transition.cost)}",
    ]
    if p.arch is not None:
        lines += ["ArchInfo:", f"  {_decl_src(p.arch.decl)}"]
        if p.arch.get_locations is not None:
            lines.append(f"  get_locations = {pretty_expr(p.arch.get_locations)}")
    if p.state is not None:
        lines += ["StateInfo:", f"  cost = {pretty_expr(p.state.cost)}"]
    return "\n".join(lines) + "\n"


def walk(e: Expr):
    """Yield every sub-expression of ``e`` (pre-order)."""
    yield e
    if isinstance(e, (Field, Proj)):
        yield from walk(e.obj)
    elif isinstance(e, Index):
        yield from walk(e.obj)
        yield from walk(e.index)
    elif isinstance(e, Apply):
        yield from walk(e.fn)
        for a in e.args:
            yield from walk(a)
    elif isinstance(e, (LibCall,)):
        for a in e.args:
            yield from walk(a)
    elif isinstance(e, ListLit):
        for a in e.items:
            yield from walk(a)
    elif isinstance(e, PairLit):
        yield from walk(e.first)
        yield from walk(e.second)
    elif isinstance(e, Lambda):
        yield from walk(e.body)
    elif isinstance(e, If):
        yield from walk(e.cond)
        yield from walk(e.then)
        yield from walk(e.orelse)
    elif isinstance(e, BinOp):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, (UnOp, LocOf)):
        yield from walk(e.operand)
    elif isinstance(e, StructLit):
        for _, v in e.fields:
            yield from walk(v)
