"""The Marol language: syntax, types, evaluation, and loaded programs."""

from .evaluator import ArchValue
from .program import MarolProgram, analyze_noninterference, evaluate, load_program, make_state
from .syntax import MarolSyntaxError, parse_program, pretty_program
from .typecheck import MarolTypeError, typecheck
from .values import IdTrans, MarolRuntimeError, QubitMap, RouteEntry, StateValue, StructValue

__all__ = [
    "ArchValue", "IdTrans", "MarolProgram", "MarolRuntimeError", "MarolSyntaxError",
    "MarolTypeError", "QubitMap", "RouteEntry", "StateValue", "StructValue",
    "analyze_noninterference", "evaluate", "load_program", "make_state", "parse_program",
    "pretty_program", "typecheck",
]
