"""Parser and evaluator for scalar nonlinearity expressions in one variable ``y``.

The grammar covers exactly what plant nonlinearities need: decimal constants,
the variable ``y``, binary ``+ - * /``, unary minus, ``cos``, ``sin``, ``exp``
and ``pow(base, integer)``.  Parsed expressions are immutable and safe to
evaluate concurrently.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "ExprEvalError",
    "NonlinearityExpr",
    "parse_expr",
    "eval_expr",
    "print_expr",
]


class ExprError(ValueError):
    """Base class for expression language errors."""


class ExprSyntaxError(ExprError):
    """Malformed source text; ``position`` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ExprEvalError(ExprError):
    """Evaluation produced a non-finite value (division by zero, overflow)."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Func:
    name: str  # cos, sin, exp
    arg: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Const | Var | Neg | BinOp | Func | Pow

_FUNCTIONS = ("cos", "sin", "exp")

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?)
    |(?P<name>[A-Za-z_][A-Za-z_0-9]*)
    |(?P<op>[+\-*/(),])
    |(?P<ws>[ \t\r\n]+)
    """,
    re.VERBOSE,
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        kind, value, pos = self.peek()
        if kind == "op" and value == text:
            self.advance()
            return
        raise ExprSyntaxError(f"expected {text!r}", pos)

    # expr := term (('+'|'-') term)*
    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.term())
            else:
                return node

    # term := unary (('*'|'/') unary)*
    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.unary())
            else:
                return node

    # unary := '-' unary | atom
    def unary(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Node:
        kind, value, pos = self.advance()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if value == "y":
                return Var()
            if value in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                k, v, p = self.peek()
                if k == "op" and v == ",":
                    raise ExprSyntaxError(f"{value} takes exactly one argument", p)
                self.expect(")")
                return Func(value, arg)
            if value == "pow":
                self.expect("(")
                base = self.expr()
                k, v, p = self.peek()
                if not (k == "op" and v == ","):
                    raise ExprSyntaxError("pow takes exactly two arguments", p)
                self.advance()
                exponent = self._integer()
                self.expect(")")
                return Pow(base, exponent)
            raise ExprSyntaxError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError("expected a value", pos)

    def _integer(self) -> int:
        negative = False
        kind, value, pos = self.advance()
        if kind == "op" and value == "-":
            negative = True
            kind, value, pos = self.advance()
        if kind != "num" or float(value) != int(float(value)):
            raise ExprSyntaxError("pow exponent must be an integer", pos)
        n = int(float(value))
        return -n if negative else n


def _eval(node: Node, y: float) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return y
    if isinstance(node, Neg):
        return -_eval(node.arg, y)
    if isinstance(node, BinOp):
        a = _eval(node.lhs, y)
        b = _eval(node.rhs, y)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Func):
        v = _eval(node.arg, y)
        if node.name == "cos":
            return math.cos(v)
        if node.name == "sin":
            return math.sin(v)
        return math.exp(v)
    return _eval(node.base, y) ** node.exponent


_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_ATOM = 1, 2, 3, 4


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC_ADD if node.op in "+-" else _PREC_MUL
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def _print(node: Node) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return "y"
    if isinstance(node, Neg):
        inner = _print(node.arg)
        if _prec(node.arg) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        lhs = _print(node.lhs)
        if _prec(node.lhs) < _prec(node):
            lhs = f"({lhs})"
        rhs = _print(node.rhs)
        # the grammar is left-associative, so a right child at equal
        # precedence must keep its parens to preserve the tree (and the
        # bit-exact evaluation order); same for a leading unary minus
        if _prec(node.rhs) <= _prec(node) or isinstance(node.rhs, Neg):
            rhs = f"({rhs})"
        return f"{lhs}{node.op}{rhs}"
    if isinstance(node, Func):
        return f"{node.name}({_print(node.arg)})"
    return f"pow({_print(node.base)}, {node.exponent})"


@dataclass(frozen=True)
class NonlinearityExpr:
    """An immutable parsed expression; callable as a function of ``y``."""

    ast: Node

    def __call__(self, y: float) -> float:
        return eval_expr(self, y)


def parse_expr(src: str) -> NonlinearityExpr:
    """Parse ``src`` into an expression tree under standard precedence.

    Raises :class:`ExprSyntaxError` with the offending position on malformed
    input, unknown identifiers, or arity mistakes.
    """
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(src)
    node = parser.expr()
    kind, value, pos = parser.peek()
    if kind != "eof":
        raise ExprSyntaxError(f"unexpected trailing input {value!r}", pos)
    return NonlinearityExpr(node)


def eval_expr(expr: NonlinearityExpr, y: float) -> float:
    """Evaluate at ``y`` with IEEE double semantics; non-finite results raise."""
    try:
        value = _eval(expr.ast, y)
    except ZeroDivisionError as exc:
        raise ExprEvalError(f"division by zero at y={y!r}") from exc
    except OverflowError as exc:
        raise ExprEvalError(f"overflow at y={y!r}") from exc
    if not math.isfinite(value):
        raise ExprEvalError(f"non-finite value at y={y!r}")
    return value


def print_expr(expr: NonlinearityExpr) -> str:
    """Render to source text; reparsing yields an identical tree."""
    return _print(expr.ast)
