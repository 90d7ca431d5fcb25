"""Expression parsing and first-order forward-mode evaluation.

Expressions are small closed-form formulas in the two real variables ``x``
and ``y``.  The grammar supports real constants, ``pi``, the four arithmetic
operations, unary minus, integer powers via ``^``, and the functions
``exp``, ``sin``, ``cos``, ``tan``, ``log``.  Precedence, tightest first:
``^``, unary minus, ``*`` ``/``, ``+`` ``-``; binary operators associate to
the left.

Evaluation is forward-mode: every node propagates a value together with the
partial derivatives with respect to ``x`` and ``y``.  The scalar entry point
:func:`eval_dual` never returns a non-finite value silently; division by
zero, ``log`` of a non-positive value, a ``tan`` pole, or overflow all raise
:class:`DomainFault`.  Grid evaluation (:func:`eval_dual_grid`,
:func:`eval_grid`) is unchecked and may contain non-finite entries that the
caller is expected to mask.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "ParseError",
    "DomainFault",
    "DualValue",
    "Expression",
    "parse",
    "unparse",
    "eval_dual",
    "eval_dual_grid",
    "eval_grid",
]


class ParseError(ValueError):
    """Raised for any input string outside the grammar.

    ``offset`` is the 0-based character position of the problem.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class DomainFault(ArithmeticError):
    """Raised when evaluation would produce a non-finite value."""


# ---------------------------------------------------------------------------
# Dual numbers


@dataclass(frozen=True)
class DualValue:
    """A value with its first partials, closed under arithmetic.

    Fields may be floats or numpy arrays of identical shape; the arithmetic
    below implements the product, quotient, power, and chain rules.
    """

    value: float
    dx: float
    dy: float

    def __add__(self, other: "DualValue") -> "DualValue":
        return DualValue(self.value + other.value, self.dx + other.dx, self.dy + other.dy)

    def __sub__(self, other: "DualValue") -> "DualValue":
        return DualValue(self.value - other.value, self.dx - other.dx, self.dy - other.dy)

    def __mul__(self, other: "DualValue") -> "DualValue":
        return DualValue(
            self.value * other.value,
            self.dx * other.value + self.value * other.dx,
            self.dy * other.value + self.value * other.dy,
        )

    def __truediv__(self, other: "DualValue") -> "DualValue":
        inv = 1.0 / other.value
        q = self.value * inv
        return DualValue(q, (self.dx - q * other.dx) * inv, (self.dy - q * other.dy) * inv)

    def __neg__(self) -> "DualValue":
        return DualValue(-self.value, -self.dx, -self.dy)

    def powi(self, n: int) -> "DualValue":
        """Integer power with the rule d(v^n) = n v^(n-1) dv."""
        if n == 0:
            one = np.ones_like(np.asarray(self.value)) if isinstance(self.value, np.ndarray) else 1.0
            zero = np.zeros_like(np.asarray(self.value)) if isinstance(self.value, np.ndarray) else 0.0
            return DualValue(one, zero, zero)
        v = np.power(self.value, n)
        g = n * np.power(self.value, n - 1)
        return DualValue(v, g * self.dx, g * self.dy)


def _apply(fn: str, a: DualValue) -> DualValue:
    if fn == "exp":
        v = np.exp(a.value)
        return DualValue(v, v * a.dx, v * a.dy)
    if fn == "sin":
        v = np.sin(a.value)
        g = np.cos(a.value)
        return DualValue(v, g * a.dx, g * a.dy)
    if fn == "cos":
        v = np.cos(a.value)
        g = -np.sin(a.value)
        return DualValue(v, g * a.dx, g * a.dy)
    if fn == "tan":
        v = np.tan(a.value)
        g = 1.0 + v * v
        return DualValue(v, g * a.dx, g * a.dy)
    if fn == "log":
        v = np.log(a.value)
        g = 1.0 / a.value
        return DualValue(v, g * a.dx, g * a.dy)
    raise AssertionError(f"unknown function {fn!r}")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # 'x' or 'y'


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Pow, Call]

_FUNCTIONS = ("exp", "sin", "cos", "tan", "log")


@dataclass(frozen=True)
class Expression:
    """A parsed expression; compare with ``==`` for structural equality."""

    ast: Node

    def __str__(self) -> str:
        return unparse(self)


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"expected {op!r}", pos)
        self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self) -> Node:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "^":
                self.advance()
                node = Pow(node, self.exponent())
            else:
                return node

    def exponent(self) -> int:
        """An integer literal, optionally signed, optionally parenthesized."""
        kind, text, pos = self.peek()
        if kind == "op" and text == "(":
            self.advance()
            n = self.exponent()
            self.expect_op(")")
            return n
        sign = 1
        if kind == "op" and text == "-":
            self.advance()
            sign = -1
            kind, text, pos = self.peek()
        if kind != "num":
            raise ParseError("non-integer exponent", pos)
        if not re.fullmatch(r"\d+", text):
            raise ParseError("non-integer exponent", pos)
        self.advance()
        return sign * int(text)

    def atom(self) -> Node:
        kind, text, pos = self.advance()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text in ("x", "y"):
                return Var(text)
            if text == "pi":
                return Const(np.pi)
            if text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


def parse(text: str) -> Expression:
    """Parse ``text`` into an :class:`Expression` or raise :class:`ParseError`."""
    if not isinstance(text, str):
        raise ParseError("input must be a string", 0)
    return Expression(_Parser(text).parse())


# ---------------------------------------------------------------------------
# Unparsing

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_NEG, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _level(node: Node) -> int:
    if isinstance(node, BinOp):
        return _LEVEL_ADD if node.op in "+-" else _LEVEL_MUL
    if isinstance(node, Neg):
        return _LEVEL_NEG
    if isinstance(node, Pow):
        return _LEVEL_POW
    return _LEVEL_ATOM


def _fmt_const(v: float) -> str:
    if v == np.pi:
        return "pi"
    return repr(float(v))


def _unparse(node: Node, min_level: int) -> str:
    wrap = _level(node) < min_level
    if isinstance(node, Const):
        if node.value < 0:
            # negative literals only arise from constant folding; print safely
            text = f"(-{_fmt_const(-node.value)})"
            return text
        text = _fmt_const(node.value)
    elif isinstance(node, Var):
        text = node.name
    elif isinstance(node, Neg):
        text = f"-{_unparse(node.operand, _LEVEL_NEG)}"
    elif isinstance(node, BinOp):
        lvl = _level(node)
        left = _unparse(node.left, lvl)
        right = _unparse(node.right, lvl + 1)
        text = f"{left} {node.op} {right}"
    elif isinstance(node, Pow):
        base = _unparse(node.base, _LEVEL_ATOM)
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        text = f"{base}^{exp}"
    elif isinstance(node, Call):
        text = f"{node.func}({_unparse(node.arg, 0)})"
    else:  # pragma: no cover
        raise AssertionError(node)
    if wrap:
        return f"({text})"
    return text


def unparse(e: Expression) -> str:
    """Render an expression to a string that re-parses to an equal AST."""
    return _unparse(e.ast, 0)


# ---------------------------------------------------------------------------
# Evaluation


def _eval(node: Node, x, y, zero, one) -> DualValue:
    if isinstance(node, Const):
        return DualValue(node.value * one, zero, zero)
    if isinstance(node, Var):
        if node.name == "x":
            return DualValue(x, one, zero)
        return DualValue(y, zero, one)
    if isinstance(node, Neg):
        return -_eval(node.operand, x, y, zero, one)
    if isinstance(node, BinOp):
        a = _eval(node.left, x, y, zero, one)
        b = _eval(node.right, x, y, zero, one)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Pow):
        return _eval(node.base, x, y, zero, one).powi(node.exponent)
    if isinstance(node, Call):
        return _apply(node.func, _eval(node.arg, x, y, zero, one))
    raise AssertionError(node)  # pragma: no cover


def _eval_value(node: Node, x, y):
    """Value-only evaluation; cheaper when derivatives are not needed."""
    if isinstance(node, Const):
        return node.value * (np.ones_like(x) if isinstance(x, np.ndarray) else 1.0)
    if isinstance(node, Var):
        return x if node.name == "x" else y
    if isinstance(node, Neg):
        return -_eval_value(node.operand, x, y)
    if isinstance(node, BinOp):
        a = _eval_value(node.left, x, y)
        b = _eval_value(node.right, x, y)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Pow):
        return np.power(_eval_value(node.base, x, y), node.exponent)
    if isinstance(node, Call):
        fn: Callable = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "tan": np.tan, "log": np.log}[node.func]
        return fn(_eval_value(node.arg, x, y))
    raise AssertionError(node)  # pragma: no cover


def eval_dual(e: Expression, x: float, y: float) -> DualValue:
    """Evaluate with partials at a point; raise :class:`DomainFault` on faults.

    Faults cover division by zero, ``log`` of a non-positive argument,
    ``tan`` poles, and overflow: anything whose value or partials would be
    non-finite.
    """
    with np.errstate(all="ignore"):
        d = _eval(e.ast, np.float64(x), np.float64(y), np.float64(0.0), np.float64(1.0))
    if not (np.isfinite(d.value) and np.isfinite(d.dx) and np.isfinite(d.dy)):
        raise DomainFault(
            f"non-finite evaluation at ({x!r}, {y!r}): "
            "division by zero, log/tan domain fault, or overflow"
        )
    return DualValue(float(d.value), float(d.dx), float(d.dy))


def eval_dual_grid(e: Expression, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unchecked vectorized evaluation: returns (value, dx, dy) arrays.

    Entries may be non-finite where evaluation faults; callers mask them.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    zero = np.zeros_like(x)
    one = np.ones_like(x)
    with np.errstate(all="ignore"):
        d = _eval(e.ast, x, y, zero, one)
    value = np.broadcast_to(np.asarray(d.value, dtype=np.float64), x.shape).copy()
    dx = np.broadcast_to(np.asarray(d.dx, dtype=np.float64), x.shape).copy()
    dy = np.broadcast_to(np.asarray(d.dy, dtype=np.float64), x.shape).copy()
    return value, dx, dy


def eval_grid(e: Expression, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Unchecked vectorized value-only evaluation."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(all="ignore"):
        v = _eval_value(e.ast, x, y)
    return np.broadcast_to(np.asarray(v, dtype=np.float64), x.shape).copy()
