"""Minimal arithmetic expression parser for scalar coefficient functions.

Grammar (no implicit multiplication, functions take one parenthesized
argument, ``^`` is right-associative)::

    expr   := term (('+'|'-') term)*
    term   := '-' term | chain
    chain  := factor (('*'|'/') factor)*
    factor := atom ('^' factor)?
    atom   := '-' atom | number | 'x' | ident '(' expr ')' | '(' expr ')'

A leading minus negates the whole product chain (``-sin(x)*cos(x)^3``
parses as the negation of the product), while a minus after an operator
negates only its atom (``2^-3``, ``2*-3``).

Numbers are decimals with optional fraction and exponent.  Evaluation is
IEEE double; a NaN/Inf result raises :class:`~emholder.exceptions.EvalError`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .exceptions import EvalError, ParseError

__all__ = ["Expr", "parse", "evaluate"]

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "sqrt": np.sqrt,
    "arctan": np.arctan,
}


class Expr:
    """Base class for AST nodes."""

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr


_TOKEN = re.compile(r"""
    (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos].isspace():
            pos += 1
            continue
        match = _TOKEN.match(source, pos)
        if match is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        tokens.append((match.lastgroup, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"expected {op!r}", pos)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.term())
        return self.chain()

    def chain(self) -> Expr:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.factor())
            else:
                return node

    def factor(self) -> Expr:
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            node = BinOp("^", node, self.factor())  # right-associative
        return node

    def atom(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "op" and text == "-":
            return Neg(self.atom())
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text == "x":
                return Var()
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
        raise ParseError(f"unexpected token {text!r}" if text else "unexpected end of input", pos)


def parse(source: str) -> Expr:
    """Parse ``source`` into an AST or raise ParseError with a byte offset."""
    return _Parser(source).parse()


def _eval_node(node: Expr, x):
    if isinstance(node, Num):
        return np.float64(node.value) if np.isscalar(x) else np.full(np.shape(x), node.value)
    if isinstance(node, Var):
        return np.float64(x) if np.isscalar(x) else np.asarray(x, dtype=np.float64)
    if isinstance(node, Neg):
        return -_eval_node(node.operand, x)
    if isinstance(node, Call):
        with np.errstate(all="ignore"):
            return _FUNCTIONS[node.name](_eval_node(node.arg, x))
    if isinstance(node, BinOp):
        left = _eval_node(node.left, x)
        right = _eval_node(node.right, x)
        with np.errstate(all="ignore"):
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if node.op == "/":
                return left / right
            if node.op == "^":
                return np.power(left, right)
    raise TypeError(f"not an Expr node: {node!r}")


def evaluate(node: Expr, x):
    """Evaluate the AST at scalar or array ``x``; non-finite results raise."""
    result = _eval_node(node, x)
    if not np.all(np.isfinite(result)):
        raise EvalError(f"expression evaluated to a non-finite value at x={x!r}")
    return result
