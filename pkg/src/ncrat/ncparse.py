"""Recursive-descent parser for NC rational expressions.

Grammar::

    expr   := term {("+" | "-") term}
    term   := factor {"*" factor}
    factor := atom ["^-1"]
    atom   := number | "z" digits | "(" expr ")" | "-" atom

Numbers are decimals with an optional ``i`` suffix; a bare ``i`` is the
imaginary unit.  Complex literals such as ``(1+2i)`` are ordinary
parenthesized sums.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import realize as rz
from .errors import NCRatError, SingularAtZero


class ParseError(NCRatError, SyntaxError):
    """Malformed input; ``location`` holds the character offset."""

    def __init__(self, detail: str, pos: int):
        NCRatError.__init__(self, detail, str(pos))
        self.pos = pos

    def __str__(self) -> str:
        return f"{self.detail} at position {self.pos}"


class UnknownVariable(NCRatError):
    pass


# ------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Inv:
    arg: "Expr"


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Inv]


@dataclass(frozen=True)
class Expression:
    d: int
    root: Expr

    def __str__(self) -> str:
        return to_text(self.root)


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)"
    r"|(?P<var>z\d+)"
    r"|(?P<imag>i)"
    r"|(?P<inv>\^\s*-\s*1)"
    r"|(?P<op>[-+*()])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, d: int):
        self.toks = _tokenize(text)
        self.i = 0
        self.d = d

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            node = Mul(node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.atom()
        if self.peek()[0] == "inv":
            self.take()
            node = Inv(node)
        return node

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(complex(float(val[:-1]) * 1j) if val.endswith("i") else complex(float(val)))
        if kind == "imag":
            return Num(1j)
        if kind == "var":
            k = int(val[1:])
            if not 1 <= k <= self.d:
                raise UnknownVariable(f"variable {val} outside z1..z{self.d}", str(pos))
            return Var(k)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        if (kind, val) == ("op", "-"):
            return Neg(self.atom())
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str, d: int) -> Expression:
    p = _Parser(text, d)
    root = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", pos)
    return Expression(d, root)


# --------------------------------------------------------- pretty printer


def _num_text(c: complex) -> str:
    re_, im = c.real, c.imag
    if im == 0:
        return repr(re_) if re_ >= 0 else f"(-{repr(-re_)})"
    if re_ == 0:
        return f"{repr(im)}i" if im >= 0 else f"(-{repr(-im)}i)"
    sign = "+" if im >= 0 else "-"
    return f"({repr(re_)}{sign}{repr(abs(im))}i)"


def to_text(e: Expr) -> str:
    """Fully parenthesized text that reparses to the same tree."""
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return f"z{e.index}"
    if isinstance(e, Neg):
        return f"-({to_text(e.arg)})"
    if isinstance(e, Add):
        return f"({to_text(e.left)} + {to_text(e.right)})"
    if isinstance(e, Sub):
        return f"({to_text(e.left)} - {to_text(e.right)})"
    if isinstance(e, Mul):
        return f"({to_text(e.left)} * {to_text(e.right)})"
    if isinstance(e, Inv):
        return f"({to_text(e.arg)})^-1"
    raise TypeError(type(e))


# ------------------------------------------------------------ realization


def realize_expr(e: Expression, tol: float = rz.DEFAULT_RANK_TOL) -> rz.FMRealization:
    d = e.d

    def go(node: Expr) -> rz.FMRealization:
        if isinstance(node, Num):
            return rz.FMRealization.constant(d, node.value)
        if isinstance(node, Var):
            return rz.FMRealization.variable(d, node.index)
        if isinstance(node, Neg):
            return rz.scale(-1.0, go(node.arg))
        if isinstance(node, Add):
            return rz.minimize(rz.add(go(node.left), go(node.right)), tol)
        if isinstance(node, Sub):
            return rz.minimize(rz.add(go(node.left), rz.scale(-1.0, go(node.right))), tol)
        if isinstance(node, Mul):
            return rz.minimize(rz.mul(go(node.left), go(node.right)), tol)
        if isinstance(node, Inv):
            inner = go(node.arg)
            try:
                return rz.minimize(rz.invert(inner), tol)
            except SingularAtZero as exc:
                raise SingularAtZero(exc.detail, to_text(node.arg)) from exc
        raise TypeError(type(node))

    return rz.minimize(go(e.root), tol)


def eval_direct(e: Expression, Z) -> np.ndarray:
    """Evaluate by plain matrix arithmetic at a point Z."""
    Z = rz.as_point(Z, e.d)
    m = Z.shape[1]
    eye = np.eye(m, dtype=complex)

    def go(node: Expr) -> np.ndarray:
        if isinstance(node, Num):
            return node.value * eye
        if isinstance(node, Var):
            return Z[node.index - 1]
        if isinstance(node, Neg):
            return -go(node.arg)
        if isinstance(node, Add):
            return go(node.left) + go(node.right)
        if isinstance(node, Sub):
            return go(node.left) - go(node.right)
        if isinstance(node, Mul):
            return go(node.left) @ go(node.right)
        if isinstance(node, Inv):
            return np.linalg.inv(go(node.arg))
        raise TypeError(type(node))

    return go(e.root)


def realize_text(text: str, d: int) -> rz.FMRealization:
    return realize_expr(parse(text, d))
