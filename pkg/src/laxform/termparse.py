"""Recursive-descent parser for the textual term language.

Grammar (whitespace-insensitive, juxtaposition multiplies)::

    sum    := term (("+" | "-") term)*
    term   := unary (("*" | "/")? unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" "-"? INT)?
    atom   := NUMBER | "i" | "I" | "N" | name jet?
            | "tr" "(" sum ")" | "D" jet "(" sum ")"
            | "(" sum ")" | "[" sum "," sum "]"
    jet    := "_" (coord | "{" coord ("^" INT)? ("," coord ("^" INT)?)* "}")

``phi_{eta}`` is a jet, ``D_{xi,eta}(...)`` a total derivative and ``[A,B]``
a commutator.  Parameters become coefficients; division is only allowed by
coefficient expressions.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Optional, Tuple

from .expr import Expr, ExprError, MATRIX, UnknownSymbol, Workspace, comm, tr
from .params import I_UNIT, ParamScalar

__all__ = ["parse_term", "ParseError"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[^\W\d_][^\W_]*)|(?P<op>[-+*/^()\[\]{},_]))"
)


class ParseError(ExprError):
    def __init__(self, msg: str, text: str = "", pos: int = -1):
        self.pos = pos
        if pos >= 0:
            msg = f"{msg} at column {pos + 1} in {text!r}"
        super().__init__(msg)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, ws: Workspace, text: str):
        self.ws = ws
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    # token helpers
    def peek(self):
        return self.toks[self.k]

    def next(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def at(self, value: str) -> bool:
        kind, v, _ = self.peek()
        return kind == "op" and v == value

    def expect(self, value: str):
        kind, v, pos = self.next()
        if kind != "op" or v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", self.text, pos)

    def fail(self, msg: str):
        raise ParseError(msg, self.text, self.peek()[2])

    # grammar
    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            return Expr.zero(self.ws)
        e = self.sum()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return e

    def sum(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.next()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def _starts_atom(self) -> bool:
        kind, v, _ = self.peek()
        return kind in ("num", "name") or (kind == "op" and v in "([")

    def term(self) -> Expr:
        e = self.unary()
        while True:
            if self.at("*"):
                self.next()
                e = e * self.unary()
            elif self.at("/"):
                pos = self.next()[2]
                rhs = self.unary()
                if not rhs.is_param_scalar():
                    raise ParseError("division only by coefficients", self.text, pos)
                if rhs.is_zero():
                    raise ParseError("division by zero", self.text, pos)
                e = e / rhs
            elif self._starts_atom():
                e = e * self.power()
            else:
                return e

    def unary(self) -> Expr:
        if self.at("-"):
            self.next()
            return -self.unary()
        if self.at("+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at("^"):
            self.next()
            neg = False
            if self.at("-"):
                self.next()
                neg = True
            kind, v, pos = self.next()
            if kind != "num" or not v.isdigit():
                raise ParseError("exponent must be an integer", self.text, pos)
            n = -int(v) if neg else int(v)
            if n < -1 and not base.is_param_scalar():
                raise ParseError("only ^-1 is allowed on matrix fields", self.text, pos)
            if n < 0 and base.is_param_scalar():
                return Expr.constant(self.ws, base.as_param_scalar() ** n)
            try:
                return base ** n
            except ExprError as exc:
                raise ParseError(str(exc), self.text, pos) from None
        return base

    def _jet_suffix(self) -> Optional[Tuple[int, ...]]:
        if not self.at("_"):
            return None
        self.next()
        orders = {}
        if self.at("{"):
            self.next()
            while True:
                c = self._coord()
                n = 1
                if self.at("^"):
                    self.next()
                    kind, v, pos = self.next()
                    if kind != "num" or not v.isdigit():
                        raise ParseError("derivative order must be an integer", self.text, pos)
                    n = int(v)
                orders[c] = orders.get(c, 0) + n
                if self.at(","):
                    self.next()
                    continue
                self.expect("}")
                break
        else:
            c = self._coord()
            orders[c] = 1
        return self.ws.index_of(orders)

    def _coord(self) -> str:
        kind, v, pos = self.next()
        if kind != "name" or v not in self.ws.coords:
            raise ParseError(f"unknown coordinate {v!r}", self.text, pos)
        return v

    def atom(self) -> Expr:
        kind, v, pos = self.next()
        ws = self.ws
        if kind == "num":
            return Expr.constant(ws, ParamScalar.const(Fraction(v)))
        if kind == "op":
            if v == "(":
                e = self.sum()
                self.expect(")")
                return e
            if v == "[":
                a = self.sum()
                self.expect(",")
                b = self.sum()
                self.expect("]")
                return comm(a, b)
            raise ParseError(f"unexpected {v!r}", self.text, pos)
        if kind == "end":
            raise ParseError("unexpected end of input", self.text, pos)
        if v == "i":
            return Expr.constant(ws, ParamScalar.const(I_UNIT))
        if v == "I":
            return ws.identity()
        if v == "N":
            return ws.dim()
        if v == "tr":
            self.expect("(")
            e = self.sum()
            self.expect(")")
            if e.shape != MATRIX and not e.is_zero():
                raise ParseError("trace applies to matrix expressions only", self.text, pos)
            return tr(e)
        if v == "D":
            idx = self._jet_suffix()
            if idx is None:
                raise ParseError("total derivative needs a coordinate subscript", self.text, pos)
            self.expect("(")
            e = self.sum()
            self.expect(")")
            from .varcalc import total_derivative

            for k, n in enumerate(idx):
                for _ in range(n):
                    e = total_derivative(e, ws.coords[k])
            return e
        if v in ws.params:
            if self.at("_"):
                raise ParseError(f"parameter {v!r} cannot carry derivatives", self.text, pos)
            return Expr.constant(ws, ParamScalar.var(v))
        if v in ws.fields:
            idx = self._jet_suffix()
            return ws.jet(v, index=idx if idx is not None else ws.zero_index)
        if v in ws.coords:
            raise ParseError(f"coordinate {v!r} is not an expression", self.text, pos)
        raise UnknownSymbol(f"unknown symbol {v!r} at column {pos + 1} in {self.text!r}")


def parse_term(ws: Workspace, text: str) -> Expr:
    return _Parser(ws, text).parse()
