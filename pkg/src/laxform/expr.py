"""Canonical noncommutative expressions over jet coordinates.

An :class:`Expr` is a finite sum of monomials with :class:`ParamScalar`
coefficients.  A monomial is a pair ``(scalars, word)``:

* ``scalars`` is a sorted tuple of commuting scalar factors, each either a
  scalar jet ``(0, field, index)`` or a cyclically normalised trace
  ``(1, word)``; ``(1, ())`` is ``tr(I)``, the symbolic dimension ``N``;
* ``word`` is an ordered tuple of matrix atoms ``(field, index, inverse)``.
  The empty word is the identity matrix.

Canonical form means: fully distributed, like monomials merged, zero
coefficients dropped, adjacent ``X X^-1`` pairs cancelled (cyclically inside
traces) and every trace word rotated to its lexicographically least form.
Syntactic equality of canonical forms is therefore the equality test.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .params import GaussRat, ParamScalar

__all__ = [
    "SCALAR",
    "MATRIX",
    "ExprError",
    "ShapeError",
    "UnknownSymbol",
    "Workspace",
    "FieldSymbol",
    "Expr",
    "tr",
    "comm",
    "equal",
    "substitute_param",
]

SCALAR = "scalar"
MATRIX = "matrix"

RESERVED = frozenset({"i", "I", "N", "tr", "D"})
_IDENT = re.compile(r"[^\W\d_][^\W_]*\Z")

Atom = Tuple[str, Tuple[int, ...], bool]
Word = Tuple[Atom, ...]
Key = Tuple[tuple, Word]


class ExprError(ValueError):
    """Malformed expression construction."""


class ShapeError(ExprError):
    pass


class UnknownSymbol(ExprError):
    pass


@dataclass(frozen=True)
class FieldSymbol:
    name: str
    shape: str
    deps: Tuple[str, ...]
    constant: bool = False


class Workspace:
    """Symbol table: ordered coordinates, parameters and fields.

    Coordinate order is fixed at creation; it drives jet multi-indices and
    the orientation of 2-form components.
    """

    def __init__(self, coords: Sequence[str], params: Iterable[str] = (), name: str = ""):
        coords = tuple(coords)
        for c in coords:
            self._check_ident(c)
        if len(set(coords)) != len(coords):
            raise ExprError(f"duplicate coordinate in {coords}")
        self.name = name
        self.coords = coords
        self._cindex = {c: k for k, c in enumerate(coords)}
        self.zero_index = (0,) * len(coords)
        self._units = tuple(tuple(int(k == j) for j in range(len(coords))) for k in range(len(coords)))
        self.params: List[str] = []
        self.fields: Dict[str, FieldSymbol] = {}
        self._depmask: Dict[str, Tuple[bool, ...]] = {}
        for p in params:
            self.add_param(p)

    @staticmethod
    def _check_ident(name: str):
        if not _IDENT.match(name) or name in RESERVED:
            raise ExprError(f"invalid identifier {name!r}")

    def _check_fresh(self, name: str):
        self._check_ident(name)
        if name in self._cindex or name in self.fields or name in self.params:
            raise ExprError(f"duplicate declaration of {name!r}")

    # declarations -----------------------------------------------------------
    def add_param(self, name: str) -> ParamScalar:
        self._check_fresh(name)
        self.params.append(name)
        return ParamScalar.var(name)

    def add_field(self, name: str, shape: str = MATRIX, deps: Optional[Iterable[str]] = None,
                  constant: bool = False) -> "Expr":
        self._check_fresh(name)
        if shape not in (SCALAR, MATRIX):
            raise ShapeError(f"unknown shape {shape!r}")
        deps = tuple(self.coords if deps is None else deps)
        if constant:
            deps = ()
        for c in deps:
            if c not in self._cindex:
                raise UnknownSymbol(f"field {name!r} depends on unknown coordinate {c!r}")
        deps = tuple(c for c in self.coords if c in deps)
        self.fields[name] = FieldSymbol(name, shape, deps, constant)
        self._depmask[name] = tuple(c in deps for c in self.coords)
        return self.jet(name)

    # lookups ----------------------------------------------------------------
    def coord_index(self, c: str) -> int:
        try:
            return self._cindex[c]
        except KeyError:
            raise UnknownSymbol(f"unknown coordinate {c!r}") from None

    def field_of(self, name: str) -> FieldSymbol:
        try:
            return self.fields[name]
        except KeyError:
            raise UnknownSymbol(f"unknown field {name!r}") from None

    def depends(self, name: str, k: int) -> bool:
        return self._depmask[name][k]

    def unit(self, k: int) -> Tuple[int, ...]:
        return self._units[k]

    def index_of(self, orders: Mapping[str, int]) -> Tuple[int, ...]:
        idx = [0] * len(self.coords)
        for c, n in orders.items():
            if n < 0:
                raise ExprError("negative derivative order")
            idx[self.coord_index(c)] += n
        return tuple(idx)

    def index_str(self, idx: Tuple[int, ...]) -> str:
        parts = []
        for c, n in zip(self.coords, idx):
            if n == 1:
                parts.append(c)
            elif n > 1:
                parts.append(f"{c}^{n}")
        return ",".join(parts)

    # expression constructors --------------------------------------------------
    def jet(self, name: str, *coords: str, index: Optional[Tuple[int, ...]] = None) -> "Expr":
        fs = self.field_of(name)
        if index is None:
            orders: Dict[str, int] = {}
            for c in coords:
                orders[c] = orders.get(c, 0) + 1
            index = self.index_of(orders)
        mask = self._depmask[name]
        if any(n and not mask[k] for k, n in enumerate(index)):
            return Expr.zero(self, fs.shape)
        if fs.shape == SCALAR:
            return Expr(self, SCALAR, {(((0, name, index),), ()): _ONE})
        return Expr(self, MATRIX, {((), ((name, index, False),)): _ONE})

    def inv(self, name: str) -> "Expr":
        fs = self.field_of(name)
        if fs.shape != MATRIX:
            raise ShapeError(f"only matrix fields can be inverted, {name!r} is scalar")
        return Expr(self, MATRIX, {((), ((name, self.zero_index, True),)): _ONE})

    def param(self, name: str) -> ParamScalar:
        if name not in self.params:
            raise UnknownSymbol(f"unknown parameter {name!r}")
        return ParamScalar.var(name)

    def const(self, c) -> "Expr":
        return Expr.constant(self, c)

    def identity(self) -> "Expr":
        return Expr(self, MATRIX, {((), ()): _ONE})

    def dim(self) -> "Expr":
        return Expr(self, SCALAR, {(((1, ()),), ()): _ONE})

    def parse(self, text: str) -> "Expr":
        from .termparse import parse_term

        return parse_term(self, text)

    make_expr = parse

    def __repr__(self):
        return f"Workspace({self.name or ''}coords={self.coords}, params={self.params}, fields={list(self.fields)})"


_ONE = ParamScalar.const(1)


# --- word helpers -------------------------------------------------------------

def _cancels(x: Atom, y: Atom) -> bool:
    return x[0] == y[0] and x[2] != y[2] and x[1] == y[1]


def free_concat(w1: Word, w2: Word) -> Word:
    """Concatenate two reduced words, cancelling ``X X^-1`` at the junction."""
    if not w1:
        return w2
    if not w2:
        return w1
    i, j = len(w1), 0
    while i > 0 and j < len(w2) and _cancels(w1[i - 1], w2[j]):
        i -= 1
        j += 1
    return w1[:i] + w2[j:]


def free_reduce(w: Sequence[Atom]) -> Word:
    out: List[Atom] = []
    for a in w:
        if out and _cancels(out[-1], a):
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def canon_trace(w: Sequence[Atom]) -> Word:
    """Cyclically reduce ``w`` and rotate it to the least rotation."""
    w = free_reduce(w)
    while len(w) >= 2 and _cancels(w[-1], w[0]):
        w = w[1:-1]
    if len(w) <= 1:
        return w
    return min(w[k:] + w[:k] for k in range(len(w)))


def _merge_scalars(s1: tuple, s2: tuple) -> tuple:
    if not s1:
        return s2
    if not s2:
        return s1
    return tuple(sorted(s1 + s2))


def mono_mul(k1: Key, k2: Key) -> Key:
    return (_merge_scalars(k1[0], k2[0]), free_concat(k1[1], k2[1]))


def _acc(terms: Dict[Key, ParamScalar], key: Key, c: ParamScalar):
    old = terms.get(key)
    if old is not None:
        c = old + c
        if c.is_zero():
            del terms[key]
            return
        terms[key] = c
    elif not c.is_zero():
        terms[key] = c


def _coerce_scalar(x) -> Optional[ParamScalar]:
    if isinstance(x, ParamScalar):
        return x
    if isinstance(x, (int, Rational, GaussRat, complex)):
        return ParamScalar.const(GaussRat.coerce(x))
    return None


class Expr:
    """Immutable canonical expression.  Build with :class:`Workspace` helpers."""

    __slots__ = ("ws", "shape", "terms", "_hash")

    def __init__(self, ws: Workspace, shape: str, terms: Dict[Key, ParamScalar]):
        self.ws = ws
        self.shape = shape
        self.terms = terms
        self._hash = None

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, ws: Workspace, shape: str = SCALAR) -> "Expr":
        return cls(ws, shape, {})

    @classmethod
    def constant(cls, ws: Workspace, c) -> "Expr":
        c = _coerce_scalar(c)
        if c is None:
            raise TypeError("constant must be numeric or ParamScalar")
        return cls(ws, SCALAR, {((), ()): c} if not c.is_zero() else {})

    @classmethod
    def from_terms(cls, ws: Workspace, shape: str, items: Iterable[Tuple[Key, ParamScalar]]) -> "Expr":
        terms: Dict[Key, ParamScalar] = {}
        for k, c in items:
            _acc(terms, k, c)
        return cls(ws, shape, terms)

    # basic queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def is_param_scalar(self) -> bool:
        return self.shape == SCALAR and all(k == ((), ()) for k in self.terms)

    def as_param_scalar(self) -> ParamScalar:
        if not self.is_param_scalar():
            raise ExprError(f"{self} is not a pure coefficient")
        return self.terms.get(((), ()), ParamScalar({}))

    def jets(self) -> set:
        """Jet coordinates ``(field, index)`` occurring anywhere (inverses as index zero)."""
        out = set()
        for (scal, word) in self.terms:
            for s in scal:
                if s[0] == 0:
                    out.add((s[1], s[2]))
                else:
                    out.update((a[0], a[1]) for a in s[1])
            out.update((a[0], a[1]) for a in word)
        return out

    def field_names(self) -> set:
        return {name for name, _ in self.jets()}

    def _check_ws(self, other: "Expr"):
        if other.ws is not self.ws:
            raise ExprError("expressions from different workspaces")

    def _shape_sum(self, other: "Expr") -> str:
        if self.shape == other.shape:
            return self.shape
        if not self.terms:
            return other.shape
        if not other.terms:
            return self.shape
        raise ShapeError(f"cannot add {self.shape} and {other.shape} expressions")

    # arithmetic -----------------------------------------------------------------
    def _lift(self, other) -> "Expr":
        if isinstance(other, Expr):
            self._check_ws(other)
            return other
        c = _coerce_scalar(other)
        if c is None:
            raise TypeError(f"cannot combine Expr with {type(other).__name__}")
        if self.shape == MATRIX and not c.is_zero():
            raise ShapeError("cannot add a scalar to a matrix; multiply by the identity explicitly")
        return Expr.constant(self.ws, c)

    def __add__(self, other):
        other = self._lift(other)
        shape = self._shape_sum(other)
        if len(other.terms) > len(self.terms):
            big, small = other, self
        else:
            big, small = self, other
        terms = dict(big.terms)
        for k, c in small.terms.items():
            _acc(terms, k, c)
        return Expr(self.ws, shape, terms)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return Expr(self.ws, self.shape, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Expr":
        c = ParamScalar.coerce(c)
        if c.is_zero():
            return Expr(self.ws, self.shape, {})
        if c == _ONE:
            return self
        return Expr(self.ws, self.shape, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Expr):
            c = _coerce_scalar(other)
            if c is None:
                return NotImplemented
            return self.scale(c)
        self._check_ws(other)
        shape = MATRIX if MATRIX in (self.shape, other.shape) else SCALAR
        terms: Dict[Key, ParamScalar] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                _acc(terms, mono_mul(k1, k2), c1 * c2)
        return Expr(self.ws, shape, terms)

    def __rmul__(self, other):
        c = _coerce_scalar(other)
        if c is None:
            return NotImplemented
        return self.scale(c)

    def __truediv__(self, other):
        if isinstance(other, Expr):
            other = other.as_param_scalar()
        c = _coerce_scalar(other)
        if c is None:
            return NotImplemented
        return self.scale(ParamScalar.const(1) / c)

    def __pow__(self, k: int):
        if k == -1:
            return self.inv()
        if k < 0:
            raise ExprError("negative powers other than -1 are not supported")
        if k == 0:
            return self.ws.identity() if self.shape == MATRIX else Expr.constant(self.ws, 1)
        out = self
        for _ in range(k - 1):
            out = out * self
        return out

    def inv(self) -> "Expr":
        """Inverse of an undifferentiated matrix field or of a pure coefficient."""
        if self.is_param_scalar():
            return Expr.constant(self.ws, ParamScalar.const(1) / self.as_param_scalar())
        if len(self.terms) == 1:
            (k, c), = self.terms.items()
            scal, word = k
            if not scal and len(word) == 1 and c == _ONE:
                name, idx, flag = word[0]
                if any(idx):
                    raise ExprError(f"only undifferentiated fields may be inverted, got {self}")
                return Expr(self.ws, MATRIX, {((), ((name, idx, not flag),)): _ONE})
        raise ExprError(f"only undifferentiated fields may be inverted, got {self}")

    # equality ------------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Expr):
            if other.ws is not self.ws:
                return False
            if self.terms != other.terms:
                return False
            return not self.terms or self.shape == other.shape
        c = _coerce_scalar(other)
        if c is None:
            return NotImplemented
        if c.is_zero():
            return not self.terms
        return self.shape == SCALAR and self.terms == {((), ()): c}

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # printing ------------------------------------------------------------------
    def _atom_str(self, a: Atom) -> str:
        name, idx, flag = a
        s = name
        if any(idx):
            s += "_{" + self.ws.index_str(idx) + "}"
        if flag:
            s += "^-1"
        return s

    def _mono_str(self, key: Key) -> str:
        scal, word = key
        parts: List[str] = []
        k = 0
        while k < len(scal):
            s = scal[k]
            n = 1
            while k + n < len(scal) and scal[k + n] == s:
                n += 1
            if s[0] == 0:
                base = self._atom_str((s[1], s[2], False))
            elif not s[1]:
                base = "N"
            else:
                base = "tr(" + " ".join(self._atom_str(a) for a in s[1]) + ")"
            parts.append(base if n == 1 else f"{base}^{n}")
            k += n
        if self.shape == MATRIX:
            parts.extend(self._atom_str(a) for a in word) if word else parts.append("I")
        return " ".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for key, c in self.sorted_items():
            mono = self._mono_str(key)
            cs = str(c)
            if not mono:
                out.append(cs)
                continue
            if c == _ONE:
                out.append(mono)
            elif c == -_ONE:
                out.append("-" + mono)
            else:
                if " " in cs and not (cs.startswith("(") and _balanced_outer(cs)):
                    cs = f"({cs})"
                out.append(f"{cs}*{mono}")
        text = out[0]
        for s in out[1:]:
            text += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
        return text

    def __repr__(self):
        return f"Expr[{self.shape}]({self})"


def _balanced_outer(s: str) -> bool:
    depth = 0
    for k, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0 and k != len(s) - 1:
                return False
    return True


# --- public operations ---------------------------------------------------------

def tr(e: Expr) -> Expr:
    """Trace of a matrix expression; scalar coefficients and factors pass through."""
    if e.shape != MATRIX:
        if not e.terms:
            return Expr.zero(e.ws, SCALAR)
        raise ShapeError("trace applies to matrix expressions only")
    terms: Dict[Key, ParamScalar] = {}
    for (scal, word), c in e.terms.items():
        key = (tuple(sorted(scal + ((1, canon_trace(word)),))), ())
        _acc(terms, key, c)
    return Expr(e.ws, SCALAR, terms)


def comm(x: Expr, y: Expr) -> Expr:
    return x * y - y * x


def equal(e1: Expr, e2: Expr) -> bool:
    if e1.ws is not e2.ws:
        raise ExprError("expressions from different workspaces")
    return e1 == e2


def substitute_param(e: Expr, param: str, value) -> Expr:
    """Replace a spectral parameter everywhere; raises PoleCollision on vanishing denominators."""
    value = ParamScalar.coerce(value)
    return Expr.from_terms(e.ws, e.shape, ((k, c.substitute(param, value)) for k, c in e.terms.items()))


def map_coefficients(e: Expr, fn) -> Expr:
    return Expr.from_terms(e.ws, e.shape, ((k, fn(c)) for k, c in e.terms.items()))


def monomial_expr(ws: Workspace, shape: str, key: Key, c: ParamScalar = _ONE) -> Expr:
    return Expr(ws, shape, {key: c} if not c.is_zero() else {})


def _word_expr(ws: Workspace, word: Word, fn, cache: dict) -> Optional[Expr]:
    """Product of substituted atoms, or None when no atom of ``word`` is replaced."""
    reps = []
    hit = False
    for a in word:
        key = (a[0], a[1])
        if key in cache:
            rep = cache[key]
        else:
            rep = cache[key] = fn(key)
        if rep is not None:
            hit = True
            if a[2]:
                rep = rep.inv() if rep else None
                if rep is None:
                    raise ExprError(f"substitution makes the inverted field {a[0]} vanish")
        reps.append((a, rep))
    if not hit:
        return None
    out: Optional[Expr] = None
    pending: List[Atom] = []
    for a, rep in reps:
        if rep is None:
            pending.append(a)
            continue
        if pending:
            piece = Expr(ws, MATRIX, {((), tuple(pending)): _ONE})
            out = piece if out is None else out * piece
            pending = []
        out = rep if out is None else out * rep
        if out.is_zero():
            return out
    if pending:
        piece = Expr(ws, MATRIX, {((), tuple(pending)): _ONE})
        out = piece if out is None else out * piece
    return out


def substitute_jets(e: Expr, fn, cache: Optional[dict] = None) -> Expr:
    """Replace jets simultaneously.

    ``fn((field, index))`` returns the replacement Expr or None to keep the jet.
    An inverted field is replaced by the inverse of its image, which must be
    a single field atom.
    """
    ws = e.ws
    cache = {} if cache is None else cache
    terms: Dict[Key, ParamScalar] = {}
    for key, c in e.terms.items():
        scal, word = key
        factors: List[Expr] = []
        keep_scal: List[tuple] = []
        for s in scal:
            if s[0] == 0:
                k = (s[1], s[2])
                if k in cache:
                    rep = cache[k]
                else:
                    rep = cache[k] = fn(k)
                if rep is None:
                    keep_scal.append(s)
                else:
                    factors.append(rep)
            else:
                rep = _word_expr(ws, s[1], fn, cache)
                if rep is None:
                    keep_scal.append(s)
                else:
                    factors.append(tr(rep))
        wrep = _word_expr(ws, word, fn, cache)
        if not factors and wrep is None:
            _acc(terms, key, c)
            continue
        base = Expr(ws, e.shape, {(tuple(keep_scal), word if wrep is None else ()): c})
        for f in factors:
            base = base * f
            if not base.terms:
                break
        if wrep is not None and base.terms:
            base = base * wrep
        for k2, c2 in base.terms.items():
            _acc(terms, k2, c2)
    return Expr(ws, e.shape, terms)
