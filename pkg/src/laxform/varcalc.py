"""Jet calculus: total, partial and variational derivatives, 2-forms and
their multiform Euler-Lagrange systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .expr import (
    MATRIX,
    SCALAR,
    Expr,
    ExprError,
    ShapeError,
    Workspace,
    _acc,
    canon_trace,
    free_reduce,
)
from .params import ParamScalar

__all__ = [
    "total_derivative",
    "partial_jet",
    "variational_derivative",
    "jet_key",
    "Lagrangian2Form",
    "exterior_derivative",
    "ELEquation",
    "ELSystem",
    "multiform_el_system",
    "delta_d_check",
    "DeltaDReport",
    "el_class",
]

JetKey = Tuple[str, Tuple[int, ...]]
_ONE = ParamScalar.const(1)
_MINUS = ParamScalar.const(-1)


def jet_key(v: Union[Expr, JetKey, str], ws: Optional[Workspace] = None) -> JetKey:
    """Normalise a jet argument: a single-jet Expr, ``(field, index)`` or a field name."""
    if isinstance(v, str):
        if ws is None:
            raise ExprError("field name needs a workspace")
        return (v, ws.zero_index)
    if isinstance(v, tuple):
        return v
    if isinstance(v, Expr) and len(v.terms) == 1:
        (scal, word), c = next(iter(v.terms.items()))
        if c == _ONE:
            if not scal and len(word) == 1 and not word[0][2]:
                return (word[0][0], word[0][1])
            if not word and len(scal) == 1 and scal[0][0] == 0:
                return (scal[0][1], scal[0][2])
    raise ExprError(f"{v} is not a jet coordinate")


# --- total derivative ----------------------------------------------------------

def _atom_derivative(ws: Workspace, atom, k: int):
    """D_k of one matrix atom as a list of (sign, replacement word)."""
    name, idx, flag = atom
    if not ws.depends(name, k):
        return ()
    if not flag:
        nidx = idx[:k] + (idx[k] + 1,) + idx[k + 1:]
        return ((_ONE, ((name, nidx, False),)),)
    return ((_MINUS, (atom, (name, ws.unit(k), False), atom)),)


def total_derivative(e: Expr, c: str) -> Expr:
    """D_c with the Leibniz rule, D(X^-1) = -X^-1 X_c X^-1 and constant parameters."""
    ws = e.ws
    k = ws.coord_index(c)
    terms: Dict[tuple, ParamScalar] = {}
    for (scal, word), coef in e.terms.items():
        for p, s in enumerate(scal):
            rest = scal[:p] + scal[p + 1:]
            if s[0] == 0:
                name, idx = s[1], s[2]
                if not ws.depends(name, k):
                    continue
                nidx = idx[:k] + (idx[k] + 1,) + idx[k + 1:]
                _acc(terms, (tuple(sorted(rest + ((0, name, nidx),))), word), coef)
                continue
            tw = s[1]
            for q, atom in enumerate(tw):
                for sign, rep in _atom_derivative(ws, atom, k):
                    nw = canon_trace(tw[:q] + rep + tw[q + 1:])
                    _acc(terms, (tuple(sorted(rest + ((1, nw),))), word), coef * sign)
        for q, atom in enumerate(word):
            for sign, rep in _atom_derivative(ws, atom, k):
                nw = free_reduce(word[:q] + rep + word[q + 1:])
                _acc(terms, (scal, nw), coef * sign)
    return Expr(ws, e.shape, terms)


def total_derivative_index(e: Expr, idx: Sequence[int]) -> Expr:
    for k, n in enumerate(idx):
        for _ in range(n):
            e = total_derivative(e, e.ws.coords[k])
    return e


# --- partial derivative ----------------------------------------------------------

def partial_jet(e: Expr, v) -> Expr:
    """Trace gradient of a scalar expression with respect to one jet coordinate.

    For a matrix jet the result is the matrix ``G`` with ``d tr(...) = tr(G dv)``:
    rotate each occurrence of ``v`` to the end of its trace word and delete it.
    An occurrence of ``v^-1`` contributes ``-v^-1 W v^-1``.
    """
    ws = e.ws
    if e.shape != SCALAR and e.terms:
        raise ShapeError("partial_jet needs a scalar-shaped expression")
    name, idx = jet_key(v, ws)
    fs = ws.field_of(name)
    terms: Dict[tuple, ParamScalar] = {}
    if fs.shape == SCALAR:
        target = (0, name, idx)
        for (scal, word), coef in e.terms.items():
            n = scal.count(target)
            if not n:
                continue
            p = scal.index(target)
            rest = scal[:p] + scal[p + 1:]
            _acc(terms, (rest, word), coef * n)
        return Expr(ws, SCALAR, terms)
    zero = not any(idx)
    inv_atom = (name, idx, True)
    for (scal, word), coef in e.terms.items():
        for p, s in enumerate(scal):
            if s[0] != 1:
                continue
            tw = s[1]
            rest = scal[:p] + scal[p + 1:]
            for q, atom in enumerate(tw):
                if atom[0] != name or atom[1] != idx:
                    continue
                remainder = tw[q + 1:] + tw[:q]
                if not atom[2]:
                    _acc(terms, (rest, free_reduce(remainder)), coef)
                elif zero:
                    nw = free_reduce((inv_atom,) + remainder + (inv_atom,))
                    _acc(terms, (rest, nw), -coef)
    return Expr(ws, MATRIX, terms)


# --- variational derivative --------------------------------------------------------

def variational_derivative(L: Expr, pair: Tuple[str, str], v) -> Expr:
    """Sum over alpha, beta >= 0 of (-1)^(alpha+beta) D_i^alpha D_j^beta dL/dphi_{I+alpha e_i+beta e_j}.

    Only the two coordinates of ``pair`` are integrated by parts.  A jet with a
    negative index entry gives zero.
    """
    ws = L.ws
    name, idx = jet_key(v, ws)
    fs = ws.field_of(name)
    zero = Expr.zero(ws, fs.shape)
    if any(n < 0 for n in idx):
        return zero
    ki, kj = ws.coord_index(pair[0]), ws.coord_index(pair[1])
    if ki == kj:
        raise ExprError("variational derivative needs two distinct coordinates")
    shifts = set()
    for jname, jidx in L.jets():
        if jname != name:
            continue
        if all(jidx[m] == idx[m] for m in range(len(idx)) if m not in (ki, kj)):
            a, b = jidx[ki] - idx[ki], jidx[kj] - idx[kj]
            if a >= 0 and b >= 0:
                shifts.add((a, b))
    out = zero
    ci, cj = ws.coords[ki], ws.coords[kj]
    for a, b in sorted(shifts):
        nidx = list(idx)
        nidx[ki] += a
        nidx[kj] += b
        term = partial_jet(L, (name, tuple(nidx)))
        for _ in range(a):
            term = total_derivative(term, ci)
        for _ in range(b):
            term = total_derivative(term, cj)
        out = out - term if (a + b) % 2 else out + term
    return out


# --- 2-forms -----------------------------------------------------------------------

class Lagrangian2Form:
    """Components L_(ij) stored once for i < j in workspace order; L_(ji) = -L_(ij)."""

    def __init__(self, ws: Workspace, coords: Sequence[str], components: Optional[Dict[Tuple[str, str], Expr]] = None,
                 name: str = ""):
        self.ws = ws
        self.coords = tuple(coords)
        for c in self.coords:
            ws.coord_index(c)
        self.name = name
        self._comp: Dict[Tuple[str, str], Expr] = {}
        for pair, e in (components or {}).items():
            self.set_component(pair, e)

    def _ordered(self, pair: Tuple[str, str]) -> Tuple[Tuple[str, str], bool]:
        a, b = pair
        if a == b:
            raise ExprError("a 2-form component needs two distinct coordinates")
        if a not in self.coords or b not in self.coords:
            raise ExprError(f"component {pair} outside the form coordinates {self.coords}")
        if self.ws.coord_index(a) < self.ws.coord_index(b):
            return (a, b), False
        return (b, a), True

    def set_component(self, pair: Tuple[str, str], e: Expr):
        if e.shape != SCALAR and e.terms:
            raise ShapeError("2-form components must be scalar-shaped")
        if e.ws is not self.ws:
            raise ExprError("component from a different workspace")
        key, flip = self._ordered(pair)
        self._comp[key] = -e if flip else e

    def component(self, a: str, b: str) -> Expr:
        key, flip = self._ordered((a, b))
        e = self._comp.get(key, Expr.zero(self.ws))
        return -e if flip else e

    def __getitem__(self, pair):
        return self.component(*pair)

    def stored(self) -> Dict[Tuple[str, str], Expr]:
        return dict(self._comp)

    def fields(self) -> List[str]:
        names = set()
        for e in self._comp.values():
            names |= e.field_names()
        return [f for f in self.ws.fields if f in names]

    def jet_order(self) -> int:
        order = 0
        for e in self._comp.values():
            for _, idx in e.jets():
                order = max(order, sum(idx))
        return order

    def map(self, fn) -> "Lagrangian2Form":
        out = Lagrangian2Form(self.ws, self.coords, name=self.name)
        out._comp = {k: fn(e) for k, e in self._comp.items()}
        return out

    def triples(self) -> List[Tuple[str, str, str]]:
        cs = self.coords
        return [(cs[i], cs[j], cs[k]) for i in range(len(cs)) for j in range(i + 1, len(cs)) for k in range(j + 1, len(cs))]


def exterior_derivative(F: Lagrangian2Form, triple: Optional[Tuple[str, str, str]] = None) -> Expr:
    """D_3 L_(12) + D_1 L_(23) + D_2 L_(31) for the oriented triple (1, 2, 3)."""
    if triple is None:
        if len(F.coords) != 3:
            raise ExprError("exterior_derivative needs a triple when the form has more than 3 coordinates")
        triple = F.coords
    c1, c2, c3 = triple
    return (total_derivative(F[c1, c2], c3) + total_derivative(F[c2, c3], c1)
            + total_derivative(F[c3, c1], c2))


# --- multiform EL system --------------------------------------------------------------

STANDARD = "standard"
FIRST_JET_ONE = "first-jet-one-component"
FIRST_JET_TWO = "first-jet-two-component"
HIGHER_JET = "higher-jet"


def el_class(label: Tuple[int, int, int]) -> str:
    total = sum(label)
    if total <= 1:
        return STANDARD
    if total == 2:
        return FIRST_JET_ONE if sum(1 for n in label if n) == 1 else FIRST_JET_TWO
    return HIGHER_JET


@dataclass
class ELEquation:
    field: str
    label: Tuple[int, int, int]
    equation: Expr
    cls: str

    @property
    def is_zero(self) -> bool:
        return self.equation.is_zero()

    def describe(self) -> str:
        return f"{self.field}{self.label} [{self.cls}]: {self.equation} = 0"


@dataclass
class ELSystem:
    triple: Tuple[str, str, str]
    equations: List[ELEquation] = field(default_factory=list)

    def nonzero(self) -> List[ELEquation]:
        return [q for q in self.equations if not q.is_zero]

    @property
    def zero_count(self) -> int:
        return sum(1 for q in self.equations if q.is_zero)

    def by_class(self) -> Dict[str, List[ELEquation]]:
        out: Dict[str, List[ELEquation]] = {}
        for q in self.equations:
            out.setdefault(q.cls, []).append(q)
        return out

    def find(self, fieldname: str, label: Tuple[int, int, int]) -> ELEquation:
        for q in self.equations:
            if q.field == fieldname and q.label == label:
                return q
        raise KeyError((fieldname, label))


def _jet_at(ws: Workspace, triple, label) -> Tuple[int, ...]:
    idx = [0] * len(ws.coords)
    for c, n in zip(triple, label):
        idx[ws.coord_index(c)] += n
    return tuple(idx)


def multiform_el_system(F: Lagrangian2Form, max_order: Optional[int] = None,
                        triple: Optional[Tuple[str, str, str]] = None,
                        fields: Optional[Iterable[str]] = None) -> ELSystem:
    """All multiform EL equations with 1 <= l+m+n <= max_order.

    The equation for (l, m, n) on the triple (i, j, k) is
    dL_ij/d phi_(l,m,n-1) + dL_jk/d phi_(l-1,m,n) + dL_ki/d phi_(l,m-1,n).
    Equations that vanish identically are kept and flagged, not dropped.
    """
    ws = F.ws
    if triple is None:
        if len(F.coords) != 3:
            raise ExprError("multiform_el_system needs a triple for forms on more than 3 coordinates")
        triple = F.coords
    ci, cj, ck = triple
    if max_order is None:
        max_order = F.jet_order() + 1
    names = list(fields) if fields is not None else F.fields()
    comps = ((F[ci, cj], (ci, cj), (0, 0, -1)), (F[cj, ck], (cj, ck), (-1, 0, 0)), (F[ck, ci], (ck, ci), (0, -1, 0)))
    system = ELSystem(tuple(triple))
    for name in names:
        for total in range(1, max_order + 1):
            for l in range(total, -1, -1):
                for m in range(total - l, -1, -1):
                    n = total - l - m
                    label = (l, m, n)
                    eq = Expr.zero(ws, ws.field_of(name).shape)
                    for comp, pair, shift in comps:
                        sub = tuple(a + b for a, b in zip(label, shift))
                        if min(sub) < 0:
                            continue
                        idx = _jet_at(ws, triple, sub)
                        eq = eq + variational_derivative(comp, pair, (name, idx))
                    system.equations.append(ELEquation(name, label, eq, el_class(label)))
    return system


# --- delta dL -------------------------------------------------------------------------

@dataclass
class DeltaDReport:
    passed: bool
    entries: List[Tuple[str, Expr]]
    dL: Expr

    def failures(self):
        return [(j, r) for j, r in self.entries if not r.is_zero()]


def delta_d_check(F: Lagrangian2Form, rules=None, triple: Optional[Tuple[str, str, str]] = None) -> DeltaDReport:
    """Reduce every coefficient d(dL)/d phi_I modulo ``rules`` and report which vanish."""
    from .rewrite import reduce as _reduce

    dL = exterior_derivative(F, triple)
    ws = F.ws
    entries = []
    for name, idx in sorted(dL.jets()):
        coef = partial_jet(dL, (name, idx))
        if rules is not None:
            coef = _reduce(coef, rules)
        label = name if not any(idx) else f"{name}_{{{ws.index_str(idx)}}}"
        entries.append((label, coef))
    passed = all(r.is_zero() for _, r in entries)
    return DeltaDReport(passed, entries, dL)
