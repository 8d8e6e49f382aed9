"""Hypothesis strategies for random trace polynomials over a fixed workspace."""

from __future__ import annotations

from hypothesis import strategies as st

from laxform.expr import MATRIX, Expr, Workspace, tr
from laxform.params import ParamScalar

COORDS = ("x1", "x2", "x3")


def make_workspace() -> Workspace:
    ws = Workspace(COORDS, params=("a", "b"), name="prop")
    ws.add_field("A")
    ws.add_field("B")
    ws.add_field("C", deps=("x1", "x2"))
    ws.add_field("s", shape="scalar", deps=("x1", "x3"))
    return ws


WS = make_workspace()

a, b = ParamScalar.var("a"), ParamScalar.var("b")
COEFFS = [ParamScalar.const(k) for k in (-3, -2, -1, 1, 2, 5)] + [a, a - b, ParamScalar.const(1) / (a - b)]

indices = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1)).filter(lambda t: sum(t) <= 3)


def bounded_indices(max_order=3):
    return indices if max_order >= 3 else indices.filter(lambda t: sum(t) <= max_order)


@st.composite
def matrix_atoms(draw, ws=WS, allow_inverse=True, max_order=3):
    name = draw(st.sampled_from(["A", "B", "C"]))
    if allow_inverse and draw(st.integers(0, 4)) == 0:
        return ws.inv(name)
    idx = draw(bounded_indices(max_order))
    fs = ws.field_of(name)
    idx = tuple(n if c in fs.deps else 0 for n, c in zip(idx, ws.coords))
    return ws.jet(name, index=idx)


@st.composite
def scalar_atoms(draw, ws=WS, max_order=3):
    idx = draw(bounded_indices(max_order))
    idx = (idx[0], 0, idx[2])
    return ws.jet("s", index=idx)


@st.composite
def matrix_monomials(draw, ws=WS, max_len=3, allow_inverse=True, max_order=3):
    out = ws.identity().scale(draw(st.sampled_from(COEFFS)))
    for _ in range(draw(st.integers(1, max_len))):
        out = out * draw(matrix_atoms(ws, allow_inverse, max_order))
    if draw(st.integers(0, 5)) == 0:
        out = out * draw(scalar_atoms(ws, max_order))
    return out


@st.composite
def matrix_exprs(draw, ws=WS, max_terms=3, allow_inverse=True, max_len=3, max_order=3):
    out = Expr.zero(ws, MATRIX)
    for _ in range(draw(st.integers(1, max_terms))):
        out = out + draw(matrix_monomials(ws, max_len, allow_inverse, max_order))
    return out


@st.composite
def trace_lagrangians(draw, ws=WS, max_terms=3, allow_inverse=True, max_order=3):
    """Scalar trace polynomial, optionally with products of traces and scalar jets."""
    out = Expr.zero(ws)
    for _ in range(draw(st.integers(1, max_terms))):
        term = tr(draw(matrix_monomials(ws, allow_inverse=allow_inverse, max_order=max_order)))
        k = draw(st.integers(0, 5))
        if k == 0:
            term = term * draw(scalar_atoms(ws, max_order))
        elif k == 1:
            term = term * tr(draw(matrix_monomials(ws, 2, allow_inverse, max_order)))
        out = out + term
    return out
