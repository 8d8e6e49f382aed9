from __future__ import annotations

import pytest
from hypothesis import given, settings

from laxform.expr import (
    MATRIX,
    SCALAR,
    Expr,
    ExprError,
    ShapeError,
    UnknownSymbol,
    Workspace,
    canon_trace,
    comm,
    free_reduce,
    substitute_jets,
    tr,
)
from laxform.params import ParamScalar
from laxform.termparse import ParseError
from strategies import WS, matrix_exprs, trace_lagrangians


@pytest.fixture
def ws():
    w = Workspace(("xi", "eta"), params=("a", "b"))
    for f in ("phi", "A", "B", "C"):
        w.add_field(f)
    w.add_field("s", shape="scalar", deps=("xi",))
    w.add_field("Ubar", deps=("xi",))
    return w


def test_inverse_cancels_inside_trace(ws):
    assert ws.parse("tr(phi^-1 phi)") == ws.dim()
    assert ws.parse("phi phi^-1") == ws.identity()
    assert ws.parse("A phi phi^-1 B") == ws.parse("A B")


def test_commutator_and_noncommutativity(ws):
    assert ws.parse("[A, A]").is_zero()
    assert ws.parse("A B") != ws.parse("B A")
    assert ws.parse("[A, B]") == ws.parse("A B - B A")


def test_trace_cyclic_canonical(ws):
    assert ws.parse("tr(A B C)") == ws.parse("tr(B C A)")
    assert ws.parse("tr(A B C)") != ws.parse("tr(A C B)")


def test_coefficient_normalization(ws):
    assert ws.parse("A/(a - b)") == ws.parse("-A/(b - a)")
    assert ws.parse("2*A/(a-b) - A/(a-b)") == ws.parse("A/(a-b)")


def test_jets_outside_dependencies_vanish(ws):
    assert ws.jet("Ubar", "eta").is_zero()
    assert ws.jet("s", "eta").is_zero()
    assert ws.parse("Ubar_{eta}").is_zero()


def test_print_parse_round_trip(ws):
    for text in ("phi_{xi,eta} Ubar phi^-1/(a - b)", "tr(A B_{xi^2}) s_{xi} + i*N", "3/2*tr(phi^-1 phi_{eta} Ubar)"):
        e = ws.parse(text)
        assert ws.parse(str(e)) == e


@settings(max_examples=300)
@given(matrix_exprs(), trace_lagrangians())
def test_round_trip_random(x, L):
    assert WS.parse(str(x)) == x
    assert WS.parse(str(L)) == L


def test_shape_errors(ws):
    with pytest.raises(ShapeError):
        tr(ws.jet("s"))
    with pytest.raises(ExprError):
        ws.jet("phi", "xi").inv()
    with pytest.raises(ExprError):
        ws.parse("A / B")


def test_parse_errors(ws):
    with pytest.raises(UnknownSymbol):
        ws.parse("Q + A")
    with pytest.raises(ParseError) as exc:
        ws.parse("A + (B")
    assert "column" in str(exc.value)
    with pytest.raises(ParseError):
        ws.parse("xi")
    with pytest.raises(ParseError):
        ws.parse("a_{xi}")
    with pytest.raises(ExprError):
        ws.parse("s^-1")


def test_reserved_and_duplicate_names():
    w = Workspace(("x",))
    w.add_field("u")
    with pytest.raises(ExprError):
        w.add_field("u")
    with pytest.raises(ExprError):
        w.add_field("tr")
    with pytest.raises(ExprError):
        Workspace(("x", "x"))


def test_free_reduce_and_canon_trace():
    p, pi = ("p", (0,), False), ("p", (0,), True)
    q = ("q", (0,), False)
    assert free_reduce([q, p, pi, q]) == (q, q)
    assert canon_trace([pi, q, p]) == (q,)
    assert canon_trace([q, p]) == canon_trace([p, q])


def test_substitute_jets_inverts_images(ws):
    e = ws.parse("phi^-1 A phi")
    out = substitute_jets(e, lambda k: ws.jet("B") if k == ("phi", (0, 0)) else None)
    assert out == ws.parse("B^-1 A B")
    inside = substitute_jets(ws.parse("tr(phi^-1 A phi C)"), lambda k: ws.jet("B") if k[0] == "phi" else None)
    assert inside == ws.parse("tr(B^-1 A B C)")


def test_zero_and_constant_shapes(ws):
    assert Expr.zero(ws, MATRIX).shape == MATRIX
    assert Expr.constant(ws, 0).is_zero()
    assert Expr.constant(ws, ParamScalar.var("a")).shape == SCALAR
    assert (ws.identity() * 2 - ws.identity() * 2).is_zero()
