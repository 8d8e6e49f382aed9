from __future__ import annotations

import pytest
import sympy

from laxform.akns import (
    L23_R_MISPRINT,
    L23_R_VERBATIM,
    PRINTED_EOM,
    SCALAR_LAGRANGIANS,
    AKNSError,
    ExprMatrix,
    NotExact,
    akns_seed,
    akns_tower,
    akns_workspace,
    cross_route,
    expand_pole_coordinates,
    flow_rules,
    formal_integrate,
    formal_integrate_multi,
    hierarchy_equation,
    hrel_expected,
    hxi_workspace,
    q_recursion,
    verify_akns,
    verify_scalar_multiform,
)
from laxform.expr import Expr
from laxform.params import ParamScalar
from laxform.varcalc import total_derivative


@pytest.fixture(scope="module")
def ws():
    return akns_workspace(4)


@pytest.fixture(scope="module")
def tower(ws):
    return akns_tower(6, ws=ws)


def test_q_goldens(ws, tower):
    # hand-derived from the recursion with zero integration constants
    Q2 = ExprMatrix(ws, [["-i/2*q r", "i/2*q_{x1}"], ["-i/2*r_{x1}", "i/2*q r"]])
    assert (tower[2] - Q2).is_zero()
    Q3 = ExprMatrix(ws, [["-1/4*(q r_{x1} - r q_{x1})", "-1/4*(q_{x1^2} - 2*q^2 r)"],
                         ["-1/4*(r_{x1^2} - 2*q r^2)", "-1/4*(-q r_{x1} + r q_{x1})"]])
    assert (tower[3] - Q3).is_zero()
    for k in range(1, len(tower)):
        assert tower[k].trace().is_zero()


def test_q_recursion_relation(tower):
    for k in range(1, len(tower) - 1):
        rel = tower[0].commutator(tower[k + 1]) + tower[1].commutator(tower[k]) - tower[k].derivative("x1")
        assert rel.is_zero(), k


def test_zero_potential_gives_zero_tower(ws):
    Q0, _ = akns_seed(ws)
    t = q_recursion(Q0, ExprMatrix(ws, [[0, 0], [0, 0]]), 5)
    assert all(t[k].is_zero() for k in range(1, 6))


def test_recursion_input_validation(ws):
    Q0, Q1 = akns_seed(ws)
    with pytest.raises(AKNSError):
        q_recursion(ExprMatrix.diagonal(ws, [ParamScalar.const(1), ParamScalar.const(1)]), Q1, 3)
    with pytest.raises(AKNSError):
        q_recursion(Q0, Q1 + ExprMatrix.diagonal(ws, [ws.jet("q"), ws.jet("r")]), 3)
    with pytest.raises(AKNSError):
        q_recursion(Q1, Q1, 3)
    with pytest.raises(AKNSError):
        akns_workspace(0)
    with pytest.raises(AKNSError):
        hierarchy_equation(akns_tower(2, ws=ws), 4)


def test_formal_integration(ws):
    assert formal_integrate(ws.parse("q_{x1} r + q r_{x1}")) == ws.parse("q r")
    assert formal_integrate(ws.parse("q_{x1^3} r + q r_{x1^3}")) == ws.parse("q_{x1^2} r - q_{x1} r_{x1} + q r_{x1^2}")
    with pytest.raises(NotExact):
        formal_integrate(ws.parse("q_{x1} r - q r_{x1}"))
    with pytest.raises(NotExact):
        formal_integrate(ws.parse("q"))
    e = ws.parse("q r_{x2} + q_{x1} r^2")
    flux = formal_integrate_multi(total_derivative(e, "x1") - total_derivative(ws.parse("q r"), "x2"), ["x1", "x2"])
    assert total_derivative(flux["x1"], "x1") + total_derivative(flux["x2"], "x2") == \
        total_derivative(e, "x1") - total_derivative(ws.parse("q r"), "x2")


def test_hierarchy_entries(ws, tower):
    assert hierarchy_equation(tower, 1).is_zero()
    E2 = hierarchy_equation(tower, 2)
    assert E2[0, 1] == ws.parse(PRINTED_EOM[("L12", "r")])
    assert E2[1, 0] == ws.parse(PRINTED_EOM[("L12", "q")])
    E3 = hierarchy_equation(tower, 3)
    assert E3[0, 1] == ws.parse(PRINTED_EOM[("L31", "r")])


@pytest.mark.parametrize("k", [2, 3, 4])
def test_cross_route(tower, k):
    rules = flow_rules(tower, range(2, 5))
    assert (cross_route(tower, k, rules) - tower[k + 1]).is_zero()


def _sympy_pole_coefficient(I: int, J: int, M: int = 4):
    """Independent expansion with noncommuting symbols H_i, H_ij and commuting u = 1/a, v = 1/b."""
    u, v = sympy.symbols("u v")
    H1 = {i: sympy.Symbol(f"H_{i}", commutative=False) for i in range(M + 1)}
    H2 = {(i, j): sympy.Symbol(f"H_{min(i, j)}_{max(i, j)}", commutative=False)
          for i in range(M + 1) for j in range(M + 1)}
    Dxi = sum(u ** (i + 1) * H1[i] for i in range(M + 1))
    Deta = sum(v ** (j + 1) * H1[j] for j in range(M + 1))
    Dxieta = sum(u ** (i + 1) * v ** (j + 1) * H2[i, j] for i in range(M + 1) for j in range(M + 1))
    e = sympy.expand((1 / u - 1 / v) * Dxieta - (Deta * Dxi - Dxi * Deta))
    return sympy.expand(e.coeff(u, I).coeff(v, J))


def _from_sympy(expr, target):
    out = Expr.zero(target, "matrix")
    for term in sympy.Add.make_args(expr):
        c, factors = term.as_coeff_mul()
        m = target.identity().scale(ParamScalar.const(int(c)))
        for f in factors:
            base, power = f.as_base_exp()
            parts = str(base).split("_")[1:]
            idx = [0] * len(target.coords)
            for p in parts:
                idx[target.coord_index(f"x{p}")] += 1
            for _ in range(int(power)):
                m = m * target.jet("H", index=tuple(idx))
        out = out + m
    return out


def test_pole_expansion_matches_noncommutative_oracle():
    _, hxi = hxi_workspace()
    exp = expand_pole_coordinates(hxi, 4)
    for I, J in [(2, 3), (1, 4), (3, 1)]:
        oracle = _from_sympy(_sympy_pole_coefficient(I, J), exp.ws)
        assert exp.coefficient(I, J) == oracle
        assert exp.coefficient(I, J) == hrel_expected(exp.ws, I, J)
    with pytest.raises(AKNSError):
        exp.coefficient(5, 1)


@pytest.mark.parametrize("height", [3, 4, 5])
def test_verify_akns(height):
    recs = verify_akns(seed=2, height=height)
    assert all(r.ok for r in recs), [r.name for r in recs if not r.ok]


def test_scalar_multiform_records():
    recs = {r.name: r for r in verify_scalar_multiform(seed=3)}
    assert all(r.ok for r in recs.values()), [n for n, r in recs.items() if not r.ok]
    assert recs["scalar-akns.closure"].verdict == "pass"
    assert "scalar-akns.el.L23.r-display-misprint" in recs


def test_misprint_differs_by_one_monomial():
    ws = akns_workspace(3)
    diff = ws.parse(L23_R_VERBATIM) - ws.parse(PRINTED_EOM[("L23", "r")])
    assert diff == ws.parse(L23_R_MISPRINT)
    assert len(diff) == 2


def test_corrupted_lagrangian_breaks_closure():
    text = SCALAR_LAGRANGIANS["L23"]
    assert "1/4*" in text
    recs = verify_scalar_multiform({"L23": text.replace("1/4*", "1/3*", 1)}, seed=4, full=False)
    closure = next(r for r in recs if r.name.endswith(".closure"))
    assert closure.verdict == "fail"
