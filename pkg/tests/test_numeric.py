from __future__ import annotations

import numpy as np
import pytest

from laxform import numeric
from laxform.checks import FAIL, NUMERIC_PASS, PASS, check_onshell, check_zero, derive_seed, numeric_settings, settings
from laxform.expr import Expr, MATRIX, Workspace
from laxform.numeric import IllConditioned, Inconclusive, NumericAssignment, NumericError, is_zero_mod, numeric_eval
from laxform.rewrite import RuleSet


@pytest.fixture
def ws():
    w = Workspace(("x1", "x2"), params=("a", "b"))
    w.add_field("A")
    w.add_field("B")
    w.add_field("u", shape="scalar")
    return w


def cayley_hamilton(ws):
    # vanishes for 2x2 matrices only
    return ws.parse("A A - tr(A) A") + ws.identity() * ws.parse("1/2*tr(A)^2 - 1/2*tr(A A)")


def test_values_are_deterministic_and_order_free(ws):
    e1, e2 = NumericAssignment(ws, seed=11), NumericAssignment(ws, seed=11)
    e2.value("B", (1, 0))
    assert np.array_equal(e1.value("A", (0, 1)), e2.value("A", (0, 1)))
    assert e1.params == e2.params
    assert not np.array_equal(e1.value("A", (0, 1)), NumericAssignment(ws, seed=12).value("A", (0, 1)))


def test_parameters_are_well_separated(ws):
    for s in range(50):
        p = NumericAssignment(ws, seed=s).params
        assert abs(p["a"] - p["b"]) >= numeric.MIN_POLE_GAP
        assert min(abs(p["a"]), abs(p["b"])) >= numeric.MIN_POLE_GAP


def test_inverse_and_product(ws):
    env = NumericAssignment(ws, seed=3, dim=3)
    got = numeric_eval(ws.parse("A^-1 A B"), env)
    assert np.allclose(got, env.value("B", (0, 0)))


def test_ill_conditioned_inverse_is_refused(ws):
    rules = RuleSet(ws, [(ws.jet("A"), Expr.zero(ws, MATRIX))])
    env = NumericAssignment(ws, seed=1, rules=rules)
    with pytest.raises(IllConditioned):
        env.inverse("A")


def test_syntactic_zero_is_proved(ws):
    v = is_zero_mod(ws.parse("tr(A B) - tr(B A)"))
    assert v.kind == "proved-zero" and v.seeds == []


def test_nonzero_has_confirmed_witness(ws):
    v = is_zero_mod(ws.parse("A B - B A"), seed=4)
    assert v.kind == "nonzero"
    assert v.witness == 4000
    assert len(v.seeds) == 5 + numeric.CONFIRMATIONS


def test_dimension_dependent_identity(ws):
    e = cayley_hamilton(ws)
    assert not e.is_zero()
    assert is_zero_mod(e, dim=2).kind == "numerically-zero"
    assert is_zero_mod(e, dim=3).kind == "nonzero"


def test_unconfirmed_residual_is_inconclusive(ws, monkeypatch):
    calls = iter([1.0] + [0.0] * 20)
    monkeypatch.setattr(numeric, "relative_residual", lambda e, env: next(calls))
    with pytest.raises(Inconclusive):
        is_zero_mod(ws.parse("A B - B A"))


def test_invalid_arguments(ws):
    with pytest.raises(NumericError):
        is_zero_mod(ws.parse("A B"), trials=0)
    with pytest.raises(NumericError):
        NumericAssignment(ws, dim=0)


def test_onshell_values_follow_rules(ws):
    rules = RuleSet(ws, [(ws.jet("u", "x2"), ws.parse("u_{x1^2} + a*u"))])
    env = NumericAssignment(ws, seed=9)
    on = env.with_rules(rules)
    assert on.params == env.params
    want = on.value("u", (2, 0)) + on.params["a"] * on.value("u", (0, 0))
    assert np.isclose(on.value("u", (0, 1)), want)
    assert np.isclose(on.value("u", (2, 0)), env.value("u", (2, 0)))


def test_check_verdicts(ws):
    rules = RuleSet(ws, [(ws.jet("u", "x2"), ws.parse("u_{x1^2}"))])
    assert check_zero("z", ws.parse("u_{x2} - u_{x1^2}"), rules).verdict == PASS
    assert check_zero("z", cayley_hamilton(ws)).verdict == NUMERIC_PASS
    bad = check_zero("z", ws.parse("u_{x2}"), rules)
    assert bad.verdict == FAIL and "witness seed" in bad.residual
    assert check_onshell("z", ws.parse("u_{x1,x2} - u_{x1^3}"), rules).verdict == NUMERIC_PASS
    assert check_onshell("z", ws.parse("u_{x1,x2}"), rules).verdict == FAIL


def test_numeric_settings_are_scoped():
    with numeric_settings(trials=2, dim=None):
        assert settings["trials"] == 2 and settings["dim"] == 2
    assert settings["trials"] == 5


def test_seed_derivation_is_stable():
    assert derive_seed(7, "closure.triplet.111") == derive_seed(7, "closure.triplet.111")
    assert derive_seed(7, "a") != derive_seed(8, "a")
    assert 0 <= derive_seed(2**40, "x") < 2**31
