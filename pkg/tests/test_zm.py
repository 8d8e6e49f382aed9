from __future__ import annotations

import pytest

from laxform.checks import FAIL
from laxform.rewrite import Rule, RuleSet
from laxform.varcalc import Lagrangian2Form, exterior_derivative
from laxform.zm import (
    PoleData,
    PoleError,
    ZMSystem,
    build_triplet_multiform,
    build_zm_component,
    laxpair_system,
    partial_fraction_identity,
    verify_closure,
    verify_compatibility,
    verify_el_structure,
    verify_gauge_consistency,
    verify_ghost,
    verify_isospectral,
    verify_mdc,
    verify_triplet_closure,
    verify_variational_derivatives,
    verify_zm_el,
)


def all_ok(records):
    bad = [f"{r.name}: {r.residual}" for r in records if not r.ok]
    assert not bad, bad
    assert records


def test_pole_grid_and_collisions():
    p = PoleData.grid(2, 1, 3)
    assert p.poles_U == ["a1", "a2"] and p.poles_V == ["b"] and p.poles_W == ["c1", "c2", "c3"]
    assert p.sizes == (2, 1, 3)
    with pytest.raises(PoleError):
        PoleData(["a"], ["a"], [])
    with pytest.raises(PoleError):
        PoleData(["1/2"], ["b"], ["1/2"])


def test_spectral_parameter_avoids_pole_names():
    assert ZMSystem(PoleData(["a"], ["b"])).spectral == "lambda"
    assert laxpair_system().spectral == "zeta"


def test_builders_require_nonempty_lists():
    with pytest.raises(PoleError):
        build_triplet_multiform(PoleData(["a"], ["b"], []))
    with pytest.raises(PoleError):
        build_zm_component(PoleData(["a"], [], []))


def test_partial_fractions():
    assert partial_fraction_identity("a", "b", "c").is_zero()
    assert partial_fraction_identity("1", "2", "c").is_zero()


@pytest.mark.parametrize("n1,n2", [(1, 1), (2, 1), (1, 2)])
def test_zm_variational_and_el(n1, n2):
    p = PoleData.grid(n1, n2, 0)
    all_ok(verify_variational_derivatives(p, seed=1))
    all_ok(verify_zm_el(p, seed=1))
    all_ok(verify_compatibility(p, seed=1))


def test_gauge_field():
    p = PoleData.grid(1, 1, 0, include_g=True)
    recs = verify_variational_derivatives(p, seed=2)
    all_ok(recs)
    assert any(".g" in r.name or "g" in r.name.split(".")[-1] for r in recs)
    all_ok(verify_gauge_consistency(seed=2))


@pytest.mark.parametrize("sizes", [(1, 1, 1), (2, 1, 1), (1, 2, 1), (1, 1, 2)])
def test_triplet_closure(sizes):
    recs = verify_triplet_closure(PoleData.grid(*sizes), seed=3)
    all_ok(recs)
    assert any(r.name.startswith("closure.triplet.") and r.verdict == "pass" for r in recs)


def test_triplet_el_and_lax_structure():
    all_ok(verify_el_structure(PoleData.grid(1, 1, 1), seed=4))
    all_ok(verify_isospectral(1, 1, seed=4))
    all_ok(verify_mdc(seed=4))


def test_ghost_and_laxpair():
    all_ok(verify_ghost(("a",), ("b",), seed=5))
    s = laxpair_system()
    all_ok(verify_closure(s.multiform(), s.closure_rules(), "closure.laxpair", seed=5, backstop=2))


def _mutated(rules: RuleSet, which) -> RuleSet:
    which = set(which)
    out = [Rule(r.lhs, r.rhs + r.rhs if j in which else r.rhs, r.coordinate) for j, r in enumerate(rules.rules)]
    return RuleSet(rules.ws, out)


def test_closure_is_a_double_zero():
    # dL is bilinear in the two equation factors of each dressing field; one corrupted rule is not enough
    s = ZMSystem(PoleData.grid(1, 1, 1), name="triplet")
    good = s.closure_rules()
    for k in range(len(good.rules)):
        assert verify_closure(s.multiform(), _mutated(good, [k]), "closure.mutant", seed=6)[0].verdict == "pass"


@pytest.mark.parametrize("field", ["phi1", "psi1", "chi1"])
def test_mutated_rules_break_closure(field):
    s = ZMSystem(PoleData.grid(1, 1, 1), name="triplet")
    good = s.closure_rules()
    which = [k for k, r in enumerate(good.rules) if r.lhs[0] == field]
    assert len(which) == 2
    recs = verify_closure(s.multiform(), _mutated(good, which), "closure.mutant", seed=6)
    assert recs[0].verdict == FAIL
    assert "witness seed" in recs[0].residual


def test_mutated_component_breaks_closure():
    s = ZMSystem(PoleData.grid(1, 1, 1), name="triplet")
    F = s.multiform()
    comps = F.stored()
    key = next(iter(comps))
    comps[key] = comps[key] + comps[key]
    bad = Lagrangian2Form(s.ws, F.coords, comps)
    assert verify_closure(bad, s.closure_rules(), "closure.mutant", seed=7)[0].verdict == FAIL


def test_closure_is_independent_of_rule_order():
    s = ZMSystem(PoleData.grid(1, 1, 1), name="triplet")
    rules = s.closure_rules()
    dL = exterior_derivative(s.multiform())
    order = list(reversed(range(len(rules.rules))))
    assert rules.reduce(dL).is_zero()
    assert rules.reordered(order).reduce(dL).is_zero()
