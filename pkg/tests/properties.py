"""Randomized algebraic invariants; each suite runs 1000 hypothesis cases.

Shared by ``test_properties.py`` and the acceptance suite.
"""

from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from laxform.expr import tr
from laxform.rewrite import prolong
from laxform.varcalc import partial_jet, total_derivative, variational_derivative
from laxform.zm import PoleData, ZMSystem
from strategies import COORDS, WS, matrix_exprs, trace_lagrangians

CASES = 1000

_ZM = ZMSystem(PoleData.grid(1, 1, 1))
_ZM_RULES = _ZM.closure_rules()
_PROLONGED = {}


def _shift(idx, k, n=1):
    return idx[:k] + (idx[k] + n,) + idx[k + 1:]


@settings(max_examples=CASES)
@given(matrix_exprs(), matrix_exprs(), matrix_exprs())
def trace_cyclicity(x, y, z):
    assert tr(x * y) == tr(y * x)
    assert tr(x * y * z) == tr(z * x * y)
    assert tr(x * y - y * x).is_zero()


@settings(max_examples=CASES)
@given(matrix_exprs(), matrix_exprs(), trace_lagrangians(), st.sampled_from(COORDS))
def leibniz(x, y, L, c):
    assert total_derivative(x * y, c) == total_derivative(x, c) * y + x * total_derivative(y, c)
    assert total_derivative(tr(x), c) == tr(total_derivative(x, c))
    assert total_derivative(L * tr(x), c) == total_derivative(L, c) * tr(x) + L * tr(total_derivative(x, c))


labels = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1))


@settings(max_examples=CASES)
@given(trace_lagrangians(), st.sampled_from(["A", "B"]), labels)
def splitting_identity(L, name, label):
    pair = ("x1", "x2")
    d = lambda idx: variational_derivative(L, pair, (name, idx))
    lhs = d(label)
    rhs = (partial_jet(L, (name, label))
           - total_derivative(d(_shift(label, 0)), "x1")
           - total_derivative(d(_shift(label, 1)), "x2")
           - total_derivative(total_derivative(d(_shift(_shift(label, 0), 1)), "x1"), "x2"))
    assert lhs == rhs


@settings(max_examples=CASES)
@given(trace_lagrangians(), st.sampled_from(["A", "B"]), labels, st.integers(0, 2))
def commutation_identities(L, name, label, k):
    c = COORDS[k]
    lhs = total_derivative(partial_jet(L, (name, label)), c)
    rhs = partial_jet(total_derivative(L, c), (name, label))
    if label[k] >= 1:
        rhs = rhs - partial_jet(L, (name, _shift(label, k, -1)))
    assert lhs == rhs


_JET_FIELDS = ["phi1", "psi1", "chi1", "Ubar1", "Vbar1", "Wbar1"]


def _nf(rules, key):
    out = rules.normal_form(key)
    return out if out is not None else rules.ws.jet(key[0], index=key[1])


@settings(max_examples=CASES)
@given(st.sampled_from(_JET_FIELDS),
       st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)).filter(lambda t: sum(t) <= 3),
       st.integers(0, 2))
def prolongation_coherence(name, idx, k):
    ws = _ZM.ws
    fs = ws.field_of(name)
    idx = tuple(n if c in fs.deps else 0 for n, c in zip(idx, ws.coords))
    c = ws.coords[k]
    if c not in fs.deps:
        return
    up = (name, _shift(idx, k))
    assert _nf(_ZM_RULES, up) == _ZM_RULES.reduce(total_derivative(_nf(_ZM_RULES, (name, idx)), c))
    if c not in _PROLONGED:
        _PROLONGED[c] = prolong(_ZM_RULES, c, 2)
    explicit = _PROLONGED[c]
    assert _nf(explicit, up) == _nf(_ZM_RULES, up)
    # reduced images never contain eliminable jets
    assert not any(_ZM_RULES.eliminable(j) for j in _nf(_ZM_RULES, up).jets())


SUITES = {
    "trace cyclicity": trace_cyclicity,
    "Leibniz": leibniz,
    "splitting identity": splitting_identity,
    "commutation identities": commutation_identities,
    "prolongation coherence": prolongation_coherence,
}
