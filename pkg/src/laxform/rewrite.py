"""Oriented rewrite rules for equations of motion and reduction modulo them.

A base rule ``phi_I -> rhs`` eliminates every jet ``phi_J`` with ``J >= I``
componentwise: ``phi_J`` is reduced by peeling one coordinate off ``J - I``,
reducing the lower jet and differentiating.  Normal forms are memoised per
rule set, so prolongation is lazy; :func:`prolong` materialises it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .expr import Expr, ExprError, Workspace, substitute_jets
from .varcalc import jet_key, total_derivative

__all__ = ["Rule", "RuleSet", "RewriteError", "prolong", "reduce"]

JetKey = Tuple[str, Tuple[int, ...]]


class RewriteError(ExprError):
    pass


@dataclass(frozen=True)
class Rule:
    lhs: JetKey
    rhs: Expr
    coordinate: Optional[str] = None

    def describe(self, ws: Workspace) -> str:
        name, idx = self.lhs
        head = name if not any(idx) else f"{name}_{{{ws.index_str(idx)}}}"
        return f"{head} -> {self.rhs}"


class RuleSet:
    """Immutable-by-convention collection of base rules plus a normal-form memo.

    Rules are tried in the order given; the first rule whose left-hand side
    divides a jet decides how it is reduced.
    """

    def __init__(self, ws: Workspace, rules: Iterable = (), name: str = "", budget: int = 200_000):
        self.ws = ws
        self.name = name
        self.budget = budget
        self.rules: List[Rule] = []
        self._by_field: Dict[str, List[Rule]] = {}
        self._explicit: Dict[JetKey, Expr] = {}
        self._nf: Dict[JetKey, Optional[Expr]] = {}
        self._active: List[JetKey] = []
        self._steps = 0
        for r in rules:
            if isinstance(r, Rule):
                self.add(r.lhs, r.rhs, r.coordinate)
            else:
                self.add(*r)

    def add(self, lhs, rhs: Expr, coordinate: Optional[str] = None) -> "RuleSet":
        key = jet_key(lhs, self.ws)
        if rhs.ws is not self.ws:
            raise RewriteError("rule from a different workspace")
        if any(r.lhs == key for r in self.rules):
            raise RewriteError(f"duplicate rule for {self._label(key)}")
        if key in rhs.jets():
            raise RewriteError(f"rule for {self._label(key)} contains its own left-hand side")
        if coordinate is None:
            nz = [self.ws.coords[k] for k, n in enumerate(key[1]) if n]
            coordinate = nz[-1] if nz else None
        rule = Rule(key, rhs, coordinate)
        self.rules.append(rule)
        self._by_field.setdefault(key[0], []).append(rule)
        self._nf.clear()
        return self

    def extended(self, rules: Iterable, name: str = "") -> "RuleSet":
        out = RuleSet(self.ws, list(self.rules), name or self.name, self.budget)
        for r in rules:
            out.add(*r) if not isinstance(r, Rule) else out.add(r.lhs, r.rhs, r.coordinate)
        return out

    def reordered(self, order: Sequence[int]) -> "RuleSet":
        return RuleSet(self.ws, [self.rules[k] for k in order], self.name, self.budget)

    def _label(self, key: JetKey) -> str:
        name, idx = key
        return name if not any(idx) else f"{name}_{{{self.ws.index_str(idx)}}}"

    # normal forms ----------------------------------------------------------
    def _rule_for(self, key: JetKey) -> Optional[Rule]:
        name, idx = key
        for r in self._by_field.get(name, ()):
            if all(a <= b for a, b in zip(r.lhs[1], idx)):
                return r
        return None

    def eliminable(self, key: JetKey) -> bool:
        return key in self._explicit or self._rule_for(key) is not None

    def normal_form(self, key: JetKey) -> Optional[Expr]:
        """Reduced image of a jet, or None when the jet is free."""
        if key in self._nf:
            return self._nf[key]
        if key in self._active:
            chain = " -> ".join(self._label(k) for k in self._active[self._active.index(key):] + [key])
            raise RewriteError(f"rewrite cycle: {chain}")
        self._steps += 1
        if self._steps > self.budget:
            raise RewriteError(f"rewrite step budget {self.budget} exhausted near {self._label(key)}")
        self._active.append(key)
        try:
            if key in self._explicit:
                out = self.reduce(self._explicit[key])
            else:
                rule = self._rule_for(key)
                if rule is None:
                    out = None
                else:
                    name, idx = key
                    extra = [b - a for a, b in zip(rule.lhs[1], idx)]
                    if not any(extra):
                        out = self.reduce(rule.rhs)
                    else:
                        # peel the first coordinate that is not the rule's own direction
                        k = self._peel_index(rule, extra)
                        lower = idx[:k] + (idx[k] - 1,) + idx[k + 1:]
                        base = self.normal_form((name, lower))
                        if base is None:
                            raise RewriteError(f"lower jet of {self._label(key)} is unexpectedly free")
                        out = self.reduce(total_derivative(base, self.ws.coords[k]))
        finally:
            self._active.pop()
        self._nf[key] = out
        return out

    def _peel_index(self, rule: Rule, extra: List[int]) -> int:
        own = self.ws.coord_index(rule.coordinate) if rule.coordinate else -1
        for k, n in enumerate(extra):
            if n and k != own:
                return k
        return own

    def reduce(self, e: Expr) -> Expr:
        if e.ws is not self.ws:
            raise RewriteError("expression from a different workspace")
        if not any(self.eliminable(j) for j in e.jets()):
            return e
        return substitute_jets(e, self.normal_form)

    def explicit_rules(self) -> Dict[JetKey, Expr]:
        return dict(self._explicit)

    def __len__(self):
        return len(self.rules) + len(self._explicit)

    def __repr__(self):
        return f"RuleSet({self.name!r}, {len(self.rules)} base rules, {len(self._explicit)} prolonged)"


def prolong(rules: RuleSet, c: str, k: int = 1) -> RuleSet:
    """New rule set with the D_c consequences of every rule up to order ``k`` made explicit."""
    if k < 1:
        raise RewriteError("prolongation order must be at least 1")
    ws = rules.ws
    kc = ws.coord_index(c)
    out = RuleSet(ws, list(rules.rules), rules.name, rules.budget)
    out._explicit = dict(rules._explicit)
    frontier = [r.lhs for r in rules.rules] + list(rules._explicit)
    for _ in range(k):
        nxt = []
        for name, idx in frontier:
            if not ws.depends(name, kc):
                continue
            nidx = idx[:kc] + (idx[kc] + 1,) + idx[kc + 1:]
            key = (name, nidx)
            if key in out._explicit or any(r.lhs == key for r in out.rules):
                nxt.append(key)
                continue
            rhs = out.normal_form(key)
            out._explicit[key] = rhs
            nxt.append(key)
        frontier = nxt
    return out


def reduce(e: Expr, rules: RuleSet) -> Expr:
    return rules.reduce(e)
