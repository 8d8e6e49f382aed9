"""Seeded numeric evaluation of expressions as a randomized zero test."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .expr import MATRIX, SCALAR, Expr, ExprError, Workspace
from .params import ParamScalar

__all__ = [
    "NumericAssignment",
    "NumericError",
    "IllConditioned",
    "Verdict",
    "Inconclusive",
    "numeric_eval",
    "expression_scale",
    "is_zero_mod",
    "TOLERANCE",
    "MIN_POLE_GAP",
    "MAX_CONDITION",
]

TOLERANCE = 1e-9
MIN_POLE_GAP = 0.1
MAX_CONDITION = 1e8
CONFIRMATIONS = 3


class NumericError(ExprError):
    pass


class IllConditioned(NumericError):
    pass


class Inconclusive(NumericError):
    pass


def _stable_hash(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


class NumericAssignment:
    """Random values for parameters and jets, deterministic in ``seed``.

    Each jet draws from its own generator keyed by (seed, jet name), so the
    value of a jet never depends on evaluation order.  Jets of a field along
    coordinates outside its dependencies are never constructed and hence
    never sampled.
    """

    def __init__(self, ws: Workspace, seed: int = 0, dim: int = 2, rules=None,
                 overrides: Optional[Dict[str, complex]] = None):
        if dim < 1:
            raise NumericError("numeric dimension must be positive")
        self.ws = ws
        self.seed = int(seed)
        self.dim = int(dim)
        self.rules = rules
        self._jets: Dict[Tuple[str, Tuple[int, ...]], object] = {}
        self._inv: Dict[str, np.ndarray] = {}
        self._coef: Dict[ParamScalar, complex] = {}
        self.params = self._sample_params(overrides or {})

    def _rng(self, tag: str) -> np.random.Generator:
        return np.random.default_rng([self.seed & 0xFFFFFFFF, _stable_hash(tag)])

    def _sample_params(self, overrides: Dict[str, complex]) -> Dict[str, complex]:
        names = list(self.ws.params)
        rng = self._rng("#params")
        for _ in range(1000):
            vals = {p: complex(*rng.uniform(-2.0, 2.0, 2)) for p in names}
            vals.update(overrides)
            vs = list(vals.values())
            if all(abs(x - y) >= MIN_POLE_GAP for k, x in enumerate(vs) for y in vs[k + 1:]) and all(
                abs(x) >= MIN_POLE_GAP for x in vs
            ):
                return vals
        raise NumericError("could not sample well-separated parameter values")

    def with_rules(self, rules) -> "NumericAssignment":
        """Same free-jet values, eliminable jets evaluated from their normal forms (on-shell)."""
        return NumericAssignment(self.ws, self.seed, self.dim, rules, overrides=dict(self.params))

    def _random_value(self, name: str, idx: Tuple[int, ...]):
        fs = self.ws.field_of(name)
        rng = self._rng(f"{name}|{idx}")
        if fs.shape == SCALAR:
            return complex(*rng.uniform(-1.0, 1.0, 2))
        n = self.dim
        m = rng.uniform(-1.0, 1.0, (n, n)) + 1j * rng.uniform(-1.0, 1.0, (n, n))
        if not any(idx):
            # undifferentiated fields may be inverted; keep them comfortably invertible
            m = m + 1.5 * np.eye(n)
        return m

    def value(self, name: str, idx: Tuple[int, ...]):
        key = (name, idx)
        if key not in self._jets:
            nf = self.rules.normal_form(key) if self.rules is not None else None
            if nf is not None:
                self._jets[key] = numeric_eval(nf, self)
            else:
                self._jets[key] = self._random_value(name, idx)
        return self._jets[key]

    def inverse(self, name: str) -> np.ndarray:
        if name not in self._inv:
            m = self.value(name, self.ws.zero_index)
            cond = np.linalg.cond(m)
            if not np.isfinite(cond) or cond > MAX_CONDITION:
                raise IllConditioned(f"inverse of {name} is ill-conditioned (cond={cond:.3g}); resample")
            self._inv[name] = np.linalg.solve(m, np.eye(self.dim))
        return self._inv[name]

    def coefficient(self, c: ParamScalar) -> complex:
        v = self._coef.get(c)
        if v is None:
            try:
                v = self._coef[c] = c.evaluate(self.params)
            except KeyError as exc:
                raise NumericError(f"missing value for parameter {exc}") from None
        return v


def _atom_value(a, env: NumericAssignment):
    name, idx, flag = a
    if flag:
        return env.inverse(name)
    return env.value(name, idx)


def _word_value(word, env: NumericAssignment) -> np.ndarray:
    m = np.eye(env.dim, dtype=complex)
    for a in word:
        m = m @ _atom_value(a, env)
    return m


def _monomial_value(key, env: NumericAssignment):
    scal, word = key
    s = 1.0 + 0j
    for f in scal:
        if f[0] == 0:
            s *= env.value(f[1], f[2])
        else:
            s *= complex(np.trace(_word_value(f[1], env)))
    return s, word


def _terms(e: Expr, env: NumericAssignment):
    for key, c in e.terms.items():
        s, word = _monomial_value(key, env)
        s *= env.coefficient(c)
        if e.shape == MATRIX:
            yield s * _word_value(word, env)
        else:
            yield s


def numeric_eval(e: Expr, env: NumericAssignment):
    """Complex scalar or ``dim x dim`` matrix value of ``e``."""
    if e.ws is not env.ws:
        raise NumericError("assignment belongs to a different workspace")
    if e.shape == MATRIX:
        out = np.zeros((env.dim, env.dim), dtype=complex)
    else:
        out = 0j
    for v in _terms(e, env):
        out = out + v
    return out


def expression_scale(e: Expr, env: NumericAssignment) -> float:
    """Sum of term magnitudes, used to make residuals scale-free."""
    total = 0.0
    for v in _terms(e, env):
        total += float(np.max(np.abs(v))) if isinstance(v, np.ndarray) else abs(v)
    return total


def _magnitude(v) -> float:
    return float(np.max(np.abs(v))) if isinstance(v, np.ndarray) else abs(v)


@dataclass
class Verdict:
    kind: str  # proved-zero | numerically-zero | nonzero
    residual: float = 0.0
    seeds: List[int] = field(default_factory=list)
    witness: Optional[int] = None
    reduced: Optional[Expr] = None

    @property
    def is_zero(self) -> bool:
        return self.kind in ("proved-zero", "numerically-zero")

    def __str__(self):
        extra = f" witness seed {self.witness}" if self.witness is not None else ""
        return f"{self.kind} (residual {self.residual:.3g}){extra}"


def relative_residual(e: Expr, env: NumericAssignment) -> float:
    v = _magnitude(numeric_eval(e, env))
    return v / max(1.0, expression_scale(e, env))


def is_zero_mod(e: Expr, rules=None, trials: int = 5, seed: int = 0, dim: int = 2,
                tol: float = TOLERANCE) -> Verdict:
    """Reduce ``e`` modulo ``rules``; if not syntactically zero, test numerically.

    A nonzero verdict is reported only after the witness is re-confirmed at
    three further seeds.
    """
    if trials < 1:
        raise NumericError("trials must be at least 1")
    reduced = rules.reduce(e) if rules is not None else e
    if reduced.is_zero():
        return Verdict("proved-zero", 0.0, [], None, reduced)
    seeds = [seed * 1000 + t for t in range(trials)]
    worst = 0.0
    for s in seeds:
        r = relative_residual(reduced, NumericAssignment(e.ws, s, dim))
        worst = max(worst, r)
        if r > tol:
            extra = [seed * 1000 + 500 + t for t in range(CONFIRMATIONS)]
            confirm = [relative_residual(reduced, NumericAssignment(e.ws, x, dim)) for x in extra]
            if all(c > tol for c in confirm):
                return Verdict("nonzero", r, seeds + extra, s, reduced)
            raise Inconclusive(f"residual {r:.3g} at seed {s} not confirmed at seeds {extra}")
    return Verdict("numerically-zero", worst, seeds, None, reduced)
