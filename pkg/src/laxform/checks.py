"""Check records shared by the verification modules and the CLI."""

from __future__ import annotations

import contextlib
import zlib
from dataclasses import dataclass, field
from typing import List, Optional

from .expr import Expr
from .numeric import NumericAssignment, Verdict, is_zero_mod, relative_residual, TOLERANCE

__all__ = ["CheckResult", "check_zero", "check_equal", "check_true", "check_onshell", "derive_seed", "short",
           "settings", "numeric_settings"]

PASS = "pass"
NUMERIC_PASS = "numerically-pass"
FAIL = "fail"

_MAX_RESIDUAL = 240

# run-wide numeric defaults; the CLI overrides them per run
settings = {"trials": 5, "dim": 2, "backstop_trials": 10, "max_order": None}


@contextlib.contextmanager
def numeric_settings(**kw):
    old = dict(settings)
    settings.update({k: v for k, v in kw.items() if v is not None})
    try:
        yield settings
    finally:
        settings.clear()
        settings.update(old)


def short(e) -> str:
    text = str(e)
    if len(text) <= _MAX_RESIDUAL:
        return text
    n = len(e) if isinstance(e, Expr) else 0
    return text[:_MAX_RESIDUAL] + f" ... ({n} terms)"


def derive_seed(root: int, name: str) -> int:
    """Per-check seed: stable in the root seed and the check name, independent of run order."""
    return (zlib.crc32(name.encode("utf-8")) ^ (int(root) * 0x9E3779B1)) & 0x7FFFFFFF


@dataclass
class CheckResult:
    name: str
    verdict: str
    residual: str
    anchor: str
    seed: Optional[int] = None
    ms: Optional[float] = None
    details: List[str] = field(default_factory=list, compare=False)

    @property
    def ok(self) -> bool:
        return self.verdict in (PASS, NUMERIC_PASS)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "residual": self.residual,
            "anchor": self.anchor,
            "seed": self.seed,
            "ms": self.ms,
        }


def _from_verdict(name: str, v: Verdict, anchor: str, seed: int) -> CheckResult:
    if v.kind == "proved-zero":
        return CheckResult(name, PASS, "0", anchor, seed)
    if v.kind == "numerically-zero":
        return CheckResult(name, NUMERIC_PASS, f"{v.residual:.3e}", anchor, seed)
    return CheckResult(name, FAIL, f"witness seed {v.witness}: {short(v.reduced)}", anchor, seed)


def check_zero(name: str, e: Expr, rules=None, anchor: str = "", seed: int = 0, trials: Optional[int] = None,
               dim: Optional[int] = None) -> CheckResult:
    """Reduce modulo ``rules``; pass only if the canonical form is exactly zero."""
    trials = trials or settings["trials"]
    dim = dim or settings["dim"]
    v = is_zero_mod(e, rules, trials=trials, seed=seed, dim=dim)
    return _from_verdict(name, v, anchor, seed)


def check_equal(name: str, lhs: Expr, rhs: Expr, anchor: str = "", seed: Optional[int] = None) -> CheckResult:
    diff = lhs - rhs
    if diff.is_zero():
        return CheckResult(name, PASS, "0", anchor, seed)
    return CheckResult(name, FAIL, short(diff), anchor, seed)


def check_true(name: str, ok: bool, residual: str, anchor: str = "", seed: Optional[int] = None) -> CheckResult:
    return CheckResult(name, PASS if ok else FAIL, "0" if ok else residual, anchor, seed)


def check_onshell(name: str, e: Expr, rules, anchor: str = "", seed: int = 0, trials: Optional[int] = None,
                  dim: Optional[int] = None) -> CheckResult:
    """Numeric backstop: evaluate the unreduced ``e`` with eliminable jets taken on-shell."""
    trials = trials or settings["backstop_trials"]
    dim = dim or settings["dim"]
    worst = 0.0
    for t in range(trials):
        env = NumericAssignment(e.ws, seed * 1000 + t, dim, rules)
        worst = max(worst, relative_residual(e, env))
    ok = worst <= TOLERANCE
    return CheckResult(name, NUMERIC_PASS if ok else FAIL, f"{worst:.3e}", anchor, seed)
