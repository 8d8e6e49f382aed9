"""Turn a parsed spec into verification records."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

from ..akns import akns_workspace, verify_akns, verify_scalar_multiform
from ..checks import FAIL, CheckResult, derive_seed, numeric_settings
from ..expr import ExprError, Workspace
from ..zm import (
    PoleData,
    ZMSystem,
    laxpair_system,
    verify_closure,
    verify_compatibility,
    verify_el_structure,
    verify_ghost,
    verify_isospectral,
    verify_mdc,
    verify_triplet_closure,
    verify_variational_derivatives,
    verify_zm_el,
)
from .dsl import CHECKS, Section, SpecDocument, SpecError, Statement

__all__ = ["Construction", "build_construction", "plan", "run_document", "RunOptions"]

OVERRIDE_KEYS = ("L12", "L23", "L31")


class Construction:
    """Validated construction of one section plus the check implementations it offers."""

    def __init__(self, ctor: Statement, poles: Optional[PoleData], ws: Workspace, **extra):
        self.ctor = ctor
        self.kind = ctor.name
        self.poles = poles
        self.ws = ws
        self.extra = extra

    @property
    def label(self) -> str:
        return self.kind

    def tag(self) -> str:
        return "".join(str(n) for n in self.poles.sizes if n) if self.poles else ""


def _pole_data(sec: Section, kind: str, ctor: Statement) -> PoleData:
    p = sec.poles()
    U, V, W = p.get("U", []), p.get("V", []), p.get("W", [])
    g = ctor.arg("g", False)
    if not isinstance(g, bool):
        raise SpecError("argument g must be true or false", ctor.line, ctor.col)
    if not U or not V:
        raise SpecError(f"{kind} needs nonempty pole lists U and V", ctor.line, ctor.col)
    if kind == "zm" and W:
        raise SpecError("zm takes no W poles (use triplet)", ctor.line, ctor.col)
    if kind == "triplet" and not W:
        raise SpecError("triplet needs a nonempty pole list W", ctor.line, ctor.col)
    if kind == "laxpair":
        if len(W) > 1:
            raise SpecError("laxpair takes at most one W pole (the spectral parameter)", ctor.line, ctor.col)
        W = W or ["lambda"]
    if g and kind != "zm":
        raise SpecError("the gauge field g is available for zm only", ctor.line, ctor.col)
    try:
        return PoleData(U, V, W, include_g=g)
    except ExprError as exc:
        raise SpecError(str(exc), ctor.line, ctor.col) from None


def _check_declarations(sec: Section, ws: Workspace) -> None:
    coords = set(ws.coords)
    for s in sec.of_kind("coords"):
        for c in s.items:
            if c not in coords:
                raise SpecError(f"coordinate {c!r} is not part of this construction ({', '.join(ws.coords)})",
                                s.line, s.col)
    for s in sec.of_kind("field"):
        if s.name not in ws.fields:
            raise SpecError(f"field {s.name!r} is not part of this construction", s.line, s.col)
        f = ws.field_of(s.name)
        if f.shape != s.arg("dims"):
            raise SpecError(f"field {s.name!r} is {f.shape}, declared {s.arg('dims')}", s.line, s.col)
        if set(s.items) != set(f.deps):
            raise SpecError(f"field {s.name!r} depends on {', '.join(f.deps)}, declared {', '.join(s.items) or 'nothing'}",
                            s.line, s.col)
        if bool(s.arg("constant")) != bool(f.constant):
            raise SpecError(f"field {s.name!r} constant flag mismatch", s.line, s.col)


def build_construction(sec: Section) -> Construction:
    ctor = sec.construction
    kind = ctor.name
    allowed = {"zm": ("g",), "triplet": (), "laxpair": (), "akns": ("height",) + OVERRIDE_KEYS}[kind]
    for key, _ in ctor.args:
        if key not in allowed:
            raise SpecError(f"unknown argument {key!r} for {kind}", ctor.line, ctor.col)
    if kind == "akns":
        if sec.poles():
            raise SpecError("akns takes no pole lists", ctor.line, ctor.col)
        height = ctor.arg("height", 4)
        if not isinstance(height, int) or isinstance(height, bool) or not 3 <= height <= 6:
            raise SpecError("akns height must be an integer between 3 and 6", ctor.line, ctor.col)
        overrides = {k: ctor.arg(k) for k in OVERRIDE_KEYS if ctor.arg(k) is not None}
        ws = akns_workspace(height)
        for k, text in overrides.items():
            if not isinstance(text, str):
                raise SpecError(f"{k} must be a quoted expression", ctor.line, ctor.col)
            try:
                akns_workspace(3).parse(text)
            except ExprError as exc:
                raise SpecError(f"{k}: {exc}", ctor.line, ctor.col) from None
        _check_declarations(sec, ws)
        return Construction(ctor, None, ws, height=height, overrides=overrides)
    poles = _pole_data(sec, kind, ctor)
    try:
        sysm = laxpair_system(poles.poles_U, poles.poles_V, poles.poles_W[0]) if kind == "laxpair" else ZMSystem(poles)
    except ExprError as exc:
        raise SpecError(str(exc), ctor.line, ctor.col) from None
    _check_declarations(sec, sysm.ws)
    return Construction(ctor, poles, sysm.ws)


def _run_check(con: Construction, name: str, args: Dict, seed: int) -> List[CheckResult]:
    kind, p = con.kind, con.poles
    backstop = int(args.get("backstop", 0))
    if kind == "akns":
        ov = con.extra["overrides"]
        if name == "qrecursion":
            return [r for r in verify_akns(seed, con.extra["height"]) if r.name.startswith("qrecursion.")]
        if name == "hierarchy":
            return [r for r in verify_akns(seed, con.extra["height"]) if r.name.startswith("hierarchy.")]
        if name == "closure":
            return verify_scalar_multiform(ov, seed, full=False)
        if name == "scalar-akns":
            return verify_scalar_multiform(ov, seed)
        if name == "el":
            return [r for r in verify_scalar_multiform(ov, seed) if ".el." in r.name or r.name.endswith("multiform-el")]
    if name == "variational":
        return verify_variational_derivatives(p, seed)
    if name == "compatibility":
        return verify_compatibility(PoleData(p.poles_U, p.poles_V, []), seed)
    if name == "isospectral":
        return verify_isospectral(len(p.poles_U), len(p.poles_V), seed)
    if name == "mdc":
        return verify_mdc(seed)
    if name == "ghost":
        return verify_ghost(p.poles_U, p.poles_V, seed)
    if name == "closure":
        if kind == "triplet":
            return verify_triplet_closure(p, seed, backstop)
        s = laxpair_system(p.poles_U, p.poles_V, p.poles_W[0])
        return verify_closure(s.multiform(), s.closure_rules(), f"closure.laxpair.{con.tag()[:-1]}", seed, backstop)
    if name == "el":
        if kind == "zm":
            return verify_zm_el(p, seed)
        return verify_el_structure(p, seed, label=kind)
    raise SpecError(f"check {name!r} is not available for {kind}")


class RunOptions:
    def __init__(self, seed: int = 0, trials: Optional[int] = None, dim: Optional[int] = None,
                 jobs: int = 1, timings: bool = False, max_order: Optional[int] = None):
        self.seed, self.trials, self.dim, self.jobs, self.timings = seed, trials, dim, jobs, timings
        self.max_order = max_order


def plan(doc: SpecDocument) -> List[Tuple[Section, Construction, List[Tuple[str, Dict]]]]:
    """Validate every section and expand ``all``; raises :class:`SpecError` on input errors."""
    out = []
    for sec in doc.sections():
        if sec.construction is None:
            continue
        con = build_construction(sec)
        todo: List[Tuple[str, Dict]] = []
        for c in sec.checks:
            args = dict(c.args)
            for key in args:
                if key != "backstop":
                    raise SpecError(f"unknown argument {key!r} for check {c.name}", c.line, c.col)
            names = CHECKS[con.kind] if c.name == "all" else (c.name,)
            for n in names:
                if (n, args) not in todo:
                    todo.append((n, args))
        out.append((sec, con, todo))
    return out


def _task(payload) -> List[CheckResult]:
    sec, name, args, opts = payload
    con = build_construction(sec)
    t0 = time.perf_counter()
    with numeric_settings(trials=opts.trials, dim=opts.dim, max_order=opts.max_order):
        try:
            recs = _run_check(con, name, args, opts.seed)
        except SpecError:
            raise
        except Exception as exc:  # a crashing check is reported, never skipped
            recs = [CheckResult(f"{name}.{con.kind}.error", FAIL, f"{type(exc).__name__}: {exc}", name, None)]
    ms = (time.perf_counter() - t0) * 1000.0 / max(len(recs), 1)
    for r in recs:
        if r.seed is None:
            r.seed = derive_seed(opts.seed, r.name)
        r.ms = round(ms, 3) if opts.timings else None
    return recs


def run_document(doc: SpecDocument, opts: RunOptions) -> List[CheckResult]:
    """Run every requested check; records come back in declaration order."""
    tasks = [(sec, name, args, opts) for sec, con, todo in plan(doc) for name, args in todo]
    if opts.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    out: List[CheckResult] = []
    seen = set()
    for recs in chunks:
        for r in recs:
            if r.name in seen:
                continue
            seen.add(r.name)
            out.append(r)
    return out
