"""Line-oriented spec language for the ``laxform`` CLI.

::

    document := stmt*
    stmt     := "coords" ident+
              | "params" ident+
              | "field" ident "dims" ("scalar"|"matrix") "deps" ident* ["constant"]
              | "poles" ident "=" "[" ident ("," ident)* "]"
              | "construct" ctor (key "=" value)*
              | "check" name (key "=" value)*
              | "option" key "=" value

Statements end at a newline or ``;``; ``#`` starts a comment.  A document is
split into sections: a new section starts with the first declaration that
follows a ``construct`` or ``check`` statement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

__all__ = [
    "SpecError",
    "Statement",
    "Section",
    "SpecDocument",
    "parse_spec",
    "CONSTRUCTORS",
    "CHECKS",
]


class SpecError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"line {line}, column {col}: {msg}" if line else msg)


CONSTRUCTORS = ("zm", "triplet", "laxpair", "akns")
CHECKS = {
    "zm": ("variational", "compatibility", "isospectral", "mdc", "el"),
    "triplet": ("closure", "el", "compatibility", "isospectral", "mdc"),
    "laxpair": ("ghost", "closure", "el"),
    "akns": ("qrecursion", "hierarchy", "scalar-akns", "closure", "el"),
}
DECLARATIONS = ("coords", "params", "field", "poles")
POLE_LISTS = ("U", "V", "W")
OPTIONS = ("seed", "trials", "dim", "max_order")

Value = Union[str, int, bool]

_TOKEN = re.compile(
    r'(?P<ws>[ \t\r]+)|(?P<comment>#[^\n]*)|(?P<nl>[\n;])|(?P<str>"(?:[^"\\\n]|\\.)*")'
    r"|(?P<num>-?\d+(?:/\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_.\-]*)|(?P<sym>[=\[\],])"
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    out: List[Token] = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SpecError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            out.append(Token("end", m.group(), line, pos - start + 1))
            if m.group() == "\n":
                line += 1
                start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Token("end", "", line, pos - start + 1))
    return out


def _format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.\-]*", v) and v not in ("true", "false"):
        return v
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


@dataclass
class Statement:
    kind: str
    name: str = ""
    items: Tuple[str, ...] = ()
    args: Tuple[Tuple[str, Value], ...] = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def arg(self, key: str, default=None):
        return dict(self.args).get(key, default)

    def to_text(self) -> str:
        k = self.kind
        if k in ("coords", "params"):
            return f"{k} " + " ".join(self.items)
        if k == "field":
            shape, deps, const = self.arg("dims"), self.items, self.arg("constant", False)
            text = f"field {self.name} dims {shape} deps" + "".join(" " + d for d in deps)
            return text + (" constant" if const else "")
        if k == "poles":
            return f"poles {self.name}=[" + ", ".join(self.items) + "]"
        if k == "option":
            key, value = self.args[0]
            return f"option {key}={_format_value(value)}"
        return f"{k} {self.name}" + "".join(f" {a}={_format_value(v)}" for a, v in self.args)


@dataclass
class Section:
    statements: List[Statement] = field(default_factory=list)

    def of_kind(self, kind: str) -> List[Statement]:
        return [s for s in self.statements if s.kind == kind]

    @property
    def construction(self) -> Optional[Statement]:
        cs = self.of_kind("construct")
        return cs[0] if cs else None

    @property
    def checks(self) -> List[Statement]:
        return self.of_kind("check")

    def poles(self) -> Dict[str, List[str]]:
        return {s.name: list(s.items) for s in self.of_kind("poles")}

    def coords(self) -> List[str]:
        return [c for s in self.of_kind("coords") for c in s.items]

    def params(self) -> List[str]:
        return [c for s in self.of_kind("params") for c in s.items]


@dataclass
class SpecDocument:
    statements: List[Statement] = field(default_factory=list)

    @property
    def options(self) -> Dict[str, Value]:
        return {s.args[0][0]: s.args[0][1] for s in self.statements if s.kind == "option"}

    def sections(self) -> List[Section]:
        out: List[Section] = []
        cur = Section()
        used = False
        for s in self.statements:
            if s.kind == "option":
                continue
            if s.kind in DECLARATIONS and used:
                out.append(cur)
                cur, used = Section(), False
            if s.kind == "construct" and cur.construction is not None:
                out.append(cur)
                cur = Section()
            if s.kind in ("construct", "check"):
                used = True
            cur.statements.append(s)
        if cur.statements:
            out.append(cur)
        return out

    def to_text(self) -> str:
        return "".join(s.to_text() + "\n" for s in self.statements)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, msg: str, t: Optional[Token] = None):
        t = t or self.peek()
        raise SpecError(msg, t.line, t.col)

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        t = self.next()
        if t.kind != kind or (text is not None and t.text != text):
            want = repr(text) if text is not None else kind
            got = repr(t.text) if t.text else "end of statement"
            self.fail(f"expected {want}, got {got}", t)
        return t

    def ident(self, what: str = "identifier") -> str:
        t = self.peek()
        if t.kind != "ident":
            self.fail(f"expected {what}")
        return self.next().text

    def value(self) -> Value:
        t = self.next()
        if t.kind == "num":
            if "/" in t.text:
                return t.text
            return int(t.text)
        if t.kind == "str":
            return re.sub(r"\\(.)", r"\1", t.text[1:-1])
        if t.kind == "ident":
            return {"true": True, "false": False}.get(t.text, t.text)
        self.fail("expected a value", t)

    def kv_list(self) -> Tuple[Tuple[str, Value], ...]:
        out = []
        seen = set()
        while self.peek().kind != "end":
            t = self.peek()
            key = self.ident("argument name")
            if key in seen:
                self.fail(f"duplicate argument {key!r}", t)
            seen.add(key)
            self.expect("sym", "=")
            out.append((key, self.value()))
        return tuple(out)

    def document(self) -> SpecDocument:
        stmts: List[Statement] = []
        while True:
            t = self.peek()
            if t.kind == "end":
                if not t.text and self.pos == len(self.toks) - 1:
                    break
                self.next()
                continue
            stmts.append(self.statement())
            end = self.peek()
            if end.kind != "end":
                self.fail(f"unexpected {end.text!r} after statement")
        return SpecDocument(stmts)

    def statement(self) -> Statement:
        t = self.next()
        if t.kind != "ident":
            self.fail("expected a statement keyword", t)
        kw = t.text
        if kw in ("coords", "params"):
            items = []
            while self.peek().kind == "ident":
                items.append(self.next().text)
            if not items:
                self.fail(f"{kw} needs at least one name")
            return Statement(kw, items=tuple(items), line=t.line, col=t.col)
        if kw == "field":
            name = self.ident("field name")
            self.expect("ident", "dims")
            shape = self.ident("'scalar' or 'matrix'")
            if shape not in ("scalar", "matrix"):
                self.fail("dims must be 'scalar' or 'matrix'", self.toks[self.pos - 1])
            self.expect("ident", "deps")
            deps = []
            const = False
            while self.peek().kind == "ident":
                d = self.next().text
                if d == "constant" and self.peek().kind == "end":
                    const = True
                else:
                    deps.append(d)
            return Statement("field", name, tuple(deps), (("dims", shape), ("constant", const)), t.line, t.col)
        if kw == "poles":
            name = self.ident("pole list name")
            self.expect("sym", "=")
            self.expect("sym", "[")
            items = []
            while True:
                tok = self.next()
                if tok.kind not in ("ident", "num"):
                    self.fail("expected a pole symbol", tok)
                items.append(tok.text)
                tok = self.next()
                if tok.kind == "sym" and tok.text == "]":
                    break
                if not (tok.kind == "sym" and tok.text == ","):
                    self.fail("expected ',' or ']'", tok)
            return Statement("poles", name, tuple(items), line=t.line, col=t.col)
        if kw in ("construct", "check"):
            name = self.ident("constructor" if kw == "construct" else "check name")
            return Statement(kw, name, args=self.kv_list(), line=t.line, col=t.col)
        if kw == "option":
            key = self.ident("option name")
            self.expect("sym", "=")
            return Statement("option", args=((key, self.value()),), line=t.line, col=t.col)
        self.fail(f"unknown statement {kw!r}", t)


def parse_spec(text: str) -> SpecDocument:
    """Parse and validate a spec document; raises :class:`SpecError` with a location."""
    doc = _Parser(text).document()
    validate(doc)
    return doc


def validate(doc: SpecDocument) -> None:
    opts = {}
    for s in doc.statements:
        if s.kind == "option":
            key, value = s.args[0]
            if key not in OPTIONS:
                raise SpecError(f"unknown option {key!r}", s.line, s.col)
            if key in opts:
                raise SpecError(f"duplicate option {key!r}", s.line, s.col)
            if not isinstance(value, int) or isinstance(value, bool):
                raise SpecError(f"option {key} needs an integer", s.line, s.col)
            opts[key] = value
    for sec in doc.sections():
        _validate_section(sec)


def _validate_section(sec: Section) -> None:
    names: Dict[str, str] = {}

    def declare(name: str, what: str, s: Statement):
        if name in names:
            raise SpecError(f"duplicate declaration of {name!r} (already a {names[name]})", s.line, s.col)
        names[name] = what

    pole_syms: Dict[str, Statement] = {}
    for s in sec.statements:
        if s.kind == "coords":
            for c in s.items:
                declare(c, "coordinate", s)
        elif s.kind == "params":
            for p in s.items:
                declare(p, "parameter", s)
        elif s.kind == "field":
            declare(s.name, "field", s)
            for d in s.items:
                if sec.coords() and d not in sec.coords():
                    raise SpecError(f"field {s.name!r} depends on undeclared coordinate {d!r}", s.line, s.col)
        elif s.kind == "poles":
            if s.name not in POLE_LISTS:
                raise SpecError(f"pole list must be one of {', '.join(POLE_LISTS)}", s.line, s.col)
            if s.name in names:
                raise SpecError(f"duplicate pole list {s.name!r}", s.line, s.col)
            names[s.name] = "pole list"
            for p in s.items:
                if p in pole_syms:
                    raise SpecError(f"duplicate pole symbol {p!r}", s.line, s.col)
                pole_syms[p] = s
    for p, s in pole_syms.items():
        if names.get(p) not in (None, "parameter"):
            raise SpecError(f"pole symbol {p!r} clashes with a {names[p]}", s.line, s.col)
    params = sec.params()
    if params:
        for p, s in pole_syms.items():
            if not re.fullmatch(r"-?\d+(/\d+)?", p) and p not in params and p != "lambda":
                raise SpecError(f"pole symbol {p!r} is not a declared parameter", s.line, s.col)
    ctor = sec.construction
    checks = sec.checks
    if checks and ctor is None:
        c = checks[0]
        raise SpecError(f"check {c.name!r} requested without a construction", c.line, c.col)
    if ctor is None:
        return
    early = [c for c in checks if sec.statements.index(c) < sec.statements.index(ctor)]
    if early:
        c = early[0]
        raise SpecError(f"check {c.name!r} requested before its construction", c.line, c.col)
    if ctor.name not in CONSTRUCTORS:
        raise SpecError(f"unknown constructor {ctor.name!r} (expected one of {', '.join(CONSTRUCTORS)})",
                        ctor.line, ctor.col)
    allowed = CHECKS[ctor.name]
    seen = set()
    for c in checks:
        if c.name != "all" and c.name not in allowed:
            raise SpecError(f"check {c.name!r} is not available for {ctor.name} (available: {', '.join(allowed)})",
                            c.line, c.col)
        key = (c.name, c.args)
        if key in seen:
            raise SpecError(f"check {c.name!r} requested twice", c.line, c.col)
        seen.add(key)
