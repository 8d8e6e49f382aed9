"""Deterministic text and json-lines reports."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import List

from .. import __version__
from ..checks import FAIL, NUMERIC_PASS, PASS, CheckResult

__all__ = ["Report", "emit", "parse_jsonl", "FIELDS"]

FIELDS = ("name", "verdict", "residual", "anchor", "seed", "ms")
_RESIDUAL_WIDTH = 60


@dataclass
class Report:
    records: List[CheckResult] = field(default_factory=list)
    input_hash: str = ""
    seed: int = 0
    version: str = __version__

    @classmethod
    def for_input(cls, text: str, records: List[CheckResult], seed: int) -> "Report":
        return cls(records, hashlib.sha256(text.encode("utf-8")).hexdigest(), seed)

    def counts(self) -> dict:
        out = {PASS: 0, NUMERIC_PASS: 0, FAIL: 0}
        for r in self.records:
            out[r.verdict] = out.get(r.verdict, 0) + 1
        return out

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.records)

    def failures(self) -> List[CheckResult]:
        return [r for r in self.records if not r.ok]


def _clip(text: str, width: int) -> str:
    text = " ".join(text.split())
    return text if len(text) <= width else text[: width - 3] + "..."


def emit(report: Report, fmt: str = "text") -> bytes:
    if fmt == "jsonl":
        lines = [json.dumps({k: r.as_dict()[k] for k in FIELDS}, ensure_ascii=False) for r in report.records]
        return "".join(line + "\n" for line in lines).encode("utf-8")
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    head = f"laxform {report.version}  input sha256:{report.input_hash[:16]}  seed {report.seed}"
    rows = [(r.name, r.verdict, _clip(r.residual, _RESIDUAL_WIDTH), r.anchor) for r in report.records]
    titles = ("check", "verdict", "residual", "anchor")
    widths = [max([len(t)] + [len(row[k]) for row in rows]) for k, t in enumerate(titles)]

    def line(cols):
        return "  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()

    out = [head, line(titles), line(["-" * w for w in widths])]
    out += [line(row) for row in rows]
    c = report.counts()
    out.append(f"summary: {c[PASS]} pass, {c[NUMERIC_PASS]} numerically-pass, {c[FAIL]} fail, {len(rows)} total")
    return ("\n".join(out) + "\n").encode("utf-8")


def parse_jsonl(data: bytes) -> List[CheckResult]:
    out = []
    for line in data.decode("utf-8").splitlines():
        if line.strip():
            d = json.loads(line)
            out.append(CheckResult(**{k: d[k] for k in FIELDS}))
    return out
