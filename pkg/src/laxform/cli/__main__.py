"""``laxform`` command-line entry point."""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from typing import List, Optional

from .. import __version__
from ..expr import ExprError
from .dsl import SpecError, parse_spec
from .report import Report, emit
from .runner import RunOptions, run_document

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
FIXTURES = ("paper-suite", "corrupted-l23", "minimal-triplet")


def fixture_path(name: str) -> str:
    if name not in FIXTURES:
        raise SpecError(f"unknown fixture {name!r} (available: {', '.join(FIXTURES)})")
    return str(resources.files("laxform") / "fixtures" / f"{name}.lax")


def _default_seed() -> int:
    env = os.environ.get("LAXFORM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise SpecError(f"LAXFORM_SEED must be an integer, got {env!r}") from None


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="root seed (default: option seed, LAXFORM_SEED or 0)")
    p.add_argument("--trials", type=int, default=None, help="numeric trials per zero test")
    p.add_argument("--dim", type=int, default=None, help="matrix dimension for numeric evaluation")
    p.add_argument("--format", choices=("text", "jsonl"), default="text")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--timings", action="store_true", help="record wall time per check (not deterministic)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="laxform", description="Verify Lagrangian 2-form multiforms of Lax systems.")
    ap.add_argument("--version", action="version", version=f"laxform {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the checks of a spec file ('@name' selects a bundled fixture)")
    run.add_argument("spec")
    _add_run_options(run)
    suite = sub.add_parser("paper-suite", help="run the bundled acceptance fixture")
    _add_run_options(suite)
    fx = sub.add_parser("fixtures", help="list bundled fixtures")
    fx.add_argument("--path", default=None, help="print the path of one fixture")
    sub.add_parser("parse", help="parse a spec and print it back normalised").add_argument("spec")
    return ap


def _read_spec(arg: str) -> str:
    path = fixture_path(arg[1:]) if arg.startswith("@") else arg
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None


def _positive(name: str, v: Optional[int]) -> None:
    if v is not None and v < 1:
        raise SpecError(f"--{name} must be positive")


def run_text(text: str, args) -> int:
    doc = parse_spec(text)
    opts = doc.options
    seed = args.seed if args.seed is not None else opts.get("seed", _default_seed())
    for name in ("trials", "dim", "jobs"):
        _positive(name, getattr(args, name))
    for name in ("trials", "dim", "max_order"):
        if name in opts and opts[name] < 1:
            raise SpecError(f"option {name} must be positive")
    ro = RunOptions(seed=seed, trials=args.trials or opts.get("trials"), dim=args.dim or opts.get("dim"),
                    jobs=args.jobs, timings=args.timings, max_order=opts.get("max_order"))
    records = run_document(doc, ro)
    report = Report.for_input(text, records, seed)
    data = emit(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    for r in report.failures():
        print(f"FAILED {r.name}: {r.residual}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fixtures":
            if args.path:
                print(fixture_path(args.path))
            else:
                for name in FIXTURES:
                    print(f"{name}\t{fixture_path(name)}")
            return EXIT_OK
        if args.command == "parse":
            sys.stdout.write(parse_spec(_read_spec(args.spec)).to_text())
            return EXIT_OK
        text = _read_spec("@paper-suite" if args.command == "paper-suite" else args.spec)
        return run_text(text, args)
    except (SpecError, ExprError) as exc:
        print(f"laxform: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
