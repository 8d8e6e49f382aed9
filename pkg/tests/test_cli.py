from __future__ import annotations

import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laxform.checks import CheckResult
from laxform.cli.__main__ import fixture_path, main
from laxform.cli.dsl import CHECKS, SpecDocument, SpecError, Statement, parse_spec
from laxform.cli.report import FIELDS, Report, emit, parse_jsonl

MINIMAL = "coords xi eta nu\npoles U=[a]; poles V=[b]; poles W=[c]\nconstruct triplet\ncheck closure\n"


def run_cli(args, env=None):
    proc = subprocess.run([sys.executable, "-m", "laxform.cli", *args], capture_output=True, env=env, timeout=600)
    return proc.returncode, proc.stdout, proc.stderr.decode()


# --- parsing -----------------------------------------------------------------------------

def test_minimal_triplet_parses():
    doc = parse_spec(MINIMAL)
    (sec,) = doc.sections()
    assert sec.construction.name == "triplet"
    assert sec.poles() == {"U": ["a"], "V": ["b"], "W": ["c"]}
    assert [c.name for c in sec.checks] == ["closure"]


def test_empty_and_comment_only_documents():
    assert parse_spec("").statements == []
    assert parse_spec("# nothing\n\n;;\n").statements == []


@pytest.mark.parametrize("text,needle,line", [
    ("poles U=[a,a]", "duplicate pole symbol", 1),
    ("coords x\ncoords x", "duplicate declaration", 2),
    ("poles U=[a]\npoles U=[b]", "duplicate pole list", 2),
    ("check closure", "without a construction", 1),
    ("poles U=[a]\ncheck el\nconstruct zm", "before its construction", 2),
    ("construct triplet\ncheck ghost", "not available", 2),
    ("construct tower", "unknown constructor", 1),
    ("coords x1\nfield A dims matrix deps x2", "undeclared coordinate", 2),
    ("params a\npoles U=[z]", "not a declared parameter", 2),
    ("poles Q=[a]", "pole list must be", 1),
    ("option colour=3", "unknown option", 1),
    ("option seed=x", "integer", 1),
    ("construct zm g=true g=false", "duplicate argument", 1),
    ("poles U=[a b]", "expected ',' or ']'", 1),
    ("coords x $", "unexpected character", 1),
    ("frobnicate", "unknown statement", 1),
])
def test_parse_errors_have_locations(text, needle, line):
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    assert needle in str(info.value)
    assert info.value.line == line and info.value.col >= 1


def test_sections_split_on_new_declarations():
    doc = parse_spec(MINIMAL + "poles U=[a]; poles V=[b]\nconstruct zm\ncheck el\nconstruct akns height=3\n")
    assert [s.construction.name for s in doc.sections()] == ["triplet", "zm", "akns"]


idents = st.sampled_from(["a", "b", "c", "a1", "a2", "b1", "c2", "k.3", "m-1"])


@st.composite
def documents(draw):
    stmts = []
    if draw(st.booleans()):
        stmts.append(Statement("option", args=(("seed", draw(st.integers(0, 99))),)))
    for _ in range(draw(st.integers(0, 3))):
        ctor = draw(st.sampled_from(sorted(CHECKS)))
        if draw(st.booleans()):
            stmts.append(Statement("coords", items=("xi", "eta", "nu")))
        if ctor != "akns":
            syms = draw(st.lists(idents, min_size=2, max_size=5, unique=True))
            cut = draw(st.integers(1, len(syms) - 1))
            stmts.append(Statement("poles", "U", tuple(syms[:cut])))
            stmts.append(Statement("poles", "V", tuple(syms[cut:])))
            args = (("g", draw(st.booleans())),) if ctor == "zm" and draw(st.booleans()) else ()
        else:
            args = (("height", draw(st.integers(3, 6))), ("L12", draw(st.sampled_from(['q r', 'i/2*q_{x1} "r"']))))
        stmts.append(Statement("construct", ctor, args=args))
        for name in draw(st.lists(st.sampled_from(CHECKS[ctor] + ("all",)), unique=True, max_size=3)):
            stmts.append(Statement("check", name, args=(("backstop", 2),) if draw(st.booleans()) else ()))
    return SpecDocument(stmts)


@settings(max_examples=300)
@given(documents())
def test_print_parse_round_trip(doc):
    text = doc.to_text()
    again = parse_spec(text)
    assert again == doc
    assert again.to_text() == text


def test_fixtures_round_trip():
    for name in ("paper-suite", "corrupted-l23", "minimal-triplet"):
        with open(fixture_path(name), encoding="utf-8") as fh:
            doc = parse_spec(fh.read())
        assert parse_spec(doc.to_text()) == doc


# --- reports -----------------------------------------------------------------------------

def test_empty_report_is_header_only():
    out = emit(Report.for_input("", [], 3)).decode()
    lines = out.splitlines()
    assert lines[0].startswith("laxform ") and "seed 3" in lines[0]
    assert lines[-1] == "summary: 0 pass, 0 numerically-pass, 0 fail, 0 total"
    assert emit(Report.for_input("", [], 3), "jsonl") == b""


def test_jsonl_round_trip():
    recs = [CheckResult("a.b", "pass", "0", "anchor é", 11, None),
            CheckResult("c", "fail", "witness seed 4: x", "", 5, 1.5),
            CheckResult("d", "numerically-pass", "1.2e-17", "n", None, None)]
    data = emit(Report.for_input("x", recs, 0), "jsonl")
    for line in data.decode().splitlines():
        assert tuple(json.loads(line)) == FIELDS
    assert parse_jsonl(data) == recs


# --- running -------------------------------------------------------------------------------

def test_minimal_run(tmp_path, capsys):
    spec = tmp_path / "m.lax"
    spec.write_text(MINIMAL)
    assert main(["run", str(spec), "--format", "jsonl"]) == 0
    names = [json.loads(x)["name"] for x in capsys.readouterr().out.splitlines()]
    assert "closure.triplet.111" in names


def test_every_requested_check_is_reported(tmp_path, capsys):
    spec = tmp_path / "s.lax"
    spec.write_text("poles U=[a]; poles V=[b]\nconstruct laxpair\ncheck all\n")
    assert main(["run", str(spec), "--format", "jsonl", "--seed", "1"]) == 0
    names = [json.loads(x)["name"] for x in capsys.readouterr().out.splitlines()]
    assert len(names) == len(set(names))
    for check in CHECKS["laxpair"]:
        assert any(n.startswith(check + ".") for n in names), check


def test_input_errors_exit_2(tmp_path, capsys):
    spec = tmp_path / "bad.lax"
    spec.write_text("poles U=[a]\ncheck closure\n")
    assert main(["run", str(spec)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.lax")]) == 2
    assert main(["run", "@no-such-fixture"]) == 2
    spec.write_text("poles U=[a]\nconstruct zm\n")
    assert main(["run", str(spec)]) == 2
    spec.write_text("construct akns height=9\n")
    assert main(["run", str(spec)]) == 2
    spec.write_text('construct akns L23="q +"\n')
    assert main(["run", str(spec)]) == 2


def test_env_seed_default(tmp_path):
    spec = tmp_path / "m.lax"
    spec.write_text(MINIMAL)
    import os
    env = dict(os.environ, LAXFORM_SEED="5")
    code, out, _ = run_cli(["run", str(spec)], env=env)
    assert code == 0 and b"seed 5" in out.splitlines()[0]
    env["LAXFORM_SEED"] = "five"
    assert run_cli(["run", str(spec)], env=env)[0] == 2


def test_bundled_suite_is_deterministic_and_green():
    a = run_cli(["paper-suite", "--seed", "7", "--format", "jsonl"])
    b = run_cli(["paper-suite", "--seed", "7", "--format", "jsonl", "--jobs", "3"])
    assert a[0] == 0 and b[0] == 0
    assert a[1] == b[1]
    recs = parse_jsonl(a[1])
    assert len(recs) >= 20
    by_name = {r.name: r for r in recs}
    assert by_name["closure.triplet.111"].verdict == "pass"
    assert all(r.ms is None for r in recs)


def test_corrupted_fixture_fails_with_witness():
    code, out, err = run_cli(["run", "@corrupted-l23", "--format", "jsonl"])
    assert code == 1
    failing = [r for r in parse_jsonl(out) if r.verdict == "fail"]
    assert any(r.name == "scalar-akns.closure" and "witness seed" in r.residual for r in failing)
    assert "FAILED scalar-akns.closure" in err


def test_text_report_and_out_file(tmp_path):
    out = tmp_path / "r.txt"
    assert main(["run", "@minimal-triplet", "--out", str(out), "--timings"]) == 0
    text = out.read_text()
    assert "closure.triplet.111" in text and text.rstrip().splitlines()[-1].startswith("summary:")


def test_fixtures_listing(capsys):
    assert main(["fixtures"]) == 0
    assert "paper-suite" in capsys.readouterr().out


def test_max_order_option(tmp_path):
    from laxform.checks import numeric_settings
    from laxform.zm import PoleData, verify_el_structure

    with numeric_settings(max_order=3):
        assert all(r.ok for r in verify_el_structure(PoleData.grid(1, 1, 1)))
    spec = tmp_path / "m.lax"
    spec.write_text("option max_order=0\n" + MINIMAL)
    assert main(["run", str(spec)]) == 2
