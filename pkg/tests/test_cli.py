from __future__ import annotations

import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qschur.cli import (
    EXIT_INPUT,
    EXIT_ITERATION,
    EXIT_OK,
    EXIT_REJECTED,
    EXIT_UNSUPPORTED,
    EXIT_VERIFY,
    cmd_check,
    cmd_decompose,
    cmd_gen,
    cmd_verify,
    main,
)
from qschur.fileio import ParseError, checksum, emit_problem, parse_problem, read_problem, read_result
from qschur.generate import generate
from qschur.quiver import Kind, classify

FIXTURES = Path(__file__).parent / "fixtures"


def _gen(tmp_path, name, template, **kw):
    path = tmp_path / f"{name}.json"
    assert cmd_gen(template, str(path), **kw) == EXIT_OK
    return path


# parsing


def test_loop_fixture_parses():
    quiver, rep = read_problem(FIXTURES / "loop.json")
    assert quiver.m == 1 and quiver.n == 1
    assert rep[1].shape == (3, 3)


def test_cycle_trees_fixture_is_a_pseudotree():
    quiver, _ = read_problem(FIXTURES / "cycle_trees.json")
    (comp,) = classify(quiver).components
    assert quiver.m >= 7 and comp.kind is Kind.PSEUDOTREE


def test_wrong_matrix_shape_names_the_edge():
    doc = json.loads((FIXTURES / "loop.json").read_text())
    doc["vertices"] = [{"id": 1, "dim": 3}, {"id": 2, "dim": 2}]
    doc["edges"] = [{"id": 1, "src": 1, "dst": 2, "matrix": [[1, 2, 3], [4, 5, 6], [7, 8, 9]]}]
    with pytest.raises(ParseError) as info:
        parse_problem(json.dumps(doc))
    assert "edges[0].matrix" in str(info.value)


@pytest.mark.parametrize(
    "text",
    [
        "{",
        '{"format_version": 1}',
        '{"format_version": 1, "field": "real", "vertices": [], "edges": [], "extra": 0}',
        '{"format_version": 1, "field": "real", "vertices": [{"id": 2, "dim": 1}], "edges": []}',
    ],
)
def test_malformed_inputs(text):
    with pytest.raises(ParseError):
        parse_problem(text)


def test_problem_round_trip_is_exact():
    quiver, rep = generate("cycle-trees", dims=[3, 3, 3, 2, 4, 5, 1], seed=2, field="complex")
    text = emit_problem(quiver, rep)
    q2, r2 = parse_problem(text)
    assert emit_problem(q2, r2) == text
    for e in quiver.edges:
        assert np.array_equal(rep[e.id], r2[e.id])
    assert checksum(quiver, rep) == checksum(q2, r2)


# check


def test_check_exit_codes(tmp_path, capsys):
    assert cmd_check(FIXTURES / "loop.json") == EXIT_OK
    capsys.readouterr()
    assert cmd_check(FIXTURES / "two_loops.json") == EXIT_REJECTED
    (comp,) = json.loads(capsys.readouterr().out)["components"]
    assert len(comp["evidence"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    assert cmd_check(bad) == EXIT_INPUT
    assert cmd_check(tmp_path / "missing.json") == EXIT_INPUT


def test_check_generated_topologies(tmp_path):
    assert cmd_check(_gen(tmp_path, "tl", "two-loops")) == EXIT_REJECTED
    assert cmd_check(_gen(tmp_path, "ct", "cycle-trees")) == EXIT_OK


# decompose


def test_decompose_pencil(tmp_path):
    out = tmp_path / "r.json"
    assert cmd_decompose(FIXTURES / "pencil.json", out) == EXIT_OK
    outcome, _, verification = read_result(out)
    assert verification["passed"]
    # Over the reals at most one of the two matrices keeps 2x2 blocks.
    assert sum(bool(np.any(np.tril(t, -1))) for t in outcome.T.values()) <= 1
    assert all(np.all(np.tril(t, -2) == 0) for t in outcome.T.values())


def test_decompose_parallel_three_is_rejected(tmp_path):
    out = tmp_path / "r.json"
    assert cmd_decompose(_gen(tmp_path, "p3", "parallel(3)", dims=[2, 2]), out) == EXIT_REJECTED
    doc = json.loads(out.read_text())
    assert doc["status"] == "rejected" and len(doc["rejection"]["evidence"]) == 2


def test_decompose_seeded_three_cycle(tmp_path):
    out = tmp_path / "r.json"
    assert cmd_decompose(_gen(tmp_path, "c3", "cycle(3)", dims=[4], seed=3), out) == EXIT_OK


def test_decompose_iteration_limit(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cmd_decompose(_gen(tmp_path, "c3", "cycle(3)", dims=[6], seed=3), out, max_iter=1) == EXIT_ITERATION
    diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert diag["error"] == "iteration_limit" and diag["context"]["component"] == 0


def test_decompose_mixed_rectangular_cycle_is_unsupported(tmp_path):
    path = _gen(tmp_path, "mix", "contragredient", dims=[2, 3])
    doc = json.loads(path.read_text())
    # Turn 2 -> 1 into a second 1 -> 2 edge: a rectangular pencil.
    doc["edges"][1].update(src=1, dst=2, matrix=doc["edges"][0]["matrix"])
    path.write_text(json.dumps(doc))
    assert cmd_decompose(path, tmp_path / "r.json") == EXIT_UNSUPPORTED


def test_decompose_bad_input(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[]")
    assert cmd_decompose(bad, tmp_path / "r.json") == EXIT_INPUT


# verify


def test_verify_fresh_result(tmp_path):
    out = tmp_path / "r.json"
    assert cmd_decompose(FIXTURES / "cycle_trees.json", out) == EXIT_OK
    assert cmd_verify(FIXTURES / "cycle_trees.json", out, stdout=io.StringIO()) == EXIT_OK


def test_verify_corrupted_q(tmp_path):
    out = tmp_path / "r.json"
    cmd_decompose(FIXTURES / "loop.json", out)
    doc = json.loads(out.read_text())
    doc["decomposition"]["Q"][0]["matrix"][0][0] += 0.01
    out.write_text(json.dumps(doc))
    assert cmd_verify(FIXTURES / "loop.json", out, stdout=io.StringIO()) == EXIT_VERIFY


def test_verify_checksum_mismatch_warns_then_verifies(tmp_path, capsys):
    out = tmp_path / "r.json"
    cmd_decompose(FIXTURES / "loop.json", out)
    doc = json.loads(out.read_text())
    doc["input_sha256"] = "0" * 64
    out.write_text(json.dumps(doc))
    assert cmd_verify(FIXTURES / "loop.json", out, stdout=io.StringIO()) == EXIT_OK
    assert "checksum" in capsys.readouterr().err


def test_verify_rejection_result(tmp_path):
    out = tmp_path / "r.json"
    assert cmd_decompose(FIXTURES / "two_loops.json", out) == EXIT_REJECTED
    assert cmd_verify(FIXTURES / "two_loops.json", out, stdout=io.StringIO()) == EXIT_OK


# gen


def test_gen_is_deterministic(tmp_path):
    a = _gen(tmp_path, "a", "loop", dims=[4], seed=7)
    b = _gen(tmp_path, "b", "loop", dims=[4], seed=7)
    assert a.read_bytes() == b.read_bytes()
    c = _gen(tmp_path, "c", "loop", dims=[4], seed=8)
    assert a.read_bytes() != c.read_bytes()


def test_gen_unknown_template():
    assert cmd_gen("nonsense", None) == EXIT_INPUT


# main


def test_main_usage_error_exits_1(capsys):
    with pytest.raises(SystemExit) as info:
        main(["decompose"])
    assert info.value.code == EXIT_INPUT


def test_main_round_trip(tmp_path):
    prob, res = tmp_path / "p.json", tmp_path / "r.json"
    assert main(["gen", "pseudotree", "-o", str(prob), "--seed", "4", "--field", "complex"]) == EXIT_OK
    assert main(["decompose", str(prob), "-o", str(res)]) == EXIT_OK
    assert main(["verify", str(prob), str(res)]) == EXIT_OK


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qschur", "check", str(FIXTURES / "two_loops.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_REJECTED
