import json
import subprocess
import sys

import pytest

from unilog.cli import main
from unilog.formats import read_wiring

from helpers import data_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def verdict(out):
    lines = [ln for ln in out.splitlines() if ln.startswith("VERDICT: ")]
    assert len(lines) == 1, out
    return lines[0][len("VERDICT: "):]


def test_unify(capsys):
    code, out, _ = run(capsys, "unify", "f(X)", "f(g(Y))")
    assert code == 0
    assert "{X ↦ g(Y)}" in out
    code, out, _ = run(capsys, "unify", "f(X)", "g(X)")
    assert code == 1 and verdict(out) == "not unifiable"


def test_counter_is_cyclic(capsys):
    code, out, _ = run(capsys, "nilpotent", data_path("counter8.w"))
    assert code == 1 and verdict(out) == "cyclic"
    code, out, _ = run(capsys, "nilpotent", "--naive", data_path("counter8.w"))
    assert code == 1 and "F^8" in out


def test_naive_max_iter(capsys, tmp_path):
    p = tmp_path / "f.w"
    p.write_text("f(X) <- g(X)\n")
    code, out, _ = run(capsys, "nilpotent", "--naive", "--max-iter", "3", str(p))
    assert code == 0 and verdict(out) == "nilpotent"


def test_circuit_commands(capsys):
    code, out, _ = run(capsys, "cvp-eval", data_path("one_gate.ckt"))
    assert code == 0 and out.splitlines()[0] == "1"
    code, out, _ = run(capsys, "cvp-eval", data_path("zero_gate.ckt"))
    assert code == 1
    code, text, _ = run(capsys, "cvp-encode", data_path("one_gate.ckt"))
    assert code == 0 and "VERDICT" not in text
    # the encoded query fed back, split into words as a shell would do
    code, out, _ = run(capsys, "query", *text.split())
    assert code == 0 and verdict(out) == "success"
    code, text, _ = run(capsys, "cvp-encode", data_path("majority.ckt"))
    code, out, _ = run(capsys, "query", "--oracle", "--depth", "20", *text.split())
    assert code == 0


def test_query_file_and_oracle(capsys):
    code, out, _ = run(capsys, "query", data_path("derive.q"))
    assert code == 0
    code, out, _ = run(capsys, "query", "--oracle", data_path("derive.q"))
    assert code == 0 and "-->" in out


def test_pipeline_through_files(capsys, tmp_path):
    obs = tmp_path / "parens.w"
    code, out, _ = run(capsys, "encode-automaton", data_path("parens.aut"), "-o", str(obs))
    assert code == 0 and verdict(out) == "encoded"
    assert len(read_wiring(str(obs))) > 0
    assert run(capsys, "check-obs", str(obs))[0] == 0
    assert run(capsys, "accept", str(obs), "(())")[0] == 0
    assert run(capsys, "accept", str(obs), "())")[0] == 1
    assert run(capsys, "simulate", data_path("parens.aut"), "(())")[0] == 0
    red = tmp_path / "red.w"
    assert run(capsys, "reduce", str(obs), "()", "-o", str(red))[0] == 0
    assert run(capsys, "nilpotent", str(red))[0] == 0


def test_wiring_commands(capsys, tmp_path):
    p = tmp_path / "f.w"
    p.write_text("f(X) <- X\nX <- f(X)\n")
    code, out, _ = run(capsys, "saturate", str(p))
    assert code == 0 and "X0 <- X0" in out
    code, out, _ = run(capsys, "flatten", str(p))
    assert code == 0
    code, out, _ = run(capsys, "product", str(p), str(p))
    assert code == 0 and "f(f(X0)) <- X0" in out
    code, out, _ = run(capsys, "word-rep", "ab", "ba")
    assert code == 0 and out.count("<-") == 6


def test_json_matches_text(capsys):
    for argv in (["nilpotent", data_path("counter8.w")], ["cvp-eval", data_path("majority.ckt")],
                 ["simulate", data_path("anbn.aut"), "aabb"]):
        code_t, out_t, _ = run(capsys, *argv)
        code_j, out_j, _ = run(capsys, "--json", *argv)
        assert code_t == code_j
        assert json.loads(out_j)["verdict"] == verdict(out_t)
        # flag accepted after the subcommand as well
        code_j2, out_j2, _ = run(capsys, *argv, "--json")
        assert out_j2 == out_j


def test_input_errors(capsys, tmp_path):
    code, _, err = run(capsys, "nilpotent", str(tmp_path / "missing.w"))
    assert code == 2 and "no such file" in err
    bad = tmp_path / "bad.w"
    bad.write_text("f(X) <- X\nf(X <- X\n")
    code, _, err = run(capsys, "nilpotent", str(bad))
    assert code == 2 and "bad.w:2:" in err
    code, _, err = run(capsys, "saturate", data_path("counter8.w").replace("counter8.w", "parens.aut"))
    assert code == 2
    code, _, err = run(capsys, "accept", data_path("counter8.w"), "a")
    assert code == 2 and "not an observation" in err
    code, _, err = run(capsys, "simulate", data_path("anbn.aut"), "abc")
    assert code == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "nilpotent", "--max-iter", "0", data_path("counter8.w"))[0] == 2
    assert run(capsys, "--flatten-threshold", "x", "nilpotent", data_path("counter8.w"))[0] == 2


def test_flatten_threshold_flag(capsys):
    for t in ("1", "none"):
        code, out, _ = run(capsys, "--flatten-threshold", t, "nilpotent", data_path("counter8.w"))
        assert code == 1 and verdict(out) == "cyclic"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "unilog", "cvp-eval", data_path("one_gate.ckt")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "VERDICT: 1" in r.stdout
