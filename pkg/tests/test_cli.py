import json
import subprocess
import sys

import pytest

from ringproof.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def comm4(tmp_path, capsys):
    path = tmp_path / "c.cnf"
    assert run(capsys, "gen", "--identity", "comm", "--mult", "array", "--bits", 4, "--out", path)[0] == 0
    return path


def test_gen_then_oracle_unsat(comm4, capsys):
    code, out, _ = run(capsys, "oracle", comm4)
    assert code == 0 and out.strip() == "UNSAT"
    code, out, _ = run(capsys, "oracle", comm4, "--enumerate-inputs")
    assert code == 0 and out.strip() == "UNSAT"


def test_prove_then_check(comm4, tmp_path, capsys):
    res, stats = tmp_path / "c.res", tmp_path / "s.json"
    assert run(capsys, "prove", "--in", comm4, "--out", res, "--stats", stats, "--quiet")[0] == 0
    code, out, _ = run(capsys, "check", comm4, res, "--regular")
    assert code == 0 and out.startswith("ok: regular")
    code, out, _ = run(capsys, "check", comm4, res, "--ordered")
    assert code == 0 and out.startswith("ok: ordered")
    doc = json.loads(stats.read_text())
    assert doc["lines"] == sum(1 for _ in res.open()) and len(doc["strips"]) == 8


def test_tampered_trace(comm4, tmp_path, capsys):
    res = tmp_path / "c.res"
    run(capsys, "prove", "--in", comm4, "--out", res, "--quiet")
    lines = res.read_text().splitlines()
    idx = next(i for i, l in enumerate(lines) if not l.endswith(" 0 0") and len(l.split()) > 5)
    parts = lines[idx].split()
    parts[1] = str(-int(parts[1]))
    lines[idx] = " ".join(parts)
    bad = tmp_path / "bad.res"
    bad.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "check", comm4, bad)
    assert code == 1
    assert out.startswith(f"error: proof line {parts[0]}:")


def test_malformed_trace(comm4, tmp_path, capsys):
    bad = tmp_path / "bad.res"
    bad.write_text("1 1 0\n")
    code, out, _ = run(capsys, "check", comm4, bad)
    assert code == 1 and "line 1" in out


def test_gen_is_idempotent(tmp_path, capsys):
    a, b = tmp_path / "a.cnf", tmp_path / "b.cnf"
    for p in (a, b):
        run(capsys, "gen", "--identity", "dist", "--mult", "wallace", "--bits", 2, "--out", p)
    assert a.read_bytes() == b.read_bytes()


def test_faulted_prove_reports_dead_end(tmp_path, capsys):
    f = tmp_path / "f.cnf"
    run(capsys, "gen", "--identity", "comm", "--bits", 2, "--fault", "L:3:flip-maj-clause", "--out", f)
    code, out, _ = run(capsys, "oracle", f)
    assert code == 0 and out.startswith("SAT")
    code, out, _ = run(capsys, "prove", "--in", f, "--out", tmp_path / "f.res", "--quiet")
    assert code == 1 and "dead end" in out and "counterexample inputs: x=" in out
    assert not (tmp_path / "f.res").exists()


def test_strip_and_certify(comm4, tmp_path, capsys):
    s = tmp_path / "s.cnf"
    assert run(capsys, "strip", "--in", comm4, "--k", 3, "--out", s)[0] == 0
    code, out, _ = run(capsys, "oracle", s)
    assert out.strip() == "UNSAT"
    code, out, _ = run(capsys, "certify", "--in", comm4, "--k", 3)
    assert code == 0 and "joint bound" in out
    code, out, _ = run(capsys, "certify", "--in", comm4, "--k", 4, "--delta", 0)
    assert code == 1


def test_validate_wallace(capsys):
    code, out, _ = run(capsys, "validate-wallace", "--bits", 9)
    assert code == 0 and out.count("layer") == 5 and "=no" not in out


def test_stats_json_lines(capsys):
    code, out, _ = run(capsys, "stats", "--identity", "comm", "--mult", "array", "--bits", "2,3")
    rows = [json.loads(l) for l in out.splitlines()]
    assert code == 0 and [r["bits"] for r in rows] == [2, 3] and all(r["check_ok"] for r in rows)


@pytest.mark.parametrize("argv", [
    [],
    ["gen", "--identity", "comm", "--bits", "2"],
    ["gen", "--identity", "comm", "--mult", "dadda", "--bits", "2", "--out", "x"],
    ["gen", "--identity", "assoc", "--bits", "2", "--out", "/dev/null"],
    ["check", "/no/such.cnf", "/no/such.res"],
    ["stats", "--bits", "2,x"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(capsys, *argv)[0] == 2


def test_out_of_scope_identity(tmp_path, capsys):
    code, _, err = run(capsys, "gen", "--identity", "deg2:(x*y)*z=x*(y*z)", "--bits", 2, "--out", tmp_path / "a")
    assert code == 2 and "out of scope" in err


def test_prove_rejects_plain_dimacs(tmp_path, capsys):
    p = tmp_path / "p.cnf"
    p.write_text("p cnf 1 2\n1 0\n-1 0\n")
    assert run(capsys, "prove", "--in", p, "--out", tmp_path / "p.res")[0] == 2
    assert run(capsys, "oracle", p)[1].strip() == "UNSAT"


def test_common_flags_accepted(comm4, capsys):
    code, out, _ = run(capsys, "--seed", 3, "oracle", comm4, "--timeout", 60, "--jobs", 2)
    assert code == 0 and out.strip() == "UNSAT"


def test_module_entry_point(comm4):
    proc = subprocess.run([sys.executable, "-m", "ringproof", "oracle", str(comm4)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "UNSAT"
