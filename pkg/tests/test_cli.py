import json
import pathlib
import subprocess
import sys

import pytest

from arborify.cli import main

GOLDEN = pathlib.Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_prints_canonical(capsys):
    code, out, _ = run(capsys, "parse", "-e", "I[t1,1]((1)) I[t1,0]((1))")
    assert code == 0 and out == "I[t1,0]((1)) I[t1,1]((1))\n"


def test_parse_file_roundtrip(capsys):
    f = GOLDEN / "004_t6.arb"
    code, out, _ = run(capsys, "parse", str(f), "--model", "nls")
    assert code == 0 and out == f.read_text()


def test_arborify_both_agree(capsys):
    code, out, _ = run(capsys, "arborify", str(GOLDEN / "001_t4.arb"), "--model", "nls", "--via", "both")
    assert code == 0 and "PASS  recursive-vs-coproduct" in out


def test_shuffle(capsys):
    code, out, _ = run(capsys, "shuffle", "-e", "S[0 (1)]", "-e", "S[0 (2)]")
    assert code == 0 and out.count("S[") == 4


def test_eval_json(capsys):
    code, out, _ = run(capsys, "eval", "-e", "I[t1,0]((1))#a I[t1,1]((1))#b\npair2: (#a, #b)",
                       "--model", "nls", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == "arborify-report/v1"
    assert abs(rep["value"]["re"] - 0.36787944117144233) < 1e-14
    assert "wall_time_s" not in rep


def test_verify_deterministic(capsys):
    args = ("verify", "family1", "family3", "--json")
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0 and out1 == out2
    assert all(c["status"] == "pass" for c in json.loads(out1)["checks"])


def test_verify_theorem_small(capsys):
    code, out, _ = run(capsys, "verify", "theorem-wave", "--trials", "3", "--seed", "5")
    assert code == 0 and "3/3 checks passed" in out


def test_render_dot(capsys):
    code, out, _ = run(capsys, "render", "--dot", str(GOLDEN / "001_t4.arb"))
    assert code == 0 and out.startswith("digraph")


@pytest.mark.parametrize("argv", [
    ("verify", "nonsense"),
    ("parse",),
    ("parse", "/nonexistent/file.arb"),
    ("parse", "-e", "I[t2,0]((9); I[t1,0]((1)))"),
    ("shuffle", "-e", "S[0 (1)]"),
    (),
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("arborify:")


def test_kirchhoff_error_has_location(capsys):
    code, _, err = run(capsys, "parse", "-e", "I[t2,0]((9); I[t1,0]((1)))")
    assert "1:1:" in err


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "arborify.cli", "parse", "-e", "I[t1,0]((1))"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "I[t1,0]((1))\n"
