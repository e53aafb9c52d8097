import io
import json
import subprocess
import sys

import pytest

from stickychase.cli import main

import paper_programs as pp


def run(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def write(tmp_path):
    def make(text, name="prog.dlp"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return make


def test_classify_json(write):
    code, out, _ = run("classify", write(pp.JWS), "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["format_version"] == 1
    assert {k: data[k] for k in ("WA", "Sticky", "WS", "JWS")} == {"WA": False, "Sticky": False, "WS": False, "JWS": True}
    assert "ranks" in data


def test_classify_text_has_no_color_off_tty(write, monkeypatch):
    monkeypatch.setenv("STICKYCHASE_COLOR", "1")
    code, out, _ = run("classify", write(pp.STICKY_P))
    assert code == 0 and "\x1b[" not in out
    assert "Sticky yes" in out


def test_color_env_disables_ansi(write, monkeypatch):
    class Tty(io.StringIO):
        def isatty(self):
            return True

    path = write(pp.STICKY_P)
    out = Tty()
    main(["classify", path], out, io.StringIO())
    assert "\x1b[" in out.getvalue()
    monkeypatch.setenv("STICKYCHASE_COLOR", "never")
    out = Tty()
    main(["classify", path], out, io.StringIO())
    assert "\x1b[" not in out.getvalue()


def test_chase_text_and_trace(write, tmp_path):
    dump = tmp_path / "inst.txt"
    code, out, err = run("chase", write(pp.CHASE_INTRO), "--budget", "6", "--trace", "--dump-instance", str(dump))
    assert code == 0
    assert "S(ζ1,ζ2,ζ3)" not in out and "S(_:n1,_:n2,_:n3)." in out
    steps = [json.loads(line) for line in err.splitlines() if line.startswith("{")]
    assert len(steps) == 6
    assert dump.read_text() == out


def test_answer_exists_and_rank(write):
    path = write(pp.ALGS)
    assert run("answer", path, "--selection", "exists")[1] == "a\nb\n"
    assert run("answer", path, "--selection", "rank")[1] == "a\nb\n"


def test_answer_strict_rank_exits_one(write):
    code, out, err = run("answer", write(pp.ALGS), "--selection", "rank", "--strict")
    assert code == 1 and out == ""
    assert "join variable Y" in err


def test_answer_with_separate_query_file(write):
    prog = write(pp.PROOF_TREE)
    query = write("?Q(Y) :- P(a,Y).", "q.dlq")
    code, out, _ = run("answer", prog, query, "--selection", "exists", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["answers"] == [["b"]] and data["format_version"] == 1


def test_boolean_answer(write):
    assert run("answer", write(pp.SUBTYPE), "--selection", "bot")[1] == "true\n"


def test_oracle_selection_file(write):
    prog = write(pp.ALGS)
    sel = write("P[1] P[2] V[1]", "sel.txt")
    code, out, _ = run("answer", prog, "--selection", f"oracle:{sel}", "--format", "json")
    assert code == 0 and json.loads(out)["selection"].startswith("oracle")


def test_stdin_program(monkeypatch):
    code, out, _ = run("answer", "-", "--selection", "exists", stdin=pp.ALG, monkeypatch=monkeypatch)
    assert code == 0 and out == "a\nb\n"


def test_rewrite(write):
    code, out, err = run("rewrite", write(pp.magic_example(1)))
    assert code == 0
    assert out.splitlines()[0] == "mg__P__bf(a1)."
    assert out.splitlines()[-1] == "?Q :- P__bf(a1,X)."
    assert "output=True" in err
    code, out, _ = run("rewrite", write(pp.magic_example(1)), "--seed", "3", "--format", "json")
    assert code == 0 and json.loads(out)["closure"]["holds"]


def test_check_semantic(write):
    path = write(pp.STICKY_P_PRIME)
    code, out, _ = run("check-semantic", path, "--selection", "bot", "--budget", "40")
    assert code == 0 and out.startswith("violation")
    assert run("check-semantic", path, "--selection", "bot", "--budget", "40", "--strict")[0] == 1
    code, out, _ = run("check-semantic", write(pp.STICKY_P), "--selection", "bot", "--budget", "40", "--format", "json")
    assert code == 0 and json.loads(out)["verdict"] == "no-violation-within-budget"


@pytest.mark.parametrize("text", [pp.ALG, pp.ALGS, pp.PROOF_TREE, pp.SUBTYPE, pp.magic_example(2)])
def test_answer_agrees_with_oracle(write, text):
    path = write(text)
    _, expected, _ = run("oracle-answer", path, "--budget", "1000")
    assert run("answer", path, "--selection", "exists")[1] == expected


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["answer", "{prog}"], "--selection"),
        (["chase", "{missing}"], "cannot read"),
        (["chase", "{bad}"], "bad.dlp:2:1:"),
        (["chase", "{prog}", "--budget", "-1"], "non-negative"),
        (["answer", "{prog}", "--selection", "sideways"], "sideways"),
        (["answer", "{noquery}", "--selection", "bot"], "no query"),
        (["frobnicate"], "invalid choice"),
    ],
)
def test_usage_errors_exit_two(write, tmp_path, argv, needle):
    paths = {
        "prog": write(pp.ALG),
        "missing": str(tmp_path / "nope.dlp"),
        "bad": write("R(a,b\n", "bad.dlp"),
        "noquery": write(pp.APPLICABLE, "nq.dlp"),
    }
    code, _, err = run(*[a.format(**paths) for a in argv])
    assert code == 2 and needle in err


def test_byte_identical_reruns():
    cmd = [sys.executable, "-m", "stickychase.cli", "answer", "-", "--selection", "exists", "--format", "json", "--trace"]
    runs = [subprocess.run(cmd, input=pp.ALGS, capture_output=True, text=True, check=True) for _ in range(2)]
    assert runs[0].stdout == runs[1].stdout and runs[0].stderr == runs[1].stderr
    assert json.loads(runs[0].stdout)["answers"] == [["a"], ["b"]]
