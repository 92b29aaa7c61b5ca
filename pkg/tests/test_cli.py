import io
import subprocess
import sys

import pytest

from artifact.cli import EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, expand_parities, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue().strip()


def test_parse_print():
    assert run("parse", "[y1,y2]") == (EXIT_OK, "y1*y2 - y2*y1")
    assert run("parse", "z1^2") == (EXIT_OK, "z1*z1")


def test_parse_error(capsys):
    code, _ = run("parse", "[y1]")
    assert code == EXIT_USAGE
    assert "position" in capsys.readouterr().err


def test_reduce():
    assert run("reduce", "z1*y1", "--ideal", "I2") == (EXIT_OK, "y1*z1 - [y1,z1]")
    assert run("reduce", "z1^3", "--ideal", "I2") == (EXIT_OK, "0")
    assert run("reduce", "y1^9", "--ideal", "I2", "--field", "3") == (EXIT_OK, "(y1^3) * 1")
    assert run("reduce", "z1*z2", "--ideal", "I3:1") == (EXIT_OK, "0")
    assert run("reduce", "z1*z2", "--grading", "kstar:1") == (EXIT_OK, "0")


def test_reduce_trace():
    code, text = run("reduce", "z1*y1", "--ideal", "I2", "--trace")
    assert code == EXIT_OK
    assert "SWAP: z1*y1 -> y1*z1 - [y1,z1]" in text


def test_ideal_grading_mismatch():
    assert run("reduce", "y1", "--ideal", "I1", "--grading", "alternating")[0] == EXIT_USAGE
    assert run("reduce", "y1", "--ideal", "I3")[0] == EXIT_USAGE


def test_check_exit_codes():
    assert run("check", "[x1,x2,x3]", "--grading", "alternating")[0] == EXIT_OK
    assert run("check", "z1*z2*z3", "--grading", "kstar:2")[0] == EXIT_OK
    assert run("check", "[y1,y2]", "--grading", "canonical")[0] == EXIT_OK
    code, text = run("check", "y1*y2", "--grading", "canonical", "--n", "4")
    assert code == EXIT_FAILS and "witness" in text
    code, _ = run("check", "[y1,y2,y3]*y4", "--exhaustive", "--n", "3")
    assert code == EXIT_INCONCLUSIVE


def test_check_is_reproducible():
    a = run("check", "y1*z1*y2", "--seed", "4", "--format", "kv", "--n", "6")
    b = run("check", "y1*z1*y2", "--seed", "4", "--format", "kv", "--n", "6")
    assert a == b and a[0] == EXIT_FAILS


def test_expand_parities():
    assert expand_parities("[x1,x2]") == ["[y1,y2]", "[y1,z2]", "[z1,y2]", "[z1,z2]"]
    assert expand_parities("y1") == ["y1"]


def test_gen():
    assert run("gen", "g_m", "m=1") == (EXIT_OK, "z1")
    assert run("gen", "fT", "zs=2", "T=1,2") == (EXIT_OK, "[z1,z2]")
    code, text = run("gen", "I4", "k=1")
    labels = {line.split()[0] for line in text.splitlines()}
    assert code == EXIT_OK and labels == {"(1)", "(3)", "(4)", "(5)", "(6)", "(7)", "(8)"}
    assert run("gen", "fT", "zs=2", "T=1")[0] == EXIT_USAGE
    assert run("gen", "nope")[0] == EXIT_USAGE


def test_order():
    assert run("order", "y1", "y2") == (EXIT_OK, "Less")
    assert run("order", "y1*z1", "y2*z1") == (EXIT_OK, "Less")
    assert run("order", "y2*[y1,z1]", "y2*[y1,z1]") == (EXIT_OK, "Equal")
    assert run("order", "y1^2", "y1") == (EXIT_OK, "Greater")
    assert run("order", "[y1,y1]", "y1")[0] == EXIT_USAGE


def test_witness():
    code, text = run("witness", "z1*z2", "case=can")
    assert code == EXIT_OK
    assert "nonzero: yes" in text and "support: {1, 2}" in text
    code, text = run("witness", "z1", "case=k1", "k=1", "--format", "kv")
    assert code == EXIT_OK and "certified=yes" in text
    assert run("witness", "z1^2", "case=can")[0] == EXIT_USAGE


def test_field_option():
    assert run("parse", "a*y1", "--field", "9") == (EXIT_OK, "(a)*y1")
    assert run("parse", "y1", "--field", "6")[0] == EXIT_USAGE
    assert run("parse", "y1", "--field", "2")[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [["--help"], ["reduce", "--help"]])
def test_help(argv):
    assert run(*argv)[0] == EXIT_OK


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "artifact", "order", "y1", "y2"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "Less"
