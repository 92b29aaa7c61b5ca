"""The ten acceptance criteria, one test each.

Each test prints a single ``[PASS]``/``[FAIL]`` line (shown even without -s)
and then asserts the criterion.  Tolerance is zero throughout: every
comparison is exact arithmetic over a finite field.
"""

import subprocess
import sys

from artifact import acceptance as acc


def report(capsys, res):
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail


def test_criterion_01_explicit_evaluations(capsys):
    report(capsys, acc.suite_explicit_evaluations())


def test_criterion_02_ordinary_identities(capsys):
    report(capsys, acc.suite_regev())


def test_criterion_03_generators_are_identities(capsys):
    report(capsys, acc.suite_membership())


def test_criterion_04_reduction_soundness(capsys):
    report(capsys, acc.suite_soundness())


def test_criterion_05_output_class(capsys):
    report(capsys, acc.suite_conformance())


def test_criterion_06_order_laws(capsys):
    report(capsys, acc.suite_order())


def test_criterion_07_exchange_relation(capsys):
    report(capsys, acc.suite_exchange())


def test_criterion_08_scalar_witnesses(capsys):
    report(capsys, acc.suite_scalar_witness())


def test_criterion_09_witness_adequacy(capsys):
    report(capsys, acc.suite_witness())


def test_criterion_10_front_end(capsys):
    rt = acc.round_trip_failures()
    fp = acc.fixpoint_failures()
    proc = subprocess.run([sys.executable, "-m", "artifact", "selftest"], capture_output=True, text=True)
    detail = f"round trip failures {rt}/1000, fixpoint failures {fp}/200, selftest exit {proc.returncode}"
    passed = rt == 0 and fp == 0 and proc.returncode == 0
    with capsys.disabled():
        print("\n" + "\n".join("    selftest " + line for line in proc.stdout.splitlines()))
    report(capsys, acc.SuiteResult(10, "front end", passed, detail, 0.0))
