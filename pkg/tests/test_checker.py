import random

import pytest

from artifact.acceptance import WITNESS_CASES, random_prterm
from artifact.canon import PPolynomial, parse_prterm, term_stats
from artifact.checker import (
    CheckConfig,
    WitnessError,
    build_witness,
    certify_dominant,
    check_identity,
    replay_trial,
    scalar_witness,
)
from artifact.field import GF
from artifact.freealg import GradedAssignment, evaluate, is_odd, y, z
from artifact.grassmann import GradingSpec, GrassmannElement
from artifact.parser import parse_polynomial

F3 = GF(3)


def P(text, field=F3):
    return parse_polynomial(text, field)


def T(text):
    return parse_prterm(text)[1]


def test_anticommutator_holds_exhaustively():
    rep = check_identity(P("z1*z2 + z2*z1"), CheckConfig(GradingSpec.canonical(), 3, exhaustive=True, max_wt=3))
    assert rep.holds and rep.evaluations == 81 ** 2


def test_product_of_odd_elements_in_kstar1():
    rep = check_identity(P("z1*z2"), CheckConfig(GradingSpec.first_k_star(1), 6, trials=200))
    assert rep.holds


def test_product_of_odd_generators_fails():
    rep = check_identity(P("z1*z2"), CheckConfig(GradingSpec.canonical(), 2, exhaustive=True))
    assert rep.verdict == "Fails"
    assert evaluate(P("z1*z2"), GradedAssignment(rep.assignment, GradingSpec.canonical())) == rep.value
    assert rep.value.terms


def test_random_failure_replays():
    cfg = CheckConfig(GradingSpec.canonical(), 6, trials=50, seed=11)
    f = P("y1*y2 - y1")
    rep = check_identity(f, cfg)
    assert rep.verdict == "Fails"
    assignment, value = replay_trial(f, cfg, rep.trial)
    assert value == rep.value
    assert check_identity(f, cfg).kv_lines() == rep.kv_lines()


def test_inconclusive_over_budget():
    cfg = CheckConfig(GradingSpec.canonical(), 3, exhaustive=True, budget=1000)
    assert check_identity(P("[y1,y2,y3]"), cfg).verdict == "Inconclusive"


def test_constant_polynomials():
    cfg = CheckConfig(GradingSpec.canonical(), 3)
    assert check_identity(P("3"), cfg).holds
    assert check_identity(P("1"), cfg).verdict == "Fails"


def test_scalar_witness_examples():
    assert scalar_witness(P("y1^3")) == {y(1): 1}
    assert scalar_witness(P("y1^9 - y1^3")) is None
    assert scalar_witness(P("y1^3 - y2^3")) == {y(1): 1, y(2): 0}
    F9 = GF(3, 2)
    assert scalar_witness(parse_polynomial("y1^27 - y1^3", F9)) is None
    pp = PPolynomial(F3, {((y(1), 3),): 1})
    assert scalar_witness(pp) == {y(1): 1}


def test_canonical_witness_for_two_odd_letters():
    u = T("z1*z2")
    w = build_witness(u, "can", F3)
    assert w.images[z(1)] == GrassmannElement.gen(F3, 2, 1)
    assert w.images[z(2)] == GrassmannElement.gen(F3, 2, 2)
    r = certify_dominant(u, w.assignment())
    assert r["nonzero"] and r["dom_support"] == {1, 2}


def test_alternating_witness_for_single_even_letter():
    w = build_witness(T("y1"), "inf", F3)
    assert w.images[y(1)] == GrassmannElement.blade(F3, w.n, (2, 4))
    assert certify_dominant(T("y1"), w.assignment())["nonzero"]


def test_first_k_witness_for_single_odd_letter():
    w = build_witness(T("z1"), "k1", F3, k=1)
    # R = k + 2A = 1 and l1 - n1 = 0, so z1 goes to e2 e1
    assert w.constants["R"] == 1
    assert w.images[z(1)] == GrassmannElement.blade(F3, w.n, (2, 1))
    r = certify_dominant(T("z1"), w.assignment())
    assert r["nonzero"] and r["dom_support"] == {1, 2}


def test_certify_examples():
    u = T("[z1,z2]")
    images = {z(1): GrassmannElement.gen(F3, 2, 1), z(2): GrassmannElement.gen(F3, 2, 2)}
    r = certify_dominant(u, images)
    assert r["dom_support"] == {1, 2} and r["value"] == GrassmannElement.blade(F3, 2, (1, 2), 2)
    assert not certify_dominant(T("y1"), {y(1): GrassmannElement.zero(F3, 2)})["nonzero"]
    for k in (1, 2):
        g = GrassmannElement.zero(F3, 2 * k)
        for i in range(1, k + 1):
            g = g + GrassmannElement.blade(F3, 2 * k, (2 * i - 1, 2 * i))
        r = certify_dominant(T(f"y1^{k}"), {y(1): g})
        assert r["nonzero"] and r["dom_support"] == set(range(1, 2 * k + 1))


def test_class_mismatch():
    with pytest.raises(WitnessError):
        build_witness(T("z1^2"), "can", F3)
    with pytest.raises(WitnessError):
        build_witness(T("z1*z2*z3"), "kstar", F3, k=2)
    with pytest.raises(WitnessError):
        build_witness(T("z1"), "k1", F3)


def _roles(u):
    beg = dict(u.beg)
    psi = set(u.psi)
    A = sum(e for x, e in beg.items() if not is_odd(x))
    B = sum(e for x, e in beg.items() if is_odd(x))
    n1 = sum(1 for x in beg if not is_odd(x) and x not in psi)
    l1 = len({x for x in set(beg) | psi if not is_odd(x)})
    m1 = sum(1 for x in beg if is_odd(x) and x not in psi)
    m2 = sum(1 for x in beg if is_odd(x))
    l2 = len({x for x in set(beg) | psi if is_odd(x)})
    return A, B, n1, l1, m1, m2, l2


def test_witness_constants():
    rng = random.Random(5)
    for case, k in WITNESS_CASES:
        seen = 0
        while seen < 40:
            u = random_prterm(rng, 3)
            try:
                w = build_witness(u, case, F3, k)
            except WitnessError:
                continue
            seen += 1
            A, B, n1, l1, m1, m2, l2 = _roles(u)
            c = w.constants
            if case == "inf":
                assert c["M"] == 4 * A + 2 * (l1 - n1)
            elif case == "kstar":
                assert c["Q"] == k + 2 * A + (l1 - n1)
                assert c["T"] == B + (m2 - m1)
            elif case == "k1":
                assert c["R"] == k + 2 * A
                assert c["S"] == k + 2 * A + B + (m2 - m1)
            elif case == "k2":
                assert c["M"] == k + B + (l2 - m1)


def test_witness_support_sizes():
    rng = random.Random(6)
    for case, k in WITNESS_CASES:
        seen = 0
        while seen < 40:
            u = random_prterm(rng, 3)
            try:
                w = build_witness(u, case, F3, k)
            except WitnessError:
                continue
            seen += 1
            r = certify_dominant(u, w.assignment())
            assert r["nonzero"]
            assert r["dom_support"] == w.expected_support
            used = set().union(*(g.supp() for g in w.images.values()))
            assert used == w.expected_support
            if case == "can":
                s = term_stats(u)
                assert len(used) == 2 * sum(1 for x in s.V if not is_odd(x)) + s.deg_Z
            else:
                # k2 sends the first power of the first odd letter to a lone generator
                lone = 1 if case == "k2" else 0
                assert len(used) == 2 * sum(e for _, e in u.beg) + len(u.psi) - lone
