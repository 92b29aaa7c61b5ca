import itertools
import random

import pytest

from artifact import canon
from artifact.canon import (
    IdealSpec,
    PrTerm,
    bad_terms,
    gen_fT,
    gen_gm,
    gen_ideal_basis,
    gen_rT,
    in_output_class,
    lbt,
    leading_term,
    make_prterm,
    parse_prterm,
    reduce,
    reduction_trace,
    replay_trace,
    ss_class,
    ss_compare,
    straighten_psi,
    straighten_psi_random_path,
    term_stats,
)
from artifact.checker import CheckConfig, check_identity, evaluate_term
from artifact.field import GF
from artifact.freealg import FreePolynomial, y, z
from artifact.grassmann import GradingSpec, GrassmannElement
from artifact.parser import parse_polynomial

F3 = GF(3)


def T(text):
    sign, u = parse_prterm(text)
    assert sign == 1
    return u


def P(text, field=F3):
    return parse_polynomial(text, field)


def test_term_stats():
    s = term_stats(T("y1^2*z3*[y2,z1]"))
    assert (s.deg_Y, s.deg_Z, s.pr_z, s.Yym) == (3, 2, z(3), {y(1)})
    s = term_stats(T("y1"))
    assert s.deg == 1 and s.pr_z is None
    s = term_stats(T("z1*z2*[z3,z4]"))
    assert s.deg_Z == 4 and s.Yym == frozenset()


def test_ss_classes():
    assert ss_class(T("y1^2*z1"), None, 3)["SS0"]
    spec = IdealSpec("I4", F3, 2)
    assert not ss_class(T("z1*z2*z3*[y1,y2]"), spec)["SS2"]
    assert ss_class(T("z1*[y1,z1]"), spec)["SS3"]
    # beg exponent p is outside SS
    assert not ss_class(T("y1^3"), None, 3)["SS"]


def test_order_examples():
    assert ss_compare(T("y1"), T("y1^2")) == -1
    assert ss_compare(T("y1*z1"), T("y2*z1")) == -1
    assert ss_compare(T("y1"), T("y2")) == -1
    u = T("y1*z2*[y2,z1]")
    assert ss_compare(u, u) == 0


def test_leading_and_bad_terms():
    assert leading_term([T("y1"), T("y1*y2")]) == T("y1*y2")
    assert bad_terms([T("y1*z1")]) == []
    lt = T("y1*z1^2*[y1,z2]")
    other = T("y1^2*z1*[z1,z2]")
    assert leading_term([lt, other]) == lt
    assert bad_terms([lt, other]) == [other]
    assert lbt([lt, other]) == other


def test_fT_rT():
    zs = [z(1), z(2)]
    assert gen_fT(zs, (), F3) == P("z1*z2")
    assert gen_fT(zs, (1, 2), F3) == P("[z1,z2]")
    assert gen_rT(y(1), zs, (1,), F3) == P("z2*[y1,z1]")
    with pytest.raises(ValueError):
        gen_fT(zs, (1,), F3)


def test_g_polynomials():
    assert gen_gm(1, None, F3) == P("z1")
    F5 = GF(5)
    # (-2)^(-1) = 2 in GF(5)
    assert gen_gm(2, None, F5) == P("z1*z2 + 2*[z1,z2]", F5)
    assert gen_gm(2, None, F3) == P("z1*z2 + [z1,z2]")


def test_generator_lists():
    i1 = dict(gen_ideal_basis(IdealSpec("I1", F3)))
    assert i1["[y1,y2]"] == P("[y1,y2]")
    assert i1["z1*z2 + z2*z1"] == P("z1*z2 + z2*z1")
    assert len(i1) == 4
    i4 = dict(gen_ideal_basis(IdealSpec("I4", F3, 2)))
    assert i4["(3) l=2 g_2*b"] == gen_gm(2, None, F3) * P("[y1,y2]")
    i3 = dict(gen_ideal_basis(IdealSpec("I3", F3, 1)))
    assert i3["z1*z2"] == P("z1*z2")


def test_i4_families_by_parity_of_k():
    odd = {label.split()[0] for label, _ in gen_ideal_basis(IdealSpec("I4", F3, 1))}
    even = {label.split()[0] for label, _ in gen_ideal_basis(IdealSpec("I4", F3, 2))}
    assert "(1)" in odd and "(2)" not in odd
    assert "(2)" in even and "(1)" not in even
    assert odd | even == {f"({i})" for i in range(1, 9)}


def test_straighten_psi():
    assert straighten_psi([(y(2), y(1))]) == (-1, (y(1), y(2)))
    assert straighten_psi([(y(1), y(2)), (y(1), y(3))]) == (0, None)
    # modulo the triple commutator [x1,x3][x2,x4] = -[x1,x2][x3,x4]
    assert straighten_psi([(y(1), y(3)), (y(2), y(4))]) == (-1, (y(1), y(2), y(3), y(4)))


def test_exchange_relation_sign_on_g():
    spec = GradingSpec.alternating()
    cfg = CheckConfig(spec, 8, trials=50)
    minus = P("[y1,y2]*[y3,y4] + [y1,y3]*[y2,y4]")
    plus = P("[y1,y2]*[y3,y4] - [y1,y3]*[y2,y4]")
    assert check_identity(minus, cfg).holds
    assert check_identity(plus, cfg).verdict == "Fails"


def test_straightening_is_path_independent():
    rng = random.Random(3)
    letters = [y(1), y(2), z(1), z(2), z(3), y(3)]
    for _ in range(200):
        chosen = rng.sample(letters, 4)
        brackets = [(chosen[0], chosen[1]), (chosen[2], chosen[3])]
        rng.shuffle(brackets)
        assert straighten_psi_random_path(brackets, rng) == straighten_psi(brackets)


def test_reduce_examples():
    i2 = IdealSpec("I2", F3)
    assert reduce(P("[y1,[y2,y3]]"), i2).is_zero()
    assert str(reduce(P("z1*y1"), i2)) == "y1*z1 - [y1,z1]"
    assert str(reduce(P("y1^4"), i2)) == "(y1^3) * y1"
    assert reduce(P("z1^3"), i2).is_zero()
    assert str(reduce(P("y1^9"), i2)) == "(y1^3) * 1"
    assert reduce(P("z1*z2"), IdealSpec("I3", F3, 1)).is_zero()


def test_reduce_field_mismatch():
    with pytest.raises(ValueError):
        reduce(P("y1"), IdealSpec("I2", GF(5)))


def test_reduce_over_gf9():
    F9 = GF(3, 2)
    i2 = IdealSpec("I2", F9)
    assert str(reduce(parse_polynomial("y1^27", F9), i2)) == "(y1^3) * 1"
    assert reduce(parse_polynomial("y1^27 - y1^3", F9), i2).is_zero()


def test_traces():
    i2 = IdealSpec("I2", F3)
    result, steps = reduction_trace(P("z1*y1"), i2)
    assert [s[0] for s in steps] == ["SWAP"]
    assert reduction_trace(P("y1"), i2)[1] == []
    assert reduction_trace(P("z1^3"), i2)[1][-1][0] == "KILL-ZP"
    f = P("z2*y1*z1*y1 + [z1,y2]*z1 - y1^5*z3")
    for spec in (i2, IdealSpec("I4", F3, 2), IdealSpec("I1", F3)):
        result, steps = reduction_trace(f, spec)
        assert replay_trace(f, spec, steps) == result == reduce(f, spec)


def test_idempotent():
    f = P("z2*y1*z1*y1 + [z1,y2]*z1*z3 - y1^5*z3*y2")
    for spec in (IdealSpec("I2", F3), IdealSpec("I3", F3, 2), IdealSpec("I4", F3, 1), IdealSpec("I4", F3, 2)):
        r = reduce(f, spec)
        assert reduce(r.to_polynomial(), spec) == r


def test_generators_reduce_to_zero():
    for which, k in [("I1", None), ("I2", None), ("I3", 0), ("I3", 2), ("I4", 1), ("I4", 2), ("I4", 3)]:
        spec = IdealSpec(which, F3, k)
        for label, g in gen_ideal_basis(spec):
            assert reduce(g, spec).is_zero(), (spec, label)


def _terms_with_degrees(degrees: dict, p: int):
    """Every PrTerm (up to sign) whose total degree in each variable is as given."""
    letters = sorted(degrees)
    out = set()
    for in_psi in itertools.product((0, 1), repeat=len(letters)):
        psi = [x for x, b in zip(letters, in_psi) if b]
        if len(psi) % 2:
            continue
        beg = [(x, degrees[x] - b) for x, b in zip(letters, in_psi)]
        if any(e < 0 or e > p - 1 for _, e in beg):
            continue
        sign, u = make_prterm(beg, [(psi[i], psi[i + 1]) for i in range(0, len(psi), 2)])
        if u is not None:
            out.add(u)
    return out


def test_ss3_does_not_span_every_shape():
    # z1^2*z3*[z1,z2] modulo I4 with k = 2, p = 3
    spec = IdealSpec("I4", F3, 2)
    u = T("z1^2*z3*[z1,z2]")
    shape = _terms_with_degrees({z(1): 3, z(2): 1, z(3): 1}, 3)
    assert u in shape
    assert not any(ss_class(v, spec)["SS3"] for v in shape)
    # u is not an identity of G with the k = 2 grading, so it is not zero mod I4
    n = 9
    images = {
        z(1): GrassmannElement.parse("e1e5 + e2e6 + e7", F3, n),
        z(2): GrassmannElement.gen(F3, n, 8),
        z(3): GrassmannElement.gen(F3, n, 9),
    }
    assert evaluate_term(u, images).terms
    r = reduce(canon.prterm_polynomial(u, F3), spec)
    assert not r.is_zero()
    assert not all(in_output_class(v, spec) for v in r.pairs)


def test_leading_word_of_g_is_minus_the_rest():
    # g_m = P + a(P) lies in I4, so P = -a(P) and not +a(P)
    spec = GradingSpec.first_k(1)
    zs = [z(1), z(2), z(3)]
    lead = FreePolynomial.word(F3, zs)
    rest = canon.gen_a(3, zs, F3)
    cfg = CheckConfig(spec, 8, trials=50)
    assert check_identity(lead + rest, cfg).holds
    assert check_identity(lead - rest, cfg).verdict == "Fails"


def test_prterm_roundtrip_text():
    u = T("y1^2*z3*[y2,z1]")
    assert str(u) == "y1^2*z3 * [y2,z1]"
    assert T(str(u).replace(" ", "")) == u
    assert parse_prterm("[y1,y1]") == (0, None)
    assert isinstance(u, PrTerm)
