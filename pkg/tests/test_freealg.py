import math

import pytest

from artifact.field import GF
from artifact.freealg import (
    FreeAlgebraError,
    FreePolynomial,
    GradedAssignment,
    commutator,
    evaluate,
    is_essential,
    substitute,
    word_parity,
    y,
    z,
)
from artifact.grassmann import GradingSpec, GrassmannElement
from artifact.parser import ParseError, parse_polynomial, parse_scalar

F3 = GF(3)


def P(text, field=F3):
    return parse_polynomial(text, field)


def V(letter, field=F3):
    return FreePolynomial.var(field, letter)


def test_commutators():
    assert commutator([V(y(1)), V(y(2))]) == P("y1*y2 - y2*y1")
    triple = commutator([V(y(1)), V(y(2)), V(y(3))])
    assert len(triple.terms) == 4
    assert triple == commutator([commutator([V(y(1)), V(y(2))]), V(y(3))])
    assert commutator([V(z(1)), V(z(1))]).is_zero()
    with pytest.raises(FreeAlgebraError):
        commutator([V(y(1))])


def test_parity_and_essential():
    assert word_parity((z(1), y(1), z(2))) == 0
    assert not is_essential(P("y1*y2 + y1"))
    f = P("[y1,z1]")
    assert is_essential(f) and f.parities() == {1}


def test_substitute():
    assert substitute(P("[y1,y2]"), {y(1): V(y(3))}) == P("[y3,y2]")
    assert substitute(P("z1*z2"), {z(1): P("z1*z2*z3")}) == P("z1*z2*z3*z2")
    with pytest.raises(FreeAlgebraError):
        substitute(P("z1"), {z(1): V(y(1))})


def test_ring_operations():
    assert V(y(1)) * V(z(1)) == FreePolynomial.word(F3, (y(1), z(1)))
    s = V(y(1)) + V(z(1))
    assert s * s == P("y1*y1 + y1*z1 + z1*y1 + z1*z1")
    assert FreePolynomial.one(F3) * s == s


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bracket_product_on_generators(n):
    letters = [y(i) for i in range(1, 2 * n + 1)]
    f = FreePolynomial.one(F3)
    for i in range(0, 2 * n, 2):
        f = f * commutator([V(letters[i]), V(letters[i + 1])])
    images = {x: GrassmannElement.gen(F3, 2 * n, i) for i, x in enumerate(letters, 1)}
    want = GrassmannElement.blade(F3, 2 * n, range(1, 2 * n + 1), F3.from_int(2 ** n))
    assert evaluate(f, images) == want


@pytest.mark.parametrize("k", [1, 2])
def test_power_of_pairs(k):
    n = 2 * k
    pairs = GrassmannElement.zero(F3, n)
    for i in range(1, k + 1):
        pairs = pairs + GrassmannElement.blade(F3, n, (2 * i - 1, 2 * i))
    got = evaluate(FreePolynomial.word(F3, [y(1)] * k), {y(1): pairs})
    assert got == GrassmannElement.blade(F3, n, range(1, n + 1), F3.from_int(math.factorial(k)))


def test_evaluate_unit_and_errors():
    one = GrassmannElement.one(F3, 3)
    assert evaluate(V(y(1)), {y(1): one}) == one
    with pytest.raises(FreeAlgebraError):
        evaluate(P("y1*y2"), {y(1): one})
    with pytest.raises(FreeAlgebraError):
        GradedAssignment({z(1): GrassmannElement.blade(F3, 3, (1, 2))}, GradingSpec.canonical())


def test_sparse_path_matches_dense():
    # n > 14 takes the sparse evaluator
    f = P("[y1,y2]*z1 + y1^2")
    small = {y(1): GrassmannElement.parse("1 + e1e2", F3, 4), y(2): GrassmannElement.parse("e3e4", F3, 4), z(1): GrassmannElement.parse("e1", F3, 4)}
    big = {v: GrassmannElement(F3, 16, g.terms) for v, g in small.items()}
    assert evaluate(f, big).terms == evaluate(f, small).terms


def test_parse_print():
    assert str(P("[y1,y2]")) == "y1*y2 - y2*y1"
    assert str(P("z1^2")) == "z1*z1"
    assert P("2 y1 z1") == P("2*y1*z1")
    assert P("4*y1") == P("y1")
    with pytest.raises(ParseError) as err:
        P("[y1]")
    assert err.value.position is not None
    with pytest.raises(ParseError):
        P("y1 + ")
    with pytest.raises(ParseError):
        P("a*y1")


def test_parse_extension_coefficients():
    F9 = GF(3, 2)
    f = P("(a + 1)*y1 - a*z1", F9)
    assert parse_polynomial(str(f), F9) == f
    assert parse_scalar("a*a", F9) == F9.mul(F9.generator_code(), F9.generator_code())
