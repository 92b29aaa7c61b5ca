import pytest

from artifact.field import GF, FieldError, ff_add, ff_enumerate, ff_inv, ff_make, ff_mul, ff_neg, ff_pow, parse_field_config


def test_make_reduces_mod_p():
    assert ff_make(GF(3), [5]) == 2
    assert ff_make(GF(5), [0]) == 0


def test_x_squared_plus_one_is_irreducible_over_gf3():
    # x^2+1 has no root mod 3, so it is a valid modulus
    F = GF(3, 2, (1, 0, 1))
    assert F.q == 9


def test_reducible_modulus_rejected():
    # x^2 + 2 = (x + 1)(x + 2) over GF(3)
    with pytest.raises(FieldError):
        GF(3, 2, (2, 0, 1))


@pytest.mark.parametrize("p", [1, 2, 4, 9])
def test_bad_characteristic_rejected(p):
    with pytest.raises(FieldError):
        GF(p)


def test_prime_field_arithmetic():
    F = GF(3)
    two = ff_make(F, [2])
    assert ff_add(two, two) == 1
    assert ff_mul(two, two) == 1
    assert ff_neg(two) == 1
    assert ff_inv(two) == 2
    assert ff_inv(ff_make(GF(5), [2])) == 3
    assert ff_pow(two, 3) == 2
    assert ff_pow(two, 0) == 1


def test_gf9_square_of_generator():
    # with modulus x^2 + 1 the generator squares to -1
    F = GF(3, 2, (1, 0, 1))
    a = ff_make(F, [0, 1])
    assert ff_mul(a, a).coeffs == [2, 0]


def test_gf9_inverses_and_frobenius():
    F = GF(3, 2)
    elems = ff_enumerate(F)
    for x in elems:
        assert ff_pow(x, 9) == x
        if x:
            assert ff_mul(x, ff_inv(x)) == 1


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        ff_inv(ff_make(GF(5), [0]))


def test_enumerate():
    assert [x.code for x in ff_enumerate(GF(3))] == [0, 1, 2]
    e5 = ff_enumerate(GF(5))
    assert len({x.code for x in e5}) == 5
    e9 = ff_enumerate(GF(3, 2))
    codes = {x.code for x in e9}
    assert len(codes) == 9 and e9[0] == 0 and e9[1] == 1
    assert all(ff_add(x, y).code in codes for x in e9 for y in e9)


def test_mismatched_fields():
    with pytest.raises(FieldError):
        ff_add(ff_make(GF(3), [1]), ff_make(GF(5), [1]))


def test_config_string():
    F = parse_field_config("p=3,t=2,mod=1,0,1")
    assert (F.p, F.t, F.q) == (3, 2, 9)
    with pytest.raises(FieldError):
        parse_field_config("t=2")
