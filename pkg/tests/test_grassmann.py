import numpy as np
import pytest

from artifact.field import GF
from artifact.grassmann import (
    BatchAlgebra,
    DenseAlgebra,
    GradingSpec,
    GrassmannElement,
    GrassmannError,
    apply_automorphism,
    blade_mul,
    enumerate_homogeneous,
    g_pow,
    homogeneous_component,
    mask_of,
)

F3 = GF(3)


def el(text, n=6, field=F3):
    return GrassmannElement.parse(text, field, n)


def test_blade_mul_signs():
    assert blade_mul(mask_of([1]), mask_of([2])) == (1, mask_of([1, 2]))
    assert blade_mul(mask_of([2, 3]), mask_of([1])) == (1, mask_of([1, 2, 3]))
    assert blade_mul(mask_of([2]), mask_of([1])) == (-1, mask_of([1, 2]))
    assert blade_mul(mask_of([1]), mask_of([1])) is None


def test_commutator_of_generators():
    e1, e2 = el("e1"), el("e2")
    assert e1 * e2 - e2 * e1 == el("2*e1e2")


def test_square_of_two_pairs():
    g = el("e1e2 + e3e4")
    assert g * g == el("2*e1e2e3e4")


def test_unit():
    g = el("1 + e1 + 2*e2e5")
    assert GrassmannElement.one(F3, 6) * g == g
    assert g_pow(g, 0) == GrassmannElement.one(F3, 6)


def test_frobenius_of_unitary_element():
    assert g_pow(el("1 + e1e2"), 3) == GrassmannElement.one(F3, 6)


def test_dominant_part_of_square():
    g = el("e1e2 + e3e4 + e5")
    assert g_pow(g, 2).dom() == el("2*e1e2e3e4")


def test_wt_dom_supp():
    g = el("e1 + e2e3")
    assert g.wt() == 2 and g.dom() == el("e2e3") and g.supp() == {1, 2, 3}
    one = GrassmannElement.one(F3, 6)
    assert one.wt() == 0 and one.dom() == one
    tie = el("2*e1e2 + e3e4")
    assert tie.dom() == tie
    zero = GrassmannElement.zero(F3, 6)
    assert zero.wt() == 0 and zero.dom() == zero


def test_automorphisms():
    assert apply_automorphism(GradingSpec.canonical(), el("e1e2")) == el("e1e2")
    assert apply_automorphism(GradingSpec.first_k(1), el("e1e2")) == el("-e1e2")
    assert apply_automorphism(GradingSpec.alternating(), el("e1e3")) == el("e1e3")
    g = el("1 + e1 + e2e4 + e1e2e3")
    for spec in (GradingSpec.canonical(), GradingSpec.alternating(), GradingSpec.first_k_star(2), GradingSpec.first_k(2)):
        assert apply_automorphism(spec, apply_automorphism(spec, g)) == g


def test_homogeneous_components():
    can = GradingSpec.canonical()
    assert homogeneous_component(can, el("e1 + e1e2"), 1) == el("e1")
    assert homogeneous_component(GradingSpec.first_k_star(1), el("e1 + e2"), 1) == el("e1")
    one = GrassmannElement.one(F3, 6)
    assert homogeneous_component(GradingSpec.alternating(), one, 0) == one
    g = el("1 + e1 + e2 + e1e2 + e2e3e4")
    spec = GradingSpec.first_k(2)
    assert homogeneous_component(spec, g, 0) + homogeneous_component(spec, g, 1) == g


def test_enumerate_homogeneous_counts():
    can = GradingSpec.canonical()
    assert len(list(enumerate_homogeneous(can, 1, 2, 1, F3))) == 9
    assert len(list(enumerate_homogeneous(can, 0, 2, 2, F3))) == 9
    zero_only = list(enumerate_homogeneous(GradingSpec.first_k_star(0), 1, 3, 3, F3))
    assert len(zero_only) == 1 and zero_only[0].is_zero()
    with pytest.raises(GrassmannError):
        list(enumerate_homogeneous(can, 0, 6, 6, F3, budget=100))


def test_mismatched_truncation():
    with pytest.raises(GrassmannError):
        el("e1", 3) * el("e1", 4)


def test_grading_parse():
    assert GradingSpec.parse("kstar:2") == GradingSpec.first_k_star(2)
    assert str(GradingSpec.parse("k:3")) == "k:3"
    with pytest.raises(GrassmannError):
        GradingSpec.parse("k:0")


@pytest.mark.parametrize("field", [GF(3), GF(3, 2), GF(5)])
def test_dense_and_batch_agree_with_sparse(field):
    rng = np.random.default_rng(7)
    n = 5
    dense = DenseAlgebra(field, n)
    batch = BatchAlgebra(field, n)
    xs = rng.integers(0, field.q, size=(1 << n, 4))
    ys = rng.integers(0, field.q, size=(1 << n, 4))
    prod = batch.mul(xs, ys)
    for t in range(4):
        a = dense.to_element(xs[:, t])
        b = dense.to_element(ys[:, t])
        assert dense.to_element(dense.mul(xs[:, t], ys[:, t])) == a * b
        assert batch.column(prod, t) == a * b
