"""The free Z2-graded algebra F<Y u Z>: words, polynomials, substitution, evaluation.

A variable (letter) is a plain int: y_i is ``i`` and z_i is ``Z_OFFSET + i``.
Integer order is therefore y1 < y2 < ... < z1 < z2 < ..., the variable order
used throughout.  A word is a tuple of letters; the empty tuple is 1.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .field import FieldParams
from .grassmann import DenseAlgebra, GradingSpec, GrassmannElement

__all__ = [
    "Z_OFFSET",
    "FreeAlgebraError",
    "y",
    "z",
    "is_odd",
    "var_index",
    "var_name",
    "word_parity",
    "word_key",
    "FreePolynomial",
    "GradedAssignment",
    "commutator",
    "substitute",
    "evaluate",
    "is_essential",
    "element_parity",
    "fp_mul",
    "fp_add",
    "fp_scale",
]

Z_OFFSET = 1 << 20


class FreeAlgebraError(ValueError):
    pass


def y(i: int) -> int:
    if i < 1:
        raise FreeAlgebraError("variable index must be >= 1")
    return i


def z(i: int) -> int:
    if i < 1:
        raise FreeAlgebraError("variable index must be >= 1")
    return Z_OFFSET + i


def is_odd(letter: int) -> bool:
    return letter > Z_OFFSET


def var_index(letter: int) -> int:
    return letter - Z_OFFSET if letter > Z_OFFSET else letter


def var_name(letter: int) -> str:
    return f"z{letter - Z_OFFSET}" if letter > Z_OFFSET else f"y{letter}"


def word_parity(word: Iterable[int]) -> int:
    return sum(1 for x in word if x > Z_OFFSET) & 1


def word_key(word: tuple[int, ...]):
    """Map-key order on words: length first, then letters left to right."""
    return (len(word), word)


class FreePolynomial:
    """A finite F-linear combination of words."""

    __slots__ = ("field", "terms")

    def __init__(self, field: FieldParams, terms: Mapping[tuple, int] | None = None):
        self.field = field
        self.terms: dict[tuple, int] = {}
        if terms:
            for w, c in terms.items():
                if c:
                    self.terms[tuple(w)] = c

    @classmethod
    def zero(cls, field: FieldParams) -> "FreePolynomial":
        return cls(field)

    @classmethod
    def one(cls, field: FieldParams) -> "FreePolynomial":
        return cls(field, {(): 1})

    @classmethod
    def constant(cls, field: FieldParams, code: int) -> "FreePolynomial":
        return cls(field, {(): code})

    @classmethod
    def var(cls, field: FieldParams, letter: int) -> "FreePolynomial":
        return cls(field, {(letter,): 1})

    @classmethod
    def word(cls, field: FieldParams, word: Iterable[int], code: int = 1) -> "FreePolynomial":
        return cls(field, {tuple(word): code})

    def _check(self, other: "FreePolynomial") -> None:
        if not isinstance(other, FreePolynomial):
            raise FreeAlgebraError("expected a FreePolynomial")
        if other.field != self.field:
            raise FreeAlgebraError("field mismatch")

    def _coerce(self, other):
        if isinstance(other, int):
            return FreePolynomial.constant(self.field, self.field.from_int(other))
        self._check(other)
        return other

    def __add__(self, other) -> "FreePolynomial":
        other = self._coerce(other)
        add = self.field.add_table
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = add[out.get(w, 0)][c]
        return FreePolynomial(self.field, out)

    __radd__ = __add__

    def __neg__(self) -> "FreePolynomial":
        neg = self.field.neg_table
        return FreePolynomial(self.field, {w: neg[c] for w, c in self.terms.items()})

    def __sub__(self, other) -> "FreePolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "FreePolynomial":
        return self._coerce(other) - self

    def scale(self, code: int) -> "FreePolynomial":
        mul = self.field.mul_table
        return FreePolynomial(self.field, {w: mul[code][c] for w, c in self.terms.items()})

    def __mul__(self, other) -> "FreePolynomial":
        if isinstance(other, int):
            return self.scale(self.field.from_int(other))
        self._check(other)
        add, mul = self.field.add_table, self.field.mul_table
        out: dict[tuple, int] = {}
        for u, cu in self.terms.items():
            for v, cv in other.terms.items():
                w = u + v
                out[w] = add[out.get(w, 0)][mul[cu][cv]]
        return FreePolynomial(self.field, out)

    def __rmul__(self, other) -> "FreePolynomial":
        if isinstance(other, int):
            return self.scale(self.field.from_int(other))
        return NotImplemented

    def __pow__(self, e: int) -> "FreePolynomial":
        if e < 0:
            raise FreeAlgebraError("negative exponent")
        result = FreePolynomial.one(self.field)
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, FreePolynomial) and self.field == other.field and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_words(self) -> list[tuple]:
        return sorted(self.terms, key=word_key)

    def variables(self) -> set[int]:
        out: set[int] = set()
        for w in self.terms:
            out.update(w)
        return out

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def parities(self) -> set[int]:
        return {word_parity(w) for w in self.terms}

    def __str__(self) -> str:
        from .parser import format_polynomial

        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"FreePolynomial({self})"


def fp_mul(a: FreePolynomial, b: FreePolynomial) -> FreePolynomial:
    return a * b


def fp_add(a: FreePolynomial, b: FreePolynomial) -> FreePolynomial:
    return a + b


def fp_scale(a: FreePolynomial, code: int) -> FreePolynomial:
    return a.scale(code)


def commutator(args: list[FreePolynomial]) -> FreePolynomial:
    """Left-normed commutator [a1, a2, ..., an] = [[a1, ..., a(n-1)], an]."""
    if len(args) < 2:
        raise FreeAlgebraError("a commutator needs at least two arguments")
    acc = args[0]
    for b in args[1:]:
        acc = acc * b - b * acc
    return acc


def is_essential(f: FreePolynomial) -> bool:
    """True when every variable of f occurs in every term."""
    vs = f.variables()
    return all(vs <= set(w) for w in f.terms)


def element_parity(g: GrassmannElement, grading: GradingSpec):
    """0 or 1 for a homogeneous element, None when mixed; zero counts as both (returns 0)."""
    flip = grading.flip_mask(g.n)
    pars = {bin(m & flip).count("1") & 1 for m in g.terms}
    if len(pars) > 1:
        return None
    return pars.pop() if pars else 0


class GradedAssignment:
    """A parity-checked map from letters to Grassmann elements or to polynomials."""

    def __init__(self, images: Mapping[int, object], grading: GradingSpec | None = None):
        self.grading = grading
        self.images = dict(images)
        for letter, img in self.images.items():
            want = 1 if is_odd(letter) else 0
            if isinstance(img, FreePolynomial):
                bad = img.parities() - {want}
                if bad:
                    raise FreeAlgebraError(f"image of {var_name(letter)} has the wrong parity")
            elif isinstance(img, GrassmannElement):
                if grading is not None and img.terms:
                    par = element_parity(img, grading)
                    if par != want:
                        raise FreeAlgebraError(
                            f"image of {var_name(letter)} is not homogeneous of parity {want} for {grading}"
                        )
            else:
                raise FreeAlgebraError("images must be FreePolynomial or GrassmannElement")

    def __getitem__(self, letter: int):
        return self.images[letter]

    def __contains__(self, letter: int) -> bool:
        return letter in self.images

    def items(self):
        return self.images.items()

    def format(self) -> str:
        return "; ".join(f"{var_name(v)}={self.images[v]}" for v in sorted(self.images))


def substitute(f: FreePolynomial, assignment) -> FreePolynomial:
    """Apply the graded endomorphism; unassigned letters map to themselves."""
    if not isinstance(assignment, GradedAssignment):
        assignment = GradedAssignment(assignment)
    field = f.field
    out = FreePolynomial.zero(field)
    cache: dict[int, FreePolynomial] = {}
    for w, c in f.terms.items():
        acc = FreePolynomial.constant(field, c)
        for letter in w:
            img = cache.get(letter)
            if img is None:
                img = assignment.images.get(letter)
                if img is None:
                    img = FreePolynomial.var(field, letter)
                elif not isinstance(img, FreePolynomial):
                    raise FreeAlgebraError("substitute needs polynomial images")
                cache[letter] = img
            acc = acc * img
        out = out + acc
    return out


def _build_trie(f: FreePolynomial):
    root: dict = {}
    for w, c in f.terms.items():
        node = root
        for letter in w:
            node = node.setdefault(letter, {})
        node[None] = c
    return root


def evaluate(f: FreePolynomial, assignment, grading: GradingSpec | None = None) -> GrassmannElement:
    """Homomorphic image of f under a total assignment of letters to G_n elements."""
    if not isinstance(assignment, GradedAssignment):
        assignment = GradedAssignment(assignment, grading)
    images = assignment.images
    missing = f.variables() - set(images)
    if missing:
        raise FreeAlgebraError("unassigned variables: " + ", ".join(var_name(v) for v in sorted(missing)))
    if not images:
        raise FreeAlgebraError("empty assignment: truncation unknown")
    first = next(iter(images.values()))
    if not isinstance(first, GrassmannElement):
        raise FreeAlgebraError("evaluate needs Grassmann images")
    field, n = first.field, first.n
    for img in images.values():
        if not isinstance(img, GrassmannElement) or img.n != n or img.field != field:
            raise FreeAlgebraError("images must share field and truncation")
    if n <= 14:
        ev = DenseEvaluator(field, n)
        return ev.dense.to_element(ev.evaluate(f, {v: ev.dense.from_element(g) for v, g in images.items()}))
    return _evaluate_sparse(f, images, field, n)


def _evaluate_sparse(f, images, field, n) -> GrassmannElement:
    total = GrassmannElement.zero(field, n)
    trie = _build_trie(f)
    stack = [(trie, GrassmannElement.one(field, n))]
    while stack:
        node, value = stack.pop()
        for key, child in node.items():
            if key is None:
                total = total + value.scale(child)
            else:
                nxt = value * images[key]
                if nxt.terms:
                    stack.append((child, nxt))
    return total


class DenseEvaluator:
    """Evaluates polynomials on dense G_n arrays, sharing word prefixes."""

    def __init__(self, field: FieldParams, n: int):
        self.field = field
        self.n = n
        self.dense = DenseAlgebra(field, n)

    def evaluate(self, f: FreePolynomial, images: Mapping[int, np.ndarray]) -> np.ndarray:
        return self.evaluate_trie(_build_trie(f), images)

    def evaluate_trie(self, trie, images: Mapping[int, np.ndarray]) -> np.ndarray:
        d = self.dense
        total = d.zero()
        stack = [(trie, d.one())]
        while stack:
            node, value = stack.pop()
            for key, child in node.items():
                if key is None:
                    total = d.axpy(child, value, total)
                else:
                    nxt = d.mul(value, images[key])
                    if nxt.any():
                        stack.append((child, nxt))
        return total


def build_trie(f: FreePolynomial):
    return _build_trie(f)
