"""Normal forms modulo the T2-ideals I1..I4.

A product term (:class:`PrTerm`) is ``beg * psi``: ``beg`` is an ordered power
product of variables (y's before z's, ascending index) and ``psi`` is a product
of 2-brackets stored as a flat, strictly increasing letter sequence
``(x1, x2, x3, x4, ...)`` meaning ``[x1,x2][x3,x4]...``.

Modulo the triple commutator the 2-brackets are central, a product of them is
alternating in its letters and vanishes when a letter repeats.  So ``psi`` has
a unique sorted representative, reached with the sign of the sorting
permutation.  Straightening a word uses ``b a = a b - [a,b]``.

Reduction results are :class:`CanonicalForm` objects: maps from PrTerms to
p-polynomial coefficients.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from .field import FieldParams
from .freealg import (
    Z_OFFSET,
    FreePolynomial,
    commutator,
    is_odd,
    var_name,
    y as yvar,
    z as zvar,
)
from .grassmann import GradingSpec
from .parser import format_coefficient, join_terms, parse_term_factors

__all__ = [
    "ReductionError",
    "PrTerm",
    "TermStats",
    "IdealSpec",
    "PPolynomial",
    "CanonicalForm",
    "ONE_TERM",
    "make_prterm",
    "parse_prterm",
    "format_prterm",
    "prterm_polynomial",
    "term_stats",
    "ss_class",
    "ss_key",
    "ss_compare",
    "leading_term",
    "bad_terms",
    "lbt",
    "straighten_psi",
    "straighten_psi_random_path",
    "psi_insert",
    "gen_fT",
    "gen_rT",
    "gen_gm",
    "gen_a",
    "gen_ideal_basis",
    "reduce",
    "reduction_trace",
    "replay_trace",
    "in_output_class",
]

BUDGET = 10 ** 6


class ReductionError(RuntimeError):
    pass


class PrTerm(NamedTuple):
    beg: tuple  # ((letter, exponent), ...) ascending letters
    psi: tuple  # (x1, x2, ...) strictly increasing, even length

    def __str__(self) -> str:
        return format_prterm(self)


ONE_TERM = PrTerm((), ())


def _flat_beg(beg) -> tuple:
    out = []
    for x, e in beg:
        out.extend([x] * e)
    return tuple(out)


def _beg_from_sorted_word(word) -> tuple:
    out = []
    for x in word:
        if out and out[-1][0] == x:
            out[-1][1] += 1
        else:
            out.append([x, 1])
    return tuple((x, e) for x, e in out)


def _perm_sign(seq) -> int:
    """Sign of the permutation sorting seq (all entries distinct)."""
    s = 0
    n = len(seq)
    for i in range(n):
        a = seq[i]
        for j in range(i + 1, n):
            if seq[j] < a:
                s += 1
    return -1 if s & 1 else 1


def psi_insert(psi: tuple, a: int, b: int):
    """Multiply the bracket product psi by [a,b]; returns (sign, new psi), sign 0 on a repeat."""
    if a == b or a in psi or b in psi:
        return 0, None
    cnt = 0
    for x in psi:
        if x > a:
            cnt += 1
        if x > b:
            cnt += 1
    merged = tuple(sorted(psi + (a, b)))
    return (-1 if cnt & 1 else 1), merged


def straighten_psi(brackets: Iterable[tuple[int, int]]):
    """Canonical form of a product of 2-brackets ``[(a,b), (c,d), ...]``.

    Returns ``(sign, psi)`` with psi the sorted letter sequence, or ``(0, None)``
    when a letter repeats.  [b,a] = -[a,b]; brackets commute; and any two letters
    of the flat sequence may be exchanged at the cost of a sign.
    """
    seq = []
    for a, b in brackets:
        seq.extend((a, b))
    if len(set(seq)) != len(seq):
        return 0, None
    return _perm_sign(seq), tuple(sorted(seq))


def straighten_psi_random_path(brackets, rng: random.Random):
    """Same result as :func:`straighten_psi`, reached by randomly ordered local moves.

    Moves: flip a bracket (sign -1), swap two adjacent brackets (sign +1), or
    exchange the inner letters of two adjacent brackets (sign -1).  Each move
    is only taken when it strictly lowers the inversion count.
    """
    br = [list(x) for x in brackets]
    flat = [x for b in br for x in b]
    if len(set(flat)) != len(flat):
        return 0, None
    sign = 1

    def inversions(bs):
        f = [x for b in bs for x in b]
        return sum(1 for i in range(len(f)) for j in range(i + 1, len(f)) if f[j] < f[i])

    cur = inversions(br)
    while cur:
        moves = []
        for i, b in enumerate(br):
            if b[0] > b[1]:
                moves.append(("flip", i))
        for i in range(len(br) - 1):
            moves.append(("swap", i))
            moves.append(("exch", i))
        rng.shuffle(moves)
        for kind, i in moves:
            cand = [list(b) for b in br]
            if kind == "flip":
                cand[i].reverse()
                s = -1
            elif kind == "swap":
                cand[i], cand[i + 1] = cand[i + 1], cand[i]
                s = 1
            else:
                cand[i][1], cand[i + 1][0] = cand[i + 1][0], cand[i][1]
                s = -1
            inv = inversions(cand)
            if inv < cur:
                br, cur, sign = cand, inv, sign * s
                break
        else:  # pragma: no cover - some move always lowers the count
            raise ReductionError("no improving move")
    return sign, tuple(x for b in br for x in b)


def make_prterm(beg_items: Iterable[tuple[int, int]], brackets: Iterable[tuple[int, int]] = ()):
    """Build a PrTerm from (letter, exponent) items and brackets; returns (sign, term) or (0, None)."""
    exps: dict[int, int] = {}
    for x, e in beg_items:
        if e < 0:
            raise ValueError("negative exponent")
        if e:
            exps[x] = exps.get(x, 0) + e
    sign, psi = straighten_psi(brackets)
    if not sign:
        return 0, None
    beg = tuple(sorted(exps.items()))
    return sign, PrTerm(beg, psi)


def parse_prterm(text: str):
    """Parse ``y1^2*z3*[y2,z1]``-style text into (sign, PrTerm)."""
    beg, brackets = [], []
    for factor in parse_term_factors(text):
        if factor[0] == "pow":
            beg.append((factor[1], factor[2]))
        else:
            brackets.append((factor[1], factor[2]))
    return make_prterm(beg, brackets)


def format_beg(beg) -> str:
    return "*".join(var_name(x) if e == 1 else f"{var_name(x)}^{e}" for x, e in beg)


def format_psi(psi) -> str:
    return "".join(f"[{var_name(psi[i])},{var_name(psi[i + 1])}]" for i in range(0, len(psi), 2))


def format_prterm(u: PrTerm) -> str:
    parts = []
    if u.beg:
        parts.append(format_beg(u.beg))
    if u.psi:
        parts.append(format_psi(u.psi))
    return " * ".join(parts) if parts else "1"


def prterm_polynomial(u: PrTerm, field: FieldParams) -> FreePolynomial:
    """The element beg * psi of the free algebra, brackets expanded."""
    out = FreePolynomial.word(field, _flat_beg(u.beg))
    for i in range(0, len(u.psi), 2):
        a = FreePolynomial.var(field, u.psi[i])
        b = FreePolynomial.var(field, u.psi[i + 1])
        out = out * commutator([a, b])
    return out


# ---------------------------------------------------------------------------
# statistics, classes and order


class TermStats(NamedTuple):
    Deg: dict
    deg_Y: int
    deg_Z: int
    deg: int
    V: frozenset
    Yym: frozenset
    pr_z: int | None
    degZ_beg: int
    degY_psi: int


def term_stats(u: PrTerm) -> TermStats:
    Deg: dict[int, int] = {}
    for x, e in u.beg:
        Deg[x] = Deg.get(x, 0) + e
    for x in u.psi:
        Deg[x] = Deg.get(x, 0) + 1
    deg_Y = sum(e for x, e in Deg.items() if not is_odd(x))
    deg_Z = sum(e for x, e in Deg.items() if is_odd(x))
    psi_set = set(u.psi)
    yym = frozenset(x for x, e in u.beg if not is_odd(x) and x not in psi_set)
    pr_z = next((x for x, e in u.beg if is_odd(x)), None)
    return TermStats(
        Deg=Deg,
        deg_Y=deg_Y,
        deg_Z=deg_Z,
        deg=deg_Y + deg_Z,
        V=frozenset(Deg),
        Yym=yym,
        pr_z=pr_z,
        degZ_beg=sum(e for x, e in u.beg if is_odd(x)),
        degY_psi=sum(1 for x in u.psi if not is_odd(x)),
    )


class IdealSpec:
    """Which ideal to reduce by: I1, I2, I3(k) or I4(k), over a given field."""

    def __init__(self, which: str, field: FieldParams, k: int | None = None):
        which = which.upper()
        if which not in ("I1", "I2", "I3", "I4"):
            raise ValueError(f"unknown ideal {which!r}")
        if which == "I3" and (k is None or k < 0):
            raise ValueError("I3 needs k >= 0")
        if which == "I4" and (k is None or k < 1):
            raise ValueError("I4 needs k >= 1")
        self.which = which
        self.field = field
        self.k = k if which in ("I3", "I4") else None

    def grading(self) -> GradingSpec:
        """The grading of G whose identities this ideal describes."""
        if self.which == "I1":
            return GradingSpec.canonical()
        if self.which == "I2":
            return GradingSpec.alternating()
        if self.which == "I3":
            return GradingSpec.first_k_star(self.k)
        return GradingSpec.first_k(self.k)

    @classmethod
    def for_grading(cls, grading: GradingSpec, field: FieldParams) -> "IdealSpec":
        which = {"canonical": "I1", "alternating": "I2", "kstar": "I3", "k": "I4"}[grading.kind]
        return cls(which, field, grading.k if grading.kind in ("kstar", "k") else None)

    def __eq__(self, other) -> bool:
        return isinstance(other, IdealSpec) and (self.which, self.k, self.field) == (other.which, other.k, other.field)

    def __hash__(self) -> int:
        return hash((self.which, self.k, self.field))

    def __str__(self) -> str:
        return self.which if self.k is None else f"{self.which}(k={self.k})"

    __repr__ = __str__


def ss_class(u: PrTerm, spec: IdealSpec | None, p: int | None = None) -> dict:
    """Membership flags SS, SS0, SS1, SS2, SS3 (the k-dependent ones are None without k)."""
    if p is None:
        if spec is None:
            raise ValueError("need p or an IdealSpec")
        p = spec.field.p
    st = term_stats(u)
    exps_ok = all(1 <= e <= p - 1 for _, e in u.beg)
    psi_ok = len(u.psi) % 2 == 0 and len(set(u.psi)) == len(u.psi)
    ss = exps_ok and psi_ok
    ss0 = exps_ok and not u.psi and all(e <= 1 for x, e in u.beg if is_odd(x))
    k = spec.k if spec is not None else None
    flags = {"SS": ss, "SS0": ss0, "SS1": None, "SS2": None, "SS3": None}
    if k is not None:
        flags["SS1"] = ss and st.deg_Z <= k + 1
        ss2 = ss and st.degY_psi <= k and st.degZ_beg + st.degY_psi <= k + 1
        flags["SS2"] = ss2
        ss3 = ss2
        if ss2 and st.degZ_beg + st.degY_psi == k + 1:
            ss3 = st.pr_z is None or st.pr_z not in u.psi
        flags["SS3"] = ss3
    return flags


def in_output_class(u: PrTerm, spec: IdealSpec) -> bool:
    """Does u lie in the class reduce() promises for this ideal?"""
    flags = ss_class(u, spec)
    if spec.which == "I1":
        return flags["SS0"]
    if spec.which == "I2":
        return flags["SS"]
    if spec.which == "I3":
        return flags["SS"] and term_stats(u).deg_Z <= spec.k
    return flags["SS3"]


def ss_key(u: PrTerm):
    """Sort key realising the SS order: degree, then beg and psi right-lexicographically."""
    flat = _flat_beg(u.beg)
    return (len(flat) + len(u.psi), flat[::-1], u.psi[::-1])


def ss_compare(u: PrTerm, v: PrTerm) -> int:
    """-1, 0 or 1 as u <, =, > v."""
    ku, kv = ss_key(u), ss_key(v)
    return (ku > kv) - (ku < kv)


def _terms_of(f) -> list[PrTerm]:
    if isinstance(f, CanonicalForm):
        return list(f.pairs)
    return list(f)


def leading_term(f) -> PrTerm:
    terms = _terms_of(f)
    if not terms:
        raise ValueError("empty combination has no leading term")
    return max(terms, key=ss_key)


def bad_terms(f) -> list[PrTerm]:
    """Terms satisfying the four bad-term conditions relative to the leading term."""
    terms = _terms_of(f)
    lt = leading_term(terms)
    slt = term_stats(lt)
    beg_lt = dict(lt.beg)
    out = []
    for u in terms:
        if u == lt:
            continue
        su = term_stats(u)
        if su.Deg != slt.Deg:
            continue
        beg_u = dict(u.beg)
        ok = True
        if slt.degZ_beg > 0:
            for x in set(beg_lt) | set(beg_u):
                if not is_odd(x):
                    continue
                if x == slt.pr_z:
                    if beg_u.get(x, 0) + 1 != beg_lt.get(x, 0):
                        ok = False
                elif beg_lt.get(x, 0) != beg_u.get(x, 0):
                    ok = False
        for x in set(beg_lt) | set(beg_u):
            if not is_odd(x) and beg_lt.get(x, 0) > beg_u.get(x, 0):
                ok = False
        if ok:
            out.append(u)
    return sorted(out, key=ss_key)


def lbt(f) -> PrTerm | None:
    """The SS-largest bad term, or None."""
    bad = bad_terms(f)
    return bad[-1] if bad else None


# ---------------------------------------------------------------------------
# p-polynomials and canonical forms


def _pmono_mul(a: tuple, b: tuple) -> tuple:
    d = dict(a)
    for x, e in b:
        d[x] = d.get(x, 0) + e
    return tuple(sorted(d.items()))


def _reduce_ppower(e: int, p: int, q: int) -> int:
    """Exponent p*s with s >= 1 reduced using y^(pq) = y^p to p*s', 1 <= s' <= q-1."""
    s = e // p
    return p * (((s - 1) % (q - 1)) + 1)


class PPolynomial:
    """A p-polynomial: monomials in y's with every exponent in {p, 2p, ..., (q-1)p}."""

    __slots__ = ("field", "terms")

    def __init__(self, field: FieldParams, terms: dict | None = None):
        self.field = field
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def constant(self) -> int:
        return self.terms.get((), 0)

    def to_polynomial(self) -> FreePolynomial:
        out = FreePolynomial.zero(self.field)
        for m, c in self.terms.items():
            out = out + FreePolynomial.word(self.field, _flat_beg(m), c)
        return out

    def evaluate_scalar(self, values: dict[int, int]) -> int:
        f = self.field
        total = 0
        for m, c in self.terms.items():
            v = c
            for x, e in m:
                v = f.mul(v, f.pow(values.get(x, 0), e))
            total = f.add(total, v)
        return total

    def variables(self) -> set[int]:
        return {x for m in self.terms for x, _ in m}

    def __eq__(self, other) -> bool:
        return isinstance(other, PPolynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __str__(self) -> str:
        pieces = []
        for m in sorted(self.terms, key=lambda m: (sum(e for _, e in m), m)):
            sign, mag = format_coefficient(self.field, self.terms[m])
            body = format_beg(m)
            if not m:
                pieces.append((sign, mag or "1"))
            else:
                pieces.append((sign, body if mag is None else f"{mag}*{body}"))
        return join_terms(pieces)


def is_p_polynomial(f: FreePolynomial, q: int | None = None) -> bool:
    """Bracket-free in y's only, every exponent a multiple of p and below pq (constants allowed)."""
    p = f.field.p
    q = q or f.field.q
    for w in f.terms:
        if any(is_odd(x) for x in w):
            return False
        if list(w) != sorted(w):
            return False
        counts: dict[int, int] = {}
        for x in w:
            counts[x] = counts.get(x, 0) + 1
        if any(e % p or e >= p * q for e in counts.values()):
            return False
    return True


def ppolynomial_from(f: FreePolynomial) -> PPolynomial:
    if not is_p_polynomial(f):
        raise ValueError("not a p-polynomial")
    terms = {}
    for w, c in f.terms.items():
        m = _beg_from_sorted_word(w)
        terms[m] = f.field.add(terms.get(m, 0), c)
    return PPolynomial(f.field, terms)


class CanonicalForm:
    """Sum of p-polynomial multiples of distinct PrTerms."""

    def __init__(self, spec: IdealSpec, pairs: dict | None = None):
        self.spec = spec
        self.field = spec.field
        self.pairs: dict[PrTerm, PPolynomial] = {}
        for u, pp in (pairs or {}).items():
            if pp.terms:
                self.pairs[u] = pp

    @classmethod
    def from_flat(cls, spec: IdealSpec, flat: dict) -> "CanonicalForm":
        """Build from a dict (pmono, PrTerm) -> code."""
        grouped: dict[PrTerm, dict] = {}
        for (pm, u), c in flat.items():
            if c:
                grouped.setdefault(u, {})[pm] = c
        return cls(spec, {u: PPolynomial(spec.field, d) for u, d in grouped.items()})

    def flat(self) -> dict:
        return {(pm, u): c for u, pp in self.pairs.items() for pm, c in pp.terms.items()}

    def is_zero(self) -> bool:
        return not self.pairs

    def terms(self) -> list[PrTerm]:
        return sorted(self.pairs, key=ss_key)

    def to_polynomial(self) -> FreePolynomial:
        out = FreePolynomial.zero(self.field)
        for u, pp in self.pairs.items():
            out = out + pp.to_polynomial() * prterm_polynomial(u, self.field)
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, CanonicalForm) and self.pairs == other.pairs

    def __str__(self) -> str:
        pieces = []
        # leading term first
        for u in reversed(self.terms()):
            pp = self.pairs[u]
            body_parts = []
            if u.beg:
                body_parts.append(format_beg(u.beg))
            if u.psi:
                body_parts.append(format_psi(u.psi))
            if pp.is_constant():
                sign, mag = format_coefficient(self.field, pp.constant())
                if not body_parts:
                    pieces.append((sign, mag or "1"))
                else:
                    if mag is not None:
                        body_parts[0] = f"{mag}*{body_parts[0]}"
                    pieces.append((sign, " * ".join(body_parts)))
            else:
                pieces.append((1, " * ".join([f"({pp})"] + (body_parts or ["1"]))))
        return join_terms(pieces)

    def __repr__(self) -> str:
        return f"CanonicalForm[{self.spec}]({self})"


# ---------------------------------------------------------------------------
# generators


def _field_inv_neg2_power(field: FieldParams, j: int) -> int:
    """(-2)^(-j) as a field code."""
    return field.pow(field.inv(field.from_int(-2)), j)


def gen_fT(zs: list[int], T: tuple[int, ...], field: FieldParams) -> FreePolynomial:
    """f_T: the z's outside T (in order) followed by brackets of consecutive T entries."""
    m = len(zs)
    T = tuple(T)
    if len(T) % 2 or list(T) != sorted(set(T)) or any(t < 1 or t > m for t in T):
        raise ValueError("T must be a strictly increasing even-size subset of 1..m")
    comp = [i for i in range(1, m + 1) if i not in T]
    out = FreePolynomial.word(field, [zs[i - 1] for i in comp])
    for i in range(0, len(T), 2):
        a = FreePolynomial.var(field, zs[T[i] - 1])
        b = FreePolynomial.var(field, zs[T[i + 1] - 1])
        out = out * commutator([a, b])
    return out


def gen_rT(yl: int, zs: list[int], T: tuple[int, ...], field: FieldParams) -> FreePolynomial:
    """r_T: the z's outside T, then [y, z_{j1}] and brackets of the remaining T entries."""
    m = len(zs)
    T = tuple(T)
    if len(T) % 2 == 0 or list(T) != sorted(set(T)) or any(t < 1 or t > m for t in T):
        raise ValueError("T must be a strictly increasing odd-size subset of 1..m")
    comp = [i for i in range(1, m + 1) if i not in T]
    out = FreePolynomial.word(field, [zs[i - 1] for i in comp])
    out = out * commutator([FreePolynomial.var(field, yl), FreePolynomial.var(field, zs[T[0] - 1])])
    for i in range(1, len(T), 2):
        a = FreePolynomial.var(field, zs[T[i] - 1])
        b = FreePolynomial.var(field, zs[T[i + 1] - 1])
        out = out * commutator([a, b])
    return out


def _even_subsets(m: int, nonempty: bool):
    for size in range(2 if nonempty else 0, m + 1, 2):
        yield from itertools.combinations(range(1, m + 1), size)


def gen_gm(m: int, zs: list[int] | None, field: FieldParams) -> FreePolynomial:
    """g_m = sum over even T of (-2)^(-|T|/2) f_T; g_1(z) = z."""
    if m < 1:
        raise ValueError("m must be >= 1")
    zs = list(zs) if zs is not None else [zvar(i) for i in range(1, m + 1)]
    if len(zs) != m:
        raise ValueError("need exactly m variables")
    if m == 1:
        return FreePolynomial.var(field, zs[0])
    out = FreePolynomial.zero(field)
    for T in _even_subsets(m, nonempty=False):
        out = out + gen_fT(zs, T, field).scale(_field_inv_neg2_power(field, len(T) // 2))
    return out


def gen_a(m: int, zs: list[int], field: FieldParams) -> FreePolynomial:
    """g_m minus its leading word: the sum over nonempty even T."""
    out = FreePolynomial.zero(field)
    for T in _even_subsets(m, nonempty=True):
        out = out + gen_fT(zs, T, field).scale(_field_inv_neg2_power(field, len(T) // 2))
    return out


def _brackets(field, letters: list[int]) -> FreePolynomial:
    out = FreePolynomial.one(field)
    for i in range(0, len(letters), 2):
        out = out * commutator([FreePolynomial.var(field, letters[i]), FreePolynomial.var(field, letters[i + 1])])
    return out


def _triple_commutators(field) -> list[tuple[str, FreePolynomial]]:
    out = []
    for pattern in itertools.product((0, 1), repeat=3):
        letters = [zvar(i + 1) if odd else yvar(i + 1) for i, odd in enumerate(pattern)]
        name = "[" + ",".join(var_name(x) for x in letters) + "]"
        out.append((name, commutator([FreePolynomial.var(field, x) for x in letters])))
    return out


def _power_generators(field) -> list[tuple[str, FreePolynomial]]:
    p, q = field.p, field.q
    zp = FreePolynomial.word(field, [zvar(1)] * p)
    ypq = FreePolynomial.word(field, [yvar(1)] * (p * q)) - FreePolynomial.word(field, [yvar(1)] * p)
    return [(f"z1^{p}", zp), (f"y1^{p * q} - y1^{p}", ypq)]


def gen_ideal_basis(spec: IdealSpec) -> list[tuple[str, FreePolynomial]]:
    """Labelled generator instances of the ideal, covering every family and parity choice."""
    f = spec.field
    Y = lambda i: FreePolynomial.var(f, yvar(i))  # noqa: E731
    Z = lambda i: FreePolynomial.var(f, zvar(i))  # noqa: E731
    out: list[tuple[str, FreePolynomial]] = []
    if spec.which == "I1":
        out.append(("[y1,y2]", commutator([Y(1), Y(2)])))
        out.append(("[y1,z2]", commutator([Y(1), Z(2)])))
        out.append(("z1*z2 + z2*z1", Z(1) * Z(2) + Z(2) * Z(1)))
        out.append(_power_generators(f)[1])
        return out
    if spec.which == "I2":
        return _triple_commutators(f) + _power_generators(f)
    if spec.which == "I3":
        k = spec.k
        word = FreePolynomial.word(f, [zvar(i) for i in range(1, k + 2)])
        out = _triple_commutators(f)
        out.append(("*".join(f"z{i}" for i in range(1, k + 2)), word))
        return out + _power_generators(f)
    k = spec.k
    if k % 2 == 1:
        ys = [yvar(i) for i in range(1, k + 2)]
        out.append((f"(1) {format_psi(tuple(ys))}", _brackets(f, ys)))
    else:
        for x in (yvar(k + 2), zvar(1)):
            ys = [yvar(i) for i in range(1, k + 2)] + [x]
            label = "".join(f"[{var_name(ys[i])},{var_name(ys[i + 1])}]" for i in range(0, len(ys), 2))
            out.append((f"(2) {label}", _brackets(f, ys)))
    for l in range(0, k + 1):
        m = k - l + 2
        zs = [zvar(i) for i in range(1, m + 1)]
        g = gen_gm(m, zs, f)
        if l % 2 == 0:
            ys = [yvar(i) for i in range(1, l + 1)]
            out.append((f"(3) l={l} g_{m}*b", g * _brackets(f, ys)))
        else:
            ys = [yvar(i) for i in range(1, l + 1)]
            tail = _brackets(f, ys[1:])
            zl = zvar(m + 1)
            fam4 = g * commutator([FreePolynomial.var(f, zl), FreePolynomial.var(f, ys[0])]) * tail
            out.append((f"(4) l={l} g_{m}*[z{m + 1},y1]*b", fam4))
            fam5 = commutator([g, FreePolynomial.var(f, ys[0])]) * tail
            out.append((f"(5) l={l} [g_{m},y1]*b", fam5))
    out.extend(("(6) " + name, g) for name, g in _triple_commutators(f))
    pw = _power_generators(f)
    out.append(("(7) " + pw[0][0], pw[0][1]))
    out.append(("(8) " + pw[1][0], pw[1][1]))
    return out


# ---------------------------------------------------------------------------
# word straightening (cached, field independent: integer coefficients)


@lru_cache(maxsize=200_000)
def _nf_comm(word: tuple) -> dict:
    """Word modulo the triple commutator: {(sorted word, psi): integer coefficient}."""
    for i in range(len(word) - 1):
        if word[i] > word[i + 1]:
            b, a = word[i], word[i + 1]
            w1 = word[:i] + (a, b) + word[i + 2 :]
            w2 = word[:i] + word[i + 2 :]
            out = dict(_nf_comm(w1))
            for (sw, psi), c in _nf_comm(w2).items():
                s, npsi = psi_insert(psi, a, b)
                if s:
                    key = (sw, npsi)
                    v = out.get(key, 0) - s * c
                    if v:
                        out[key] = v
                    else:
                        out.pop(key, None)
            return out
    return {(word, ()): 1}


def _nf_can(word: tuple):
    """Word modulo the canonical-grading relations: y's central, z's anticommuting.

    Returns (sign, sorted word) with sign 0 when a z repeats.
    """
    zs = [x for x in word if x > Z_OFFSET]
    if len(set(zs)) != len(zs):
        return 0, None
    ys = sorted(x for x in word if x <= Z_OFFSET)
    return _perm_sign(zs), tuple(ys) + tuple(sorted(zs))


# ---------------------------------------------------------------------------
# the model used to canonicalise modulo T2 of the k-grading
#
# Write every element of G as x = x0 + x1 with x0 of even and x1 of odd blade
# length.  x0 is central, the x1's anticommute and x1*x1 = 0, and [a,b] =
# 2*a1*b1.  For a term u the evaluation is therefore a signed sum of
# products M_tau = prod x0^(Deg_x - tau_x) * prod_{tau_x = 1} x1 (ascending).
# Under the k-grading each y1 and each z0 factor needs its own generator among
# e_1..e_k, so M_tau vanishes identically iff s(tau) = #{y : tau_y = 1} +
# sum_z (Deg_z - tau_z) exceeds k, and the surviving M_tau are linearly
# independent.  Two combinations of terms are congruent modulo the identities
# of the k-grading iff their coefficient vectors over the surviving tau agree.


def _model_rows(shape_vars: tuple, k: int) -> list[tuple]:
    rows = []
    for tau in itertools.product((0, 1), repeat=len(shape_vars)):
        s = 0
        for (x, cnt), t in zip(shape_vars, tau):
            if is_odd(x):
                s += cnt - t
            elif t:
                s += 1
        if s <= k:
            rows.append(tau)
    return rows


def _model_vector(u: PrTerm, shape_vars: tuple, rows: list[tuple], p: int) -> np.ndarray:
    vars_ = [x for x, _ in shape_vars]
    pos = {x: i for i, x in enumerate(vars_)}
    beg = dict(u.beg)
    psi_set = set(u.psi)
    vec = np.zeros(len(rows), dtype=np.int64)
    base = pow(2, len(u.psi) // 2, p)
    for r, tau in enumerate(rows):
        if any(not tau[pos[x]] for x in u.psi):
            continue
        coef = base
        lead = []
        for x in vars_:
            if x in psi_set or not tau[pos[x]]:
                continue
            coef = coef * beg.get(x, 0) % p
            lead.append(x)
        if coef == 0:
            continue
        seq = lead + list(u.psi)
        vec[r] = coef * _perm_sign(seq) % p
    return vec


def _terms_of_shape(shape_vars: tuple, p: int) -> list[PrTerm]:
    vars_ = [x for x, _ in shape_vars]
    cnt = dict(shape_vars)
    out = []
    for size in range(0, len(vars_) + 1, 2):
        for S in itertools.combinations(vars_, size):
            beg = []
            ok = True
            for x in vars_:
                e = cnt[x] - (1 if x in S else 0)
                if e > p - 1:
                    ok = False
                    break
                if e:
                    beg.append((x, e))
            if ok:
                out.append(PrTerm(tuple(beg), tuple(S)))
    return sorted(out, key=ss_key)


def _rank_basis(columns: list[np.ndarray], p: int):
    """Greedy independent subset (in the given order) and a solver for the span."""
    chosen: list[int] = []
    echelon: list[tuple[int, np.ndarray]] = []  # (pivot row, reduced vector)
    for idx, col in enumerate(columns):
        v = col.copy() % p
        for piv, row in echelon:
            if v[piv]:
                v = (v - v[piv] * row) % p
        nz = np.nonzero(v)[0]
        if len(nz):
            piv = int(nz[0])
            v = v * pow(int(v[piv]), p - 2, p) % p
            # keep echelon fully reduced on pivots
            new_echelon = []
            for opiv, row in echelon:
                if row[piv]:
                    row = (row - row[piv] * v) % p
                new_echelon.append((opiv, row))
            echelon = new_echelon + [(piv, v)]
            chosen.append(idx)
    return chosen


def _solve_mod_p(A: np.ndarray, b: np.ndarray, p: int):
    """Solve A x = b (mod p) for a full-column-rank A; None if inconsistent."""
    rows, cols = A.shape
    M = np.concatenate([A % p, (b % p).reshape(-1, 1)], axis=1).astype(np.int64)
    r = 0
    pivots = []
    for c in range(cols):
        nz = np.nonzero(M[r:, c])[0]
        if not len(nz):
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = M[r] * pow(int(M[r, c]), p - 2, p) % p
        col = M[:, c].copy()
        col[r] = 0
        M = (M - np.outer(col, M[r])) % p
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if len(pivots) != cols:
        raise ReductionError("basis matrix is not of full column rank")
    if np.any(M[r:, cols]):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = M[i, cols]
    return x


class _ShapeBasis:
    """Basis and expansions for one multidegree shape (variables relabelled).

    The basis is chosen greedily, SS3 terms first in ascending order.  Other SS
    terms are only taken where the SS3 terms of the shape leave part of the
    quotient unspanned.
    """

    def __init__(self, shape_vars: tuple, k: int, p: int, spec: IdealSpec):
        self.shape_vars = shape_vars
        self.k = k
        self.p = p
        self.rows = _model_rows(shape_vars, k)
        # SS3 terms first; other SS terms only enter where SS3 does not span
        every = _terms_of_shape(shape_vars, p)
        flags = [ss_class(u, spec, p) for u in every]
        terms = [u for u, f in zip(every, flags) if f["SS3"]]
        terms += [u for u, f in zip(every, flags) if f["SS2"] and not f["SS3"]]
        terms += [u for u, f in zip(every, flags) if not f["SS2"]]
        self.candidates = terms
        vecs = [_model_vector(u, shape_vars, self.rows, p) for u in terms]
        if self.rows:
            chosen = _rank_basis(vecs, p)
        else:
            chosen = []
        self.basis = [terms[i] for i in chosen]
        self.basis_set = set(self.basis)
        self.matrix = (
            np.stack([vecs[i] for i in chosen], axis=1) if chosen else np.zeros((len(self.rows), 0), dtype=np.int64)
        )
        self._cache: dict[PrTerm, dict] = {}

    def expand(self, u: PrTerm) -> dict:
        """u as an F_p-combination of basis terms (empty dict for zero)."""
        got = self._cache.get(u)
        if got is not None:
            return got
        if u in self.basis_set:
            out = {u: 1}
        else:
            v = _model_vector(u, self.shape_vars, self.rows, self.p)
            if not v.any():
                out = {}
            else:
                x = _solve_mod_p(self.matrix, v, self.p) if self.basis else None
                if x is None:  # pragma: no cover - u itself is a candidate
                    raise ReductionError(f"{format_prterm(u)} is outside the span of its shape")
                out = {self.basis[i]: int(c) for i, c in enumerate(x) if c}
        self._cache[u] = out
        return out


_SHAPE_CACHE: dict = {}


def _shape_of(u: PrTerm):
    """Relabel the variables of u order-preservingly; returns (shape vars, forward map, back map)."""
    st = term_stats(u)
    ys = sorted(x for x in st.Deg if not is_odd(x))
    zs = sorted(x for x in st.Deg if is_odd(x))
    fwd = {}
    for i, x in enumerate(ys, 1):
        fwd[x] = yvar(i)
    for i, x in enumerate(zs, 1):
        fwd[x] = zvar(i)
    shape = tuple((fwd[x], st.Deg[x]) for x in ys + zs)
    back = {v: k for k, v in fwd.items()}
    return shape, fwd, back


def _relabel(u: PrTerm, mapping: dict) -> PrTerm:
    return PrTerm(tuple((mapping[x], e) for x, e in u.beg), tuple(mapping[x] for x in u.psi))


def basis_expansion(u: PrTerm, spec: IdealSpec) -> dict:
    """Expansion of an SS term in the chosen SS3 basis of its multidegree (I4 only)."""
    shape, fwd, back = _shape_of(u)
    key = (shape, spec.k, spec.field.p)
    sb = _SHAPE_CACHE.get(key)
    if sb is None:
        sb = _ShapeBasis(shape, spec.k, spec.field.p, spec)
        _SHAPE_CACHE[key] = sb
    res = sb.expand(_relabel(u, fwd))
    return {_relabel(v, back): c for v, c in res.items()}


# ---------------------------------------------------------------------------
# the reduction engine


class _Engine:
    """Rewrites mixed terms (pmono, word, psi) to canonical form.

    With ``trace`` set, every rule application is recorded as
    (tag, before, after) where before is a mixed term and after a dict of mixed
    terms to field codes; replaying the steps in order reproduces the result.
    """

    def __init__(self, spec: IdealSpec, trace: list | None = None):
        self.spec = spec
        self.field = spec.field
        self.p = spec.field.p
        self.q = spec.field.q
        self.trace = trace
        self.steps = 0

    def _tick(self, n: int = 1) -> None:
        self.steps += n
        if self.steps > BUDGET:
            raise ReductionError(f"rewrite budget of {BUDGET} steps exceeded")

    def _record(self, tag: str, before, after: dict) -> None:
        if self.trace is not None:
            self.trace.append((tag, before, dict(after)))

    # word level -------------------------------------------------------
    def _expand_words(self, f: FreePolynomial) -> dict:
        """First stage: words to (pmono, sorted word, psi) with integer-code coefficients."""
        fld = self.field
        add, mul = fld.add_table, fld.mul_table
        spec = self.spec
        out: dict = {}
        for w, c in f.terms.items():
            self._tick()
            if spec.which == "I3" and sum(1 for x in w if x > Z_OFFSET) >= spec.k + 1:
                self._record("KILL-ZK", ((), w, ()), {})
                continue
            if spec.which == "I1":
                s, sw = _nf_can(w)
                if s:
                    key = ((), sw, ())
                    code = c if s > 0 else fld.neg(c)
                    out[key] = add[out.get(key, 0)][code]
                continue
            nf = _nf_comm(w)
            self._tick(len(nf))
            for (sw, psi), ic in nf.items():
                code = mul[c][fld.from_int(ic)]
                if code:
                    key = ((), sw, psi)
                    out[key] = add[out.get(key, 0)][code]
        return {k: v for k, v in out.items() if v}

    def _to_ss(self, pm: tuple, sw: tuple, psi: tuple):
        """Sorted word to PrTerm: kill z^p, move y^(p s) into the p-monomial.

        Returns (pmono, PrTerm) or None for zero.
        """
        p, q = self.p, self.q
        beg = []
        extra = []
        for x, e in _beg_from_sorted_word(sw):
            if x > Z_OFFSET:
                if e >= p:
                    return None
                beg.append((x, e))
            else:
                r = e % p
                if e >= p:
                    extra.append((x, e - r))
                if r:
                    beg.append((x, r))
        if extra:
            pm = _pmono_mul(pm, tuple(extra))
            pm = tuple((x, _reduce_ppower(e, p, q)) for x, e in pm)
        return pm, PrTerm(tuple(beg), psi)

    # main -------------------------------------------------------------
    def run(self, f: FreePolynomial) -> CanonicalForm:
        if self.trace is not None:
            return self._run_traced(f)
        fld = self.field
        add = fld.add_table
        mixed = self._expand_words(f)
        flat: dict = {}
        for (pm, sw, psi), c in mixed.items():
            r = self._to_ss(pm, sw, psi)
            if r is not None:
                flat[r] = add[flat.get(r, 0)][c]
        flat = {k: v for k, v in flat.items() if v}
        if self.spec.which == "I4":
            flat = self._i4(flat)
        return CanonicalForm.from_flat(self.spec, flat)

    # I4 stage -----------------------------------------------------------
    def _i4_rewrite(self, pm, u: PrTerm):
        """One I4 rule for an SS term: (tag, {(pm, PrTerm): int}) or None if u is in SS2."""
        k, p = self.spec.k, self.p
        st = term_stats(u)
        l = st.degY_psi
        if l >= k + 1:
            return "KILL-DEGY", {}
        if st.degZ_beg + l < k + 2:
            return None
        m = k - l + 2
        flat = _flat_beg(u.beg)
        ys = [x for x in flat if x <= Z_OFFSET]
        zs = [x for x in flat if x > Z_OFFSET]
        P, rest = zs[:m], zs[m:]
        out: dict = {}
        inv = pow((-2) % p, p - 2, p)
        for T in _even_subsets(m, nonempty=True):
            sign, psi = 1, u.psi
            for i in range(0, len(T), 2):
                s, psi = psi_insert(psi, P[T[i] - 1], P[T[i + 1] - 1])
                if not s:
                    break
                sign *= s
            else:
                comp = [P[i - 1] for i in range(1, m + 1) if i not in T]
                word = tuple(ys + comp + rest)
                coef = -sign * pow(inv, len(T) // 2, p) % p
                key = (pm, PrTerm(_beg_from_sorted_word(word), psi))
                out[key] = (out.get(key, 0) + coef) % p
        return ("COR-EVEN" if l % 2 == 0 else "COR-ODD"), {key: c for key, c in out.items() if c}

    def _i4(self, flat: dict) -> dict:
        fld = self.field
        add, mul = fld.add_table, fld.mul_table
        work = dict(flat)
        done: dict = {}
        while work:
            (pm, u), c = work.popitem()
            self._tick()
            rule = self._i4_rewrite(pm, u)
            if rule is None:
                done[(pm, u)] = add[done.get((pm, u), 0)][c]
                continue
            for key, ic in rule[1].items():
                code = mul[c][fld.from_int(ic)]
                work[key] = add[work.get(key, 0)][code]
                if not work[key]:
                    del work[key]
        out: dict = {}
        for (pm, u), c in done.items():
            if not c:
                continue
            for v, ic in basis_expansion(u, self.spec).items():
                key = (pm, v)
                out[key] = add[out.get(key, 0)][mul[c][fld.from_int(ic)]]
        return {k: v for k, v in out.items() if v}

    # traced variant -------------------------------------------------------
    def _rule(self, term):
        """Next rule for a mixed term (pm, word, psi) or None if it is final.

        Returns (tag, {mixed term: int}).  Words in final terms are sorted and
        already in SS shape; the I4 stage works on them afterwards.
        """
        pm, w, psi = term
        spec, p, q = self.spec, self.p, self.q
        if spec.which == "I3" and sum(1 for x in w + psi if x > Z_OFFSET) >= spec.k + 1:
            return "KILL-ZK", {}
        for i in range(len(w) - 1):
            a, b = w[i + 1], w[i]
            if spec.which == "I1":
                if b > Z_OFFSET and a > Z_OFFSET and a == b:
                    return "KILL-ZZ", {}
                if b > a:
                    s = -1 if (a > Z_OFFSET and b > Z_OFFSET) else 1
                    return "SWAP", {(pm, w[:i] + (a, b) + w[i + 2 :], psi): s}
            elif b > a:
                out = {(pm, w[:i] + (a, b) + w[i + 2 :], psi): 1}
                s, npsi = psi_insert(psi, a, b)
                if s:
                    out[(pm, w[:i] + w[i + 2 :], npsi)] = -s
                return "SWAP", out
        beg = _beg_from_sorted_word(w)
        for x, e in beg:
            if x > Z_OFFSET and e >= p:
                return "KILL-ZP", {}
        for x, e in beg:
            if x <= Z_OFFSET and e >= p:
                r = self._to_ss(pm, w, psi)
                npm, u = r
                return "PPOW", {(npm, _flat_beg(u.beg), psi): 1}
        return None

    def _run_traced(self, f: FreePolynomial) -> CanonicalForm:
        fld = self.field
        add, mul = fld.add_table, fld.mul_table
        state: dict = {((), w, ()): c for w, c in f.terms.items()}
        final: dict = {}
        while state:
            term = max(state, key=lambda t: (len(t[1]) + len(t[2]), t))
            c = state.pop(term)
            self._tick()
            rule = self._rule(term)
            if rule is None:
                final[term] = add[final.get(term, 0)][c]
                continue
            tag, after = rule
            self._record(tag, term, after)
            for key, ic in after.items():
                code = mul[c][fld.from_int(ic)]
                state[key] = add[state.get(key, 0)][code]
                if not state[key]:
                    del state[key]
        flat: dict = {}
        for (pm, w, psi), c in final.items():
            if c:
                key = (pm, PrTerm(_beg_from_sorted_word(w), psi))
                flat[key] = add[flat.get(key, 0)][c]
        flat = {k: v for k, v in flat.items() if v}
        if self.spec.which == "I4":
            flat = self._i4_traced(flat)
        return CanonicalForm.from_flat(self.spec, flat)

    def _mixed(self, pm, u: PrTerm):
        return (pm, _flat_beg(u.beg), u.psi)

    def _i4_traced(self, flat: dict) -> dict:
        fld = self.field
        add, mul = fld.add_table, fld.mul_table
        work = dict(flat)
        done: dict = {}
        while work:
            key = max(work, key=lambda t: (ss_key(t[1]), t[0]))
            c = work.pop(key)
            self._tick()
            pm, u = key
            rule = self._i4_rewrite(pm, u)
            if rule is None:
                done[key] = add[done.get(key, 0)][c]
                continue
            tag, after = rule
            self._record(tag, self._mixed(pm, u), {self._mixed(*k2): v for k2, v in after.items()})
            for k2, ic in after.items():
                work[k2] = add[work.get(k2, 0)][mul[c][fld.from_int(ic)]]
                if not work[k2]:
                    del work[k2]
        out: dict = {}
        for (pm, u), c in sorted(done.items(), key=lambda kv: (ss_key(kv[0][1]), kv[0][0])):
            if not c:
                continue
            exp = basis_expansion(u, self.spec)
            if exp != {u: 1}:
                self._record("BASIS", self._mixed(pm, u), {self._mixed(pm, v): ic for v, ic in exp.items()})
            for v, ic in exp.items():
                k2 = (pm, v)
                out[k2] = add[out.get(k2, 0)][mul[c][fld.from_int(ic)]]
        return {k: v for k, v in out.items() if v}


def reduce(f: FreePolynomial, spec: IdealSpec) -> CanonicalForm:
    """Canonical form of f modulo the ideal described by spec."""
    if f.field != spec.field:
        raise ValueError("field mismatch between polynomial and ideal spec")
    return _Engine(spec).run(f)


def reduction_trace(f: FreePolynomial, spec: IdealSpec):
    """(result, steps) where steps is a list of (tag, before, after) rewrites."""
    steps: list = []
    result = _Engine(spec, trace=steps).run(f)
    return result, steps


def replay_trace(f: FreePolynomial, spec: IdealSpec, steps) -> CanonicalForm:
    """Apply recorded rewrites to f in order and read off the canonical form."""
    fld = spec.field
    add, mul = fld.add_table, fld.mul_table
    state: dict = {((), w, ()): c for w, c in f.terms.items()}
    for tag, before, after in steps:
        c = state.pop(before, 0)
        if not c:
            continue
        for key, ic in after.items():
            state[key] = add[state.get(key, 0)][mul[c][fld.from_int(ic)]]
            if not state[key]:
                del state[key]
    flat: dict = {}
    for (pm, w, psi), c in state.items():
        key = (pm, PrTerm(_beg_from_sorted_word(w), psi))
        flat[key] = add[flat.get(key, 0)][c]
    return CanonicalForm.from_flat(spec, flat)


def format_mixed(term) -> str:
    """Text for a mixed term (pmono, word, psi) as used in traces."""
    pm, w, psi = term
    parts = []
    if pm:
        parts.append(format_beg(pm))
    if w:
        parts.append("*".join(var_name(x) for x in w))
    if psi:
        parts.append(format_psi(psi))
    return " * ".join(parts) if parts else "1"


def format_step(step, field: FieldParams) -> str:
    tag, before, after = step
    pieces = []
    for key, ic in after.items():
        sign, mag = format_coefficient(field, field.from_int(ic))
        body = format_mixed(key)
        pieces.append((sign, body if mag is None else f"{mag}*{body}"))
    return f"{tag}: {format_mixed(before)} -> {join_terms(pieces)}"
