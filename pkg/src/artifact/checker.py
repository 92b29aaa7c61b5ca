"""Graded identity checking, scalar witnesses and dominant-part witnesses.

``check_identity`` substitutes homogeneous elements of a truncated Grassmann
algebra for the variables of a polynomial, either exhaustively over the span of
the homogeneous blades of weight <= max_wt or by seeded random sampling from
that span.  Trial i of a random run draws its assignment from seed + i, so any
failure can be replayed on its own.

``build_witness`` produces the substitutions under which a single canonical
term has a nonzero dominant part; ``certify_dominant`` evaluates and reports.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .canon import PPolynomial, PrTerm, in_output_class, ss_class, term_stats, IdealSpec
from .field import FieldParams
from .freealg import (
    FreePolynomial,
    GradedAssignment,
    build_trie,
    evaluate,
    is_odd,
    var_name,
    y as yvar,
    z as zvar,
)
from .grassmann import BatchAlgebra, GradingSpec, GrassmannElement, homogeneous_blades

__all__ = [
    "CheckConfig",
    "CheckReport",
    "check_identity",
    "replay_trial",
    "scalar_witness",
    "Witness",
    "WitnessError",
    "build_witness",
    "certify_dominant",
    "evaluate_term",
    "CASES",
]

HOLDS, FAILS, INCONCLUSIVE = "Holds", "Fails", "Inconclusive"
EXHAUSTIVE_BATCH = 4096
BATCH = 100


@dataclass
class CheckConfig:
    grading: GradingSpec
    n: int
    exhaustive: bool = False
    max_wt: int | None = None
    trials: int = 100
    seed: int = 0
    budget: int = 10 ** 7

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n < 0:
            raise ValueError("truncation must be >= 0")
        if self.max_wt is None:
            self.max_wt = min(self.n, 6)


@dataclass
class CheckReport:
    verdict: str
    evaluations: int
    assignment: dict | None = None
    value: GrassmannElement | None = None
    trial: int | None = None
    seed: int | None = None

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def kv_lines(self) -> list[str]:
        out = [f"verdict={self.verdict}", f"evaluations={self.evaluations}"]
        if self.trial is not None:
            out.append(f"trial={self.trial}")
            out.append(f"trial_seed={self.seed + self.trial}")
        if self.assignment is not None:
            for v in sorted(self.assignment):
                out.append(f"{var_name(v)}={self.assignment[v]}")
        if self.value is not None:
            out.append(f"value={self.value}")
        return out

    def text(self) -> str:
        lines = [f"{self.verdict} after {self.evaluations} evaluations"]
        if self.assignment is not None:
            lines.append("witness:")
            for v in sorted(self.assignment):
                lines.append(f"  {var_name(v)} = {self.assignment[v]}")
            lines.append(f"value: {self.value}")
        return "\n".join(lines)


def _parity(letter: int) -> int:
    return 1 if is_odd(letter) else 0


def _blade_lists(f: FreePolynomial, cfg: CheckConfig) -> dict[int, list[int]]:
    return {
        v: homogeneous_blades(cfg.grading, _parity(v), cfg.n, cfg.max_wt) for v in sorted(f.variables())
    }


def _random_columns(blades: dict[int, list[int]], q: int, seed: int) -> dict[int, np.ndarray]:
    """Coefficient vectors (over each variable's blade list) for one trial."""
    rng = np.random.default_rng(seed)
    return {v: rng.integers(0, q, size=len(bl)) for v, bl in blades.items()}


def _element(field, n, blades: list[int], coeffs) -> GrassmannElement:
    return GrassmannElement(field, n, {m: int(c) for m, c in zip(blades, coeffs) if c})


def replay_trial(f: FreePolynomial, cfg: CheckConfig, trial: int):
    """The assignment and value of random trial ``trial``, recomputed from its seed."""
    field = f.field
    blades = _blade_lists(f, cfg)
    cols = _random_columns(blades, field.q, cfg.seed + trial)
    assignment = {v: _element(field, cfg.n, blades[v], cols[v]) for v in blades}
    return assignment, evaluate(f, GradedAssignment(assignment, cfg.grading))


class _BatchRunner:
    def __init__(self, f: FreePolynomial, n: int):
        self.f = f
        self.field = f.field
        self.n = n
        self.alg = BatchAlgebra(f.field, n)
        self.trie = build_trie(f)

    def run(self, images: dict[int, np.ndarray], batch: int) -> np.ndarray:
        alg = self.alg
        total = alg.zero(batch)
        stack = [(self.trie, alg.one(batch))]
        while stack:
            node, value = stack.pop()
            for key, child in node.items():
                if key is None:
                    total = alg.axpy(child, value, total)
                else:
                    nxt = alg.mul(value, images[key])
                    if nxt.any():
                        stack.append((child, nxt))
        return total


def _constant_report(f: FreePolynomial, cfg: CheckConfig) -> CheckReport:
    c = f.terms.get((), 0)
    if c:
        return CheckReport(FAILS, 1, {}, GrassmannElement.scalar(f.field, cfg.n, c))
    return CheckReport(HOLDS, 1)


def check_identity(f: FreePolynomial, cfg: CheckConfig) -> CheckReport:
    """Is f a graded identity of G_n with the configured grading (as far as tested)?"""
    if not f.variables():
        return _constant_report(f, cfg)
    if cfg.exhaustive:
        return _check_exhaustive(f, cfg)
    return _check_random(f, cfg)


def _check_random(f: FreePolynomial, cfg: CheckConfig) -> CheckReport:
    field = f.field
    blades = _blade_lists(f, cfg)
    if cfg.trials > cfg.budget:
        return CheckReport(INCONCLUSIVE, 0)
    if cfg.n > 14:
        for i in range(cfg.trials):
            assignment, value = replay_trial(f, cfg, i)
            if value.terms:
                return CheckReport(FAILS, i + 1, assignment, value, i, cfg.seed)
        return CheckReport(HOLDS, cfg.trials)
    runner = _BatchRunner(f, cfg.n)
    done = 0
    while done < cfg.trials:
        batch = min(BATCH, cfg.trials - done)
        images = {v: runner.alg.zero(batch) for v in blades}
        for t in range(batch):
            cols = _random_columns(blades, field.q, cfg.seed + done + t)
            for v, bl in blades.items():
                images[v][bl, t] = cols[v]
        total = runner.run(images, batch)
        bad = np.nonzero(total.any(axis=0))[0]
        if len(bad):
            trial = done + int(bad[0])
            assignment, value = replay_trial(f, cfg, trial)
            return CheckReport(FAILS, trial + 1, assignment, value, trial, cfg.seed)
        done += batch
    return CheckReport(HOLDS, done)


def _check_exhaustive(f: FreePolynomial, cfg: CheckConfig) -> CheckReport:
    field = f.field
    q = field.q
    blades = _blade_lists(f, cfg)
    vars_ = list(blades)
    count = 1
    for v in vars_:
        count *= q ** len(blades[v])
        if count > cfg.budget:
            return CheckReport(INCONCLUSIVE, 0)
    if cfg.n > 14:
        raise ValueError("exhaustive checking needs n <= 14")
    runner = _BatchRunner(f, cfg.n)
    # all coefficient vectors per variable; assignment i is the row-major combination of rows
    tables = [np.array(list(itertools.product(range(q), repeat=len(blades[v]))), dtype=np.int64) for v in vars_]
    tables = [t.reshape(t.shape[0], len(blades[v])) for t, v in zip(tables, vars_)]
    sizes = tuple(t.shape[0] for t in tables)
    done = 0
    while done < count:
        batch = min(EXHAUSTIVE_BATCH, count - done)
        rows = np.unravel_index(np.arange(done, done + batch), sizes)
        images = {}
        for v, table, r in zip(vars_, tables, rows):
            img = runner.alg.zero(batch)
            img[blades[v], :] = table[r].T
            images[v] = img
        total = runner.run(images, batch)
        bad = np.nonzero(total.any(axis=0))[0]
        if len(bad):
            t = int(bad[0])
            assignment = {
                v: _element(field, cfg.n, blades[v], table[r[t]]) for v, table, r in zip(vars_, tables, rows)
            }
            value = evaluate(f, GradedAssignment(assignment, cfg.grading))
            return CheckReport(FAILS, done + t + 1, assignment, value)
        done += batch
    return CheckReport(HOLDS, done)


# ---------------------------------------------------------------------------
# scalar witnesses for p-polynomials


def scalar_witness(f, max_vars: int = 4):
    """A point of F^n where the p-polynomial f is nonzero, or None if it vanishes everywhere."""
    if isinstance(f, FreePolynomial):
        terms = {}
        for w, c in f.terms.items():
            counts: dict[int, int] = {}
            for x in w:
                counts[x] = counts.get(x, 0) + 1
            m = tuple(sorted(counts.items()))
            terms[m] = f.field.add(terms.get(m, 0), c)
        f = PPolynomial(f.field, terms)
    vars_ = sorted(f.variables())
    if len(vars_) > max_vars:
        raise ValueError(f"scalar search limited to {max_vars} variables")
    # the first variable varies fastest, so (1, 0) is tried before (0, 1)
    for point in itertools.product(range(f.field.q), repeat=len(vars_)):
        values = dict(zip(vars_, reversed(point)))
        if f.evaluate_scalar(values):
            return values
    return None


# ---------------------------------------------------------------------------
# witness substitutions


class WitnessError(ValueError):
    pass


CASES = ("can", "inf", "kstar", "k1", "k2")


@dataclass
class Witness:
    case: str
    k: int | None
    grading: GradingSpec
    n: int
    images: dict
    expected_support: set
    constants: dict = dc_field(default_factory=dict)

    def assignment(self) -> GradedAssignment:
        return GradedAssignment(self.images, self.grading)


def _roles(u: PrTerm):
    """Variables of u grouped as in the witness displays.

    Y1: in beg only, Y2: in beg and psi, Y3: in psi only; likewise Z1, Z2, Z3.
    Returns the six ascending lists and the beg exponents.
    """
    beg = dict(u.beg)
    psi = set(u.psi)
    groups = {}
    for name, odd in (("Y", False), ("Z", True)):
        b_only = sorted(x for x in beg if is_odd(x) == odd and x not in psi)
        both = sorted(x for x in beg if is_odd(x) == odd and x in psi)
        p_only = sorted(x for x in psi if is_odd(x) == odd and x not in beg)
        groups[name] = (b_only, both, p_only)
    return groups, beg


def _prefix(values: list[int]) -> list[int]:
    out = [0]
    for v in values:
        out.append(out[-1] + v)
    return out


class _Images:
    def __init__(self, field: FieldParams):
        self.field = field
        self.blades: dict[int, list] = {}

    def add(self, letter: int, *blades: tuple[int, ...]):
        self.blades.setdefault(letter, []).extend(blades)

    def build(self, n: int) -> dict:
        out = {}
        for v, bl in self.blades.items():
            g = GrassmannElement.zero(self.field, n)
            for idx in bl:
                if idx == ():
                    g = g + GrassmannElement.one(self.field, n)
                else:
                    g = g + GrassmannElement.blade(self.field, n, idx)
            out[v] = g
        return out

    def max_index(self) -> int:
        return max((i for bl in self.blades.values() for b in bl for i in b), default=0)


def _class_ok(u: PrTerm, case: str, k: int | None, field: FieldParams) -> bool:
    p = field.p
    if case == "can":
        return ss_class(u, None, p)["SS0"]
    if case == "inf":
        return ss_class(u, None, p)["SS"]
    if case == "kstar":
        return ss_class(u, None, p)["SS"] and term_stats(u).deg_Z <= k
    st = term_stats(u)
    spec = IdealSpec("I4", field, k)
    if not in_output_class(u, spec):
        return False
    boundary = st.degZ_beg + st.degY_psi
    if case == "k1":
        return boundary <= k
    return boundary == k + 1


def build_witness(
    u: PrTerm, case: str, field: FieldParams, k: int | None = None, alphas: dict | None = None
) -> Witness:
    """The substitution under which u has a nonzero dominant part, for one witness case.

    case is one of ``can`` (canonical grading), ``inf`` (alternating), ``kstar``
    (first k generators odd), ``k1`` and ``k2`` (first k generators even; the
    boundary sum below k+1 and equal to k+1).
    """
    case = case.lower()
    if case not in CASES:
        raise WitnessError(f"unknown case {case!r}")
    if case in ("kstar", "k1", "k2") and k is None:
        raise WitnessError(f"case {case} needs k")
    if not _class_ok(u, case, k, field):
        raise WitnessError(f"term {u} is not in the class of case {case}")
    builder = {"can": _w_can, "inf": _w_inf, "kstar": _w_kstar, "k1": _w_k1, "k2": _w_k2}[case]
    if case == "can":
        return builder(u, field, alphas or {})
    return builder(u, field, k)


def _w_can(u: PrTerm, field: FieldParams, alphas: dict) -> Witness:
    beg = dict(u.beg)
    ys = sorted(x for x in beg if not is_odd(x))
    zs = sorted(x for x in beg if is_odd(x))
    n_y = len(ys)
    n = 2 * n_y + len(zs)
    images = {}
    for i, yv in enumerate(ys, 1):
        g = GrassmannElement.blade(field, n, (2 * i - 1, 2 * i))
        images[yv] = g + GrassmannElement.scalar(field, n, alphas.get(yv, 1))
    for j, zv in enumerate(zs, 1):
        images[zv] = GrassmannElement.gen(field, n, 2 * n_y + j)
    return Witness("can", None, GradingSpec.canonical(), n, images, set(range(1, n + 1)))


def _shape(u: PrTerm):
    groups, beg = _roles(u)
    Y1, Y2, Y3 = groups["Y"]
    Z1, Z2, Z3 = groups["Z"]
    ya = [beg[x] for x in Y1 + Y2]
    zb = [beg[x] for x in Z1 + Z2]
    n1, n2, l1 = len(Y1), len(Y1) + len(Y2), len(Y1) + len(Y2) + len(Y3)
    m1, m2, l2 = len(Z1), len(Z1) + len(Z2), len(Z1) + len(Z2) + len(Z3)
    return (Y1 + Y2 + Y3, Z1 + Z2 + Z3, _prefix(ya), _prefix(zb), n1, n2, l1, m1, m2, l2)


def _w_inf(u: PrTerm, field: FieldParams, k) -> Witness:
    ys, zs, A, B, n1, n2, l1, m1, m2, l2 = _shape(u)
    M = 4 * A[n2] + 2 * (l1 - n1)
    im = _Images(field)
    for i in range(1, n1 + 1):
        for l in range(A[i - 1] + 1, A[i] + 1):
            im.add(ys[i - 1], (4 * l - 2, 4 * l))
    for i in range(n1 + 1, n2 + 1):
        j = i - n1
        base = 4 * A[i - 1] + 2 * j
        im.add(ys[i - 1], (base,))
        for l in range(1, A[i] - A[i - 1] + 1):
            im.add(ys[i - 1], (base + 4 * l - 2, base + 4 * l))
    for i in range(n2 + 1, l1 + 1):
        im.add(ys[i - 1], (4 * A[n2] + 2 * (i - n1),))
    for i in range(1, m1 + 1):
        for l in range(B[i - 1] + 1, B[i] + 1):
            im.add(zs[i - 1], (2 * l - 1, M + 2 * l))
    for i in range(m1 + 1, m2 + 1):
        j = i - m1
        im.add(zs[i - 1], (2 * B[i - 1] + 2 * j - 1,))
        for l in range(B[i - 1] + 1, B[i] + 1):
            im.add(zs[i - 1], (2 * (l + j) - 1, M + 2 * l))
    for i in range(m2 + 1, l2 + 1):
        im.add(zs[i - 1], (2 * (B[m2] + i - m1) - 1,))
    top_odd = 2 * B[m2] + 2 * (l2 - m1) - 1
    support = set(range(2, M + 1, 2)) | set(range(1, top_odd + 1, 2)) | set(range(M + 2, M + 2 * B[m2] + 1, 2))
    n = im.max_index()
    return Witness("inf", None, GradingSpec.alternating(), n, im.build(n), support, {"M": M})


def _w_kstar(u: PrTerm, field: FieldParams, k: int) -> Witness:
    ys, zs, A, B, n1, n2, l1, m1, m2, l2 = _shape(u)
    Q = k + 2 * A[n2] + (l1 - n1)
    T = B[m2] + (m2 - m1)
    im = _Images(field)
    for i in range(1, n1 + 1):
        for l in range(A[i - 1] + 1, A[i] + 1):
            im.add(ys[i - 1], (k + 2 * l - 1, k + 2 * l))
    for i in range(n1 + 1, n2 + 1):
        j = i - n1
        base = k + 2 * A[i - 1] + j
        im.add(ys[i - 1], (base,))
        for l in range(1, A[i] - A[i - 1] + 1):
            im.add(ys[i - 1], (base + 2 * l - 1, base + 2 * l))
    for i in range(n2 + 1, l1 + 1):
        im.add(ys[i - 1], (k + 2 * A[n2] + (i - n1),))
    for i in range(1, m1 + 1):
        for l in range(B[i - 1] + 1, B[i] + 1):
            im.add(zs[i - 1], (l, Q + l))
    for i in range(m1 + 1, m2 + 1):
        j = i - m1
        im.add(zs[i - 1], (B[i - 1] + j,))
        for l in range(1, B[i] - B[i - 1] + 1):
            im.add(zs[i - 1], (l + B[i - 1] + j, Q + B[i - 1] + l))
    for i in range(m2 + 1, l2 + 1):
        im.add(zs[i - 1], (T + i - m2,))
    support = set(range(1, T + (l2 - m2) + 1)) | set(range(k + 1, Q + B[m2] + 1))
    n = max(im.max_index(), k)
    return Witness("kstar", k, GradingSpec.first_k_star(k), n, im.build(n), support, {"Q": Q, "T": T})


def _w_k1(u: PrTerm, field: FieldParams, k: int) -> Witness:
    ys, zs, A, B, n1, n2, l1, m1, m2, l2 = _shape(u)
    R = k + 2 * A[n2]
    S = R + B[m2] + m2 - m1
    L = l1 - n1
    im = _Images(field)
    for i in range(1, n2 + 1):
        if i > n1:
            im.add(ys[i - 1], (i - n1,))
        for l in range(A[i - 1] + 1, A[i] + 1):
            im.add(ys[i - 1], (k + 2 * l - 1, k + 2 * l))
    for i in range(n2 + 1, l1 + 1):
        im.add(ys[i - 1], (i - n1,))
    for i in range(1, m1 + 1):
        for l in range(B[i - 1] + 1, B[i] + 1):
            im.add(zs[i - 1], (R + l, L + l))
    for i in range(m1 + 1, m2 + 1):
        j = i - m1
        im.add(zs[i - 1], (R + B[i - 1] + j,))
        for l in range(B[i - 1] + 1, B[i] + 1):
            im.add(zs[i - 1], (R + l + j, L + l))
    for i in range(m2 + 1, l2 + 1):
        im.add(zs[i - 1], (S + i - m2,))
    support = set(range(1, L + B[m2] + 1)) | set(range(k + 1, S + (l2 - m2) + 1))
    n = max(im.max_index(), k)
    return Witness("k1", k, GradingSpec.first_k(k), n, im.build(n), support, {"R": R, "S": S})


def _w_k2(u: PrTerm, field: FieldParams, k: int) -> Witness:
    ys, zs, A, B, n1, n2, l1, m1, m2, l2 = _shape(u)
    M = k + B[m2] + l2 - m1
    im = _Images(field)
    for i in range(1, m1 + 1):
        if i == 1:
            im.add(zs[0], (k + 1,))
            pairs = range(1, B[1])
        else:
            pairs = range(B[i - 1], B[i])
        for l in pairs:
            im.add(zs[i - 1], (k + l + 1, l))
    for i in range(m1 + 1, m2 + 1):
        j = i - m1
        base = k + B[i - 1] + j
        im.add(zs[i - 1], (base,))
        for l in range(1, B[i] - B[i - 1] + 1):
            im.add(zs[i - 1], (base + l, l + B[i - 1] - 1))
    for i in range(m2 + 1, l2 + 1):
        im.add(zs[i - 1], (k + B[m2] + i - m1,))
    for i in range(1, n2 + 1):
        if i > n1:
            im.add(ys[i - 1], (B[m2] + (i - n1) - 1,))
        for l in range(A[i - 1] + 1, A[i] + 1):
            im.add(ys[i - 1], (M + 2 * l - 1, M + 2 * l))
    for i in range(n2 + 1, l1 + 1):
        im.add(ys[i - 1], (B[m2] + (i - n1) - 1,))
    support = set(range(1, B[m2] + (l1 - n1))) | set(range(k + 1, M + 2 * A[n2] + 1))
    n = max(im.max_index(), k)
    return Witness("k2", k, GradingSpec.first_k(k), n, im.build(n), support, {"M": M})


def evaluate_term(u: PrTerm, images: dict) -> GrassmannElement:
    """beg(u) * psi(u) evaluated directly on Grassmann images."""
    first = next(iter(images.values()))
    out = GrassmannElement.one(first.field, first.n)
    for x, e in u.beg:
        out = out * (images[x] ** e)
    for i in range(0, len(u.psi), 2):
        out = out * images[u.psi[i]].commutator(images[u.psi[i + 1]])
    return out


def certify_dominant(u: PrTerm, assignment) -> dict:
    """Evaluate u and report the support of its dominant part."""
    images = assignment.images if isinstance(assignment, GradedAssignment) else dict(assignment)
    value = evaluate_term(u, images)
    d = value.dom()
    support: set[int] = set()
    for m in d.terms:
        support |= {i + 1 for i in range(m.bit_length()) if m >> i & 1}
    return {"dom_support": support, "nonzero": bool(value.terms), "value": value, "dom": d}
