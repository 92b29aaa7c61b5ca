"""Arithmetic in small finite fields GF(p^t) with p an odd prime.

Elements are stored as integer codes: the element c_0 + c_1 a + ... + c_{t-1} a^{t-1}
(with a the class of x modulo the defining polynomial) has code
c_0 + c_1 p + ... + c_{t-1} p^{t-1}.  So code 0 is zero, code 1 is one and the
codes 0..p-1 form the prime subfield.  All arithmetic goes through lookup
tables built once per field, which is cheap because q = p^t is tiny here.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

__all__ = [
    "FieldError",
    "FieldParams",
    "FieldScalar",
    "GF",
    "parse_field_config",
    "ff_make",
    "ff_add",
    "ff_mul",
    "ff_neg",
    "ff_inv",
    "ff_pow",
    "ff_enumerate",
]


class FieldError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_mod(num: list[int], den: list[int], p: int) -> list[int]:
    """Remainder of num by a monic den over Z_p (constant-first lists)."""
    r = [c % p for c in num]
    dd = len(den) - 1
    for i in range(len(r) - 1, dd - 1, -1):
        c = r[i]
        if c:
            for j in range(dd + 1):
                r[i - dd + j] = (r[i - dd + j] - c * den[j]) % p
    r = r[:dd] if dd > 0 else []
    while r and r[-1] == 0:
        r.pop()
    return r


def is_irreducible(modulus: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= t/2."""
    t = len(modulus) - 1
    if t < 1 or modulus[-1] % p != 1:
        return False
    if t == 1:
        return True
    for d in range(1, t // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not _poly_mod(modulus, list(low) + [1], p):
                return False
    return True


def default_modulus(p: int, t: int) -> list[int]:
    """Smallest monic irreducible of degree t, ordered by sum c_i p^i over the low coefficients."""
    for code in range(p ** t):
        low = [(code // p ** i) % p for i in range(t)]
        if is_irreducible(low + [1], p):
            return low + [1]
    raise FieldError(f"no irreducible polynomial of degree {t} over Z_{p}")


class FieldParams:
    """The field GF(p^t) together with its arithmetic tables.

    Instances are immutable and compare equal when (p, t, modulus) agree.
    Use :func:`GF` to get a cached instance.
    """

    def __init__(self, p: int, t: int = 1, modulus: list[int] | None = None):
        if not isinstance(p, int) or not _is_prime(p):
            raise FieldError(f"p={p} is not prime")
        if p <= 2:
            raise FieldError("characteristic 2 is not supported")
        if t < 1:
            raise FieldError("extension degree t must be >= 1")
        if modulus is None:
            modulus = default_modulus(p, t)
        modulus = [int(c) % p for c in modulus]
        if len(modulus) != t + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus must be monic of degree {t}, constant-first")
        if not is_irreducible(modulus, p):
            raise FieldError(f"modulus {modulus} is reducible over Z_{p}")
        self.p = p
        self.t = t
        self.modulus = tuple(modulus)
        self.q = p ** t
        self._build_tables()

    def _digits(self, code: int) -> list[int]:
        return [(code // self.p ** i) % self.p for i in range(self.t)]

    def _code(self, digits) -> int:
        return sum(int(d) * self.p ** i for i, d in enumerate(digits))

    def _build_tables(self) -> None:
        p, t, q = self.p, self.t, self.q
        digits = [self._digits(c) for c in range(q)]
        add = [[0] * q for _ in range(q)]
        mul = [[0] * q for _ in range(q)]
        for a in range(q):
            da = digits[a]
            for b in range(q):
                db = digits[b]
                add[a][b] = self._code([(x + y) % p for x, y in zip(da, db)])
                prod = [0] * (2 * t - 1)
                for i, x in enumerate(da):
                    if x:
                        for j, y in enumerate(db):
                            prod[i + j] += x * y
                mul[a][b] = self._code(_poly_mod(prod, list(self.modulus), p))
        self.add_table = add
        self.mul_table = mul
        self.neg_table = [self._code([(-x) % p for x in digits[a]]) for a in range(q)]
        self.sub_table = [[add[a][self.neg_table[b]] for b in range(q)] for a in range(q)]
        inv = [0] * q
        for a in range(1, q):
            inv[a] = self.pow(a, q - 2)
        self.inv_table = inv
        self.np_add = np.array(add, dtype=np.int64)
        self.np_mul = np.array(mul, dtype=np.int64)
        self.np_neg = np.array(self.neg_table, dtype=np.int64)

    # code-level arithmetic, used by the other modules
    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.sub_table[a][b]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.inv_table[a]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        mul = self.mul_table
        result, base = 1, a
        while e:
            if e & 1:
                result = mul[result][base]
            base = mul[base][base]
            e >>= 1
        return result

    def from_int(self, n: int) -> int:
        """Image of an integer in the prime subfield."""
        return n % self.p

    def make(self, coeffs) -> int:
        coeffs = [int(c) for c in coeffs]
        if len(coeffs) > self.t:
            raise FieldError(f"at most {self.t} coefficients expected")
        return self._code([c % self.p for c in coeffs])

    def coeffs(self, code: int) -> list[int]:
        return self._digits(code)

    def is_prime_subfield(self, code: int) -> bool:
        return code < self.p

    def elements(self) -> list[int]:
        return list(range(self.q))

    def generator_code(self) -> int:
        """Code of the class of x (the polynomial-basis generator written `a`)."""
        return self.p if self.t > 1 else 0

    def config_string(self) -> str:
        mod = ",".join(str(c) for c in self.modulus)
        return f"p={self.p},t={self.t},mod={mod}"

    def format(self, code: int) -> str:
        """Text form: an integer for the prime subfield, otherwise a polynomial in a."""
        if code < self.p:
            return str(code)
        parts = []
        for i, c in reversed(list(enumerate(self._digits(code)))):
            if not c:
                continue
            mono = "" if i == 0 else ("a" if i == 1 else f"a^{i}")
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return "(" + " + ".join(parts) + ")"

    def scalar(self, value) -> "FieldScalar":
        if isinstance(value, FieldScalar):
            return value
        return FieldScalar(self, self.from_int(int(value)))

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldParams) and (self.p, self.t, self.modulus) == (
            other.p,
            other.t,
            other.modulus,
        )

    def __hash__(self) -> int:
        return hash((self.p, self.t, self.modulus))

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.t}, mod={list(self.modulus)})"


@lru_cache(maxsize=None)
def GF(p: int, t: int = 1, modulus: tuple[int, ...] | None = None) -> FieldParams:
    """Cached field constructor."""
    return FieldParams(p, t, list(modulus) if modulus is not None else None)


def parse_field_config(text: str) -> FieldParams:
    """Parse strings such as ``p=3,t=2,mod=1,0,1`` (modulus constant-first, optional)."""
    text = text.replace(" ", "")
    mod = None
    if "mod=" in text:
        text, _, modtext = text.partition("mod=")
        text = text.rstrip(",")
        try:
            mod = tuple(int(c) for c in modtext.split(",") if c)
        except ValueError as exc:
            raise FieldError(f"bad modulus list {modtext!r}") from exc
    values = {}
    for item in filter(None, text.split(",")):
        key, sep, val = item.partition("=")
        if not sep or key not in ("p", "t"):
            raise FieldError(f"bad field option {item!r}")
        try:
            values[key] = int(val)
        except ValueError as exc:
            raise FieldError(f"bad integer in {item!r}") from exc
    if "p" not in values:
        raise FieldError("field config needs p=<prime>")
    t = values.get("t", 1 if mod is None else len(mod) - 1)
    return GF(values["p"], t, mod)


class FieldScalar:
    """A field element bound to its field; supports the usual operators."""

    __slots__ = ("field", "code")

    def __init__(self, field: FieldParams, code: int):
        self.field = field
        self.code = code

    def _other(self, other) -> int:
        if isinstance(other, FieldScalar):
            if other.field != self.field:
                raise FieldError("elements of different fields")
            return other.code
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return FieldScalar(self.field, self.field.add(self.code, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return FieldScalar(self.field, self.field.sub(self.code, o))

    def __rsub__(self, other):
        o = self._other(other)
        return FieldScalar(self.field, self.field.sub(o, self.code))

    def __mul__(self, other):
        o = self._other(other)
        return FieldScalar(self.field, self.field.mul(self.code, o))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldScalar(self.field, self.field.neg(self.code))

    def __truediv__(self, other):
        o = self._other(other)
        return FieldScalar(self.field, self.field.mul(self.code, self.field.inv(o)))

    def __pow__(self, e: int):
        return FieldScalar(self.field, self.field.pow(self.code, e))

    def inverse(self):
        return FieldScalar(self.field, self.field.inv(self.code))

    @property
    def coeffs(self) -> list[int]:
        return self.field.coeffs(self.code)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.code == self.field.from_int(other)
        return isinstance(other, FieldScalar) and self.field == other.field and self.code == other.code

    def __hash__(self) -> int:
        return hash((self.field, self.code))

    def __bool__(self) -> bool:
        return self.code != 0

    def __repr__(self) -> str:
        return f"FieldScalar({self.field.format(self.code)})"

    def __str__(self) -> str:
        return self.field.format(self.code)


def ff_make(params: FieldParams, coeffs) -> FieldScalar:
    return FieldScalar(params, params.make(coeffs))


def _same(a: FieldScalar, b: FieldScalar) -> None:
    if a.field != b.field:
        raise FieldError("elements of different fields")


def ff_add(a: FieldScalar, b: FieldScalar) -> FieldScalar:
    _same(a, b)
    return a + b


def ff_mul(a: FieldScalar, b: FieldScalar) -> FieldScalar:
    _same(a, b)
    return a * b


def ff_neg(a: FieldScalar) -> FieldScalar:
    return -a


def ff_inv(a: FieldScalar) -> FieldScalar:
    """Inverse computed as a^(q-2)."""
    if a.code == 0:
        raise ZeroDivisionError("zero has no inverse")
    return FieldScalar(a.field, a.field.pow(a.code, a.field.q - 2))


def ff_pow(a: FieldScalar, e: int) -> FieldScalar:
    if e < 0:
        raise ValueError("exponent must be non-negative")
    return a ** e


def ff_enumerate(params: FieldParams) -> list[FieldScalar]:
    """All q elements; the first is 0 and the second is 1."""
    return [FieldScalar(params, c) for c in range(params.q)]
