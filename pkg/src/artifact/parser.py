"""Text syntax for graded polynomials.

Grammar (whitespace is ignored, ``*`` between factors is optional)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := power ('*'? power)*
    power  := atom ('^' INT)?
    atom   := INT | 'a' | VAR | '(' expr ')' | '[' expr ',' expr (',' expr)* ']'
    VAR    := 'y' INT | 'z' INT

``a`` is the class of x in GF(p^t) = Z_p[x]/(m); integers are read modulo p.
Brackets are left-normed commutators.  Example: ``z1^2*[y1,z2,y1] - 2*y1^4``.
"""

from __future__ import annotations

import re

from .field import FieldParams
from .freealg import Z_OFFSET, FreePolynomial, commutator, var_name, word_key

__all__ = [
    "ParseError",
    "tokenize",
    "parse_polynomial",
    "parse_scalar",
    "format_polynomial",
    "format_coefficient",
    "format_word",
    "parse_term_factors",
]


class ParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


_TOKEN = re.compile(r"\s*(?:(\d+)|([yz])(\d+)|(a)|([-+*^()\[\],]))")


def tokenize(text: str) -> list[tuple[str, object, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(0) + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            idx = int(m.group(3))
            if idx < 1:
                raise ParseError("variable index must be >= 1", start)
            letter = idx if m.group(2) == "y" else Z_OFFSET + idx
            tokens.append(("var", letter, start))
        elif m.group(4) is not None:
            tokens.append(("gen", None, start))
        else:
            tokens.append((m.group(5), None, start))
        pos = m.end(0)
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, field: FieldParams):
        self.field = field
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind: str | None = None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> FreePolynomial:
        if self.peek()[0] == "end":
            raise ParseError("empty input", 0)
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[0]!r}", tok[2])
        return value

    def expr(self) -> FreePolynomial:
        sign = 1
        if self.peek()[0] in "+-":
            sign = -1 if self.take()[0] == "-" else 1
        value = self.term()
        if sign < 0:
            value = -value
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    _ATOM_START = ("int", "var", "gen", "(", "[")

    def term(self) -> FreePolynomial:
        value = self.power()
        while True:
            kind = self.peek()[0]
            if kind == "*":
                self.take()
                value = value * self.power()
            elif kind in self._ATOM_START:
                value = value * self.power()
            else:
                return value

    def power(self) -> FreePolynomial:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            exp = self.take("int")[1]
            base = base ** exp
        return base

    def atom(self) -> FreePolynomial:
        kind, val, pos = self.peek()
        f = self.field
        if kind == "int":
            self.take()
            return FreePolynomial.constant(f, f.from_int(val))
        if kind == "var":
            self.take()
            return FreePolynomial.var(f, val)
        if kind == "gen":
            self.take()
            if f.t == 1:
                raise ParseError("'a' needs an extension field (t > 1)", pos)
            return FreePolynomial.constant(f, f.generator_code())
        if kind == "(":
            self.take()
            value = self.expr()
            self.take(")")
            return value
        if kind == "[":
            self.take()
            args = [self.expr()]
            while self.peek()[0] == ",":
                self.take()
                args.append(self.expr())
            close = self.take("]")
            if len(args) < 2:
                raise ParseError("a commutator needs at least two arguments", close[2])
            return commutator(args)
        raise ParseError(f"unexpected {kind!r}", pos)


def parse_polynomial(text: str, field: FieldParams) -> FreePolynomial:
    return _Parser(text, field).parse()


def parse_scalar(text: str, field: FieldParams) -> int:
    """Parse a constant expression such as ``2``, ``-1`` or ``(a + 2)``; returns a field code."""
    poly = parse_polynomial(text, field)
    if any(w for w in poly.terms):
        raise ParseError(f"{text!r} is not a scalar")
    return poly.terms.get((), 0)


def format_word(word: tuple) -> str:
    return "*".join(var_name(x) for x in word) if word else "1"


def format_coefficient(field: FieldParams, code: int):
    """Split a coefficient into a sign and a printable magnitude (None for 1)."""
    p = field.p
    if code < p:
        if code * 2 > p:
            sign, mag = -1, p - code
        else:
            sign, mag = 1, code
        return sign, (None if mag == 1 else str(mag))
    return 1, field.format(code)


def join_terms(pieces: list[tuple[int, str]]) -> str:
    """Join (sign, text) pairs into ``a - b + c`` form."""
    if not pieces:
        return "0"
    out = []
    for i, (sign, text) in enumerate(pieces):
        if i == 0:
            out.append(text if sign > 0 else "-" + text)
        else:
            out.append((" + " if sign > 0 else " - ") + text)
    return "".join(out)


def format_polynomial(f: FreePolynomial) -> str:
    pieces = []
    for w in sorted(f.terms, key=word_key):
        sign, mag = format_coefficient(f.field, f.terms[w])
        body = format_word(w)
        if mag is None:
            text = body
        elif not w:
            text = mag
        else:
            text = f"{mag}*{body}"
        pieces.append((sign, text))
    return join_terms(pieces)


def parse_term_factors(text: str):
    """Structural parse of a product of powers and 2-brackets of variables.

    Returns a list of factors, each ``("pow", letter, exp)`` or ``("br", a, b)``.
    ``1`` alone gives an empty list.
    """
    tokens = tokenize(text)
    out = []
    i = 0

    def need(kind):
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        i += 1
        return tok

    if tokens[0][0] == "int" and tokens[0][1] == 1 and tokens[1][0] == "end":
        return out
    while tokens[i][0] != "end":
        kind, val, pos = tokens[i]
        if kind == "*" and out:
            i += 1
            continue
        if kind == "var":
            i += 1
            exp = 1
            if tokens[i][0] == "^":
                i += 1
                exp = need("int")[1]
                if exp < 1:
                    raise ParseError("exponent must be positive", tokens[i - 1][2])
            out.append(("pow", val, exp))
        elif kind == "[":
            i += 1
            a = need("var")[1]
            need(",")
            b = need("var")[1]
            need("]")
            out.append(("br", a, b))
        else:
            raise ParseError(f"unexpected {kind!r} in a term", pos)
    return out
