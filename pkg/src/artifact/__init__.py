"""Graded polynomial identities of the Grassmann algebra over finite fields.

Modules: ``field`` (GF(p^t) arithmetic), ``grassmann`` (truncated Grassmann
algebras and their gradings), ``freealg`` (the free graded algebra),
``canon`` (canonical forms modulo the identity ideals), ``checker``
(randomized and exhaustive identity checks, witness substitutions) and
``cli``.
"""

from .canon import CanonicalForm, IdealSpec, PPolynomial, PrTerm, reduce, ss_compare
from .checker import CheckConfig, build_witness, certify_dominant, check_identity, scalar_witness
from .field import GF, FieldParams
from .freealg import FreePolynomial, commutator, evaluate, substitute, y, z
from .grassmann import GradingSpec, GrassmannElement
from .parser import parse_polynomial

__all__ = [
    "GF",
    "FieldParams",
    "GrassmannElement",
    "GradingSpec",
    "FreePolynomial",
    "commutator",
    "evaluate",
    "substitute",
    "y",
    "z",
    "parse_polynomial",
    "IdealSpec",
    "PrTerm",
    "PPolynomial",
    "CanonicalForm",
    "reduce",
    "ss_compare",
    "CheckConfig",
    "check_identity",
    "scalar_witness",
    "build_witness",
    "certify_dominant",
]
