"""Command-line front end: ``artifact <command> [options]``.

Exit codes: 0 success (or Holds), 1 Fails / failed selftest, 2 usage or
parse error, 3 Inconclusive.
"""

from __future__ import annotations

import argparse
import itertools
import re
import sys

from . import acceptance, canon
from .canon import IdealSpec, parse_prterm, reduce, reduction_trace, ss_compare
from .checker import CASES, CheckConfig, WitnessError, build_witness, certify_dominant, check_identity
from .field import FieldError, FieldParams, GF, parse_field_config
from .freealg import var_name
from .freealg import y as yvar
from .freealg import z as zvar
from .grassmann import GradingSpec, GrassmannError
from .parser import ParseError, parse_polynomial

EXIT_OK, EXIT_FAILS, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

class UsageError(ValueError):
    pass


def parse_field_arg(text: str) -> FieldParams:
    """``3``, ``9`` (a prime power, default modulus) or ``p=3,t=2,mod=1,0,1``."""
    text = text.strip()
    if text.isdigit():
        q = int(text)
        for p in range(2, q + 1):
            if q % p == 0:
                t, r = 0, q
                while r % p == 0:
                    r //= p
                    t += 1
                if r != 1:
                    raise UsageError(f"{q} is not a prime power")
                return GF(p, t)
        raise UsageError(f"bad field size {text!r}")
    return parse_field_config(text)


class CliConfig:
    """Field, grading, ideal and run options collected from the command line."""

    def __init__(self, args: argparse.Namespace):
        self.field = parse_field_arg(args.field)
        if self.field.p == 2:
            raise UsageError("characteristic 2 is not supported")
        self.grading = GradingSpec.parse(args.grading) if args.grading else None
        self.ideal = self._ideal(args.ideal)
        if self.grading is None:
            self.grading = self.ideal.grading() if self.ideal else GradingSpec.canonical()
        if self.ideal is None:
            self.ideal = IdealSpec.for_grading(self.grading, self.field)
        if self.ideal.grading() != self.grading:
            raise UsageError(f"ideal {self.ideal} does not match grading {self.grading}")
        self.n = args.n
        self.seed = args.seed
        self.trials = args.trials
        self.exhaustive = args.exhaustive
        self.max_wt = args.max_wt
        self.trace = args.trace
        self.format = args.format

    def _ideal(self, text: str | None) -> IdealSpec | None:
        if not text:
            return None
        which, _, k = text.upper().partition(":")
        if k:
            return IdealSpec(which, self.field, int(k))
        if which in ("I3", "I4"):
            if self.grading is None or self.grading.kind not in ("kstar", "k"):
                raise UsageError(f"{which} needs k: use {which}:<k> or a kstar:/k: grading")
            return IdealSpec(which, self.field, self.grading.k)
        return IdealSpec(which, self.field)

    def check_config(self) -> CheckConfig:
        return CheckConfig(self.grading, self.n, self.exhaustive, self.max_wt, self.trials, self.seed)


def _emit(out, cfg: CliConfig, pairs: list[tuple[str, str]], text: str | None = None) -> None:
    if cfg.format == "kv":
        for key, val in pairs:
            print(f"{key}={val}", file=out)
    else:
        print(text if text is not None else "\n".join(f"{k}: {v}" for k, v in pairs), file=out)


# ---------------------------------------------------------------------------
# commands


def cmd_parse(args, cfg: CliConfig, out) -> int:
    f = parse_polynomial(args.input, cfg.field)
    _emit(out, cfg, [("polynomial", str(f))], str(f))
    return EXIT_OK


def cmd_reduce(args, cfg: CliConfig, out) -> int:
    f = parse_polynomial(args.input, cfg.field)
    if cfg.trace:
        result, steps = reduction_trace(f, cfg.ideal)
    else:
        result, steps = reduce(f, cfg.ideal), []
    if cfg.format == "kv":
        pairs = [("ideal", str(cfg.ideal)), ("result", str(result))]
        pairs += [(f"step{i}", canon.format_step(s, cfg.field)) for i, s in enumerate(steps, 1)]
        _emit(out, cfg, pairs)
    else:
        print(result, file=out)
        if cfg.trace:
            print("trace:", file=out)
            for s in steps:
                print("  " + canon.format_step(s, cfg.field), file=out)
    return EXIT_OK


_X_VAR = re.compile(r"x(\d+)")


def expand_parities(text: str) -> list[str]:
    """Replace each ``x<i>`` by ``y<i>`` and ``z<i>`` in every combination."""
    idx = sorted({int(m) for m in _X_VAR.findall(text)})
    if not idx:
        return [text]
    out = []
    for letters in itertools.product("yz", repeat=len(idx)):
        table = dict(zip(idx, letters))
        out.append(_X_VAR.sub(lambda m: f"{table[int(m.group(1))]}{m.group(1)}", text))
    return out


def cmd_check(args, cfg: CliConfig, out) -> int:
    variants = expand_parities(args.input)
    polys = [parse_polynomial(v, cfg.field) for v in variants]
    check_cfg = cfg.check_config()
    total = 0
    verdict = "Holds"
    for text, f in zip(variants, polys):
        rep = check_identity(f, check_cfg)
        total += rep.evaluations
        if rep.verdict != "Holds":
            verdict = rep.verdict
            if len(variants) > 1:
                _emit(out, cfg, [("instance", text)])
            if cfg.format == "kv":
                _emit(out, cfg, [tuple(line.split("=", 1)) for line in rep.kv_lines() if "=" in line])
            else:
                print(rep.text(), file=out)
            if rep.verdict == "Fails":
                return EXIT_FAILS
    if verdict == "Holds":
        _emit(out, cfg, [("verdict", "Holds"), ("evaluations", str(total))], f"Holds after {total} evaluations")
        return EXIT_OK
    return EXIT_INCONCLUSIVE


def _params(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {item!r}")
        out[key] = val
    return out


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t)


def structural_text(zs: list[int], T: tuple[int, ...], yl: int | None = None) -> str:
    """f_T (or r_T when yl is given) written with brackets, e.g. ``z3*[z1,z2]``."""
    comp = [zs[i - 1] for i in range(1, len(zs) + 1) if i not in T]
    parts = [var_name(x) for x in comp]
    rest = list(T)
    if yl is not None:
        parts.append(f"[{var_name(yl)},{var_name(zs[rest.pop(0) - 1])}]")
    for i in range(0, len(rest), 2):
        parts.append(f"[{var_name(zs[rest[i] - 1])},{var_name(zs[rest[i + 1] - 1])}]")
    return "*".join(parts) if parts else "1"


def cmd_gen(args, cfg: CliConfig, out) -> int:
    fam = args.family
    params = _params(args.params)
    field = cfg.field
    zs = None
    if "zs" in params:
        zs = [zvar(i) for i in range(1, int(params["zs"]) + 1)]
    try:
        if fam in ("g_m", "gm"):
            m = int(params["m"])
            items = [(f"g_{m}", canon.gen_gm(m, zs, field))]
        elif fam == "a":
            m = int(params["m"])
            items = [(f"a_{m}", canon.gen_a(m, zs or [zvar(i) for i in range(1, m + 1)], field))]
        elif fam == "fT":
            T = _ints(params["T"])
            g = canon.gen_fT(zs or [], T, field)
            items = [("f_T", structural_text(zs or [], T))]
        elif fam == "rT":
            yl = yvar(int(params.get("y", "1")))
            T = _ints(params["T"])
            g = canon.gen_rT(yl, zs or [], T, field)
            items = [("r_T", structural_text(zs or [], T, yl))]
        elif fam.upper() in ("I1", "I2", "I3", "I4"):
            k = int(params["k"]) if "k" in params else None
            items = canon.gen_ideal_basis(IdealSpec(fam.upper(), field, k))
        else:
            raise UsageError(f"unknown family {fam!r}")
    except KeyError as exc:
        raise UsageError(f"missing parameter {exc.args[0]!r}") from exc
    if fam in ("fT", "rT"):
        # gen_* validated T; the bracket form re-parses to the same polynomial
        _emit(out, cfg, [(items[0][0], items[0][1]), ("expanded", str(g))], items[0][1])
    elif len(items) == 1 and fam.upper() not in ("I1", "I2", "I3", "I4"):
        _emit(out, cfg, [(items[0][0], str(items[0][1]))], str(items[0][1]))
    else:
        _emit(out, cfg, [(label, str(g)) for label, g in items])
    return EXIT_OK


def _term(text: str):
    try:
        sign, u = parse_prterm(text)
    except ParseError as exc:
        raise UsageError(f"not an SS-shaped term: {exc}") from exc
    if u is None:
        raise UsageError(f"{text!r} vanishes: a bracket repeats a variable")
    return u


def cmd_order(args, cfg: CliConfig, out) -> int:
    u, v = _term(args.u), _term(args.v)
    word = {-1: "Less", 0: "Equal", 1: "Greater"}[ss_compare(u, v)]
    _emit(out, cfg, [("order", word)], word)
    return EXIT_OK


def cmd_witness(args, cfg: CliConfig, out) -> int:
    params = _params(args.params)
    case = params.get("case", "can")
    if case not in CASES:
        raise UsageError(f"case must be one of {', '.join(CASES)}")
    k = int(params["k"]) if "k" in params else None
    u = _term(args.term)
    try:
        w = build_witness(u, case, cfg.field, k)
    except WitnessError as exc:
        raise UsageError(str(exc)) from exc
    r = certify_dominant(u, w.assignment())
    support = "{" + ", ".join(str(i) for i in sorted(r["dom_support"])) + "}"
    expected = "{" + ", ".join(str(i) for i in sorted(w.expected_support)) + "}"
    certified = r["nonzero"] and r["dom_support"] == w.expected_support
    pairs = [
        ("term", str(u)),
        ("case", case),
        ("grading", str(w.grading)),
        ("n", str(w.n)),
    ]
    pairs += [(f"image_{var_name(x)}", str(g)) for x, g in sorted(w.images.items())]
    pairs += [
        ("nonzero", "yes" if r["nonzero"] else "no"),
        ("support", support),
        ("expected_support", expected),
        ("dominant", str(r["dom"])),
        ("certified", "yes" if certified else "no"),
    ]
    _emit(out, cfg, pairs)
    return EXIT_OK if certified else EXIT_FAILS


def cmd_selftest(args, cfg: CliConfig, out) -> int:
    def show(res):
        if cfg.format == "kv":
            print(f"suite{res.number}={'PASS' if res.passed else 'FAIL'}", file=out, flush=True)
        else:
            print(res.line(), file=out, flush=True)

    results = acceptance.run_all(progress=show)
    passed = sum(r.passed for r in results)
    _emit(out, cfg, [("passed", f"{passed}/{len(results)}")])
    return EXIT_OK if passed == len(results) else EXIT_FAILS


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    def d(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--field", default=d("3"), help="3, 9, or p=3,t=2[,mod=1,0,1]")
    p.add_argument("--grading", default=d(None), help="canonical | alternating | kstar:<k> | k:<k>")
    p.add_argument("--ideal", default=d(None), help="I1 | I2 | I3[:k] | I4[:k]")
    p.add_argument("--n", type=int, default=d(10), help="truncation of the Grassmann algebra")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--trials", type=int, default=d(100))
    p.add_argument("--exhaustive", action="store_true", default=d(False))
    p.add_argument("--max-wt", dest="max_wt", type=int, default=d(None))
    p.add_argument("--trace", action="store_true", default=d(False))
    p.add_argument("--format", choices=("text", "kv"), default=d("text"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifact", description="Graded identities of the Grassmann algebra over finite fields.")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _add_common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    add("parse", cmd_parse, "parse and print a polynomial").add_argument("input")
    add("reduce", cmd_reduce, "canonical form modulo an ideal").add_argument("input")
    add("check", cmd_check, "test a graded identity; x<i> stands for both parities").add_argument("input")
    p = add("gen", cmd_gen, "print generators: g_m, a, fT, rT, I1..I4")
    p.add_argument("family")
    p.add_argument("params", nargs="*")
    p = add("order", cmd_order, "compare two terms in the SS order")
    p.add_argument("u")
    p.add_argument("v")
    p = add("witness", cmd_witness, "certify a term with a witness substitution")
    p.add_argument("term")
    p.add_argument("params", nargs="*")
    add("selftest", cmd_selftest, "run the acceptance suites")
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = CliConfig(args)
        return args.func(args, cfg, out)
    except (ParseError, UsageError, FieldError, GrassmannError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
