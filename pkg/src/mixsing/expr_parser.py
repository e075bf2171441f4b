"""Text form of mixed polynomials and maps.

Grammar (whitespace between tokens is ignored)::

    expr   := term (("+" | "-") term)*
    term   := "-"? factor ("*" factor)*
    factor := base ("^" UINT)?
    base   := VAR | CONJ | LIT | "(" expr ")"
    VAR    := "z" UINT          CONJ := "zb" UINT
    LIT    := UINT | UINT "/" UINT | "i" | "(" signed ("+"|"-") signed? "i" ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

from .mixed_core import I_UNIT, ComplexRational, MixedMap, MixedPolynomial

DiagnosticKind = Literal["syntax", "arity", "exponent", "coefficient"]

MAX_EXPONENT = 1000
MAX_EXPANSION_EXPONENT = 64


@dataclass(frozen=True)
class SourceText:
    text: str
    nvars: int


@dataclass(frozen=True)
class ParseDiagnostic:
    """Why a source string was rejected; ``position`` is a UTF-8 byte offset."""

    position: int
    message: str
    kind: DiagnosticKind

    def to_json(self) -> dict[str, object]:
        return {"position": self.position, "message": self.message, "kind": self.kind}


class ParseError(ValueError):
    def __init__(self, diagnostic: ParseDiagnostic):
        super().__init__(f"{diagnostic.kind} error at byte {diagnostic.position}: {diagnostic.message}")
        self.diagnostic = diagnostic


class _Failure(Exception):
    def __init__(self, index: int, message: str, kind: DiagnosticKind = "syntax"):
        super().__init__(message)
        self.index = index
        self.message = message
        self.kind = kind


_UINT = re.compile(r"\d+")
_COMPLEX_LIT = re.compile(
    r"\(\s*(-?\d+(?:\s*/\s*\d+)?)\s*([+-])\s*(-?\d+(?:\s*/\s*\d+)?)?\s*i\s*\)"
)


def _rational(token: str, index: int) -> Fraction:
    num, _, den = token.replace(" ", "").partition("/")
    if den and int(den) == 0:
        raise _Failure(index, "zero denominator in rational literal", "coefficient")
    return Fraction(int(num), int(den) if den else 1)


class _Parser:
    def __init__(self, text: str, nvars: int):
        self.text = text
        self.nvars = nvars
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> MixedPolynomial:
        self.skip()
        if self.pos >= len(self.text):
            raise _Failure(self.pos, "empty expression")
        value = self.expr()
        self.skip()
        if self.pos < len(self.text):
            raise _Failure(self.pos, f"unexpected character {self.text[self.pos]!r}")
        return value

    def expr(self) -> MixedPolynomial:
        total = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            total = total + rhs if op == "+" else total - rhs
        return total

    def term(self) -> MixedPolynomial:
        negate = False
        if self.peek() == "-":
            negate = True
            self.pos += 1
        value = self.factor()
        while self.peek() == "*":
            self.pos += 1
            value = value * self.factor()
        return -value if negate else value

    def factor(self) -> MixedPolynomial:
        base = self.base()
        if self.peek() == "^":
            self.pos += 1
            self.skip()
            start = self.pos
            if self.peek() == "-":
                raise _Failure(start, "negative exponents are not allowed", "exponent")
            m = _UINT.match(self.text, self.pos)
            if not m:
                raise _Failure(start, "expected a nonnegative integer exponent", "exponent")
            self.pos = m.end()
            exponent = int(m.group())
            limit = MAX_EXPONENT if len(base) <= 1 else MAX_EXPANSION_EXPONENT
            if exponent > limit:
                raise _Failure(start, f"exponent {exponent} exceeds the limit {limit}", "exponent")
            base = base**exponent
        return base

    def base(self) -> MixedPolynomial:
        ch = self.peek()
        start = self.pos
        if ch == "z":
            self.pos += 1
            conj = False
            if self.pos < len(self.text) and self.text[self.pos] == "b":
                conj = True
                self.pos += 1
            m = _UINT.match(self.text, self.pos)
            if not m:
                raise _Failure(self.pos, "expected a variable index after 'z'" + ("b" if conj else ""))
            self.pos = m.end()
            j = int(m.group())
            if not 1 <= j <= self.nvars:
                raise _Failure(start, f"variable index {j} outside 1..{self.nvars}", "arity")
            return MixedPolynomial.conj_var(self.nvars, j) if conj else MixedPolynomial.var(self.nvars, j)
        if ch == "i":
            self.pos += 1
            return MixedPolynomial.constant(self.nvars, I_UNIT)
        if ch.isdigit():
            m = _UINT.match(self.text, self.pos)
            assert m is not None
            self.pos = m.end()
            value = Fraction(int(m.group()))
            if self.peek() == "/":
                self.pos += 1
                self.skip()
                d = _UINT.match(self.text, self.pos)
                if not d:
                    raise _Failure(self.pos, "expected an integer denominator")
                self.pos = d.end()
                if int(d.group()) == 0:
                    raise _Failure(start, "zero denominator in rational literal", "coefficient")
                value = value / int(d.group())
            return MixedPolynomial.constant(self.nvars, value)
        if ch == "(":
            lit = _COMPLEX_LIT.match(self.text, self.pos)
            if lit:
                re_part = _rational(lit.group(1), start)
                im_part = _rational(lit.group(3), start) if lit.group(3) else Fraction(1)
                if lit.group(2) == "-":
                    im_part = -im_part
                self.pos = lit.end()
                return MixedPolynomial.constant(self.nvars, ComplexRational(re_part, im_part))
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                raise _Failure(self.pos, "expected ')'")
            self.pos += 1
            return inner
        if not ch:
            raise _Failure(self.pos, "unexpected end of input")
        raise _Failure(self.pos, f"unexpected character {ch!r}")


def _byte_offset(text: str, index: int) -> int:
    index = max(0, min(index, len(text)))
    return len(text[:index].encode("utf-8"))


def parse_polynomial(src: SourceText | str, nvars: int | None = None) -> MixedPolynomial | ParseDiagnostic:
    """Parse one polynomial; returns a diagnostic instead of raising on bad input."""
    text, n = (src.text, src.nvars) if isinstance(src, SourceText) else (src, nvars)
    if not isinstance(n, int) or n < 1:
        return ParseDiagnostic(0, "nvars must be a positive integer", "arity")
    parser = _Parser(text, n)
    try:
        return parser.parse()
    except _Failure as fail:
        return ParseDiagnostic(_byte_offset(text, fail.index), fail.message, fail.kind)
    except RecursionError:
        return ParseDiagnostic(_byte_offset(text, parser.pos), "expression nested too deeply", "syntax")


def parse_map(srcs: Sequence[SourceText | str], nvars: int | None = None) -> MixedMap | ParseDiagnostic:
    if not srcs:
        return ParseDiagnostic(0, "a map needs at least one component", "arity")
    sources = [s if isinstance(s, SourceText) else SourceText(s, nvars if nvars is not None else 0) for s in srcs]
    declared = {s.nvars for s in sources}
    if len(declared) != 1:
        return ParseDiagnostic(0, f"components declare different nvars {sorted(declared)}", "arity")
    comps = []
    for s in sources:
        poly = parse_polynomial(s)
        if isinstance(poly, ParseDiagnostic):
            return poly
        comps.append(poly)
    return MixedMap(comps)


def parse(text: str, nvars: int) -> MixedPolynomial:
    """Like parse_polynomial but raises ParseError."""
    result = parse_polynomial(text, nvars)
    if isinstance(result, ParseDiagnostic):
        raise ParseError(result)
    return result


def parse_map_or_raise(texts: Sequence[str], nvars: int) -> MixedMap:
    result = parse_map(list(texts), nvars)
    if isinstance(result, ParseDiagnostic):
        raise ParseError(result)
    return result


def format_coefficient(c: ComplexRational) -> str:
    if c.im == 0:
        return str(c.re)
    if c.re == 0 and abs(c.im) == 1:
        return "i" if c.im > 0 else "-i"
    sign = "+" if c.im > 0 else "-"
    mag = abs(c.im)
    return f"({c.re}{sign}{'' if mag == 1 else mag}i)"


def _format_term(c: ComplexRational, mu: tuple[int, ...], nu: tuple[int, ...]) -> tuple[bool, str]:
    """Return (negative, body) so the caller can join with + or -."""
    factors = []
    for j, (a, b) in enumerate(zip(mu, nu), start=1):
        if a:
            factors.append(f"z{j}" + (f"^{a}" if a > 1 else ""))
        if b:
            factors.append(f"zb{j}" + (f"^{b}" if b > 1 else ""))
    negative = False
    if c.im == 0:
        negative = c.re < 0
        mag = abs(c.re)
        coeff = None if (mag == 1 and factors) else str(mag)
    elif c.re == 0 and abs(c.im) == 1:
        negative = c.im < 0
        coeff = "i"
    else:
        coeff = format_coefficient(c)
    body = "*".join(([coeff] if coeff is not None else []) + factors)
    return negative, body


def format_polynomial(f: MixedPolynomial) -> str:
    if f.is_zero():
        return "0"
    pieces = []
    for idx, t in enumerate(f.terms):
        negative, body = _format_term(t.coeff, t.mu, t.nu)
        if idx == 0:
            pieces.append(("-" if negative else "") + body)
        else:
            pieces.append(("-" if negative else "+") + body)
    return "".join(pieces)


def format_map(fmap: MixedMap) -> list[str]:
    return [format_polynomial(c) for c in fmap.components]
