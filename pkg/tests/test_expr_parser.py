from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mixed_polys
from mixsing.expr_parser import (
    ParseDiagnostic,
    ParseError,
    SourceText,
    format_polynomial,
    parse,
    parse_map,
    parse_polynomial,
)
from mixsing.mixed_core import ComplexRational, MixedMap, MixedPolynomial


def test_simple_terms():
    f = parse("z1^2 + zb2^2", 2)
    assert f == MixedPolynomial(2, [((2, 0), (0, 0), 1), ((0, 0), (0, 2), 1)])


def test_modulus_square():
    assert parse("z1*zb1", 1) == MixedPolynomial(1, [((1,), (1,), 1)])


def test_expansion_of_square():
    assert parse("z1 + (z2+z3)^2", 3) == parse("z1 + z2^2 + 2*z2*z3 + z3^2", 3)
    assert parse("(z2+z3)^2", 3) == parse("z2^2+2*z2*z3+z3^2", 3)


def test_sourcetext_form():
    assert parse_polynomial(SourceText("z1", 1)) == MixedPolynomial.var(1, 1)


def test_canonical_merge_and_drop():
    assert parse("z1 - z1 + 2*zb1 + zb1", 1) == MixedPolynomial(1, [((0,), (1,), 3)])
    assert parse("z1 - z1", 1).is_zero()


def test_literals():
    assert parse("3/4", 1) == MixedPolynomial.constant(1, Fraction(3, 4))
    assert parse("i*z1", 1) == MixedPolynomial(1, [((1,), (0,), ComplexRational(0, 1))])
    assert parse("(1/2+3i)", 1) == MixedPolynomial.constant(1, ComplexRational(Fraction(1, 2), 3))
    assert parse("(-1-i)", 1) == MixedPolynomial.constant(1, ComplexRational(-1, -1))
    assert parse("(2-i)", 1) == MixedPolynomial.constant(1, ComplexRational(2, -1))


def test_precedence_and_unary_minus():
    assert parse("-z1^2", 1) == MixedPolynomial(1, [((2,), (0,), -1)])
    assert parse("2*z1^2+1", 1) == MixedPolynomial(1, [((0,), (0,), 1), ((2,), (0,), 2)])
    assert parse("z1-zb1*z1", 1) == MixedPolynomial(1, [((1,), (0,), 1), ((1,), (1,), -1)])


def test_map_pndnd():
    fmap = parse_map(["z1+(z2+z3)^2", "z1^2+z2^2+z3^2"], 3)
    assert isinstance(fmap, MixedMap) and fmap.k == 2 and fmap.nvars == 3


def test_map_arity():
    diag = parse_map([], 1)
    assert isinstance(diag, ParseDiagnostic) and diag.kind == "arity"
    diag = parse_map([SourceText("z1", 1), SourceText("z1", 2)])
    assert isinstance(diag, ParseDiagnostic) and diag.kind == "arity"
    ok = parse_map(["z1", "z1"], 1)
    assert isinstance(ok, MixedMap) and ok.k == 2


@pytest.mark.parametrize(
    "text,nvars,kind,position",
    [
        ("z3", 2, "arity", 0),
        ("z1+", 1, "syntax", 3),
        ("z1^-1", 1, "exponent", 3),
        ("1/0", 1, "coefficient", 0),
        ("z1 ** 2", 1, "syntax", 4),
        ("(z1", 1, "syntax", 3),
        ("", 1, "syntax", 0),
        ("z0", 1, "arity", 0),
    ],
)
def test_diagnostics(text, nvars, kind, position):
    diag = parse_polynomial(text, nvars)
    assert isinstance(diag, ParseDiagnostic)
    assert diag.kind == kind
    assert diag.position == position
    assert 0 <= diag.position <= len(text.encode())


def test_byte_offsets_for_non_ascii():
    diag = parse_polynomial("z1+é", 1)
    assert isinstance(diag, ParseDiagnostic) and diag.position == 3
    diag = parse_polynomial("é+é", 1)
    assert isinstance(diag, ParseDiagnostic) and diag.position == 0


def test_parse_raises():
    with pytest.raises(ParseError):
        parse("z1+", 1)


def test_format_examples():
    assert format_polynomial(MixedPolynomial.zero(2)) == "0"
    f = MixedPolynomial(2, [((0, 1), (0, 2), ComplexRational(Fraction(1, 2), 3))])
    assert format_polynomial(f) == "(1/2+3i)*z2*zb2^2"
    g = parse("z1^3*zb1", 1)
    assert parse(format_polynomial(g), 1) == g


@settings(max_examples=300, deadline=None)
@given(mixed_polys())
def test_round_trip(f):
    assert parse(format_polynomial(f), f.nvars) == f


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="z b 0123456789+-*^()/i", max_size=25))
def test_total_on_arbitrary_text(text):
    res = parse_polynomial(text, 3)
    if isinstance(res, ParseDiagnostic):
        assert 0 <= res.position <= len(text.encode())
        assert res.kind in {"syntax", "arity", "exponent", "coefficient"}
    else:
        assert isinstance(res, MixedPolynomial)
