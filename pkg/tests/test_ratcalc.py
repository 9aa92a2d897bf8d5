from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from logconn.core.errors import FieldDivisionError, FieldMismatchError, UnsplitDenominatorError
from logconn.core.field import field_make
from logconn.core.ratcalc import (P1Point, Poly, RatFun, find_roots, laurent_at, norm_poly, partial_fractions,
                                  poly_gcd, residue_form, rf_arith)
from tests.strategies import contexts, ratfuns

Z = sympy.Symbol("z")
INF = P1Point.infinity()


def _point(ctx, value):
    return P1Point.finite(ctx.coerce(value))


def _to_sympy(f):
    def conv(p):
        return sum(sympy.Rational(c.as_rational().numerator, c.as_rational().denominator) * Z ** k
                   for k, c in enumerate(p.coeffs))
    return conv(f.num) / conv(f.den)


@st.composite
def split_ratfuns(draw):
    """Rational coefficients, denominator a product of powers of z - a for a in {0, 1, -1, 2}"""
    ctx = field_make(1)
    den = Poly.constant(ctx, 1)
    poles = []
    for a in (0, 1, -1, 2):
        e = draw(st.integers(0, 2))
        if e:
            poles.append(a)
            den = den * Poly.linear_root(ctx, ctx.coerce(a)) ** e
    coeffs = draw(st.lists(st.integers(-5, 5), max_size=den.degree + 3))
    return RatFun(Poly(ctx, coeffs), den), poles


def test_sum_of_simple_poles(q, rf):
    assert rf(q, "1/(z-1)") + rf(q, "1/(z+1)") == RatFun(Poly(q, [0, 2]), Poly(q, [-1, 0, 1]))


def test_canonical_form_is_reduced(q):
    f = RatFun(Poly(q, [-1, 0, 1]), Poly(q, [-1, 1]))
    assert f == RatFun(Poly(q, [1, 1]))
    assert f.is_polynomial()
    g = RatFun(Poly(q, [2]), Poly(q, [4, 2]))
    assert g.den == Poly(q, [2, 1])
    assert g.num == Poly(q, [1])


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_field_laws(data):
    ctx = data.draw(contexts((1, 3, 4)))
    f = data.draw(ratfuns(ctx))
    g = data.draw(ratfuns(ctx))
    assert f * 1 == f
    assert f - f == 0
    assert f + g == g + f
    if g:
        assert (f / g) * g == f


def test_zero_denominator(q):
    with pytest.raises(FieldDivisionError):
        RatFun(Poly(q, [1]), Poly(q))


def test_rf_arith(q, q4, rf):
    f = rf(q, "1/(z-1)")
    assert rf_arith(f, rf(q, "1/(z+1)"), "add") == rf(q, "2*z/(z^2-1)")
    assert rf_arith(f, f, "sub") == 0
    assert rf_arith(f, rf(q, "z-1"), "mul") == 1
    with pytest.raises(FieldDivisionError):
        rf_arith(f, rf(q, "0"), "div")
    with pytest.raises(FieldMismatchError):
        rf_arith(f, rf(q4, "z"), "add")
    with pytest.raises(ValueError):
        rf_arith(f, f, "pow")


def test_laurent_at_origin(q, rf):
    series = laurent_at(rf(q, "1/z"), _point(q, 0), 1)
    assert series.coefficient(-1) == 1
    assert series.coefficient(0) == 0
    assert series.coefficient(1) == 0


def test_laurent_at_infinity(q, rf):
    series = laurent_at(rf(q, "1/(z-1)"), INF, 2)
    assert [series.coefficient(k) for k in range(0, 3)] == [0, 1, 1]
    series = laurent_at(rf(q, "z^2"), INF, 0)
    assert series.lowest_order == -2
    assert series.coefficient(-2) == 1
    assert series.principal_part() == {-2: 1}


def test_laurent_beyond_truncation(q, rf):
    with pytest.raises(ValueError):
        laurent_at(rf(q, "1/z"), _point(q, 0), 0).coefficient(3)


@pytest.mark.parametrize("text, point, expected", [
    ("3/z", 0, 3),
    ("3/z", None, -3),
    ("1/(z-1) + 2/(z+1)", None, -3),
    ("z/(z-1)^2", 1, 1),
    ("z^3", None, 0),
])
def test_residue_form(q, rf, text, point, expected):
    p = INF if point is None else _point(q, point)
    assert residue_form(rf(q, text), p) == expected


def test_residue_form_with_irrational_coefficient(q4, rf):
    f = rf(q4, "zeta/(z - zeta)")
    assert residue_form(f, P1Point.finite(q4.zeta())) == q4.zeta()
    assert residue_form(f, INF) == -q4.zeta()


@settings(max_examples=100, deadline=None)
@given(split_ratfuns())
def test_residues_match_sympy(case):
    f, poles = case
    ctx = f.context
    expr = _to_sympy(f)
    total = ctx.zero()
    for a in poles:
        value = residue_form(f, _point(ctx, a))
        expected = sympy.residue(expr, Z, a)
        assert value == Fraction(int(expected.p), int(expected.q))
        total = total + value
    # residue theorem on the sphere
    assert residue_form(f, INF) == -total


def test_partial_fractions_simple(q, rf):
    result = partial_fractions(rf(q, "2*z/(z^2-1)"), [_point(q, 1), _point(q, -1)])
    assert result.parts == {_point(q, 1): rf(q, "1/(z-1)"), _point(q, -1): rf(q, "1/(z+1)")}
    assert not result.polynomial


def test_partial_fractions_of_polynomial(q, rf):
    f = rf(q, "z^2 + 1")
    result = partial_fractions(f)
    assert result.parts == {}
    assert result.polynomial == f


def test_partial_fractions_unsplit(q4, rf):
    with pytest.raises(UnsplitDenominatorError):
        partial_fractions(rf(q4, "1/(z^2-2)"))


def test_partial_fractions_finds_roots_of_unity(q4, rf):
    result = partial_fractions(rf(q4, "1/(z^2+1)"))
    assert set(result.parts) == {P1Point.finite(q4.zeta()), P1Point.finite(-q4.zeta())}
    assert result.reassemble() == rf(q4, "1/(z^2+1)")


@settings(max_examples=100, deadline=None)
@given(split_ratfuns())
def test_partial_fractions_reassemble_and_match_sympy(case):
    f, poles = case
    ctx = f.context
    result = partial_fractions(f, [_point(ctx, a) for a in poles])
    assert result.reassemble() == f
    expected = sympy.apart(_to_sympy(f), Z)
    polynomial_part = sum(t for t in sympy.Add.make_args(expected) if t.is_polynomial(Z))
    assert sympy.expand(_to_sympy(result.polynomial) - polynomial_part) == 0


def test_find_roots(q4):
    roots = find_roots(Poly(q4, [1, 0, 1]))
    assert set(roots) == {q4.zeta(), -q4.zeta()}
    assert find_roots(Poly(q4, [-2, 0, 1])) == []
    assert set(find_roots(Poly(q4, [-6, 1, 1]))) == {q4.coerce(2), q4.coerce(-3)}


def test_find_roots_beyond_roots_of_unity(q12):
    sqrt3 = q12.zeta() + q12.zeta() ** -1
    roots = find_roots(Poly(q12, [-3, 0, 1]))
    assert set(roots) == {sqrt3, -sqrt3}
    assert find_roots(Poly(q12, [-2, 0, 1])) == []


def test_partial_fractions_over_a_quadratic_subfield(q12, rf):
    sqrt3 = q12.zeta() + q12.zeta() ** -1
    result = partial_fractions(rf(q12, "1/(z^2-3)"))
    assert set(result.parts) == {_point(q12, sqrt3), _point(q12, -sqrt3)}
    assert residue_form(rf(q12, "1/(z^2-3)"), _point(q12, sqrt3)) == 1 / (2 * sqrt3)
    assert result.reassemble() == rf(q12, "1/(z^2-3)")


def test_gcd_is_monic(q):
    a = Poly(q, [-1, 0, 1]) * 3
    b = Poly(q, [-2, 2])
    assert poly_gcd(a, b) == Poly(q, [-1, 1])


def test_norm_poly():
    q = field_make(2)
    y_minus_two = Poly(q, [-2, 1])
    norm, cofactor = norm_poly(y_minus_two, 2)
    assert norm == Poly(q, [4, 0, -1])
    assert cofactor == Poly(q, [-2, -1])
    parts = norm.decimate(2)
    assert parts[1] == Poly(q)
    assert parts[0] == Poly(q, [4, -1])


def test_substitutions(q, rf):
    f = rf(q, "1/(z-1)")
    assert f.compose_power(2) == rf(q, "1/(z^2-1)")
    assert f.scale_arg(q.coerce(2)) == rf(q, "1/(2*z-1)")
    assert f.invert_arg() == rf(q, "z/(1-z)")
    assert f.derivative() == rf(q, "-1/(z-1)^2")
    assert f(q.coerce(3)) == Fraction(1, 2)


def test_valuation_at(q, rf):
    f = rf(q, "z^2/(z-1)^3")
    assert f.valuation_at(_point(q, 0)) == 2
    assert f.valuation_at(_point(q, 1)) == -3
    assert f.valuation_at(INF) == 1
    assert f.valuation_at(_point(q, 5)) == 0
