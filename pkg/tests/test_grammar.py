from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logconn.cli.grammar import (format_matrix, format_point, format_ratfun, parse_matrix, parse_point,
                                 parse_ratfun, parse_scalar)
from logconn.core.errors import GrammarError
from logconn.core.field import field_make
from logconn.core.ratcalc import P1Point, Poly, RatFun
from tests.helpers import check_print_parse_invariant
from tests.strategies import SMALL_ORDERS, field_elements, ratfuns, scalar_matrices


def test_zeta_reduces_in_the_gaussian_field(q4):
    assert parse_scalar("1/2 + zeta^2", q4) == Fraction(-1, 2)


def test_zero(q4):
    assert not parse_scalar("0", q4)
    assert not parse_ratfun("0", q4)


def test_quotient_is_reduced(q):
    assert parse_ratfun("(z^2-1)/(z-1)", q) == RatFun(Poly(q, [1, 1]))


def test_whitespace_is_insignificant(q4):
    assert parse_ratfun(" 1 /  ( z -zeta ) ", q4) == parse_ratfun("1/(z-zeta)", q4)


def test_negative_exponents(q4):
    assert parse_scalar("zeta^-1", q4) == -q4.zeta()
    assert parse_ratfun("z^-2", q4) == RatFun(Poly(q4, [1]), Poly(q4, [0, 0, 1]))


def test_operator_precedence(q):
    assert parse_scalar("1 - 2 * 3", q) == -5
    assert parse_scalar("-2^2", q) == -4
    assert parse_scalar("12/2/3", q) == 2
    assert parse_scalar("(1 - 2) * 3", q) == -3


def test_zeta_depends_on_the_field():
    assert parse_scalar("zeta^3", field_make(3)) == 1
    assert parse_scalar("zeta^3", field_make(6)) == -1


@pytest.mark.parametrize("text", ["1 + * 2", "z^", "(1 + z", "1 + x", "2 zeta"])
def test_syntax_error_has_a_position(q, text):
    with pytest.raises(GrammarError) as info:
        parse_ratfun(text, q)
    assert info.value.position is not None
    assert 0 < info.value.position <= len(text)
    assert "position" in str(info.value)


def test_empty_expression(q):
    with pytest.raises(GrammarError) as info:
        parse_ratfun("   ", q)
    assert info.value.position == 0


@pytest.mark.parametrize("text", ["1/0", "1/(z - z)", "(zeta^2 + 1)^-1"])
def test_zero_denominator(q4, text):
    with pytest.raises(GrammarError):
        parse_ratfun(text, q4)


def test_scalar_must_not_depend_on_z(q):
    with pytest.raises(GrammarError):
        parse_scalar("z + 1", q)


def test_points(q6):
    assert parse_point("inf", q6) == P1Point.infinity()
    assert parse_point(" inf ", q6).is_infinity
    assert parse_point("zeta", q6) == P1Point.finite(q6.zeta())
    assert format_point(P1Point.infinity()) == "inf"


def test_matrix_shape_errors(q):
    with pytest.raises(GrammarError):
        parse_matrix("1", q)
    with pytest.raises(GrammarError):
        parse_matrix([], q)
    with pytest.raises(GrammarError):
        parse_matrix([["1", "2"], ["3"]], q)


def test_formatting(q4):
    assert format_ratfun(parse_ratfun("1/(z-1)", q4)) == "(1)/(z - 1)"
    assert format_ratfun(Poly(q4, [0, 2, 1])) == "z^2 + 2*z"
    assert str(parse_ratfun("zeta*z + 1/2", q4)) == "(zeta)*z + 1/2"


@pytest.mark.parametrize("order", SMALL_ORDERS)
def test_scalars_print_and_parse_back(order):
    check_print_parse_invariant(field_elements(field_make(order)), examples=400)


@pytest.mark.parametrize("order", (1, 3, 4, 6, 12))
def test_rational_functions_print_and_parse_back(order):
    check_print_parse_invariant(ratfuns(field_make(order)), examples=400)


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_matrices_print_and_parse_back(data):
    ctx = field_make(data.draw(st.sampled_from(SMALL_ORDERS)))
    rows = data.draw(st.integers(1, 3))
    cols = data.draw(st.integers(1, 3))
    m = data.draw(scalar_matrices(ctx, rows, cols))
    text = format_matrix(m)
    again = parse_matrix(text, ctx, scalar=True)
    assert all(again[i][j] == m[i, j] for i in range(rows) for j in range(cols))
