from fractions import Fraction

import pytest

from logconn.cli.grammar import parse_point
from logconn.core import linalg
from logconn.core.connection import SplitBundle, conn_validate, diagonal_connection, fuchs_check, residue_at
from logconn.core.errors import CriterionViolatedError, LogConnError
from logconn.core.existence import (ResiduePrescription, agreement_sweep, cech_obstruction, construct_connection,
                                    criterion_check, normalize_prescription, oracle_agreement)
from logconn.core.ratcalc import P1Point


def _prescription(ctx, pairs):
    return ResiduePrescription(tuple(parse_point(x, ctx) for x, _ in pairs),
                               tuple(ctx.coerce(lam) for _, lam in pairs))


def test_prescription_validation(q):
    with pytest.raises(LogConnError):
        ResiduePrescription((parse_point("0", q),), ())
    with pytest.raises(LogConnError):
        _prescription(q, [("0", 1), ("0", 2)])


@pytest.mark.parametrize("twists, pairs, exists, witness, condition", [
    ((1, 1), [("0", Fraction(-1, 2)), ("1", Fraction(-1, 2))], True, None, None),
    ((0,), [("0", 1)], False, (0,), 1),
    ((1, -1), [("0", 0)], False, (0,), 2),
    ((2, 0), [("0", Fraction(1, 2)), ("1", Fraction(-3, 2))], False, (0,), 2),
    ((0, 0, 0), [], True, None, None),
])
def test_criterion(q, twists, pairs, exists, witness, condition):
    result = criterion_check(SplitBundle(twists), _prescription(q, pairs), q)
    assert bool(result) is exists
    assert result.witness == witness
    assert result.condition == condition


def test_criterion_rank_bound(q):
    with pytest.raises(LogConnError):
        criterion_check(SplitBundle((0,) * 11), _prescription(q, []), q)


def test_construct_on_balanced_bundle(q):
    p = _prescription(q, [("0", Fraction(-1, 2)), ("1", Fraction(-1, 2))])
    conn = construct_connection(SplitBundle((1, 1)), p, q)
    assert conn_validate(conn)
    assert not fuchs_check(conn)
    for point, lam in zip(p.points, p.lambdas):
        assert linalg.matrices_equal(residue_at(conn, point).matrix, linalg.scalar_matrix(2, lam, q))


def test_construct_with_infinity_in_the_divisor(q):
    p = _prescription(q, [("0", 1), ("inf", -2)])
    conn = construct_connection(SplitBundle((1,)), p, q)
    assert residue_at(conn, P1Point.infinity()).matrix[0, 0] == -2
    assert residue_at(conn, parse_point("0", q)).matrix[0, 0] == 1


def test_construct_refuses_when_a_summand_fails(q):
    with pytest.raises(CriterionViolatedError):
        construct_connection(SplitBundle((1, -1)), _prescription(q, []), q)


def test_normalize_prescription(q):
    p = _prescription(q, [("inf", 1), ("0", -1)])
    moved, a = normalize_prescription(p, q)
    assert a == 1
    assert moved.points == (parse_point("0", q), parse_point("-1", q))
    assert moved.lambdas == p.lambdas
    same, none = normalize_prescription(_prescription(q, [("0", 0)]), q)
    assert none is None
    assert same.points == (parse_point("0", q),)


def test_obstruction_values(q):
    bundle = SplitBundle((2, 0))
    theta = cech_obstruction(bundle, _prescription(q, [("0", Fraction(1, 2)), ("1", Fraction(-3, 2))]), q)
    assert theta.values[(0, 0, 0)] == 1
    assert theta.values[(1, 1, 0)] == -1
    assert all(not theta.values[(0, 1, k)] for k in range(3))
    assert (1, 0, 0) not in theta.values
    assert theta.identity_value() == 0
    assert not theta.is_zero()
    assert theta(linalg.identity(2, q)) == 0


def test_obstruction_vanishes_when_every_summand_balances(q):
    theta = cech_obstruction(SplitBundle((1, 1)), _prescription(q, [("0", -1)]), q)
    assert theta.is_zero()


def test_obstruction_identity_with_infinity(q):
    bundle = SplitBundle((3, -1))
    p = _prescription(q, [("inf", Fraction(1, 3)), ("2", Fraction(-4, 3))])
    theta = cech_obstruction(bundle, p, q)
    assert theta.identity_value() == bundle.degree + bundle.rank * p.total(q)
    assert theta.values[(0, 0, 0)] == 3 - 1
    assert theta.values[(1, 1, 0)] == -1 - 1


@pytest.mark.parametrize("twists, pairs", [
    ((1, 1), [("0", -1)]),
    ((2, 0), [("0", Fraction(1, 2)), ("1", Fraction(-3, 2))]),
    ((0, 0), [("0", 1), ("1", -1)]),
    ((1,), [("0", 1), ("inf", -2)]),
])
def test_oracle_agreement_examples(q, twists, pairs):
    report = oracle_agreement(SplitBundle(twists), _prescription(q, pairs), q)
    assert report.ok, report.message


def test_agreement_sweep(q):
    summary = agreement_sweep(q)
    assert summary.instances > 0
    assert summary, [(b.twists, r.message) for b, _, r in summary.discrepancies]


def test_twice_minus_two_with_unit_residues(q, rf):
    bundle = SplitBundle((-2, -2))
    p = _prescription(q, [("0", 1), ("1", 1)])
    assert criterion_check(bundle, p, q)
    conn = construct_connection(bundle, p, q)
    assert conn.matrix[0, 0] == rf(q, "1/z + 1/(z-1)")
    assert not conn.matrix[0, 1] and not conn.matrix[1, 0]
    for point in p.points:
        assert linalg.matrices_equal(residue_at(conn, point).matrix, linalg.identity(2, q))
    assert linalg.is_zero_matrix(residue_at(conn, P1Point.infinity()).matrix)
    assert conn_validate(conn)
    assert not fuchs_check(conn)
    assert cech_obstruction(bundle, p, q).is_zero()
    assert oracle_agreement(bundle, p, q).ok


@pytest.mark.parametrize("twists, pairs", [
    ((2, 0), [("0", Fraction(1, 2)), ("1", Fraction(-3, 2))]),
    ((1, -1), []),
    ((2, 0), [("0", -1), ("inf", 0)]),
    ((-1, -3), [("0", 1), ("1", 1)]),
])
def test_construction_fails_exactly_when_the_criterion_does(q, twists, pairs):
    report = oracle_agreement(SplitBundle(twists), _prescription(q, pairs), q)
    assert not report.criterion
    assert not report.constructed
    assert not report.obstruction_zero
    assert report.ok, report.message


def test_central_form_on_an_unbalanced_bundle_has_a_stray_pole(q, rf):
    bundle = SplitBundle((2, 0))
    form = rf(q, "1/2/z - 3/2/(z-1)")
    conn = diagonal_connection(bundle, [form, form], (parse_point("0", q), parse_point("1", q)))
    report = conn_validate(conn)
    assert not report
    assert report.point == P1Point.infinity()


def test_agreement_sweep_records_crashes(q, monkeypatch):
    def broken(bundle, p, ctx=None):
        raise RuntimeError("obstruction blew up")

    monkeypatch.setattr("logconn.core.existence.oracle_agreement", broken)
    summary = agreement_sweep(q, max_rank=1, twist_range=(0, 0), points=(0,), lambda_values=(0,))
    assert summary.instances == 2
    assert not summary
    assert all(report.message == "agreement check failed: obstruction blew up" for _, _, report in summary.discrepancies)
