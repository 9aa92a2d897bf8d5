"""Connections with prescribed central residues on split bundles over the projective line."""
import itertools
import logging
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..config import get_settings
from . import linalg
from .connection import (SplitBundle, as_ratfun_matrix, conn_validate, diagonal_connection, fuchs_check,
                         ohtsuki_checked, residue_at, restrict, z_chart_from_w)
from .errors import CriterionViolatedError, LogConnError
from .field import field_make
from .ratcalc import P1Point, Poly, RatFun, residue_form

MAX_RANK = 10


@dataclass(frozen=True)
class ResiduePrescription:
    points: tuple
    lambdas: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "lambdas", tuple(self.lambdas))
        if len(self.points) != len(self.lambdas):
            raise LogConnError(f"{len(self.points)} points but {len(self.lambdas)} residues")
        if len(set(self.points)) != len(self.points):
            raise LogConnError("prescribed points must be distinct")

    def total(self, ctx):
        result = ctx.zero()
        for lam in self.lambdas:
            result = result + lam
        return result


@dataclass(frozen=True)
class CriterionResult:
    exists: bool
    witness: Optional[tuple] = None
    condition: Optional[int] = None

    def __bool__(self):
        return self.exists


def _context(p, ctx=None):
    if p.lambdas:
        return p.lambdas[0].context
    return ctx or field_make(get_settings().field_order)


def criterion_check(bundle, p, ctx=None):
    """Degree condition on E and on every direct summand; a failing subset is the witness"""
    r = bundle.rank
    if r > MAX_RANK:
        raise LogConnError(f"rank {r} exceeds the subset enumeration bound {MAX_RANK}")
    total = p.total(_context(p, ctx))
    if bundle.degree + r * total:
        return CriterionResult(False, tuple(range(r)), 1)
    for size in range(1, r):
        for subset in itertools.combinations(range(r), size):
            if sum(bundle.twists[i] for i in subset) + size * total:
                return CriterionResult(False, subset, 2)
    return CriterionResult(True)


def normalize_prescription(p, ctx=None):
    """Move infinity to a finite point by x -> 1/(x - a), a the first integer not prescribed.

    Returns the new prescription and a (None when nothing moved).
    """
    if P1Point.infinity() not in p.points:
        return p, None
    ctx = _context(p, ctx)
    taken = {q.value for q in p.points if not q.is_infinity}
    a = next(k for k in itertools.count() if ctx.coerce(k) not in taken)
    moved = []
    for q in p.points:
        if q.is_infinity:
            moved.append(P1Point.finite(ctx.zero()))
        else:
            moved.append(P1Point.finite(1 / (q.value - a)))
    return ResiduePrescription(tuple(moved), p.lambdas), a


def _central_form(p, ctx):
    form = RatFun(Poly(ctx))
    for q, lam in zip(p.points, p.lambdas):
        if not q.is_infinity and lam:
            form = form + RatFun.simple_pole(ctx, q.value, lam)
    return form


@ohtsuki_checked
def construct_connection(bundle, p, ctx=None):
    """diag(sum lambda_i / (z - x_i)) on E; infinity in the divisor gets its residue from the twist term"""
    ctx = _context(p, ctx)
    result = criterion_check(bundle, p, ctx)
    if not result:
        raise CriterionViolatedError(
            f"condition ({result.condition}) fails on summand {list(result.witness)} of {bundle.twists}")
    # Same scalar form on every summand
    form = _central_form(p, ctx)
    conn = diagonal_connection(bundle, [form] * bundle.rank, p.points)
    report = conn_validate(conn)
    if not report:
        logging.error(f"central connection failed validation: {report.message}")
        raise LogConnError(report.message)
    for q, lam in zip(p.points, p.lambdas):
        res = residue_at(conn, q).matrix
        if not linalg.matrices_equal(res, linalg.scalar_matrix(bundle.rank, ctx.coerce(lam), ctx)):
            raise LogConnError(f"residue at {q} is not {lam} Id")
    return conn


@dataclass(frozen=True, eq=False)
class ObstructionFunctional:
    """Values on the monomial basis z^k E_ij of H^0(End E), keyed (i, j, k)"""
    bundle: SplitBundle
    values: dict = field(default_factory=dict)

    def is_zero(self):
        return not any(self.values.values())

    def __call__(self, s):
        ctx = next(iter(self.values.values())).context
        total = ctx.zero()
        for (i, j, k), value in self.values.items():
            entry = s[i, j]
            if isinstance(entry, RatFun):
                coeff = entry.num.coefficient(k)
            elif isinstance(entry, Poly):
                coeff = entry.coefficient(k)
            else:
                coeff = ctx.coerce(entry) if k == 0 else ctx.zero()
            total = total + coeff * value
        return total

    def identity_value(self):
        ctx = next(iter(self.values.values())).context
        total = ctx.zero()
        for i in range(self.bundle.rank):
            total = total + self.values[(i, i, 0)]
        return total


def cech_obstruction(bundle, p, ctx=None):
    """Serre pairing of the splitting cocycle with the global endomorphisms of E"""
    ctx = _context(p, ctx)
    p, _ = normalize_prescription(p, ctx)
    r = bundle.rank
    form = _central_form(p, ctx)
    local = as_ratfun_matrix(linalg.zeros(r, r, ctx), ctx)
    for i in range(r):
        local[i, i] = form
    # Zero operator on the w-chart, carried over to the z-chart
    transported = z_chart_from_w(bundle, as_ratfun_matrix(linalg.zeros(r, r, ctx), ctx))
    cocycle = local - transported
    values = {}
    infinity = P1Point.infinity()
    d = bundle.twists
    for i in range(r):
        for j in range(r):
            for k in range(d[i] - d[j] + 1):
                # tr(z^k E_ij cocycle) = z^k cocycle_ji
                values[(i, j, k)] = -residue_form(cocycle[j, i].times_power(k), infinity)
    return ObstructionFunctional(bundle, values)


@dataclass(frozen=True)
class AgreementReport:
    ok: bool
    criterion: bool
    obstruction_zero: bool
    constructed: bool
    identity_ok: bool
    message: str = ""

    def __bool__(self):
        return self.ok


def _constructs(bundle, p, ctx):
    """Build the central diagonal connection without consulting the criterion and judge it directly"""
    # Assemble diag(form) on every summand
    conn = diagonal_connection(bundle, [_central_form(p, ctx)] * bundle.rank, p.points)
    report = conn_validate(conn)
    if not report:
        logging.debug(f"ungated construction on {bundle.twists} is not logarithmic: {report.message}")
        return False
    if any(fuchs_check(restrict(conn, [i])) for i in range(bundle.rank)):
        return False
    # Residues must be the prescribed scalars, infinity included
    for q, lam in zip(p.points, p.lambdas):
        res = residue_at(conn, q).matrix
        if not linalg.matrices_equal(res, linalg.scalar_matrix(bundle.rank, ctx.coerce(lam), ctx)):
            logging.debug(f"ungated construction on {bundle.twists} has residue {res[0, 0]} at {q}, not {lam}")
            return False
    return True


def oracle_agreement(bundle, p, ctx=None):
    """criterion_check, the vanishing of the obstruction and construct_connection must agree"""
    ctx = _context(p, ctx)
    criterion = criterion_check(bundle, p, ctx).exists
    theta = cech_obstruction(bundle, p, ctx)
    obstruction_zero = theta.is_zero()
    constructed = _constructs(bundle, p, ctx)
    # The functional on Id is deg E + r * sum lambda
    expected = bundle.degree + bundle.rank * p.total(ctx)
    identity_ok = theta.identity_value() == expected
    ok = criterion == obstruction_zero == constructed and identity_ok
    message = "" if ok else (f"criterion={criterion} obstruction_zero={obstruction_zero} "
                             f"constructed={constructed} identity_ok={identity_ok}")
    if not ok:
        logging.error(f"oracle disagreement on {bundle.twists} at {[str(q) for q in p.points]}: {message}")
    return AgreementReport(ok, criterion, obstruction_zero, constructed, identity_ok, message)


@dataclass(frozen=True)
class SweepSummary:
    instances: int
    discrepancies: tuple

    def __bool__(self):
        return not self.discrepancies


DEFAULT_LAMBDAS = (0, 1, -1, Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3))


def sweep_instances(ctx, max_rank=3, twist_range=(-3, 3), points=(0, 1, -1), lambda_values=DEFAULT_LAMBDAS):
    """Every (bundle, prescription) of the desk sweep that satisfies the degree condition on E"""
    low, high = twist_range
    candidates = [P1Point.finite(ctx.coerce(x)) for x in points]
    for r in range(1, max_rank + 1):
        for twists in itertools.combinations_with_replacement(range(low, high + 1), r):
            bundle = SplitBundle(twists)
            for size in range(len(candidates) + 1):
                for chosen in itertools.combinations(candidates, size):
                    for lambdas in itertools.product(lambda_values, repeat=size):
                        if bundle.degree + r * sum(Fraction(x) for x in lambdas):
                            continue
                        yield bundle, ResiduePrescription(chosen, tuple(ctx.coerce(x) for x in lambdas))


def agreement_sweep(ctx, **kwargs):
    instances = 0
    bad = []
    for bundle, p in sweep_instances(ctx, **kwargs):
        instances += 1
        try:
            report = oracle_agreement(bundle, p, ctx)
        except Exception as e:
            logging.error(f"Error checking {bundle.twists} at {[str(q) for q in p.points]}: {e}")
            logging.error(traceback.format_exc())
            report = AgreementReport(False, False, False, False, False, f"agreement check failed: {e}")
        if not report:
            bad.append((bundle, p, report))
    logging.info(f"agreement sweep: {instances} instances, {len(bad)} discrepancies")
    return SweepSummary(instances, tuple(bad))
