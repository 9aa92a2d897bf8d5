"""Logarithmic connections on split bundles over the projective line.

A connection is stored by its matrix of 1-forms A(z) dz in the z-chart
frame.  The frame over the w-chart (w = 1/z) is related by s_z = z^d s_w,
which is how every statement about infinity is computed.
"""
import functools
import itertools
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..config import get_settings
from . import linalg
from .errors import (FieldDivisionError, LogConnError, NotAnIsomorphismError,
                     OhtsukiDefectError, UnsplitDenominatorError)
from .ratcalc import P1Point, Poly, RatFun, find_roots, laurent_at, poly_gcd, residue_form


@dataclass(frozen=True)
class SplitBundle:
    """O(d_1) + ... + O(d_r), identified up to order of the twists"""
    twists: tuple

    def __post_init__(self):
        object.__setattr__(self, "twists", tuple(int(d) for d in self.twists))

    @property
    def rank(self):
        return len(self.twists)

    @property
    def degree(self):
        return sum(self.twists)

    def is_isomorphic(self, other):
        return sorted(self.twists) == sorted(other.twists)

    def dual(self):
        return SplitBundle(tuple(-d for d in self.twists))

    def classes(self):
        """Index groups sharing one twist, in order of first appearance"""
        groups = {}
        for i, d in enumerate(self.twists):
            groups.setdefault(d, []).append(i)
        return list(groups.values())


@dataclass(frozen=True, eq=False)
class LogConnection:
    bundle: SplitBundle
    matrix: np.ndarray
    singular_set: tuple

    def __post_init__(self):
        points = []
        for p in self.singular_set:
            if p not in points:
                points.append(p)
        object.__setattr__(self, "singular_set", tuple(points))

    @property
    def context(self):
        return self.matrix[0, 0].context

    @property
    def rank(self):
        return self.bundle.rank

    def entry(self, i, j):
        return self.matrix[i, j]

    def w_chart_matrix(self):
        return w_chart_matrix(self)

    def residues(self):
        return {p: residue_at(self, p) for p in self.singular_set}

    def dual(self):
        return dual(self)

    def restrict(self, indices):
        return restrict(self, indices)


@dataclass(frozen=True)
class ResidueData:
    point: P1Point
    matrix: np.ndarray


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = ""
    entry: Optional[tuple] = None
    point: Optional[P1Point] = None

    def __bool__(self):
        return self.ok


def ratfun_matrix(rows, ctx):
    """Object matrix of RatFun from nested lists of RatFun, Poly or scalars"""
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, row in enumerate(rows):
        for j, entry in enumerate(row):
            out[i, j] = entry if isinstance(entry, RatFun) else (
                RatFun(entry) if isinstance(entry, Poly) else RatFun.constant(ctx, entry))
    return out


def diagonal_connection(bundle, forms, singular_set):
    ctx = forms[0].context
    matrix = ratfun_matrix([[forms[i] if i == j else 0 for j in range(bundle.rank)]
                            for i in range(bundle.rank)], ctx)
    return LogConnection(bundle, matrix, tuple(singular_set))


def w_chart_matrix(c):
    """Connection matrix in the frame over w = 1/z, as rational functions of w.

    (A_w)_ij = -w^(d_i - d_j - 2) A_ij(1/w) - delta_ij d_i / w
    """
    ctx = c.context
    r = c.rank
    d = c.bundle.twists
    out = np.empty((r, r), dtype=object)
    for i in range(r):
        for j in range(r):
            entry = -c.matrix[i, j].invert_arg().times_power(d[i] - d[j] - 2)
            if i == j and d[i]:
                entry = entry - RatFun(Poly.constant(ctx, d[i]), Poly.monomial(ctx, 1))
            out[i, j] = entry
    return out


def z_chart_from_w(bundle, matrix_w):
    """Inverse of w_chart_matrix: the z-frame matrix of a w-frame matrix"""
    ctx = matrix_w[0, 0].context
    r = bundle.rank
    d = bundle.twists
    out = np.empty((r, r), dtype=object)
    for i in range(r):
        for j in range(r):
            entry = -matrix_w[i, j].invert_arg().times_power(d[i] - d[j] - 2)
            if i == j and d[i]:
                entry = entry - RatFun(Poly.constant(ctx, d[i]), Poly.monomial(ctx, 1))
            out[i, j] = entry
    return out


def _strip(den, a):
    linear = Poly.linear_root(den.context, a)
    count = 0
    while den.degree > 0 and not den(a):
        den = den // linear
        count += 1
    return den, count


def conn_validate(c):
    """Check shapes, pole orders in both charts and the singular set"""
    r = c.rank
    if c.matrix.shape != (r, r):
        return ValidationReport(False, f"matrix shape {c.matrix.shape} does not match rank {r}")
    order = c.context.order
    finite = [p.value for p in c.singular_set if not p.is_infinity]
    # z-chart: at most simple poles, and only at declared points
    for (i, j), entry in np.ndenumerate(c.matrix):
        if not isinstance(entry, RatFun) or entry.context.order != order:
            return ValidationReport(False, "entry is not a rational function over the connection field", (i, j))
        den = entry.den
        for a in finite:
            den, mult = _strip(den, a)
            if mult > 1:
                return ValidationReport(False, f"pole of order {mult} at z = {a}", (i, j), P1Point.finite(a))
        if den.degree > 0:
            return ValidationReport(False, f"pole outside the singular set (factor {den})", (i, j))
    # w-chart: a simple pole at infinity only when it is declared
    at_infinity = P1Point.infinity() in c.singular_set
    bound = -1 if at_infinity else 0
    for (i, j), entry in np.ndenumerate(w_chart_matrix(c)):
        if entry and entry.valuation_at(P1Point.finite(c.context.zero())) < bound:
            kind = "pole of order two or more" if at_infinity else "pole"
            return ValidationReport(False, f"{kind} at infinity in the w-chart", (i, j), P1Point.infinity())
    return ValidationReport(True)


def residue_at(c, p):
    """Residue matrix at p, taken in the frame of the chart containing p"""
    ctx = c.context
    r = c.rank
    res = linalg.zeros(r, r, ctx)
    if p not in c.singular_set:
        return ResidueData(p, res)
    if p.is_infinity:
        origin = P1Point.finite(ctx.zero())
        for (i, j), entry in np.ndenumerate(w_chart_matrix(c)):
            res[i, j] = laurent_at(entry, origin, -1).coefficient(-1)
    else:
        for (i, j), entry in np.ndenumerate(c.matrix):
            res[i, j] = residue_form(entry, p)
    return ResidueData(p, res)


def fuchs_check(c):
    """deg(E) + sum of residue traces over the singular set and infinity; zero for valid input"""
    total = c.context.coerce(c.bundle.degree)
    points = list(c.singular_set)
    if P1Point.infinity() not in points:
        points.append(P1Point.infinity())
    for p in points:
        total = total + linalg.trace(residue_at(c, p).matrix)
    return total


def _connections_in(result):
    if isinstance(result, LogConnection):
        yield result
    elif hasattr(result, "conn") and isinstance(result.conn, LogConnection):
        yield result.conn
    elif isinstance(result, (tuple, list)):
        for item in result:
            yield from _connections_in(item)


def ohtsuki_checked(func):
    """Recheck the residue theorem on every connection an operation returns"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        result = func(*args, **kwargs)
        if get_settings().check_fuchs:
            for conn in _connections_in(result):
                defect = fuchs_check(conn)
                if defect:
                    logging.error(f"{func.__name__} produced a connection with Fuchs defect {defect}")
                    raise OhtsukiDefectError(f"{func.__name__}: degree plus residue traces is {defect}, not 0")
        return result
    return wrapper


@ohtsuki_checked
def det_connection(c):
    """The induced connection on det E = O(deg E) with form tr A"""
    ctx = c.context
    return LogConnection(SplitBundle((c.bundle.degree,)),
                         ratfun_matrix([[linalg.trace(c.matrix)]], ctx), c.singular_set)


def derivative_matrix(g):
    out = np.empty(g.shape, dtype=object)
    for idx, entry in np.ndenumerate(g):
        out[idx] = entry.derivative()
    return out


def _finite_poles(entries):
    points = []
    for entry in entries:
        if entry.is_polynomial():
            continue
        roots = find_roots(entry.den)
        den = entry.den
        for a in roots:
            den, _ = _strip(den, a)
        if den.degree > 0:
            raise UnsplitDenominatorError(f"gauge entry {entry} has poles outside the field")
        for a in roots:
            if a not in points:
                points.append(a)
    return points


def _w_frame(g, source, target):
    """h_target^-1 g h_source as rational functions of w"""
    r, s = g.shape
    out = np.empty((r, s), dtype=object)
    for i in range(r):
        for j in range(s):
            out[i, j] = g[i, j].times_power(source.twists[j] - target.twists[i]).invert_arg()
    return out


def degeneracy_points(g, source, target):
    """Points where g fails to be an isomorphism O-linearly, in either chart"""
    ginv = linalg.inverse(g)
    points = [P1Point.finite(a) for a in _finite_poles(list(g.flat) + list(ginv.flat))]
    origin = P1Point.finite(g[0, 0].context.zero())
    w_entries = list(_w_frame(g, source, target).flat) + list(_w_frame(ginv, target, source).flat)
    if any(entry and entry.valuation_at(origin) < 0 for entry in w_entries):
        points.append(P1Point.infinity())
    return points


def as_ratfun_matrix(g, ctx):
    out = np.empty(g.shape, dtype=object)
    for idx, entry in np.ndenumerate(g):
        if isinstance(entry, RatFun):
            out[idx] = entry
        elif isinstance(entry, Poly):
            out[idx] = RatFun(entry)
        else:
            out[idx] = RatFun.constant(ctx, entry)
    return out


@ohtsuki_checked
def gauge_transform(c, g, target=None, modification=False):
    """New frame s' = g s: A' = g A g^-1 - g' g^-1.

    Without modification g must be an isomorphism of the split bundles in
    both charts; with it, the degeneracy points of g join the singular set.
    """
    ctx = c.context
    target = target or c.bundle
    g = as_ratfun_matrix(g, ctx)
    if g.shape != (c.rank, c.rank) or target.rank != c.rank:
        raise NotAnIsomorphismError(f"gauge of shape {g.shape} between ranks {c.rank} and {target.rank}")
    if not linalg.det(g):
        raise NotAnIsomorphismError("gauge matrix has zero determinant")
    try:
        ginv = linalg.inverse(g)
    except FieldDivisionError as e:
        raise NotAnIsomorphismError(f"gauge matrix is not invertible: {e}")
    matrix = g @ c.matrix @ ginv - derivative_matrix(g) @ ginv
    singular = list(c.singular_set)
    # Points where g is not an isomorphism of the split bundles
    bad = degeneracy_points(g, c.bundle, target)
    if bad:
        if not modification:
            raise NotAnIsomorphismError(
                f"gauge degenerates at {', '.join(str(p) for p in bad)}; pass modification=True for a Hecke move")
        logging.info(f"Elementary modification at {', '.join(str(p) for p in bad)}")
        singular += bad
    return LogConnection(target, matrix, tuple(singular))


@ohtsuki_checked
def direct_sum(c1, c2):
    ctx = c1.context
    r1, r2 = c1.rank, c2.rank
    matrix = as_ratfun_matrix(linalg.zeros(r1 + r2, r1 + r2, ctx), ctx)
    matrix[:r1, :r1] = c1.matrix
    matrix[r1:, r1:] = c2.matrix
    return LogConnection(SplitBundle(c1.bundle.twists + c2.bundle.twists), matrix,
                         c1.singular_set + c2.singular_set)


@ohtsuki_checked
def tensor_line(c, line):
    """E tensor L for a rank one connection L"""
    if line.rank != 1:
        raise LogConnError(f"tensor_line expects a rank one connection, got rank {line.rank}")
    a = line.matrix[0, 0]
    matrix = c.matrix.copy()
    for i in range(c.rank):
        matrix[i, i] = matrix[i, i] + a
    twists = tuple(d + line.bundle.twists[0] for d in c.bundle.twists)
    return LogConnection(SplitBundle(twists), matrix, c.singular_set + line.singular_set)


@ohtsuki_checked
def dual(c):
    return LogConnection(c.bundle.dual(), -c.matrix.T.copy(), c.singular_set)


def restrict(c, indices):
    """Compose with inclusion and projection of the summands listed in indices"""
    indices = list(indices)
    twists = tuple(c.bundle.twists[i] for i in indices)
    return LogConnection(SplitBundle(twists), c.matrix[np.ix_(indices, indices)].copy(), c.singular_set)


def residue_charpoly(res):
    return linalg.charpoly(res.matrix, res.matrix[0, 0].context)


def matrices_equal(a, b):
    return linalg.matrices_equal(a, b)


def find_isomorphism(c1, c2, rng=None):
    """An invertible g with c2 = gauge_transform(c1, g), or None.

    Unknowns are the coefficients of polynomial entries g_ij of degree at
    most d2_i - d1_j; the flatness equation g' = g A1 - A2 g is cleared of
    denominators and solved coefficientwise.
    """
    ctx = c1.context
    r = c1.rank
    if c2.rank != r or not c1.bundle.is_isomorphic(c2.bundle):
        return None
    d1, d2 = c1.bundle.twists, c2.bundle.twists
    unknowns = [(i, j, k) for i in range(r) for j in range(r) for k in range(d2[i] - d1[j] + 1)]
    if not unknowns:
        return None
    common = Poly.constant(ctx, 1)
    for entry in itertools.chain(c1.matrix.flat, c2.matrix.flat):
        common = common * (entry.den // poly_gcd(common, entry.den))
    columns = []
    for i, j, k in unknowns:
        g = as_ratfun_matrix(linalg.zeros(r, r, ctx), ctx)
        g[i, j] = RatFun(Poly.monomial(ctx, k))
        residual = derivative_matrix(g) - g @ c1.matrix + c2.matrix @ g
        coeffs = []
        for entry in residual.flat:
            cleared = entry * RatFun(common)
            coeffs.append(cleared.num)
        columns.append(coeffs)
    width = max((p.degree + 1 for col in columns for p in col), default=1)
    rows = []
    for e in range(r * r):
        for t in range(width):
            rows.append([col[e].coefficient(t) for col in columns])
    # Identical scalar connections give no equations, so every unknown is free
    system = linalg.matrix(rows, ctx) if rows else linalg.zeros(1, len(unknowns), ctx)
    basis = linalg.kernel(system, ctx)
    if not basis:
        return None
    candidates = [_assemble(vec, unknowns, r, ctx) for vec in basis]
    rng = rng if rng is not None else np.random.default_rng(0)
    trials = list(candidates)
    for _ in range(8):
        weights = rng.integers(-3, 4, size=len(candidates))
        total = candidates[0] * 0
        for w, cand in zip(weights, candidates):
            total = total + cand * int(w)
        trials.append(total)
    for g in trials:
        det = linalg.det(g)
        if det and det.is_constant():
            return g
    return None


def _assemble(vec, unknowns, r, ctx):
    g = as_ratfun_matrix(linalg.zeros(r, r, ctx), ctx)
    for value, (i, j, k) in zip(vec, unknowns):
        if value:
            g[i, j] = g[i, j] + RatFun(Poly.monomial(ctx, k, value))
    return g
