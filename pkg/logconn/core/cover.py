"""The cyclic cover y -> z = y^n of the projective line, ramified over 0 and infinity.

The generator of Z/n acts on sections upstairs by (T s)(y) = R s(zeta y),
so the invariant sections are y^k v with R v = zeta^-k v and carry the
parabolic weight k/n at z = 0.
"""
import logging
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import linalg
from .connection import (LogConnection, SplitBundle, ValidationReport, as_ratfun_matrix, conn_validate,
                         find_isomorphism, gauge_transform, ohtsuki_checked, residue_at, residue_charpoly)
from .errors import (ActionNotSemisimpleError, DenominatorMismatchError, EquivarianceError, FieldDivisionError,
                     LogConnError, RootOfUnityError, UnadaptedFrameError, UnsplitDenominatorError,
                     WeightsNotSplitError)
from .field import nth_root_scalar, root_of_unity
from .ratcalc import P1Point, Poly, RatFun, norm_poly


@dataclass(frozen=True)
class CoverDesc:
    """The degree n cyclic cover z = y^n over Q(zeta_N); n must divide N"""
    n: int
    context: object

    def __post_init__(self):
        if self.n < 2:
            raise LogConnError(f"cover degree must be at least 2, got {self.n}")
        if self.context.order % self.n:
            raise RootOfUnityError(f"cover degree {self.n} does not divide the field order {self.context.order}")

    @property
    def zeta(self):
        return root_of_unity(self.context, self.n, 1)

    def origin(self):
        return P1Point.finite(self.context.zero())


@dataclass(frozen=True, eq=False)
class EquivariantConnection:
    cover: CoverDesc
    conn: LogConnection
    action: np.ndarray

    @property
    def singular_set_y(self):
        return self.conn.singular_set

    @property
    def rank(self):
        return self.conn.rank


@dataclass(frozen=True)
class ParabolicFlag:
    """Nested subspace dimensions with weights; dims[i] belongs to weights[i]"""
    point: P1Point
    dimensions: tuple
    weights: tuple

    def __post_init__(self):
        weights = tuple(Fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "dimensions", tuple(int(d) for d in self.dimensions))
        if len(weights) != len(self.dimensions) or not weights:
            raise LogConnError("a flag needs one weight per subspace")
        if any(w < 0 or w >= 1 for w in weights):
            raise LogConnError(f"weights must lie in [0, 1), got {[str(w) for w in weights]}")
        if any(a >= b for a, b in zip(weights, weights[1:])):
            raise LogConnError("weights must be strictly increasing")
        if any(a <= b for a, b in zip(self.dimensions, self.dimensions[1:])) or self.dimensions[-1] < 1:
            raise LogConnError("flag dimensions must be strictly decreasing and positive")

    @property
    def graded_dimensions(self):
        dims = self.dimensions + (0,)
        return tuple(dims[i] - dims[i + 1] for i in range(len(self.dimensions)))

    def spectrum(self):
        """Weights repeated by graded dimension, ascending"""
        out = []
        for w, g in zip(self.weights, self.graded_dimensions):
            out.extend([w] * g)
        return out


def flag_from_spectrum(point, spectrum):
    """Flag whose weights are the distinct values of spectrum with their multiplicities"""
    values = sorted(set(Fraction(w) for w in spectrum))
    counts = [sum(1 for w in spectrum if Fraction(w) == v) for v in values]
    dims = [sum(counts[i:]) for i in range(len(counts))]
    return ParabolicFlag(point, tuple(dims), tuple(values))


@dataclass(frozen=True, eq=False)
class ParabolicConnection:
    conn: LogConnection
    flags: tuple = field(default_factory=tuple)

    @property
    def parabolic_points(self):
        return tuple(f.point for f in self.flags)

    def flag_at(self, point):
        for f in self.flags:
            if f.point == point:
                return f
        return None


def check_parabolic(p):
    """Each flagged residue must be diagonalizable with the weights as eigenvalues"""
    ctx = p.conn.context
    r = p.conn.rank
    for flag in p.flags:
        if not flag.point.is_infinity and flag.point.value:
            return ValidationReport(False, "parabolic points must be 0 or infinity", point=flag.point)
        if flag.dimensions[0] != r:
            return ValidationReport(False, f"flag at {flag.point} starts at dimension {flag.dimensions[0]}, not {r}",
                                    point=flag.point)
        res = residue_at(p.conn, flag.point).matrix
        for w, g in zip(flag.weights, flag.graded_dimensions):
            space = linalg.eigenspace(res, ctx.coerce(w), ctx)
            found = 0 if space is None else space.shape[1]
            if found != g:
                return ValidationReport(
                    False, f"eigenvalue {w} at {flag.point} has eigenspace dimension {found}, flag says {g}",
                    point=flag.point)
    return ValidationReport(True)


def preimages(x, n):
    """All y with y^n = x, which must lie in the field"""
    root = nth_root_scalar(x, n)
    if root is None:
        raise UnsplitDenominatorError(f"the {n}-th roots of {x} do not lie in {x.context}")
    zeta = root_of_unity(x.context, n, 1)
    out = []
    current = root
    for _ in range(n):
        out.append(current)
        current = current * zeta
    return out


def _lift_points(points, n):
    out = []
    for p in points:
        if p.is_infinity or not p.value:
            out.append(p)
        else:
            out.extend(P1Point.finite(y) for y in preimages(p.value, n))
    return out


def _push_points(points, n):
    out = []
    for p in points:
        image = p if p.is_infinity else P1Point.finite(p.value ** n)
        if image not in out:
            out.append(image)
    return out


def check_equivariance(e):
    """First entry violating B(zeta y) zeta = R^-1 B(y) R, if any"""
    ctx = e.cover.context
    n = e.cover.n
    r = e.rank
    if e.action.shape != (r, r):
        return ValidationReport(False, f"action of shape {e.action.shape} for rank {r}")
    if not linalg.matrices_equal(linalg.matrix_power(e.action, n, ctx), linalg.identity(r, ctx)):
        return ValidationReport(False, f"action does not satisfy R^{n} = Id")
    for cls in e.conn.bundle.classes():
        outside = [i for i in range(r) if i not in cls]
        if any(e.action[i, j] for i in outside for j in cls):
            return ValidationReport(False, "action mixes summands of different twist")
    zeta = e.cover.zeta
    try:
        rinv = linalg.inverse(e.action)
    except FieldDivisionError:
        return ValidationReport(False, "action is not invertible")
    rotated = np.empty((r, r), dtype=object)
    for (i, j), entry in np.ndenumerate(e.conn.matrix):
        rotated[i, j] = entry.scale_arg(zeta) * zeta
    conjugated = rinv @ e.conn.matrix @ e.action
    for (i, j), entry in np.ndenumerate(rotated):
        if entry != conjugated[i, j]:
            return ValidationReport(False, "connection is not preserved by the action", (i, j))
    for p in e.conn.singular_set:
        if p.is_infinity or not p.value:
            return ValidationReport(False, "singular points upstairs must avoid 0 and infinity", point=p)
        if P1Point.finite(p.value * zeta) not in e.conn.singular_set:
            return ValidationReport(False, "singular set is not stable under the action", point=p)
    return ValidationReport(True)


def validate_equivariant(e):
    """Raise the matching error when e is not a valid equivariant connection"""
    ctx = e.cover.context
    if e.conn.context.order != ctx.order:
        raise LogConnError("connection and cover live over different fields")
    power = linalg.matrix_power(e.action, e.cover.n, ctx)
    if not linalg.matrices_equal(power, linalg.identity(e.rank, ctx)):
        raise ActionNotSemisimpleError(f"action does not satisfy R^{e.cover.n} = Id")
    report = conn_validate(e.conn)
    if not report:
        raise EquivarianceError(f"upstairs connection is invalid: {report.message}")
    report = check_equivariance(e)
    if not report:
        raise EquivarianceError(report.message)
    return e


@ohtsuki_checked
def pullback(c, cover):
    """A(z) dz -> A(y^n) n y^(n-1) dy on the pulled back bundle O(n d)"""
    n = cover.n
    ctx = cover.context
    factor = RatFun(Poly.monomial(ctx, n - 1, n))
    matrix = np.empty(c.matrix.shape, dtype=object)
    for idx, entry in np.ndenumerate(c.matrix):
        matrix[idx] = entry.compose_power(n) * factor
    bundle = SplitBundle(tuple(n * d for d in c.bundle.twists))
    return LogConnection(bundle, matrix, tuple(_lift_points(c.singular_set, n)))


def _split_by_residue_class(f, n, k, cache):
    """c_l with y^k f(y) = sum_l y^l c_l(y^n), as rational functions of z"""
    key = id(f)
    if key not in cache:
        norm, cofactor = norm_poly(f.den, n)
        cache[key] = (f.num * cofactor, norm.decimate(n)[0])
    numerator, denominator = cache[key]
    parts = numerator.shift_up(k).decimate(n)
    return [RatFun(part, denominator) for part in parts]


@ohtsuki_checked
def pushforward_full(e):
    """Direct image connection on the basis y^k e_j, k = 0..n-1, block index k*r + j"""
    n = e.cover.n
    ctx = e.cover.context
    r = e.rank
    twists = e.conn.bundle.twists
    size = n * r
    matrix = as_ratfun_matrix(linalg.zeros(size, size, ctx), ctx)
    z = Poly.monomial(ctx, 1)
    cache = {}
    for k in range(n):
        for j in range(r):
            col = k * r + j
            # d(y^k) = (k/n) y^k dz/z
            matrix[col, col] = matrix[col, col] + RatFun(Poly.constant(ctx, Fraction(k, n)), z)
            for i in range(r):
                entry = e.conn.matrix[i, j]
                if not entry:
                    continue
                # y^k A_ij dy regrouped by the exponent of y mod n
                parts = _split_by_residue_class(entry, n, k + 1, cache)
                for l, part in enumerate(parts):
                    if part:
                        row = l * r + i
                        matrix[row, col] = matrix[row, col] + part / RatFun(Poly.monomial(ctx, 1, n))
    bundle = SplitBundle(tuple((twists[i] - k) // n for k in range(n) for i in range(r)))
    singular = [e.cover.origin(), P1Point.infinity()] + _push_points(e.conn.singular_set, n)
    return LogConnection(bundle, matrix, tuple(singular))


def gamma_action_on_pushforward(e):
    """The action on the direct image basis: block k is zeta^k R"""
    ctx = e.cover.context
    zeta = e.cover.zeta
    return linalg.block_diagonal([e.action * zeta ** k for k in range(e.cover.n)], ctx)


def _isotypic_basis(e):
    """(k, twist, vector) for a basis of each zeta^-k eigenspace of R, split by twist class"""
    ctx = e.cover.context
    r = e.rank
    basis = []
    for k in range(e.cover.n):
        target = root_of_unity(ctx, e.cover.n, -k)
        for cls in e.conn.bundle.classes():
            block = e.action[np.ix_(cls, cls)]
            space = linalg.eigenspace(block, target, ctx)
            if space is None:
                continue
            for col in range(space.shape[1]):
                v = np.empty(r, dtype=object)
                for i in range(r):
                    v[i] = ctx.zero()
                for pos, i in enumerate(cls):
                    v[i] = space[pos, col]
                basis.append((k, e.conn.bundle.twists[cls[0]], v))
    return basis


@ohtsuki_checked
def invariant_part(e):
    """Connection induced on the invariant sections of the direct image, with its parabolic flags"""
    validate_equivariant(e)
    ctx = e.cover.context
    n = e.cover.n
    r = e.rank
    pushed = pushforward_full(e)
    basis = _isotypic_basis(e)
    if len(basis) != r:
        raise ActionNotSemisimpleError(f"action eigenspaces span {len(basis)} of {r} dimensions")
    columns = []
    for k, _, v in basis:
        col = np.empty(n * r, dtype=object)
        for idx in range(n * r):
            col[idx] = ctx.zero()
        for i in range(r):
            col[k * r + i] = v[i]
        columns.append(col)
    embed = linalg.column_stack(columns)
    project = linalg.left_inverse(embed)
    embed_rf = as_ratfun_matrix(embed, ctx)
    project_rf = as_ratfun_matrix(project, ctx)
    matrix = project_rf @ pushed.matrix @ embed_rf
    if not linalg.matrices_equal(pushed.matrix @ embed_rf, embed_rf @ matrix):
        raise EquivarianceError("invariant sections are not preserved by the direct image connection")
    twists = tuple((e_tw - k) // n for k, e_tw, _ in basis)
    singular = [e.cover.origin(), P1Point.infinity()] + _push_points(e.conn.singular_set, n)
    conn = LogConnection(SplitBundle(twists), matrix, tuple(singular))
    flags = (
        flag_from_spectrum(e.cover.origin(), [Fraction(k, n) for k, _, _ in basis]),
        flag_from_spectrum(P1Point.infinity(), [Fraction((e_tw - k) % n, n) for k, e_tw, _ in basis]),
    )
    result = ParabolicConnection(conn, flags)
    report = check_parabolic(result)
    if not report:
        logging.error(f"invariant part failed the parabolic check: {report.message}")
        raise WeightsNotSplitError(report.message)
    logging.debug(f"invariant part: twists {twists}, weights at 0 {[str(w) for w in flags[0].spectrum()]}")
    return result


def eigenspace_splitting_is_flat(e):
    """Whether Res_0 of the invariant part is block diagonal along the R-eigenspace grouping"""
    p = invariant_part(e)
    basis = _isotypic_basis(e)
    res = residue_at(p.conn, e.cover.origin()).matrix
    labels = [k for k, _, _ in basis]
    return all(not res[i, j] for i in range(len(labels)) for j in range(len(labels)) if labels[i] != labels[j])


def _flag_or_zero(p, point, ctx):
    flag = p.flag_at(point)
    if flag is not None:
        return flag
    res = residue_at(p.conn, point).matrix
    if not linalg.is_zero_matrix(res):
        raise WeightsNotSplitError(f"no flag at {point} but the residue there is nonzero")
    return ParabolicFlag(point, (p.conn.rank,), (0,))


def _adapted_frame(p, flag0, flag_inf, ctx):
    """Constant automorphism preserving the twist classes that diagonalizes Res_0 and Res_inf"""
    conn = p.conn
    r = conn.rank
    res0 = residue_at(conn, flag0.point).matrix
    res_inf = residue_at(conn, flag_inf.point).matrix
    classes = conn.bundle.classes()
    for cls in classes:
        outside = [i for i in range(r) if i not in cls]
        for res in (res0, res_inf):
            if any(res[i, j] or res[j, i] for i in cls for j in outside):
                raise UnadaptedFrameError("residues mix summands of different twist")
    frame = linalg.zeros(r, r, ctx)
    for cls in classes:
        block0 = res0[np.ix_(cls, cls)]
        block_inf = res_inf[np.ix_(cls, cls)]
        vectors = []
        for alpha in flag0.weights:
            space = linalg.eigenspace(block0, ctx.coerce(alpha), ctx)
            if space is None:
                continue
            restricted = linalg.left_inverse(space) @ block_inf @ space
            if not linalg.matrices_equal(block_inf @ space, space @ restricted):
                raise UnadaptedFrameError("residue at infinity does not preserve the eigenspaces at 0")
            for beta in flag_inf.weights:
                inner = linalg.eigenspace(restricted, ctx.coerce(beta), ctx)
                if inner is None:
                    continue
                combined = space @ inner
                vectors.extend(combined[:, c] for c in range(combined.shape[1]))
        if len(vectors) != len(cls):
            raise UnadaptedFrameError("residues at 0 and infinity are not simultaneously diagonalizable")
        for c, v in zip(cls, vectors):
            for pos, i in enumerate(cls):
                frame[i, c] = v[pos]
    return frame


@ohtsuki_checked
def equivariantize(p, cover):
    """Upstairs equivariant connection, regular over 0 and infinity, whose invariant part is p"""
    ctx = cover.context
    n = cover.n
    origin = cover.origin()
    # Flags first: both points flagged, weights with denominator n
    report = check_parabolic(p)
    if not report:
        raise WeightsNotSplitError(report.message)
    flag0 = _flag_or_zero(p, origin, ctx)
    flag_inf = _flag_or_zero(p, P1Point.infinity(), ctx)
    for flag in (flag0, flag_inf):
        if any((w * n).denominator != 1 for w in flag.weights):
            raise DenominatorMismatchError(f"{n} is not a common denominator of the weights at {flag.point}")
    report = check_parabolic(ParabolicConnection(p.conn, (flag0, flag_inf)))
    if not report:
        raise WeightsNotSplitError(report.message)
    # Move to a frame where both residues are diagonal
    frame = _adapted_frame(p, flag0, flag_inf, ctx)
    conn = gauge_transform(p.conn, linalg.inverse(frame))
    res0 = residue_at(conn, origin).matrix
    res_inf = residue_at(conn, P1Point.infinity()).matrix
    r = conn.rank
    m0 = [int(res0[i, i].as_rational() * n) for i in range(r)]
    m_inf = [int(res_inf[i, i].as_rational() * n) for i in range(r)]
    pulled = pullback(conn, cover)
    # Untwist by diag(y^m0) so y = 0 becomes regular
    gauge = linalg.zeros(r, r, ctx)
    gauge = as_ratfun_matrix(gauge, ctx)
    for i in range(r):
        gauge[i, i] = RatFun(Poly.monomial(ctx, m0[i]))
    twists = tuple(n * d + a + b for d, a, b in zip(conn.bundle.twists, m0, m_inf))
    modified = gauge_transform(pulled, gauge, SplitBundle(twists), modification=True)
    singular = tuple(q for q in modified.singular_set if not q.is_infinity and q.value)
    upstairs = LogConnection(modified.bundle, modified.matrix, singular)
    report = conn_validate(upstairs)
    if not report:
        logging.error(f"equivariantized connection is still singular: {report.message}")
        raise WeightsNotSplitError(f"twist gauge left a singularity: {report.message}")
    # The generator acts on summand i by zeta_n^-m0
    action = linalg.zeros(r, r, ctx)
    for i in range(r):
        action[i, i] = root_of_unity(ctx, n, -m0[i])
    return validate_equivariant(EquivariantConnection(cover, upstairs, action))


@dataclass(frozen=True)
class RoundtripReport:
    ok: bool
    message: str = ""
    gauge: Optional[np.ndarray] = None
    recovered: Optional[ParabolicConnection] = None

    def __bool__(self):
        return self.ok


def _spectra_match(p, q, point):
    a = p.flag_at(point)
    b = q.flag_at(point)
    sa = a.spectrum() if a else [Fraction(0)] * p.conn.rank
    sb = b.spectrum() if b else [Fraction(0)] * q.conn.rank
    return sa == sb


def roundtrip_check(p, cover):
    """Compare p with invariant_part(equivariantize(p)) up to an explicit gauge"""
    try:
        e = equivariantize(p, cover)
    except LogConnError as err:
        logging.info(f"roundtrip precondition failed: {err}")
        return RoundtripReport(False, f"precondition failed: {err}")
    try:
        q = invariant_part(e)
        return _compare_recovered(p, q, cover)
    except Exception as err:
        logging.error(f"Error during roundtrip: {err}")
        logging.error(traceback.format_exc())
        return RoundtripReport(False, f"roundtrip failed: {err}")


def _compare_recovered(p, q, cover):
    # Cheap invariants first, then the gauge search
    if not p.conn.bundle.is_isomorphic(q.conn.bundle):
        return RoundtripReport(False, f"twists {p.conn.bundle.twists} came back as {q.conn.bundle.twists}",
                               recovered=q)
    for point in (cover.origin(), P1Point.infinity()):
        if not _spectra_match(p, q, point):
            return RoundtripReport(False, f"weights at {point} differ", recovered=q)
    points = list(p.conn.singular_set) + [x for x in q.conn.singular_set if x not in p.conn.singular_set]
    for point in points:
        if residue_charpoly(residue_at(p.conn, point)) != residue_charpoly(residue_at(q.conn, point)):
            return RoundtripReport(False, f"residues at {point} are not conjugate", recovered=q)
    gauge = find_isomorphism(p.conn, q.conn)
    if gauge is None:
        return RoundtripReport(False, "no gauge isomorphism found", recovered=q)
    moved = gauge_transform(p.conn, gauge, q.conn.bundle)
    if not linalg.matrices_equal(moved.matrix, q.conn.matrix):
        return RoundtripReport(False, "gauge does not carry the connection over", gauge, q)
    return RoundtripReport(True, "", gauge, q)
