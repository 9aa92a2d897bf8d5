"""Polynomials, rational functions and local expansions on the projective line.

Polynomials are dense lists of sympy algebraic-field coefficients, highest
degree first, handled by sympy's dup_* routines.  A RatFun is kept in
canonical form: numerator and denominator coprime and the denominator
monic, so structural equality is mathematical equality.
"""
import logging
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from sympy.polys.densearith import dup_add, dup_div, dup_mul, dup_mul_ground, dup_neg, dup_pow, dup_sub
from sympy.polys.densebasic import dup_inflate, dup_strip
from sympy.polys.densetools import dup_diff, dup_eval, dup_monic, dup_scale, dup_shift
from sympy.polys.domains import QQ
from sympy.polys.euclidtools import dup_gcd
from sympy.polys.factortools import dup_factor_list

from .errors import FieldDivisionError, FieldMismatchError, UnsplitDenominatorError
from .field import FieldElement, root_of_unity, to_fraction, to_qq, zeta_power


class Poly:
    """Dense univariate polynomial over a cyclotomic field.

    Built from ascending coefficients; rep holds the same coefficients as
    field-domain elements, highest degree first.
    """

    __slots__ = ("context", "rep")

    def __init__(self, context, coeffs=()):
        self.context = context
        self.rep = dup_strip([context.coerce(c).value for c in reversed(list(coeffs))])

    @classmethod
    def from_rep(cls, context, rep):
        p = cls.__new__(cls)
        p.context = context
        p.rep = dup_strip(list(rep))
        return p

    @classmethod
    def constant(cls, context, value):
        return cls(context, (value,))

    @classmethod
    def monomial(cls, context, degree, value=1):
        return cls(context, [0] * degree + [value])

    @classmethod
    def linear_root(cls, context, root):
        """The polynomial z - root"""
        return cls(context, (-context.coerce(root), 1))

    @property
    def domain(self):
        return self.context.domain

    @property
    def coeffs(self):
        """Ascending FieldElement coefficients"""
        return tuple(FieldElement(self.context, c) for c in reversed(self.rep))

    @property
    def degree(self):
        return len(self.rep) - 1

    @property
    def leading(self):
        return FieldElement(self.context, self.rep[0]) if self.rep else self.context.zero()

    def coefficient(self, k):
        if 0 <= k < len(self.rep):
            return FieldElement(self.context, self.rep[len(self.rep) - 1 - k])
        return self.context.zero()

    def __bool__(self):
        return bool(self.rep)

    def _lift(self, other):
        if isinstance(other, Poly):
            if other.context.order != self.context.order:
                raise FieldMismatchError("polynomials over different fields")
            return other
        if isinstance(other, (int, Fraction, FieldElement)):
            return Poly.constant(self.context, other)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return Poly.from_rep(self.context, dup_add(self.rep, other.rep, self.domain))

    __radd__ = __add__

    def __neg__(self):
        return Poly.from_rep(self.context, dup_neg(self.rep, self.domain))

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return Poly.from_rep(self.context, dup_sub(self.rep, other.rep, self.domain))

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, FieldElement)):
            scalar = self.context.coerce(other).value
            return Poly.from_rep(self.context, dup_mul_ground(self.rep, scalar, self.domain))
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return Poly.from_rep(self.context, dup_mul(self.rep, other.rep, self.domain))

    __rmul__ = __mul__

    def __pow__(self, exponent):
        return Poly.from_rep(self.context, dup_pow(self.rep, exponent, self.domain))

    def divmod(self, other):
        if not other:
            raise FieldDivisionError("polynomial division by zero")
        quotient, remainder = dup_div(self.rep, other.rep, self.domain)
        return Poly.from_rep(self.context, quotient), Poly.from_rep(self.context, remainder)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __eq__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self.rep == other.rep

    def __hash__(self):
        return hash(self.coeffs)

    def monic(self):
        return Poly.from_rep(self.context, dup_monic(self.rep, self.domain))

    def derivative(self):
        return Poly.from_rep(self.context, dup_diff(self.rep, 1, self.domain))

    def __call__(self, x):
        return FieldElement(self.context, dup_eval(self.rep, self.context.coerce(x).value, self.domain))

    def valuation(self):
        """Order of vanishing at 0; the zero polynomial has no valuation"""
        for k, c in enumerate(reversed(self.rep)):
            if c:
                return k
        raise ValueError("valuation of the zero polynomial")

    def shift_down(self, k):
        return Poly.from_rep(self.context, self.rep[:max(len(self.rep) - k, 0)])

    def shift_up(self, k):
        if not self.rep:
            return self
        return Poly.from_rep(self.context, self.rep + [self.domain.zero] * k)

    def reverse(self, degree=None):
        """z^degree * p(1/z)"""
        degree = self.degree if degree is None else degree
        ascending = list(reversed(self.rep))
        return Poly.from_rep(self.context, ascending + [self.domain.zero] * (degree + 1 - len(ascending)))

    def taylor_shift(self, a):
        """p(z + a)"""
        return Poly.from_rep(self.context, dup_shift(self.rep, self.context.coerce(a).value, self.domain))

    def scale_arg(self, c):
        """p(c z)"""
        return Poly.from_rep(self.context, dup_scale(self.rep, self.context.coerce(c).value, self.domain))

    def compose_power(self, n):
        """p(z^n)"""
        return Poly.from_rep(self.context, dup_inflate(self.rep, n, self.domain))

    def decimate(self, n):
        """The polynomials p_l with p(y) = sum_l y^l p_l(y^n), l = 0..n-1"""
        coeffs = self.coeffs
        return [Poly(self.context, coeffs[l::n]) for l in range(n)]

    def is_rational(self):
        return all(len(c.to_list()) <= 1 for c in self.rep)

    def __str__(self):
        coeffs = self.coeffs
        if not coeffs:
            return "0"
        terms = []
        for k in range(len(coeffs) - 1, -1, -1):
            c = coeffs[k]
            if not c:
                continue
            monomial = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if not c.is_rational():
                text = f"({c})" if monomial or len(coeffs) > 1 else str(c)
                terms.append(text + ("*" + monomial if monomial else ""))
                continue
            q = c.as_rational()
            if not monomial:
                terms.append(str(q))
            elif q == 1:
                terms.append(monomial)
            elif q == -1:
                terms.append("-" + monomial)
            else:
                terms.append(f"{q}*{monomial}")
        text = terms[0]
        for term in terms[1:]:
            text += " - " + term[1:] if term.startswith("-") else " + " + term
        return text

    def __repr__(self):
        return f"Poly({self})"


def poly_gcd(a, b):
    """Monic greatest common divisor"""
    return Poly.from_rep(a.context, dup_monic(dup_gcd(a.rep, b.rep, a.domain), a.domain))


class RatFun:
    """Rational function num/den in canonical form"""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduced=False):
        if den is None:
            den = Poly.constant(num.context, 1)
        if not den:
            raise FieldDivisionError("rational function with zero denominator")
        if num.context.order != den.context.order:
            raise FieldMismatchError("numerator and denominator over different fields")
        if not num:
            den = Poly.constant(num.context, 1)
        elif not reduced:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num = num // g
                den = den // g
        lead = den.leading
        if lead != 1:
            inv = lead.inverse()
            num = num * inv
            den = den * inv
        self.num = num
        self.den = den

    @property
    def context(self):
        return self.num.context

    @classmethod
    def constant(cls, context, value):
        return cls(Poly.constant(context, value))

    @classmethod
    def variable(cls, context):
        return cls(Poly.monomial(context, 1))

    @classmethod
    def simple_pole(cls, context, point, coefficient=1):
        """coefficient / (z - point)"""
        return cls(Poly.constant(context, coefficient), Poly.linear_root(context, point))

    def _lift(self, other):
        if isinstance(other, RatFun):
            if other.context.order != self.context.order:
                raise FieldMismatchError("rational functions over different fields")
            return other
        if isinstance(other, Poly):
            return RatFun(other, reduced=True)
        if isinstance(other, (int, Fraction, FieldElement)):
            return RatFun.constant(self.context, other)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if other.is_constant():
            return RatFun(self.num * other.num.coefficient(0), self.den, reduced=True)
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise FieldDivisionError("inverse of the zero rational function")
        return RatFun(self.den, self.num, reduced=True)

    def __truediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return RatFun(self.num ** exponent, self.den ** exponent, reduced=True)

    def __eq__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return bool(self.num)

    def is_polynomial(self):
        return self.den.degree == 0

    def is_constant(self):
        return self.is_polynomial() and self.num.degree <= 0

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.num.coefficient(0)

    def derivative(self):
        return RatFun(self.num.derivative() * self.den - self.num * self.den.derivative(), self.den * self.den)

    def __call__(self, x):
        value = self.den(x)
        if not value:
            raise FieldDivisionError(f"pole at z = {x}")
        return self.num(x) / value

    def scale_arg(self, c):
        """f(c z)"""
        return RatFun(self.num.scale_arg(c), self.den.scale_arg(c))

    def compose_power(self, n):
        """f(z^n)"""
        return RatFun(self.num.compose_power(n), self.den.compose_power(n), reduced=True)

    def invert_arg(self):
        """f(1/w) as a rational function of w"""
        if not self.num:
            return self
        shift = self.den.degree - self.num.degree
        num = self.num.reverse()
        den = self.den.reverse()
        if shift >= 0:
            num = num.shift_up(shift)
        else:
            den = den.shift_up(-shift)
        return RatFun(num, den)

    def times_power(self, k):
        """z^k f"""
        if k >= 0:
            return RatFun(self.num.shift_up(k), self.den)
        return RatFun(self.num, self.den.shift_up(-k))

    def valuation_at(self, point):
        """Order of f at a point of P^1: positive for zeros, negative for poles"""
        if not self.num:
            raise ValueError("valuation of the zero function")
        if point.is_infinity:
            return self.den.degree - self.num.degree
        a = point.value
        return _root_multiplicity(self.num, a) - _root_multiplicity(self.den, a)

    def __str__(self):
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RatFun({self})"


def rf_arith(a, b, kind):
    """Canonical rational-function arithmetic; kind is one of add, sub, mul, div"""
    if a.context.order != b.context.order:
        raise FieldMismatchError(f"context mismatch: N={a.context.order} vs N={b.context.order}")
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def _root_multiplicity(p, a):
    linear = Poly.linear_root(p.context, a)
    count = 0
    while p and not p(a):
        p = p // linear
        count += 1
    return count


@dataclass(frozen=True)
class P1Point:
    """A point of the projective line; value None stands for infinity"""
    value: Optional[FieldElement] = None

    @classmethod
    def finite(cls, value):
        return cls(value)

    @classmethod
    def infinity(cls):
        return cls(None)

    @property
    def is_infinity(self):
        return self.value is None

    @property
    def kind(self):
        return "infinity" if self.value is None else "finite"

    def __str__(self):
        return "inf" if self.value is None else str(self.value)


@dataclass(frozen=True)
class LaurentSeries:
    """Coefficients of a local expansion from lowest_order to truncation_order"""
    center: P1Point
    lowest_order: int
    coeffs: tuple
    truncation_order: int

    def coefficient(self, k):
        if k > self.truncation_order:
            raise ValueError(f"coefficient {k} lies beyond the truncation order {self.truncation_order}")
        if k < self.lowest_order:
            return self.coeffs[0] - self.coeffs[0]
        return self.coeffs[k - self.lowest_order]

    def principal_part(self):
        """Coefficients of negative order as a dict order -> value"""
        return {k: self.coefficient(k) for k in range(self.lowest_order, min(0, self.truncation_order + 1))
                if self.coefficient(k)}


def _local_polys(f, p):
    """Numerator, denominator and extra power of t with f = t^extra N(t)/D(t) near p"""
    if p.is_infinity:
        return f.num.reverse(), f.den.reverse(), f.den.degree - f.num.degree
    return f.num.taylor_shift(p.value), f.den.taylor_shift(p.value), 0


def laurent_at(f, p, order):
    """Expand f in the local coordinate at p (z - a, or w = 1/z at infinity) up to t^order"""
    ctx = f.context
    if not f.num:
        return LaurentSeries(p, order, (ctx.zero(),), order)
    num, den, extra = _local_polys(f, p)
    vn = num.valuation()
    vd = den.valuation()
    num = num.shift_down(vn)
    den = den.shift_down(vd)
    lowest = extra + vn - vd
    count = order - lowest + 1
    if count <= 0:
        return LaurentSeries(p, order, (ctx.zero(),), order)
    inv_d0 = den.coefficient(0).inverse()
    series = []
    for k in range(count):
        acc = num.coefficient(k)
        for j in range(1, min(k, den.degree) + 1):
            acc = acc - den.coefficient(j) * series[k - j]
        series.append(acc * inv_d0)
    return LaurentSeries(p, lowest, tuple(series), order)


def residue_form(f, p):
    """Residue of the 1-form f dz at p"""
    if p.is_infinity:
        # dz = -dw / w^2, so the w^-1 coefficient of f dz is minus the w^1 coefficient of f(1/w)
        return -laurent_at(f, p, 1).coefficient(1)
    return laurent_at(f, p, -1).coefficient(-1)


@dataclass(frozen=True)
class PartialFractions:
    """Principal parts at finite poles plus the polynomial remainder"""
    parts: dict = field(default_factory=dict)
    polynomial: Optional[RatFun] = None

    def reassemble(self):
        total = self.polynomial
        for part in self.parts.values():
            total = total + part
        return total


def _linear_roots(factors):
    roots = []
    for factor, _ in factors:
        if len(factor) == 2:
            roots.append(factor)
    return roots


def rational_roots(p):
    """Distinct rational roots of a polynomial with rational coefficients"""
    if not p or not p.is_rational():
        return []
    ctx = p.context
    # Factor over QQ and read roots off the linear factors
    rep = [to_qq(c.as_rational()) for c in reversed(p.coeffs)]
    _, factors = dup_factor_list(rep, QQ)
    return [ctx.coerce(to_fraction(-b / a)) for a, b in _linear_roots(factors)]


@lru_cache(maxsize=1024)
def _factored_roots(p):
    ctx = p.context
    try:
        _, factors = dup_factor_list(p.rep, p.domain)
    except Exception:
        logging.error(f"factoring {p} over {ctx} failed")
        logging.error(traceback.format_exc())
        return ()
    return tuple(FieldElement(ctx, -b / a) for a, b in _linear_roots(factors))


def find_roots(p, candidates=()):
    """Distinct roots of p in its field.

    Candidates, rational roots and signed N-th roots of unity are tried
    first; whatever is left of p is factored over the field.
    """
    ctx = p.context
    found = []
    rest = p
    pool = list(candidates) + rational_roots(p)
    pool += [zeta_power(ctx, k) for k in range(ctx.order)]
    pool += [-zeta_power(ctx, k) for k in range(ctx.order)]
    for x in pool:
        x = ctx.coerce(x)
        if x not in found and not p(x):
            found.append(x)
            rest = _strip_root(rest, x)
    # Over Q every root is rational and has been found already
    if rest.degree > 0 and ctx.degree > 1:
        found += [x for x in _factored_roots(rest) if x not in found]
    return found


def root_multiplicity(p, a):
    return _root_multiplicity(p, a)


def partial_fractions(f, poles=()):
    """Split f into principal parts at declared and discoverable poles plus a polynomial.

    Poles are the declared points together with every root of the
    denominator in the field; a denominator factor without roots there
    leaves f unsplit.
    """
    ctx = f.context
    points = []
    for point in poles:
        if not point.is_infinity and point.value not in points:
            points.append(ctx.coerce(point.value))
    remaining_den = f.den
    for a in points:
        remaining_den = _strip_root(remaining_den, a)
    extra = find_roots(remaining_den)
    for a in extra:
        remaining_den = _strip_root(remaining_den, a)
    if remaining_den.degree > 0:
        raise UnsplitDenominatorError(
            f"denominator factor {remaining_den} of {f} does not split over {ctx}")
    parts = {}
    remainder = f
    for a in points + extra:
        mult = _root_multiplicity(f.den, a)
        if mult == 0:
            continue
        # Principal part from the negative Laurent coefficients at a
        series = laurent_at(f, P1Point.finite(a), -1)
        linear = RatFun(Poly.linear_root(ctx, a))
        principal = RatFun(Poly(ctx))
        for j in range(1, mult + 1):
            c = series.coefficient(-j)
            if c:
                principal = principal + RatFun(Poly.constant(ctx, c)) / linear ** j
        parts[P1Point.finite(a)] = principal
        remainder = remainder - principal
    if not remainder.is_polynomial():
        logging.error(f"partial fractions left a non-polynomial remainder {remainder}")
        raise UnsplitDenominatorError(f"could not split {f}")
    return PartialFractions(parts=parts, polynomial=remainder)


def _strip_root(p, a):
    linear = Poly.linear_root(p.context, a)
    while p.degree > 0 and not p(a):
        p = p // linear
    return p


def norm_poly(q, n):
    """prod_j q(zeta_n^j y) together with the cofactor prod_{j>=1} q(zeta_n^j y)"""
    zeta_n = root_of_unity(q.context, n, 1)
    cofactor = Poly.constant(q.context, 1)
    root = zeta_n
    for _ in range(1, n):
        cofactor = cofactor * q.scale_arg(root)
        root = root * zeta_n
    return q * cofactor, cofactor
