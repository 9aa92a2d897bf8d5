"""Exact arithmetic in the cyclotomic field Q(zeta_N).

The field is sympy's algebraic number field over QQ generated by a root of
the N-th cyclotomic polynomial.  FieldElement wraps one of its elements so
ints and Fractions mix in and the power-basis coordinates 1, zeta, ...,
zeta^(phi(N)-1) stay readable; elements are always reduced, so two
elements are equal exactly when their coordinates are.
"""
import logging
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from sympy import I, Poly, Symbol, cyclotomic_poly, exp, integer_nthroot, pi
from sympy.polys.densearith import dup_rem
from sympy.polys.domains import QQ
from sympy.polys.factortools import dup_factor_list

from .errors import FieldDivisionError, FieldMismatchError, RootOfUnityError

_X = Symbol("x")


def to_fraction(q):
    """A sympy QQ element as a Fraction"""
    return Fraction(int(q.numerator), int(q.denominator))


def to_qq(value):
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


@dataclass(frozen=True)
class CycloField:
    """The field Q(zeta_N); equal fields have equal order"""
    order: int
    domain: object = field(compare=False, repr=False)
    minpoly: tuple = field(compare=False, repr=False)

    @property
    def degree(self):
        return len(self.minpoly) - 1

    @property
    def modulus(self):
        """Coefficients of Phi_N, ascending"""
        return tuple(to_fraction(c) for c in reversed(self.minpoly))

    def zero(self):
        return FieldElement(self, self.domain.zero)

    def one(self):
        return FieldElement(self, self.domain.one)

    def zeta(self):
        return zeta_power(self, 1)

    def element(self, coeffs):
        """The element sum_k coeffs[k] zeta^k, reduced modulo Phi_N"""
        rep = [to_qq(c) for c in reversed(list(coeffs))]
        return FieldElement(self, self.domain.new(dup_rem(rep, list(self.minpoly), QQ)))

    def coerce(self, value):
        """Turn an int, Fraction or FieldElement of this field into a FieldElement"""
        if isinstance(value, FieldElement):
            if value.context.order != self.order:
                raise FieldMismatchError(
                    f"element of Q(zeta_{value.context.order}) used in Q(zeta_{self.order})")
            return value
        if isinstance(value, (int, Fraction)):
            return FieldElement(self, self.domain.new([to_qq(value)]))
        raise TypeError(f"cannot interpret {type(value).__name__} as an element of Q(zeta_{self.order})")

    def __str__(self):
        return f"Q(zeta_{self.order})"


@lru_cache(maxsize=None)
def field_make(order):
    """Return the cyclotomic field Q(zeta_order)"""
    if not isinstance(order, int) or order < 1:
        raise ValueError(f"field order must be a positive integer, got {order!r}")
    # The root is passed along with its minimal polynomial so sympy never has to compute one
    minpoly = Poly(cyclotomic_poly(order, _X), _X, domain=QQ)
    domain = QQ.algebraic_field((minpoly, exp(2 * pi * I / order)))
    logging.debug(f"built Q(zeta_{order}) of degree {minpoly.degree()}")
    return CycloField(order=order, domain=domain, minpoly=tuple(QQ(int(c)) for c in minpoly.all_coeffs()))


class FieldElement:
    """An element of Q(zeta_N) backed by an element of the sympy algebraic field"""

    __slots__ = ("context", "value")

    def __init__(self, context, value):
        self.context = context
        self.value = value

    @property
    def coords(self):
        """Power-basis coordinates, ascending, padded to the field degree"""
        coords = [to_fraction(c) for c in reversed(self.value.to_list())]
        return tuple(coords + [Fraction(0)] * (self.context.degree - len(coords)))

    def _other(self, other):
        if isinstance(other, FieldElement):
            if other.context.order != self.context.order:
                raise FieldMismatchError(
                    f"cannot combine Q(zeta_{self.context.order}) with Q(zeta_{other.context.order})")
            return other
        if isinstance(other, (int, Fraction)):
            return self.context.coerce(other)
        return None

    def __add__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return FieldElement(self.context, self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return FieldElement(self.context, self.value - other.value)

    def __rsub__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self):
        return FieldElement(self.context, -self.value)

    def __mul__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return FieldElement(self.context, self.value * other.value)

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise FieldDivisionError("division by zero in " + str(self.context))
        return FieldElement(self.context, self.context.domain.one / self.value)

    def __truediv__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        if exponent == 0:
            return self.context.one()
        return FieldElement(self.context, self.value ** exponent)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.context.order == other.context.order and self.value == other.value
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.as_rational() == other
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.as_rational())
        return hash((self.context.order, self.coords))

    def __bool__(self):
        return bool(self.value)

    def is_rational(self):
        return len(self.value.to_list()) <= 1

    def as_rational(self):
        rep = self.value.to_list()
        if len(rep) > 1:
            raise ValueError(f"{self} is not rational")
        return to_fraction(rep[0]) if rep else Fraction(0)

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coords):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
                continue
            monomial = "zeta" if k == 1 else f"zeta^{k}"
            if c == 1:
                terms.append(monomial)
            elif c == -1:
                terms.append("-" + monomial)
            else:
                terms.append(f"{c}*{monomial}")
        if not terms:
            return "0"
        text = terms[0]
        for term in terms[1:]:
            text += " - " + term[1:] if term.startswith("-") else " + " + term
        return text

    def __repr__(self):
        return f"FieldElement({self}, N={self.context.order})"


def fe_arith(a, b, kind):
    """Exact field arithmetic; kind is one of add, sub, mul, div"""
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


@lru_cache(maxsize=4096)
def zeta_power(ctx, k):
    """zeta_N^k reduced into the power basis"""
    return ctx.element([0] * (k % ctx.order) + [1])


def root_of_unity(ctx, n, m):
    """Return zeta_n^m = zeta_N^(m N / n); n must divide N"""
    if n < 1 or ctx.order % n != 0:
        raise RootOfUnityError(f"{n} does not divide the field order {ctx.order}")
    return zeta_power(ctx, (m * (ctx.order // n)) % ctx.order)


def root_order(x):
    """Multiplicative order of x if x is a root of unity in its field, else None"""
    bound = 2 * x.context.order
    power = x
    for k in range(1, bound + 1):
        if power == 1:
            return k
        power = power * x
    return None


def rational_nth_root(q, n):
    """A rational r with r^n = q, or None"""
    q = Fraction(q)
    sign = 1
    if q < 0:
        if n % 2 == 0:
            return None
        sign = -1
        q = -q
    num, num_exact = integer_nthroot(q.numerator, n)
    den, den_exact = integer_nthroot(q.denominator, n)
    if not (num_exact and den_exact):
        return None
    return sign * Fraction(int(num), int(den))


@lru_cache(maxsize=1024)
def _factored_root(c, n):
    """A root of x^n - c read off a linear factor over the field, or None"""
    ctx = c.context
    if ctx.degree == 1:
        return None
    K = ctx.domain
    # x^n - c, highest degree first
    f = [K.one] + [K.zero] * (n - 1) + [-c.value]
    try:
        _, factors = dup_factor_list(f, K)
    except Exception:
        logging.error(f"factoring x^{n} - ({c}) over {ctx} failed")
        logging.error(traceback.format_exc())
        return None
    for factor, _ in factors:
        if len(factor) == 2:
            root = FieldElement(ctx, -factor[1] / factor[0])
            if root ** n == c:
                return root
    return None


def nth_root_scalar(c, n):
    """Some r in Q(zeta_N) with r^n = c, or None when the field has none.

    Roots of the shape zeta_N^i times a rational are tried first; anything
    else comes from factoring x^n - c over the field.
    """
    ctx = c.context
    if not c:
        return ctx.zero()
    for i in range(ctx.order):
        t = c * zeta_power(ctx, -i * n)
        if not t.is_rational():
            continue
        q = rational_nth_root(t.as_rational(), n)
        if q is not None:
            return zeta_power(ctx, i) * q
    return _factored_root(c, n)
