"""Exact linear algebra over numpy object arrays.

Entries are FieldElement or RatFun values.  Matrices of field elements go
through sympy's DomainMatrix over the cyclotomic field; matrices of
rational functions use Gaussian elimination on the entries, which only
needs the field operations and bool() for zero tests.
"""
import logging
from fractions import Fraction

import numpy as np
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from .errors import FieldDivisionError
from .field import FieldElement


def matrix(rows, ctx):
    """Build an object-dtype matrix, coercing ints and Fractions into ctx"""
    data = [[ctx.coerce(entry) if isinstance(entry, (int, Fraction)) else entry for entry in row]
            for row in rows]
    out = np.empty((len(data), len(data[0]) if data else 0), dtype=object)
    for i, row in enumerate(data):
        for j, entry in enumerate(row):
            out[i, j] = entry
    return out


def zeros(rows, cols, ctx):
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = ctx.zero()
    return out


def identity(size, ctx):
    out = zeros(size, size, ctx)
    for i in range(size):
        out[i, i] = ctx.one()
    return out


def scalar_matrix(size, value, ctx):
    out = zeros(size, size, ctx)
    for i in range(size):
        out[i, i] = value
    return out


def is_zero_matrix(a):
    return all(not entry for entry in a.flat)


def matrices_equal(a, b):
    if a.shape != b.shape:
        return False
    return all(x == y for x, y in zip(a.flat, b.flat))


def _field_of(a):
    """The cyclotomic field when every entry is a FieldElement, else None"""
    if a.size == 0:
        return None
    entries = list(a.flat)
    if not all(isinstance(entry, FieldElement) for entry in entries):
        return None
    return entries[0].context


def to_domain_matrix(a, ctx):
    rows, cols = a.shape
    return DomainMatrix([[ctx.coerce(a[i, j]).value for j in range(cols)] for i in range(rows)],
                        (rows, cols), ctx.domain)


def from_domain_matrix(dm, ctx):
    return matrix([[FieldElement(ctx, value) for value in row] for row in dm.to_list()], ctx)


def _unit_like(entry):
    # one and zero of whatever ring the entries live in
    return entry / entry, entry - entry


def _first_nonzero(a):
    for entry in a.flat:
        if entry:
            return entry
    return None


def _rref_entries(a):
    rows, cols = a.shape
    work = [list(a[i, :]) for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        pivot_row = next((i for i in range(r, rows) if work[i][c]), None)
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        inv = 1 / work[r][c]
        work[r] = [x * inv for x in work[r]]
        for i in range(rows):
            if i != r and work[i][c]:
                factor = work[i][c]
                work[i] = [x - factor * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = work[i][j]
    return out, pivots


def rref(a):
    """Reduced row echelon form and the pivot column indices"""
    ctx = _field_of(a)
    if ctx is None:
        return _rref_entries(a)
    reduced, pivots = to_domain_matrix(a, ctx).rref()
    return from_domain_matrix(reduced, ctx), list(pivots)


def rank(a):
    if a.size == 0:
        return 0
    ctx = _field_of(a)
    if ctx is not None:
        return to_domain_matrix(a, ctx).rank()
    return len(_rref_entries(a)[1])


def nullspace(a):
    """Basis of {v : a v = 0} as a list of 1-d object arrays"""
    rows, cols = a.shape
    reduced, pivots = rref(a)
    sample = _first_nonzero(a)
    if sample is None:
        raise ValueError("nullspace needs at least one nonzero entry to fix the coefficient ring")
    one, zero = _unit_like(sample)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        # Free variable f set to one, pivots read off the reduced rows
        v = np.empty(cols, dtype=object)
        for j in range(cols):
            v[j] = zero
        v[f] = one
        for i, p in enumerate(pivots):
            v[p] = -reduced[i, f]
        basis.append(v)
    return basis


def kernel(a, ctx):
    """Nullspace that also handles the all-zero matrix"""
    if is_zero_matrix(a):
        out = []
        for k in range(a.shape[1]):
            v = np.empty(a.shape[1], dtype=object)
            for j in range(a.shape[1]):
                v[j] = ctx.one() if j == k else ctx.zero()
            out.append(v)
        return out
    return nullspace(a)


def column_stack(vectors):
    size = len(vectors[0])
    out = np.empty((size, len(vectors)), dtype=object)
    for j, v in enumerate(vectors):
        for i in range(size):
            out[i, j] = v[i]
    return out


def _det_entries(a):
    """Determinant by fraction-carrying Gaussian elimination"""
    size = a.shape[0]
    work = [list(a[i, :]) for i in range(size)]
    sample = _first_nonzero(a)
    if sample is None:
        return a[0, 0]
    result, _ = _unit_like(sample)
    for c in range(size):
        pivot_row = next((i for i in range(c, size) if work[i][c]), None)
        if pivot_row is None:
            return sample - sample
        if pivot_row != c:
            work[c], work[pivot_row] = work[pivot_row], work[c]
            result = -result
        pivot = work[c][c]
        result = result * pivot
        for i in range(c + 1, size):
            if work[i][c]:
                factor = work[i][c] / pivot
                work[i] = [x - factor * y for x, y in zip(work[i], work[c])]
    return result


def det(a):
    if a.shape[0] == 0:
        raise ValueError("determinant of an empty matrix")
    ctx = _field_of(a)
    if ctx is None:
        return _det_entries(a)
    return FieldElement(ctx, to_domain_matrix(a, ctx).det())


def _inverse_entries(a):
    size = a.shape[0]
    sample = _first_nonzero(a)
    if sample is None:
        raise FieldDivisionError("matrix is singular")
    one, zero = _unit_like(sample)
    # Reduce [a | Id] and read the inverse off the right half
    augmented = np.empty((size, 2 * size), dtype=object)
    for i in range(size):
        for j in range(size):
            augmented[i, j] = a[i, j]
            augmented[i, size + j] = one if i == j else zero
    reduced, pivots = _rref_entries(augmented)
    if pivots[:size] != list(range(size)):
        raise FieldDivisionError("matrix is singular")
    return reduced[:, size:]


def inverse(a):
    """Exact inverse; raises FieldDivisionError for singular input"""
    size = a.shape[0]
    if a.shape != (size, size):
        raise ValueError(f"inverse of a non-square {a.shape} matrix")
    ctx = _field_of(a)
    if ctx is None:
        return _inverse_entries(a)
    try:
        return from_domain_matrix(to_domain_matrix(a, ctx).inv(), ctx)
    except DMNonInvertibleMatrixError:
        logging.debug(f"singular {size}x{size} matrix over {ctx}")
        raise FieldDivisionError("matrix is singular")


def left_inverse(p):
    """A matrix L with L p = Id for p of full column rank"""
    rows, cols = p.shape
    _, independent_rows = rref(p.T.copy())
    if len(independent_rows) != cols:
        raise FieldDivisionError("columns are linearly dependent")
    square = p[independent_rows, :]
    inv = inverse(square)
    sample = _first_nonzero(p)
    _, zero = _unit_like(sample)
    out = np.empty((cols, rows), dtype=object)
    for i in range(cols):
        for j in range(rows):
            out[i, j] = zero
    for k, row in enumerate(independent_rows):
        out[:, row] = inv[:, k]
    return out


def eigenspace(a, value, ctx):
    """Columns spanning ker(a - value Id)"""
    shifted = a - scalar_matrix(a.shape[0], ctx.coerce(value), ctx)
    vectors = kernel(shifted, ctx)
    return column_stack(vectors) if vectors else None


def charpoly(a, ctx):
    """Characteristic polynomial coefficients det(t Id - a), ascending"""
    coeffs = to_domain_matrix(a, ctx).charpoly()
    return [FieldElement(ctx, c) for c in reversed(coeffs)]


def trace(a):
    total = a[0, 0]
    for i in range(1, a.shape[0]):
        total = total + a[i, i]
    return total


def matrix_power(a, exponent, ctx):
    result = identity(a.shape[0], ctx)
    base = a
    while exponent:
        if exponent & 1:
            result = result @ base
        base = base @ base
        exponent >>= 1
    return result


def scalar_value(a):
    """The c with a = c Id, or None"""
    size = a.shape[0]
    c = a[0, 0]
    for i in range(size):
        for j in range(size):
            if (i == j and a[i, j] != c) or (i != j and a[i, j]):
                return None
    return c


def block_diagonal(blocks, ctx):
    size = sum(b.shape[0] for b in blocks)
    out = zeros(size, size, ctx)
    offset = 0
    for b in blocks:
        k = b.shape[0]
        out[offset:offset + k, offset:offset + k] = b
        offset += k
    return out
