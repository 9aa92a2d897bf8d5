"""Fixed points of twisting by an order n character, at the level of monodromy.

The base group is free on g generators.  A word is a tuple of nonzero
ints: i + 1 stands for the generator gamma_i and -(i + 1) for its inverse.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from ..config import get_settings
from . import linalg
from .errors import EigenspaceDimensionError, LogConnError, NormalizationFailedError
from .field import nth_root_scalar, root_of_unity
from .ratcalc import Poly, find_roots


def reduce_word(word):
    stack = []
    for letter in word:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def invert_word(word):
    return tuple(-letter for letter in reversed(word))


def concat(*words):
    return reduce_word(tuple(itertools.chain.from_iterable(words)))


@dataclass(frozen=True)
class Character:
    """Surjective character of the free group onto Z/order; residue tags are optional"""
    order: int
    exponents: tuple
    residues: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.order < 2:
            raise LogConnError(f"character order must be at least 2, got {self.order}")
        exps = tuple(int(c) % self.order for c in self.exponents)
        object.__setattr__(self, "exponents", exps)
        if not any(exps):
            raise LogConnError("character is trivial")
        if math.gcd(self.order, *exps) != 1:
            raise LogConnError(f"character {exps} mod {self.order} is not surjective")

    @property
    def generator_count(self):
        return len(self.exponents)

    def value(self, word):
        total = 0
        for letter in word:
            c = self.exponents[abs(letter) - 1]
            total += c if letter > 0 else -c
        return total % self.order


def _check_matrices(matrices):
    if not matrices:
        raise LogConnError("a representation needs at least one generator")
    size = matrices[0].shape[0]
    for m in matrices:
        if m.shape != (size, size):
            raise LogConnError(f"generator matrix of shape {m.shape}, expected {(size, size)}")
        if not linalg.det(m):
            raise LogConnError("generator matrices must be invertible")


@dataclass(frozen=True, eq=False)
class Representation:
    matrices: tuple
    residues: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.matrices))
        _check_matrices(self.matrices)

    @property
    def generator_count(self):
        return len(self.matrices)

    @property
    def rank(self):
        return self.matrices[0].shape[0]

    @property
    def context(self):
        return self.matrices[0][0, 0].context

    def evaluate(self, word):
        result = linalg.identity(self.rank, self.context)
        for letter in word:
            m = self.matrices[abs(letter) - 1]
            result = result @ (m if letter > 0 else linalg.inverse(m))
        return result


@dataclass(frozen=True)
class SchreierData:
    """Transversal of ker(chi) indexed by coset value, and its subgroup generators"""
    transversal: tuple
    generators: tuple
    table: dict = field(compare=False, hash=False)


@lru_cache(maxsize=256)
def schreier_generators(chi):
    """Reidemeister-Schreier generators of ker(chi)"""
    n = chi.order
    anchor = next((i for i, c in enumerate(chi.exponents) if math.gcd(c, n) == 1), None)
    transversal = [None] * n
    if anchor is not None:
        step = chi.exponents[anchor]
        visit = [(u * step) % n for u in range(n)]
        for u, c in enumerate(visit):
            transversal[c] = (anchor + 1,) * u
    else:
        # breadth first over positive letters; chi is surjective so every coset is reached
        transversal[0] = ()
        visit = [0]
        frontier = [0]
        while frontier:
            nxt = []
            for c in frontier:
                for i, step in enumerate(chi.exponents):
                    d = (c + step) % n
                    if transversal[d] is None:
                        transversal[d] = transversal[c] + (i + 1,)
                        visit.append(d)
                        nxt.append(d)
            frontier = nxt
    generators = []
    table = {}
    index = {}
    order = list(range(chi.generator_count))
    if anchor is not None:
        order.remove(anchor)
        order.insert(0, anchor)
    for i in order:
        for c in visit:
            d = (c + chi.exponents[i]) % n
            word = concat(transversal[c], (i + 1,), invert_word(transversal[d]))
            if not word:
                table[(c, i)] = None
                continue
            if word not in index:
                index[word] = len(generators)
                generators.append(word)
            table[(c, i)] = index[word]
    return SchreierData(tuple(transversal), tuple(generators), table)


def rewrite(word, chi):
    """Express a word of ker(chi) in the Schreier generators as (index, sign) pairs"""
    data = schreier_generators(chi)
    n = chi.order
    coset = 0
    out = []
    for letter in word:
        i = abs(letter) - 1
        step = chi.exponents[i]
        if letter > 0:
            idx = data.table[(coset, i)]
            if idx is not None:
                out.append((idx, 1))
            coset = (coset + step) % n
        else:
            coset = (coset - step) % n
            idx = data.table[(coset, i)]
            if idx is not None:
                out.append((idx, -1))
    if coset != 0:
        raise LogConnError(f"word {word} is not in the kernel of the character")
    return out


@dataclass(frozen=True, eq=False)
class SubgroupRepresentation:
    """A representation of ker(chi) given on its Schreier generators"""
    character: Character
    matrices: tuple
    residues: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.matrices))
        _check_matrices(self.matrices)
        expected = len(schreier_generators(self.character).generators)
        if len(self.matrices) != expected:
            raise LogConnError(f"ker(chi) has {expected} Schreier generators, got {len(self.matrices)} matrices")

    @property
    def rank(self):
        return self.matrices[0].shape[0]

    @property
    def context(self):
        return self.matrices[0][0, 0].context

    def evaluate(self, word):
        result = linalg.identity(self.rank, self.context)
        for idx, sign in rewrite(word, self.character):
            m = self.matrices[idx]
            result = result @ (m if sign > 0 else linalg.inverse(m))
        return result


def conjugate_subrepresentation(sigma, coset):
    """sigma^t for the transversal element t of the given coset: s -> sigma(t s t^-1)"""
    data = schreier_generators(sigma.character)
    t = data.transversal[coset]
    matrices = [sigma.evaluate(concat(t, s, invert_word(t))) for s in data.generators]
    return SubgroupRepresentation(sigma.character, tuple(matrices), dict(sigma.residues))


@dataclass(frozen=True, eq=False)
class FixedPointCertificate:
    H: np.ndarray
    normalized: bool
    character: Optional[Character] = None


def twist(rho, chi):
    """rho tensor chi: gamma_i -> zeta_n^(c_i) rho(gamma_i), residues shifted by the tags of chi"""
    if rho.generator_count != chi.generator_count:
        raise LogConnError(f"representation has {rho.generator_count} generators, character {chi.generator_count}")
    ctx = rho.context
    zeta = root_of_unity(ctx, chi.order, 1)
    matrices = tuple(m * zeta ** c for m, c in zip(rho.matrices, chi.exponents))
    residues = {}
    for label, res in rho.residues.items():
        shift = chi.residues.get(label, 0)
        residues[label] = res + linalg.scalar_matrix(rho.rank, ctx.coerce(shift), ctx) if shift else res
    return Representation(matrices, residues)


def intertwiner_space(rho1, rho2):
    """Basis of {H : H rho1(g) = rho2(g) H} over generators and shared residue labels"""
    ctx = rho1.context
    r1, r2 = rho1.rank, rho2.rank
    pairs = list(zip(rho1.matrices, rho2.matrices))
    pairs += [(rho1.residues[label], rho2.residues[label]) for label in rho1.residues if label in rho2.residues]
    rows = []
    for a1, a2 in pairs:
        for a in range(r2):
            for b in range(r1):
                row = [ctx.zero()] * (r2 * r1)
                for j in range(r1):
                    row[a * r1 + j] = row[a * r1 + j] + a1[j, b]
                for i in range(r2):
                    row[i * r1 + b] = row[i * r1 + b] - a2[a, i]
                rows.append(row)
    system = linalg.matrix(rows, ctx)
    basis = []
    for vec in linalg.kernel(system, ctx):
        h = linalg.zeros(r2, r1, ctx)
        for a in range(r2):
            for b in range(r1):
                h[a, b] = vec[a * r1 + b]
        basis.append(h)
    return basis


def is_irreducible(rho):
    return len(intertwiner_space(rho, rho)) == 1


def has_invertible(basis, rng=None, trials=8):
    """Search a space of square matrices for an invertible member with random integer combinations"""
    if not basis:
        return False
    rng = rng if rng is not None else np.random.default_rng(0)
    for h in basis:
        if linalg.det(h):
            return True
    for _ in range(trials):
        weights = rng.integers(-1000, 1001, size=len(basis))
        total = sum((h * int(w) for h, w in zip(basis[1:], weights[1:])), basis[0] * int(weights[0]))
        if linalg.det(total):
            return True
    return False


def are_isomorphic(rho1, rho2, rng=None):
    if rho1.rank != rho2.rank:
        return False
    return has_invertible(intertwiner_space(rho1, rho2), rng)


def nth_root_matrix(m, n, ctx):
    """An S, polynomial in m, with S^n = m; None unless m is diagonalizable with n-th roots in the field"""
    size = m.shape[0]
    c = linalg.scalar_value(m)
    if c is not None:
        root = nth_root_scalar(c, n)
        return None if root is None or not root else linalg.scalar_matrix(size, root, ctx)
    charpoly = Poly(ctx, linalg.charpoly(m, ctx))
    eigenvalues = find_roots(charpoly, candidates=[m[i, i] for i in range(size)])
    vectors, roots = [], []
    for lam in eigenvalues:
        root = nth_root_scalar(lam, n)
        if root is None or not root:
            return None
        space = linalg.eigenspace(m, lam, ctx)
        for col in range(space.shape[1]):
            vectors.append(space[:, col])
            roots.append(root)
    if len(vectors) != size:
        return None
    frame = linalg.column_stack(vectors)
    diagonal = linalg.zeros(size, size, ctx)
    for i, root in enumerate(roots):
        diagonal[i, i] = root
    return frame @ diagonal @ linalg.inverse(frame)


def _vectors_with_norm(length, total, bound):
    if length == 0:
        if total == 0:
            yield ()
        return
    top = min(bound, total)
    for first in range(-top, top + 1):
        for rest in _vectors_with_norm(length - 1, total - abs(first), bound):
            yield (first,) + rest


def small_combinations(basis, bound, limit=500):
    """Integer combinations of the basis by increasing l1 norm, coefficients within the bound"""
    def vectors():
        for total in range(1, len(basis) * bound + 1):
            yield from _vectors_with_norm(len(basis), total, bound)

    for coeffs in itertools.islice(vectors(), limit):
        total = basis[0] * coeffs[0]
        for h, c in zip(basis[1:], coeffs[1:]):
            if c:
                total = total + h * c
        yield total


def _canonical_phase(h, n, ctx):
    """Rescale by an n-th root of unity so the first nonzero entry is a positive rational, when possible"""
    first = next(entry for entry in h.flat if entry)
    for j in range(n):
        unit = root_of_unity(ctx, n, j)
        value = first * unit
        if value.is_rational() and value.as_rational() > 0:
            return h * unit
    return h


def certify_fixed_point(rho, chi, rng=None):
    """Normalized H: rho -> twist(rho, chi) with H^n = Id, or None when rho is not fixed"""
    n = chi.order
    if rho.rank % n:
        raise LogConnError(f"rank {rho.rank} is not a multiple of the character order {n}")
    ctx = rho.context
    # Intertwiners rho -> rho tensor chi, residue tags included
    basis = intertwiner_space(rho, twist(rho, chi))
    if not basis:
        logging.info("intertwiner space is empty, representation is not fixed")
        return None
    # Schur: an irreducible rho has a one-dimensional space and H^n is scalar
    if is_irreducible(rho):
        candidates = iter(basis[:1])
    else:
        candidates = small_combinations(basis, get_settings().search_bound)
    saw_invertible = False
    for h in candidates:
        if not linalg.det(h):
            continue
        saw_invertible = True
        # Divide H by an n-th root of H^n that commutes with it
        root = nth_root_matrix(linalg.matrix_power(h, n, ctx), n, ctx)
        if root is None:
            continue
        return FixedPointCertificate(_canonical_phase(h @ linalg.inverse(root), n, ctx), True, chi)
    if saw_invertible or has_invertible(basis, rng):
        raise NormalizationFailedError(f"an intertwiner exists but no normalization with H^{n} = Id was found")
    logging.info("no invertible intertwiner, representation is not fixed")
    return None


@dataclass(frozen=True, eq=False)
class DecompositionData:
    """Cover-side data: the subgroup representation on V = ker(H - Id) and the eigenspace layout"""
    character: Character
    schreier: SchreierData
    subrep: SubgroupRepresentation
    basis: np.ndarray
    eigenspaces: tuple
    residue_blocks: dict


def _contains(space, image):
    return linalg.rank(np.hstack([space, image])) == space.shape[1]


def decompose(rho, chi, cert):
    if not cert.normalized:
        raise EigenspaceDimensionError("certificate is not normalized")
    ctx = rho.context
    n = chi.order
    r = rho.rank
    h = cert.H
    spaces = []
    for j in range(n):
        space = linalg.eigenspace(h, root_of_unity(ctx, n, j), ctx)
        found = 0 if space is None else space.shape[1]
        if found != r // n or r % n:
            raise EigenspaceDimensionError(f"eigenspace for zeta^{j} has dimension {found}, expected {r // n}")
        spaces.append(space)
    for m, c in zip(rho.matrices, chi.exponents):
        for j in range(n):
            if not _contains(spaces[(j + c) % n], m @ spaces[j]):
                raise EigenspaceDimensionError(f"a generator does not carry eigenspace {j} to {(j + c) % n}")
    v = spaces[0]
    left = linalg.left_inverse(v)
    schreier = schreier_generators(chi)
    matrices = []
    for word in schreier.generators:
        image = rho.evaluate(word) @ v
        block = left @ image
        if not linalg.matrices_equal(image, v @ block):
            raise EigenspaceDimensionError(f"subgroup element {word} does not preserve V")
        matrices.append(block)
    blocks = {}
    for label, res in rho.residues.items():
        blocks[label] = []
        for space in spaces:
            image = res @ space
            block = linalg.left_inverse(space) @ image
            if not linalg.matrices_equal(image, space @ block):
                raise EigenspaceDimensionError(f"residue {label} does not preserve the eigenspaces of H")
            blocks[label].append(block)
    subrep = SubgroupRepresentation(chi, tuple(matrices))
    return DecompositionData(chi, schreier, subrep, v, tuple(spaces), blocks)


def induce(sigma, chi=None):
    """Induced representation in the function model: block (c, c + chi(x)) of rho(x) is sigma(t_c x t^-1)"""
    chi = chi or sigma.character
    ctx = sigma.context
    n = chi.order
    s = sigma.rank
    data = schreier_generators(chi)
    ident = linalg.identity(s, ctx)
    matrices = []
    for i in range(chi.generator_count):
        m = linalg.zeros(n * s, n * s, ctx)
        for c in range(n):
            d = (c + chi.exponents[i]) % n
            idx = data.table[(c, i)]
            m[c * s:(c + 1) * s, d * s:(d + 1) * s] = ident if idx is None else sigma.matrices[idx]
        matrices.append(m)
    residues = {}
    for label, value in sigma.residues.items():
        blocks = list(value) if isinstance(value, (list, tuple)) else [value] * n
        residues[label] = linalg.block_diagonal(blocks, ctx)
    return Representation(tuple(matrices), residues)


def induced_roundtrip(sigma, rng=None):
    """decompose(induce(sigma)) is isomorphic to a transversal conjugate of sigma"""
    chi = sigma.character
    rho = induce(sigma)
    cert = certify_fixed_point(rho, chi, rng)
    if cert is None:
        return False
    data = decompose(rho, chi, cert)
    if not are_isomorphic(induce(data.subrep), rho, rng):
        return False
    return any(are_isomorphic(data.subrep, conjugate_subrepresentation(sigma, c), rng) for c in range(chi.order))
