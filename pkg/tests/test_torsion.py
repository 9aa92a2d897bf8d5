from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from logconn.core import linalg
from logconn.core.errors import EigenspaceDimensionError, LogConnError, NormalizationFailedError
from logconn.core.field import field_make
from logconn.core.torsion import (Character, FixedPointCertificate, Representation, SubgroupRepresentation,
                                  are_isomorphic, certify_fixed_point, concat, conjugate_subrepresentation,
                                  decompose, induce, induced_roundtrip, intertwiner_space, invert_word,
                                  is_irreducible, nth_root_matrix, reduce_word, rewrite, schreier_generators, twist)
from tests.strategies import subgroup_representations, triangular_representations

HALF = Character(2, (1, 0))


@pytest.fixture
def q2():
    return field_make(2)


def _m(ctx, rows):
    return linalg.matrix(rows, ctx)


def _antidiagonal(ctx, a=2, b=3):
    return Representation((_m(ctx, [[0, 1], [1, 0]]), _m(ctx, [[a, 0], [0, b]])))


def test_word_helpers():
    assert reduce_word((1, -1, 2, 3, -3)) == (2,)
    assert invert_word((1, -2)) == (2, -1)
    assert concat((1, 2), (-2, 3)) == (1, 3)


@pytest.mark.parametrize("order, exponents", [(1, (1,)), (3, (0, 0)), (6, (2, 4))])
def test_bad_characters(order, exponents):
    with pytest.raises(LogConnError):
        Character(order, exponents)


def test_character_value():
    chi = Character(3, (1, 2))
    assert chi.exponents == (1, 2)
    assert chi.value((1, 2)) == 0
    assert chi.value((-1,)) == 2
    assert Character(3, (4, -1)).exponents == (1, 2)


def test_schreier_generators_for_a_half_character():
    data = schreier_generators(HALF)
    assert data.transversal == ((), (1,))
    assert data.generators == ((1, 1), (2,), (1, 2, -1))
    assert data.table[(0, 0)] is None


def test_schreier_with_no_unit_exponent():
    chi = Character(6, (2, 3))
    data = schreier_generators(chi)
    assert len(data.transversal) == 6
    assert all(chi.value(t) == c for c, t in enumerate(data.transversal))
    assert all(chi.value(g) == 0 for g in data.generators)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.integers(1, 3), st.data())
def test_schreier_index_formula(n, g, data):
    exponents = (1,) + tuple(data.draw(st.lists(st.integers(0, n - 1), min_size=g - 1, max_size=g - 1)))
    chi = Character(n, exponents)
    generators = schreier_generators(chi).generators
    # free subgroup of index n in a free group of rank g
    assert len(generators) == 1 + n * (g - 1)
    assert all(chi.value(w) == 0 for w in generators)


def test_rewrite():
    assert rewrite((1, 1), HALF) == [(0, 1)]
    assert rewrite((1, 2, -1), HALF) == [(2, 1)]
    assert rewrite((-1, -1, 2), HALF) == [(0, -1), (1, 1)]
    with pytest.raises(LogConnError):
        rewrite((1,), HALF)


def test_induce_in_the_function_model(q2):
    sigma = SubgroupRepresentation(HALF, (_m(q2, [[2]]), _m(q2, [[3]]), _m(q2, [[5]])))
    rho = induce(sigma)
    assert linalg.matrices_equal(rho.matrices[0], _m(q2, [[0, 1], [2, 0]]))
    assert linalg.matrices_equal(rho.matrices[1], _m(q2, [[3, 0], [0, 5]]))


def test_subgroup_representation_needs_every_generator(q2):
    with pytest.raises(LogConnError):
        SubgroupRepresentation(HALF, (_m(q2, [[2]]),))


def test_twist_multiplies_by_roots_of_unity(q2):
    rho = _antidiagonal(q2)
    twisted = twist(rho, HALF)
    assert linalg.matrices_equal(twisted.matrices[0], _m(q2, [[0, -1], [-1, 0]]))
    assert linalg.matrices_equal(twisted.matrices[1], rho.matrices[1])


def test_twist_shifts_tagged_residues(q2):
    rho = Representation((_m(q2, [[3]]),), {"0": _m(q2, [[Fraction(1, 2)]])})
    chi = Character(2, (1,), {"0": Fraction(1, 2)})
    assert twist(rho, chi).residues["0"][0, 0] == 1


def test_antidiagonal_is_fixed(q2):
    rho = _antidiagonal(q2)
    assert is_irreducible(rho)
    basis = intertwiner_space(rho, twist(rho, HALF))
    assert len(basis) == 1
    cert = certify_fixed_point(rho, HALF)
    assert cert.normalized
    assert linalg.matrices_equal(cert.H, _m(q2, [[1, 0], [0, -1]]))


def test_decompose_antidiagonal(q2):
    rho = _antidiagonal(q2)
    data = decompose(rho, HALF, certify_fixed_point(rho, HALF))
    assert linalg.matrices_equal(data.basis, _m(q2, [[1], [0]]))
    assert [m[0, 0] for m in data.subrep.matrices] == [1, 2, 3]
    assert are_isomorphic(induce(data.subrep), rho)


def test_decompose_splits_residues_along_the_eigenspaces(q2):
    tags = [_m(q2, [[Fraction(1, 3)]]), _m(q2, [[Fraction(2, 3)]])]
    sigma = SubgroupRepresentation(HALF, (_m(q2, [[2]]), _m(q2, [[3]]), _m(q2, [[5]])), {"0": tags})
    rho = induce(sigma)
    data = decompose(rho, HALF, certify_fixed_point(rho, HALF))
    blocks = data.residue_blocks["0"]
    assert [b.shape for b in blocks] == [(1, 1), (1, 1)]
    assert {b[0, 0].as_rational() for b in blocks} == {Fraction(1, 3), Fraction(2, 3)}
    # Block traces add up to the trace of the residue
    assert sum((linalg.trace(b) for b in blocks), q2.zero()) == linalg.trace(rho.residues["0"])


def test_decompose_needs_normalized_certificate(q2):
    rho = _antidiagonal(q2)
    with pytest.raises(EigenspaceDimensionError):
        decompose(rho, HALF, FixedPointCertificate(_m(q2, [[1, 0], [0, -1]]), False))


def test_diagonal_representation_is_not_fixed(q2):
    rho = Representation((_m(q2, [[2, 0], [0, 3]]), linalg.identity(2, q2)))
    assert certify_fixed_point(rho, HALF) is None


def test_rank_must_be_a_multiple_of_the_order(q2):
    rho = Representation((_m(q2, [[2]]), _m(q2, [[3]])))
    with pytest.raises(LogConnError):
        certify_fixed_point(rho, HALF)


SECOND = Character(2, (0, 1))


def _swap_with_scale(ctx, scale):
    # H = rho(g1) intertwines rho with its twist and H^2 = scale * Id
    return Representation((_m(ctx, [[0, 1], [scale, 0]]), _m(ctx, [[1, 0], [0, -1]])))


def test_no_square_root_of_the_schur_scalar(q2):
    rho = _swap_with_scale(q2, 3)
    assert is_irreducible(rho)
    with pytest.raises(NormalizationFailedError):
        certify_fixed_point(rho, SECOND)


def test_square_schur_scalar_normalizes(q2):
    rho = _swap_with_scale(q2, 4)
    cert = certify_fixed_point(rho, SECOND)
    assert cert.normalized
    assert linalg.matrices_equal(cert.H @ cert.H, linalg.identity(2, q2))


def test_schur_scalar_root_found_by_factoring():
    q12 = field_make(12)
    rho = _swap_with_scale(q12, 3)
    cert = certify_fixed_point(rho, SECOND)
    h = cert.H
    assert linalg.matrices_equal(h @ h, linalg.identity(2, q12))
    twisted = twist(rho, SECOND)
    assert all(linalg.matrices_equal(h @ a, b @ h) for a, b in zip(rho.matrices, twisted.matrices))


def test_nth_root_matrix(q4):
    m = _m(q4, [[4, 0], [0, 9]])
    root = nth_root_matrix(m, 2, q4)
    assert linalg.matrices_equal(root @ root, m)
    minus_one = nth_root_matrix(_m(q4, [[-1, 0], [0, -1]]), 2, q4)
    assert linalg.matrices_equal(minus_one @ minus_one, _m(q4, [[-1, 0], [0, -1]]))
    assert nth_root_matrix(_m(q4, [[2, 0], [0, 3]]), 2, q4) is None


def test_conjugate_by_the_trivial_coset_is_the_same(q2):
    sigma = SubgroupRepresentation(HALF, (_m(q2, [[2]]), _m(q2, [[3]]), _m(q2, [[5]])))
    same = conjugate_subrepresentation(sigma, 0)
    assert all(linalg.matrices_equal(a, b) for a, b in zip(same.matrices, sigma.matrices))
    other = conjugate_subrepresentation(sigma, 1)
    assert [m[0, 0] for m in other.matrices] == [2, 5, 3]


@settings(max_examples=100, deadline=None)
@given(subgroup_representations())
def test_induced_representations_are_fixed(sigma):
    chi = sigma.character
    rho = induce(sigma)
    cert = certify_fixed_point(rho, chi)
    assert cert is not None
    ctx = rho.context
    assert linalg.matrices_equal(linalg.matrix_power(cert.H, chi.order, ctx), linalg.identity(rho.rank, ctx))
    twisted = twist(rho, chi)
    assert all(linalg.matrices_equal(cert.H @ a, b @ cert.H) for a, b in zip(rho.matrices, twisted.matrices))


@settings(max_examples=100, deadline=None)
@given(subgroup_representations())
def test_induce_decompose_roundtrip(sigma):
    assert induced_roundtrip(sigma)


@settings(max_examples=100, deadline=None)
@given(triangular_representations())
def test_twisting_n_times_is_the_identity(case):
    matrices, chi = case
    rho = Representation(matrices)
    twisted = rho
    for _ in range(chi.order):
        twisted = twist(twisted, chi)
    assert all(linalg.matrices_equal(a, b) for a, b in zip(twisted.matrices, rho.matrices))


@settings(max_examples=100, deadline=None)
@given(triangular_representations())
def test_nonzero_trace_is_never_fixed(case):
    matrices, chi = case
    assume(linalg.trace(matrices[0]))
    assume(is_irreducible(Representation(matrices)))
    assert certify_fixed_point(Representation(matrices), chi) is None
