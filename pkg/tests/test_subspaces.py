import numpy as np
import pytest

from lqbregman.errors import DegenerateBasis, DimensionMismatch
from lqbregman.subspaces import (
    Subspace,
    annihilator,
    contains,
    intersect,
    same_span,
    subspace_sum,
)


def random_subspace(rng, n, r):
    return Subspace(rng.normal(size=(r, n)))


def test_construction_and_invariants():
    M = Subspace([[1, 0, 0.5], [1, 1, 0.99]])
    assert M.rank == 2 and M.ambient_dim == 3
    Q = M.orthonormal_basis
    np.testing.assert_allclose(Q @ Q.T, np.eye(2), atol=1e-14)
    assert all(contains(M, v) for v in Q)
    assert M.matrix.shape == (3, 2)
    with pytest.raises(ValueError):
        M.basis[0, 0] = 5.0


@pytest.mark.parametrize("rows", [
    [[1, 0, 0], [2, 0, 0]],
    [[1, 2, 3], [0, 0, 0]],
    [[1, 0], [0, 1], [1, 1]],
    [[np.nan, 0, 0]],
])
def test_degenerate_bases_rejected(rows):
    with pytest.raises(DegenerateBasis):
        Subspace(rows)


def test_nearly_dependent_basis_rejected_but_spanned_by_works():
    v = np.array([1.0, 2.0, 3.0])
    with pytest.raises(DegenerateBasis):
        Subspace([v, v * (1 + 1e-13)])
    assert Subspace.spanned_by([v, 2 * v, [0, 0, 1]]).rank == 2


def test_special_subspaces():
    assert Subspace.zero(4).rank == 0
    assert Subspace.whole(4).rank == 4
    assert Subspace.coordinate([0, 2], 3).rank == 2
    with pytest.raises(DimensionMismatch):
        Subspace([[1, 2]], ambient_dim=3)


def test_annihilator_examples():
    assert annihilator(Subspace.whole(3)).rank == 0
    assert annihilator(Subspace.zero(3)).rank == 3
    A = annihilator(Subspace.coordinate([0, 1], 3))
    assert same_span(A, Subspace.coordinate([2], 3))


def test_annihilator_definition_and_double_annihilator():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        M = random_subspace(rng, n, int(rng.integers(0, n + 1)))
        A = annihilator(M)
        assert A.rank == n - M.rank
        if A.rank and M.rank:
            assert np.max(np.abs(A.basis @ M.basis.T)) < 1e-10
        assert same_span(annihilator(A), M)


def test_intersect_examples():
    M = Subspace([[1, 2, 0], [0, 1, 1]])
    assert same_span(intersect(M, M), M)
    e = intersect(Subspace.coordinate([0, 1], 3), Subspace.coordinate([0, 2], 3))
    assert same_span(e, Subspace.coordinate([0], 3))
    M1 = Subspace([[1, 0, 0.5], [1, 1, 0.99]])
    M2 = Subspace([[1, 0, 0.5], [1, 1, 1.01]])
    assert same_span(intersect(M1, M2), Subspace([[1, 0, 0.5]]))


def test_sum_examples():
    M = Subspace([[1, 2, 0]])
    assert same_span(subspace_sum(M, Subspace.zero(3)), M)
    assert subspace_sum(Subspace.coordinate([0, 1], 3),
                        Subspace.coordinate([0, 2], 3)).rank == 3
    M1 = Subspace([[1, 0, 0.5], [1, 1, 0.99]])
    M2 = Subspace([[1, 0, 0.5], [1, 1, 1.01]])
    assert subspace_sum(M1, M2).rank == 3


def test_dimension_formula_and_sum_duality():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        # force a nontrivial intersection half of the time
        shared = rng.normal(size=(int(rng.integers(0, 2)), n))
        M = Subspace.spanned_by(np.vstack([shared, rng.normal(size=(int(rng.integers(0, n)), n))]), n)
        N = Subspace.spanned_by(np.vstack([shared, rng.normal(size=(int(rng.integers(0, n)), n))]), n)
        I, S = intersect(M, N), subspace_sum(M, N)
        assert I.rank + S.rank == M.rank + N.rank
        assert all(contains(M, v) and contains(N, v) for v in I.basis)
        assert same_span(S, annihilator(intersect(annihilator(M), annihilator(N))))


def test_mismatched_dimensions():
    with pytest.raises(DimensionMismatch):
        intersect(Subspace.whole(2), Subspace.whole(3))
    with pytest.raises(DimensionMismatch):
        subspace_sum(Subspace.whole(2), Subspace.whole(3))
    with pytest.raises(DimensionMismatch):
        contains(Subspace.whole(2), [1, 2, 3])


def test_contains_examples():
    M = Subspace.coordinate([0, 1], 3)
    assert contains(M, np.zeros(3))
    assert contains(M, M.basis[1])
    assert not contains(M, [1, 2, 3])
    assert contains(Subspace.zero(3), np.zeros(3))
    assert not contains(Subspace.zero(3), [0, 0, 1e-3])


def test_spans_are_invariant_to_basis_choice():
    rng = np.random.default_rng(2)
    B = rng.normal(size=(2, 5))
    T = rng.normal(size=(2, 2))
    assert same_span(Subspace(B), Subspace(T @ B))
    assert not same_span(Subspace(B), Subspace(B[:1]))
