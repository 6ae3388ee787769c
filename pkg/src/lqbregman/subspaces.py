"""Linear subspaces of R^n: annihilators, intersections, sums, membership.

All rank decisions use singular values relative to the largest one.  The
annihilator is expressed in the standard dual coordinates, so a functional
``f`` annihilates ``M`` iff ``f @ m == 0`` for every ``m`` in ``M``; the l_q
geometry never enters here.
"""

import numpy as np

from .errors import DegenerateBasis, DimensionMismatch

__all__ = [
    "Subspace",
    "annihilator",
    "intersect",
    "subspace_sum",
    "contains",
    "same_span",
    "RANK_TOL",
]

RANK_TOL = 1e-10


def _numerical_rank(s, tol=RANK_TOL):
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def _orth_rows(rows, n, tol=RANK_TOL):
    """Orthonormal rows spanning the row space of ``rows``."""
    rows = np.asarray(rows, dtype=float).reshape(-1, n)
    if rows.shape[0] == 0:
        return np.zeros((0, n))
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    return vt[:_numerical_rank(s, tol)]


def _null_rows(rows, n, tol=RANK_TOL):
    """Orthonormal rows spanning ``{f : rows @ f == 0}``."""
    rows = np.asarray(rows, dtype=float).reshape(-1, n)
    if rows.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    return vt[_numerical_rank(s, tol):]


class Subspace:
    """A linear subspace of R^n given by linearly independent basis rows.

    Parameters
    ----------
    basis : array_like, shape (r, n)
        Basis vectors as rows.  ``r`` may be zero.
    ambient_dim : int, optional
        Required when ``basis`` is empty.

    The basis must be numerically independent: after normalizing each row
    the smallest singular value has to exceed ``1e-10``.  Use
    :meth:`spanned_by` to build a subspace from a dependent spanning set.
    """

    __slots__ = ("_basis", "_orth", "_n")

    def __init__(self, basis, ambient_dim=None):
        b = np.asarray(basis, dtype=float)
        if b.size == 0:
            if ambient_dim is None:
                if b.ndim == 2:
                    ambient_dim = b.shape[1]
                else:
                    raise DegenerateBasis("empty basis needs ambient_dim")
            b = np.zeros((0, int(ambient_dim)))
        if b.ndim == 1:
            b = b[None, :]
        if b.ndim != 2:
            raise DegenerateBasis(f"basis must be 2-D, got shape {b.shape}")
        if ambient_dim is not None and b.shape[1] != ambient_dim:
            raise DimensionMismatch(
                f"basis rows have length {b.shape[1]}, expected {ambient_dim}")
        if not np.all(np.isfinite(b)):
            raise DegenerateBasis("basis contains non-finite entries")
        n = b.shape[1]
        if n < 1:
            raise DegenerateBasis("ambient dimension must be positive")
        if b.shape[0]:
            lengths = np.linalg.norm(b, axis=1)
            if np.any(lengths == 0):
                raise DegenerateBasis("basis contains a zero vector")
            s = np.linalg.svd(b / lengths[:, None], compute_uv=False)
            if b.shape[0] > n or s[-1] <= RANK_TOL:
                raise DegenerateBasis(
                    "basis vectors are linearly dependent "
                    f"(smallest normalized singular value {s[-1]:.2e})")
            orth = _orth_rows(b, n)
        else:
            orth = np.zeros((0, n))
        b.setflags(write=False)
        orth.setflags(write=False)
        self._basis = b
        self._orth = orth
        self._n = n

    @classmethod
    def spanned_by(cls, vectors, ambient_dim=None):
        """Subspace spanned by arbitrary (possibly dependent) row vectors."""
        v = np.asarray(vectors, dtype=float)
        if ambient_dim is None:
            ambient_dim = v.shape[-1]
        return cls(_orth_rows(v, ambient_dim), ambient_dim)

    @classmethod
    def whole(cls, n):
        return cls(np.eye(n))

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((0, n)), n)

    @classmethod
    def coordinate(cls, indices, n):
        """span{e_i : i in indices} (zero-based)."""
        return cls(np.eye(n)[list(indices)], n)

    @property
    def ambient_dim(self):
        return self._n

    @property
    def rank(self):
        return self._basis.shape[0]

    @property
    def basis(self):
        """Basis vectors as rows, shape ``(rank, n)``."""
        return self._basis

    @property
    def orthonormal_basis(self):
        """Euclidean-orthonormal rows with the same span."""
        return self._orth

    @property
    def matrix(self):
        """Basis vectors as columns, shape ``(n, rank)``."""
        return self._basis.T

    def euclidean_projection(self, x):
        x = np.asarray(x, dtype=float)
        return (x @ self._orth.T) @ self._orth

    def to_rows(self):
        return self._basis.tolist()

    def __repr__(self):
        return f"Subspace(rank={self.rank}, ambient_dim={self._n})"


def _same_dim(M, N):
    if M.ambient_dim != N.ambient_dim:
        raise DimensionMismatch(
            f"ambient dimensions differ: {M.ambient_dim} vs {N.ambient_dim}")


def annihilator(M: Subspace) -> Subspace:
    """M^perp: dual coordinate vectors vanishing on M."""
    n = M.ambient_dim
    return Subspace(_null_rows(M.orthonormal_basis, n), n)


def intersect(M: Subspace, N: Subspace) -> Subspace:
    """M intersected with N."""
    _same_dim(M, N)
    n = M.ambient_dim
    if M.rank == 0 or N.rank == 0:
        return Subspace.zero(n)
    qm, qn = M.orthonormal_basis, N.orthonormal_basis
    # m = qm.T a = qn.T b  <=>  [qm; -qn].T @ (a, b) = 0
    coeffs = _null_rows(np.hstack([qm.T, -qn.T]), qm.shape[0] + qn.shape[0])
    if coeffs.shape[0] == 0:
        return Subspace.zero(n)
    vecs = coeffs[:, :qm.shape[0]] @ qm
    return Subspace(_orth_rows(vecs, n), n)


def subspace_sum(M: Subspace, N: Subspace) -> Subspace:
    """M + N."""
    _same_dim(M, N)
    n = M.ambient_dim
    return Subspace(_orth_rows(np.vstack([M.orthonormal_basis,
                                          N.orthonormal_basis]), n), n)


def contains(M: Subspace, x, tol=1e-10) -> bool:
    """Whether ``x`` lies in M, judged by its Euclidean residual.

    True iff ``||x - P x||_2 <= tol * (1 + ||x||_2)`` with P the orthogonal
    projector onto M.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (M.ambient_dim,):
        raise DimensionMismatch(
            f"vector of shape {x.shape} in R^{M.ambient_dim}")
    resid = np.linalg.norm(x - M.euclidean_projection(x))
    return bool(resid <= tol * (1.0 + np.linalg.norm(x)))


def same_span(M: Subspace, N: Subspace, tol=1e-10) -> bool:
    """Mutual containment of the two spans."""
    _same_dim(M, N)
    if M.rank != N.rank:
        return False
    return (all(contains(N, v, tol) for v in M.orthonormal_basis)
            and all(contains(M, v, tol) for v in N.orthonormal_basis))
