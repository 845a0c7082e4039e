"""Dense linear algebra in a mass-matrix inner product.

Every subspace in the package is stored as a matrix whose columns are
orthonormal with respect to some symmetric positive definite matrix ``M``.
:class:`Metric` wraps ``M`` with a cached Cholesky factor so that solves and
orthonormalisations never form ``M^{-1}`` explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

DEFAULT_RANK_TOL = 1e-10


def as_dense(A):
    return A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)


class Metric:
    """SPD matrix with Cholesky factor ``M = L L^T``."""

    def __init__(self, M):
        self.matrix = as_dense(M).astype(float)
        self.size = self.matrix.shape[0]
        if self.size:
            self._chol = sla.cholesky(self.matrix, lower=True)
        else:
            self._chol = np.zeros((0, 0))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    def solve(self, b):
        """Return ``M^{-1} b``."""
        b = as_dense(b)
        if self.size == 0:
            return b.astype(float)
        return sla.cho_solve((self._chol, True), b)

    def inner(self, a, b):
        return a.T @ (self.matrix @ b)

    def norm(self, a):
        return float(np.sqrt(max(self.inner(a, a), 0.0)))

    def half(self, V):
        """``L^T V``: Euclidean coordinates in which ``M`` becomes the identity."""
        return self._chol.T @ V

    def orthonormalize(self, V, tol=DEFAULT_RANK_TOL, scale=None):
        """M-orthonormal basis of ``span(V)``.

        Singular values of ``L^T V`` below ``tol * scale`` are dropped; by
        default ``scale`` is the largest singular value.
        """
        if self.size == 0:
            return np.zeros((0, 0))
        V = np.asarray(V, dtype=float).reshape(self.size, -1)
        if V.shape[1] == 0:
            return np.zeros((self.size, 0))
        U, s, _ = np.linalg.svd(self.half(V), full_matrices=False)
        if scale is None:
            scale = s[0] if len(s) else 0.0
        keep = s > tol * scale if scale > 0 else np.zeros(len(s), dtype=bool)
        # back-substitute L^T B = U to recover the basis in original coordinates
        B = sla.solve_triangular(self._chol.T, U[:, keep], lower=False)
        return B

    def project(self, B, x):
        """M-orthogonal projection of ``x`` onto ``span(B)`` (B M-orthonormal)."""
        return B @ (B.T @ (self.matrix @ x))

    def projector(self, B):
        return B @ (B.T @ self.matrix)

    def complement(self, V, W, tol=DEFAULT_RANK_TOL):
        """M-orthonormal basis of ``span(V) ⊖ span(W)``; ``W`` need not be
        orthonormal."""
        if self.size == 0:
            return np.zeros((0, 0))
        V = np.asarray(V, dtype=float).reshape(self.size, -1)
        if V.shape[1] == 0:
            return V
        scale = np.linalg.norm(self.half(V), 2)
        BW = self.orthonormalize(W, tol)
        X = V - self.project(BW, V) if BW.shape[1] else V
        return self.orthonormalize(X, tol, scale=scale)

    def max_angle(self, A, B):
        """Largest principal angle between the spans of two M-orthonormal bases.

        Returns pi/2 when the dimensions differ (and 0 for two empty spaces).
        """
        if A.shape[1] != B.shape[1]:
            return float(np.pi / 2)
        if A.shape[1] == 0:
            return 0.0
        R = A - self.project(B, A)
        s = np.linalg.norm(self.half(R), 2)
        return float(np.arcsin(min(1.0, s)))

    def contains(self, outer, inner):
        """Sine of the largest angle between ``span(inner)`` and ``span(outer)``."""
        if inner.shape[1] == 0:
            return 0.0
        if outer.shape[1] == 0:
            return 1.0
        R = inner - self.project(outer, inner)
        return float(np.linalg.norm(self.half(R), 2))


def null_space(A, tol=DEFAULT_RANK_TOL):
    """Euclidean orthonormal null space with relative singular value cutoff."""
    A = as_dense(A)
    if A.shape[0] == 0:
        return np.eye(A.shape[1])
    return sla.null_space(A, rcond=tol)


def numerical_rank(A, tol=DEFAULT_RANK_TOL):
    A = as_dense(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0


def canonical_signs(B):
    """Deterministic basis: flip each column so its largest-magnitude entry is
    positive and sort columns by the index of that entry.

    Applied to columns that are mutually orthonormal, this keeps them so.
    """
    if B.shape[1] == 0:
        return B
    B = B.copy()
    # ties broken toward the lowest index; round to avoid flip-flopping on
    # entries equal up to round-off
    mag = np.round(np.abs(B), 12)
    piv = np.argmax(mag, axis=0)
    signs = np.sign(B[piv, np.arange(B.shape[1])])
    signs[signs == 0] = 1
    B *= signs
    order = np.argsort(piv, kind="stable")
    return B[:, order]


@dataclass
class Subspace:
    """Degree-tagged basis orthonormal in a designated mass inner product."""

    complex: str
    degree: int
    basis: np.ndarray
    tag: str
    metric: Metric | None = field(default=None, repr=False)

    @property
    def dim(self):
        return int(self.basis.shape[1])

    def projector(self):
        return self.metric.projector(self.basis)

    def project(self, x):
        return self.metric.project(self.basis, x)

    def to_json(self):
        return {
            "complex": self.complex,
            "degree": int(self.degree),
            "tag": self.tag,
            "dim": self.dim,
            "basis": [[float(v) for v in col] for col in self.basis.T],
        }


def sym_rel(A):
    """Relative asymmetry ``||A - A^T|| / ||A||`` (Frobenius)."""
    nrm = np.linalg.norm(A)
    return float(np.linalg.norm(A - A.T) / nrm) if nrm > 0 else 0.0
