"""Harmonic fields and orthogonal decompositions of cochains.

All subspaces are returned as :class:`~abelym.linalg.Subspace` objects whose
bases are orthonormal in the mass inner product of their degree.  Boundary
conditions of Neumann type are never imposed through a normal-trace operator;
they appear as orthogonality against exact cochains, which is how they arise
from Green's formula.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dec import Cochain, DecOperators
from .linalg import DEFAULT_RANK_TOL, Metric, Subspace, as_dense, canonical_signs, null_space

__all__ = [
    "Subspace",
    "HmfSplit",
    "closed_cochains",
    "exact_cochains",
    "exact_dirichlet",
    "harmonic_fields",
    "harmonic_neumann",
    "harmonic_dirichlet",
    "harmonic_exact",
    "coexact_neumann",
    "hmf_decompose",
    "hodge_decompose_closed",
    "coclosed_projector",
    "coclosed_basis",
]


def _sub(ops, k, basis, tag):
    return Subspace(ops.name, k, canonical_signs(basis), tag, ops.mass(k))


def _trace_zero_coboundary(ops, k, tol):
    """``d_{k-1}`` restricted to cochains that vanish on the boundary (dense)."""
    if k == 0:
        return np.zeros((ops.n(0), 0))
    d = as_dense(ops.d(k - 1))
    return d[:, ops.interior(k - 1)]


def closed_cochains(ops: DecOperators, k, tol=DEFAULT_RANK_TOL):
    """M-orthonormal basis of ``ker d_k``."""
    metric = ops.mass(k)
    return metric.orthonormalize(null_space(ops.d(k), tol), tol)


def exact_cochains(ops: DecOperators, k, tol=DEFAULT_RANK_TOL):
    """M-orthonormal basis of ``ran d_{k-1}``."""
    if k == 0:
        return np.zeros((ops.n(0), 0))
    return ops.mass(k).orthonormalize(as_dense(ops.d(k - 1)), tol)


def exact_dirichlet(ops: DecOperators, k, tol=DEFAULT_RANK_TOL) -> Subspace:
    """Coboundaries of trace-free (k-1)-cochains."""
    B = ops.mass(k).orthonormalize(_trace_zero_coboundary(ops, k, tol), tol)
    return _sub(ops, k, B, "EXACT_D")


def harmonic_fields(ops: DecOperators, k, tol=DEFAULT_RANK_TOL) -> Subspace:
    """Closed cochains orthogonal to every trace-free coboundary.

    Orthogonality to ``d`` of trace-free cochains is the weak form of
    coclosedness at interior simplices; no condition is placed on boundary
    simplices, as for harmonic fields on a manifold with boundary.  On a
    closed complex this is ``ker d ∩ ker delta``.
    """
    metric = ops.mass(k)
    B = metric.complement(closed_cochains(ops, k, tol), _trace_zero_coboundary(ops, k, tol), tol)
    return _sub(ops, k, B, "H")


def harmonic_neumann(ops: DecOperators, k, tol=DEFAULT_RANK_TOL) -> Subspace:
    """``ker d_k`` minus ``ran d_{k-1}``: harmonic fields with zero normal part."""
    metric = ops.mass(k)
    B = metric.complement(closed_cochains(ops, k, tol), exact_cochains(ops, k, tol), tol)
    return _sub(ops, k, B, "H_N")


def harmonic_dirichlet(ops: DecOperators, k, tol=DEFAULT_RANK_TOL) -> Subspace:
    """Harmonic space of the trace-free subcomplex.

    Closed cochains vanishing on the boundary, minus coboundaries of
    trace-free cochains.
    """
    inner = ops.interior(k)
    B = np.zeros((ops.n(k), 0))
    if len(inner):
        # every vector involved vanishes on the boundary, so work with the
        # interior block of the mass matrix and keep boundary entries exactly 0
        metric = Metric(ops.M(k)[np.ix_(inner, inner)])
        d = as_dense(ops.d(k))[:, inner]
        ker = metric.orthonormalize(null_space(d, tol), tol)
        exact = _trace_zero_coboundary(ops, k, tol)[inner]
        Bi = metric.complement(ker, exact, tol)
        B = np.zeros((ops.n(k), Bi.shape[1]))
        B[inner] = Bi
    return _sub(ops, k, B, "H_D")


def harmonic_exact(ops: DecOperators, k, tol=DEFAULT_RANK_TOL) -> Subspace:
    """Harmonic fields that are exact: ``ran d_{k-1}`` minus trace-free coboundaries."""
    metric = ops.mass(k)
    B = metric.complement(exact_cochains(ops, k, tol), _trace_zero_coboundary(ops, k, tol), tol)
    return _sub(ops, k, B, "HARMONIC_EXACT")


def coexact_neumann(ops: DecOperators, k, tol=DEFAULT_RANK_TOL) -> Subspace:
    """Orthogonal complement of the closed cochains, i.e. ``ran delta_{k+1}``."""
    metric = ops.mass(k)
    B = metric.complement(np.eye(ops.n(k)), closed_cochains(ops, k, tol), tol)
    return _sub(ops, k, B, "COEXACT_N")


@dataclass
class HmfSplit:
    e_D: np.ndarray
    h_N: np.ndarray
    h_E: np.ndarray
    c_N: np.ndarray

    def components(self):
        return (self.e_D, self.h_N, self.h_E, self.c_N)

    def total(self):
        return self.e_D + self.h_N + self.h_E + self.c_N

    def to_json(self, complex_name, k):
        return {name: Cochain(complex_name, k, v).to_json()
                for name, v in zip(("e_D", "h_N", "h_E", "c_N"), self.components())}


class HmfSpaces:
    """The three explicitly computed summands of the four-way split.

    Building them once and projecting many cochains is the fast path used by
    the property tests.
    """

    def __init__(self, ops: DecOperators, k, tol=DEFAULT_RANK_TOL):
        self.ops = ops
        self.k = k
        self.metric = ops.mass(k)
        self.e_D = exact_dirichlet(ops, k, tol)
        self.h_N = harmonic_neumann(ops, k, tol)
        self.h_E = harmonic_exact(ops, k, tol)

    def split(self, w) -> HmfSplit:
        w = np.asarray(w, dtype=float)
        e = self.e_D.project(w)
        hn = self.h_N.project(w)
        he = self.h_E.project(w)
        # the remainder is orthogonal to all closed cochains, i.e. coexact
        c = w - e - hn - he
        return HmfSplit(e, hn, he, c)


def hmf_decompose(ops: DecOperators, k, w, tol=DEFAULT_RANK_TOL) -> HmfSplit:
    """Split ``w`` into trace-free exact, Neumann harmonic, harmonic exact and
    coexact parts (pairwise M-orthogonal, summing to ``w``)."""
    if isinstance(w, Cochain):
        w = w.values
    return HmfSpaces(ops, k, tol).split(w)


def hodge_decompose_closed(ops: DecOperators, k, phi, tol=DEFAULT_RANK_TOL):
    """Exact, harmonic and coexact parts of ``phi`` on a closed complex."""
    if not ops.mesh.is_closed:
        raise ValueError("hodge_decompose_closed requires a complex without boundary")
    if isinstance(phi, Cochain):
        phi = phi.values
    metric = ops.mass(k)
    E = exact_cochains(ops, k, tol)
    H = harmonic_fields(ops, k, tol).basis
    exact = metric.project(E, phi)
    harmonic = metric.project(H, phi)
    return exact, harmonic, phi - exact - harmonic


def coclosed_basis(ops: DecOperators, k, tol=DEFAULT_RANK_TOL) -> Subspace:
    """M-orthonormal basis of ``ker delta_k`` (the orthogonal complement of
    ``ran d_{k-1}``)."""
    metric = ops.mass(k)
    B = metric.complement(np.eye(ops.n(k)), exact_cochains(ops, k, tol), tol)
    return _sub(ops, k, B, "KER_COCLOSED")


def coclosed_projector(ops: DecOperators, k, tol=DEFAULT_RANK_TOL):
    """M-orthogonal projector onto ``ker delta_k`` as a dense matrix."""
    if not ops.mesh.is_closed:
        raise ValueError("coclosed_projector is defined on closed complexes")
    return coclosed_basis(ops, k, tol).projector()
