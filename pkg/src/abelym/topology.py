"""Betti numbers from exact ranks of integer coboundary matrices.

Ranks are computed by Gaussian elimination modulo the prime ``2**31 - 1``.
For the small signed incidence matrices used here this agrees with the
rational rank (torsion of order p would be required to differ), and no
floating point or mass matrix enters, which makes these counts an
independent check on the harmonic-field dimensions.
"""
from __future__ import annotations

import numpy as np

from .mesh import SimplicialComplex, boundary_complex

PRIME = 2**31 - 1


def rank_mod_p(A, p=PRIME):
    """Rank of an integer matrix over GF(p)."""
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    A = np.mod(A.astype(np.int64), p)
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.flatnonzero(A[rank:, c])
        if len(nz) == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, c]), p - 2, p)
        A[rank] = (A[rank] * inv) % p
        below = np.flatnonzero(A[rank + 1:, c]) + rank + 1
        if len(below):
            factors = A[below, c][:, None]
            A[below] = (A[below] - factors * A[rank]) % p
        rank += 1
    return rank


def interior_indices(mesh: SimplicialComplex, k):
    """Indices of k-simplices not contained in the boundary."""
    n = mesh.n_simplices(k)
    if mesh.is_closed or k >= mesh.dim:
        return np.arange(n)
    _, maps = boundary_complex(mesh)
    mask = np.ones(n, dtype=bool)
    mask[maps[k]] = False
    return np.flatnonzero(mask)


def betti_numbers(mesh: SimplicialComplex):
    """Absolute Betti numbers ``b_0 .. b_n`` over GF(p)."""
    n = mesh.dim
    ranks = [rank_mod_p(mesh.coboundary(k)) if k < n else 0 for k in range(n + 1)]
    return [mesh.n_simplices(k) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(n + 1)]


def relative_betti_numbers(mesh: SimplicialComplex):
    """Betti numbers of the cochain complex of cochains vanishing on the boundary."""
    n = mesh.dim
    idx = [interior_indices(mesh, k) for k in range(n + 1)]
    ranks = []
    for k in range(n):
        d = mesh.coboundary(k).tocsr()[idx[k + 1]][:, idx[k]]
        ranks.append(rank_mod_p(d))
    ranks.append(0)
    return [len(idx[k]) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(n + 1)]


def restriction_rank(mesh: SimplicialComplex):
    """Rank of the restriction map H^1(M) -> H^1(boundary).

    Read off the long exact sequence of the pair (M, boundary):
    the image of H^1(M, boundary) in H^1(M) has dimension
    ``b1_rel - (b0(boundary) - (b0 - b0_rel))`` and is the kernel of the
    restriction.
    """
    if mesh.is_closed:
        return 0
    b = betti_numbers(mesh)
    br = relative_betti_numbers(mesh)
    bd, _ = boundary_complex(mesh)
    b0_bd = betti_numbers(bd)[0]
    image_rel = br[1] - (b0_bd - (b[0] - br[0]))
    return b[1] - image_rel


def predicted_codimension(mesh: SimplicialComplex):
    """Codimension of the admissible reduced boundary space predicted from
    Betti numbers alone (surfaces only, where coclosed boundary 1-cochains
    are exactly the harmonic ones)."""
    if mesh.is_closed:
        return 0
    if mesh.dim != 2:
        raise ValueError("the topological prediction is implemented for surfaces")
    bd, _ = boundary_complex(mesh)
    return 2 * (betti_numbers(bd)[1] - restriction_rank(mesh))
