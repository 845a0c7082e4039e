"""Cochain operators: coboundaries, Whitney mass matrices, codifferentials,
trace matrices and the boundary bracket."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix

from .linalg import Metric
from .mesh import BoundaryTrace, DegenerateSimplexError, SimplicialComplex, _boundary_trace, _parity

__all__ = [
    "Cochain",
    "BoundaryDatum",
    "DecOperators",
    "build_operators",
    "whitney_mass",
    "bracket",
    "extend_collar",
]


@dataclass(frozen=True)
class Cochain:
    complex: str
    degree: int
    values: np.ndarray

    def to_json(self):
        return {"complex": self.complex, "degree": int(self.degree),
                "values": [float(v) for v in self.values]}


@dataclass(frozen=True)
class BoundaryDatum:
    """Dirichlet/Neumann pair of 1-cochains on one boundary complex."""

    phiD: np.ndarray
    phiN: np.ndarray
    complex: str = "dM"

    def __post_init__(self):
        if np.shape(self.phiD) != np.shape(self.phiN):
            raise ValueError("Dirichlet and Neumann parts live on different complexes")


# ----------------------------------------------------------------------
# Whitney mass matrices
def _barycentric_gram(points):
    """Gram matrices of barycentric gradients for a batch of simplices.

    ``points`` has shape (C, n+1, ambient).  Works for simplices embedded in a
    higher dimensional space through the pseudo-inverse of the edge matrix.
    """
    E = points[:, 1:, :] - points[:, :1, :]  # (C, n, amb)
    P = np.linalg.pinv(E)  # (C, amb, n); column i is grad(lambda_{i+1})
    grads = np.transpose(P, (0, 2, 1))  # (C, n, amb)
    g0 = -grads.sum(axis=1, keepdims=True)
    grads = np.concatenate([g0, grads], axis=1)  # (C, n+1, amb)
    return grads @ np.transpose(grads, (0, 2, 1))


def _volumes(points):
    E = points[:, 1:, :] - points[:, :1, :]
    n = E.shape[1]
    gram = E @ np.transpose(E, (0, 2, 1))
    return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)) / math.factorial(n)


def whitney_mass(mesh: SimplicialComplex, k):
    """Galerkin mass matrix of lowest-order Whitney k-forms."""
    n = mesh.dim
    N = mesh.n_simplices(k)
    cells = mesh.simplices(n)
    if len(cells) == 0:
        return csr_matrix((N, N))
    pts = mesh.vertices[cells]
    vol = _volumes(pts)
    scale = np.ptp(mesh.vertices, axis=0).max() ** n if len(mesh.vertices) > 1 else 1.0
    bad = np.flatnonzero(vol <= 1e-12 * max(scale, 1e-300))
    if len(bad):
        s = tuple(int(v) for v in cells[bad[0]])
        raise DegenerateSimplexError(f"simplex {s} has zero volume; mass matrix would be singular", s)
    G = _barycentric_gram(pts)
    local = list(itertools.combinations(range(n + 1), k + 1))
    # integral of lambda_p lambda_q over the cell divided by its volume
    def lam(p, q):
        return (1.0 + (p == q)) / ((n + 1) * (n + 2))

    fact2 = math.factorial(k) ** 2
    blocks = {}
    for ia, a in enumerate(local):
        for ib, b in enumerate(local):
            if ib < ia:
                continue
            acc = np.zeros(len(cells))
            for j, l in itertools.product(range(k + 1), repeat=2):
                ra = [x for x in a if x != a[j]]
                rb = [x for x in b if x != b[l]]
                if k == 0:
                    det = 1.0
                else:
                    det = np.linalg.det(G[:, ra][:, :, rb])
                acc += (-1) ** (j + l) * lam(a[j], b[l]) * det
            blocks[ia, ib] = fact2 * vol * acc
    gidx = np.stack([np.array([mesh._index[k][tuple(c[list(a)])] for c in cells]) for a in local], axis=1)
    rows, cols, vals = [], [], []
    for (ia, ib), v in blocks.items():
        rows.append(gidx[:, ia])
        cols.append(gidx[:, ib])
        vals.append(v)
        if ia != ib:
            rows.append(gidx[:, ib])
            cols.append(gidx[:, ia])
            vals.append(v)
    M = csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    M.sum_duplicates()
    return M


# ----------------------------------------------------------------------
class DecOperators:
    """All discrete operators of one complex.

    Attributes are computed lazily and cached; instances are read-only after
    construction, so they may be shared between threads once warmed up (the
    verification suite uses one instance per thread).
    """

    def __init__(self, mesh: SimplicialComplex):
        self.mesh = mesh
        self.dim = mesh.dim

    @property
    def name(self):
        return self.mesh.name

    def n(self, k):
        return self.mesh.n_simplices(k)

    @cached_property
    def _d(self):
        return [self.mesh.coboundary(k) for k in range(self.dim)]

    def d(self, k):
        """Coboundary ``d_k`` (integer CSR); empty beyond the top degree."""
        if 0 <= k < self.dim:
            return self._d[k]
        return csr_matrix((self.n(k + 1), self.n(k)), dtype=np.int64)

    @cached_property
    def _mass(self):
        return [Metric(whitney_mass(self.mesh, k)) for k in range(self.dim + 1)]

    def mass(self, k) -> Metric:
        return self._mass[k]

    def M(self, k):
        return self._mass[k].matrix

    def codifferential(self, k):
        """Dense matrix of ``delta_k = M_{k-1}^{-1} d_{k-1}^T M_k``."""
        if k == 0:
            return np.zeros((0, self.n(0)))
        return self.mass(k - 1).solve(self.d(k - 1).T @ self.M(k))

    def apply_codifferential(self, k, x):
        if k == 0:
            return np.zeros((0,) + np.shape(x)[1:])
        return self.mass(k - 1).solve(self.d(k - 1).T @ (self.M(k) @ x))

    # ------------------------------------------------------------------
    # boundary
    @cached_property
    def trace_data(self) -> BoundaryTrace:
        return _boundary_trace(self.mesh)

    @cached_property
    def boundary(self) -> "DecOperators":
        """Operators of the boundary complex (closed, induced metric)."""
        return DecOperators(self.trace_data.complex)

    def trace_index(self, k):
        if k >= self.dim:
            return np.zeros(0, dtype=np.int64)
        return self.trace_data.index_maps[k]

    def trace(self, k):
        """Trace matrix ``T_k`` restricting k-cochains of M to the boundary."""
        idx = self.trace_index(k)
        return csr_matrix((np.ones(len(idx)), (np.arange(len(idx)), idx)),
                          shape=(len(idx), self.n(k)))

    def component_rows(self, label, k):
        """Indices of boundary k-simplices belonging to a labelled component."""
        bd = self.trace_data.complex
        cells = bd.cells[bd.cell_groups[label]]
        if k == bd.dim:
            return np.array(sorted(bd.index_of(k, c) for c in cells), dtype=np.int64)
        faces = {tuple(f) for c in cells for f in itertools.combinations(c, k + 1)}
        return np.array(sorted(bd.index_of(k, f) for f in faces), dtype=np.int64)

    def interior(self, k):
        mask = np.ones(self.n(k), dtype=bool)
        mask[self.trace_index(k)] = False
        return np.flatnonzero(mask)

    # ------------------------------------------------------------------
    def cochain(self, k, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n(k),):
            raise ValueError(f"expected {self.n(k)} values for a {k}-cochain, got {values.shape}")
        return Cochain(self.name, k, values)


def build_operators(mesh: SimplicialComplex) -> DecOperators:
    """Build and warm every operator; raises DegenerateSimplexError if a mass
    matrix cannot be formed."""
    ops = DecOperators(mesh)
    for k in range(mesh.dim + 1):
        ops.mass(k)
    return ops


def bracket(sigma_ops: DecOperators, a: BoundaryDatum, b: BoundaryDatum):
    """``<a.phiD, b.phiN>`` in the degree-1 mass inner product of the hypersurface."""
    if a.complex != b.complex:
        raise ValueError("boundary data live on different complexes")
    n1 = sigma_ops.n(1)
    if np.shape(a.phiD) != (n1,) or np.shape(b.phiN) != (n1,):
        raise ValueError("boundary data do not match the hypersurface")
    return float(a.phiD @ (sigma_ops.M(1) @ b.phiN))


# ----------------------------------------------------------------------
def _collar_layer_weight(mesh: SimplicialComplex):
    """Discrete cutoff on vertices: 1 on the boundary, 0 elsewhere.

    On collar meshes the boundary is layer 0 (and the top layer), which is the
    same rule; the function exists so that both cases share one definition.
    """
    psi = np.zeros(mesh.n_vertices)
    if mesh.is_closed:
        return psi
    bd = _boundary_trace(mesh)
    psi[bd.vertex_map] = 1.0
    return psi


def extend_collar(ops: DecOperators, phi, k=1):
    """Extend a boundary k-cochain into M with support in the first layer.

    Each k-simplex of M receives ``phi`` of the boundary simplex it lies over
    times the mean cutoff value of its vertices.  Boundary simplices get their
    own value, so the trace is reproduced exactly; simplices with a vertex off
    the boundary carry only a fraction of it.  On collar meshes "lies over"
    uses the recorded base-vertex map; elsewhere only boundary simplices are
    lifted and every other coefficient is zero.
    """
    mesh = ops.mesh
    phi = np.asarray(phi, dtype=float)
    bd = ops.trace_data
    if phi.shape != (bd.complex.n_simplices(k),):
        raise ValueError("boundary cochain has the wrong length")
    out = np.zeros(ops.n(k))
    if k >= mesh.dim or len(phi) == 0:
        return out
    out[bd.index_maps[k]] = phi
    if mesh.base_vertex is None or mesh.vertex_layer is None:
        return out
    layer = mesh.vertex_layer
    top = layer.max()
    base = mesh.base_vertex
    # boundary simplices keyed by base vertices, separately for each side
    on_side = {0: {}, top: {}}
    for j, v in enumerate(bd.complex.simplices(k)):
        gv = bd.vertex_map[v]
        side = int(layer[gv[0]])
        on_side[side][tuple(sorted(base[gv]))] = phi[j]
    for i, s in enumerate(mesh.simplices(k)):
        ls = layer[s]
        if np.all(ls == ls[0]) and ls[0] in (0, top):
            continue  # boundary simplex, already set
        bs = base[s]
        if len(set(bs.tolist())) != len(bs):
            continue  # vertical simplices carry nothing
        for side, first in ((0, 1), (top, top - 1)):
            if not np.all(np.isin(ls, (side, first))):
                continue
            key = tuple(sorted(bs.tolist()))
            if key not in on_side[side]:
                continue
            sign = _parity(bs)
            psi = np.mean(ls == side)
            out[i] += sign * psi * on_side[side][key]
    return out
