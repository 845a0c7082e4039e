"""Oriented simplicial meshes, generators, collars and gluing.

A :class:`SimplicialComplex` stores its top-dimensional cells as sorted vertex
tuples plus an orientation sign per cell.  Lower-dimensional simplices are
derived on demand and always carry the orientation of their sorted vertex
order, which is what the coboundary matrices in :mod:`abelym.dec` assume.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "MeshError",
    "ParseError",
    "NonManifoldError",
    "OrientationError",
    "DegenerateSimplexError",
    "GluingError",
    "GluingMap",
    "SimplicialComplex",
    "BoundaryTrace",
    "load_mesh",
    "dump_mesh",
    "gen_circle",
    "gen_disk",
    "gen_annulus",
    "gen_cube",
    "collar",
    "boundary_complex",
    "glue",
    "annulus_gluing_map",
    "euler_characteristic",
]


class MeshError(ValueError):
    """Base class for invalid mesh input."""


class ParseError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


class OrientationError(MeshError):
    pass


class DegenerateSimplexError(MeshError):
    def __init__(self, message, simplex=None):
        super().__init__(message)
        self.simplex = simplex


class GluingError(MeshError):
    pass


def _parity(seq):
    """Sign of the permutation that sorts ``seq`` (entries distinct)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class GluingMap:
    """Identification of boundary component ``source`` with ``target``.

    ``vertex_bijection`` holds ``(source vertex, target vertex)`` pairs in the
    numbering of the complex being glued.
    """

    source_component: str
    target_component: str
    vertex_bijection: tuple

    def to_dict(self):
        return {
            "source_component": self.source_component,
            "target_component": self.target_component,
            "vertex_bijection": [list(map(int, p)) for p in self.vertex_bijection],
        }

    @classmethod
    def from_dict(cls, data):
        pairs = tuple((int(a), int(b)) for a, b in data["vertex_bijection"])
        return cls(data["source_component"], data["target_component"], pairs)


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Oriented simplicial complex with embedded vertex coordinates.

    Attributes
    ----------
    dim : int
        Dimension of the top cells.
    vertices : ndarray, shape (V, ambient)
    cells : ndarray, shape (C, dim + 1)
        Top cells, each row sorted ascending.
    orientation : ndarray, shape (C,)
        +1 if the sorted vertex order is positively oriented, else -1.
    boundary_labels : dict
        Label -> indices into ``simplices(dim - 1)`` of the boundary facets.
    cell_groups : dict
        Label -> indices into ``cells``; used by boundary complexes to remember
        which component each cell came from.
    vertex_layer, base_vertex : ndarray or None
        Collar bookkeeping: layer index of every vertex and the vertex of the
        base hypersurface it sits over.
    """

    dim: int
    vertices: np.ndarray
    cells: np.ndarray
    orientation: np.ndarray
    boundary_labels: dict = field(default_factory=dict)
    metric_source: str = "embedded"
    name: str = "M"
    cell_groups: dict = field(default_factory=dict)
    vertex_layer: np.ndarray | None = None
    base_vertex: np.ndarray | None = None
    gluing_maps: tuple = ()

    # ------------------------------------------------------------------
    # construction
    @classmethod
    def from_oriented_cells(cls, vertices, cells, *, dim=None, **kwargs):
        """Build from cells whose vertex order encodes orientation."""
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim == 1:
            vertices = vertices[:, None]
        cells = np.asarray(cells, dtype=np.int64)
        if dim is None:
            dim = cells.shape[1] - 1
        if cells.size == 0:
            cells = np.zeros((0, dim + 1), dtype=np.int64)
        orient = np.array([_parity(c) for c in cells], dtype=np.int64)
        return cls(dim=dim, vertices=vertices, cells=np.sort(cells, axis=1),
                   orientation=orient, **kwargs)

    # ------------------------------------------------------------------
    # combinatorics
    @property
    def n_vertices(self):
        return len(self.vertices)

    @cached_property
    def _simplices(self):
        out = []
        for k in range(self.dim + 1):
            if k == self.dim:
                # keep lexicographic order for all degrees
                rows = np.unique(self.cells, axis=0) if len(self.cells) else self.cells
            elif len(self.cells) == 0:
                rows = np.zeros((0, k + 1), dtype=np.int64)
            else:
                combos = list(itertools.combinations(range(self.dim + 1), k + 1))
                faces = np.concatenate([self.cells[:, c] for c in combos], axis=0)
                rows = np.unique(faces, axis=0)
            out.append(np.ascontiguousarray(rows, dtype=np.int64))
        return out

    def simplices(self, k):
        """Sorted k-simplices in lexicographic order."""
        if k < 0 or k > self.dim:
            return np.zeros((0, k + 1), dtype=np.int64)
        return self._simplices[k]

    def n_simplices(self, k):
        return len(self.simplices(k))

    @cached_property
    def _index(self):
        return [{tuple(r): i for i, r in enumerate(self.simplices(k))}
                for k in range(self.dim + 1)]

    def index_of(self, k, simplex):
        return self._index[k][tuple(sorted(int(v) for v in simplex))]

    @cached_property
    def _cell_perm(self):
        """Position of each stored cell inside ``simplices(dim)``."""
        idx = self._index[self.dim]
        return np.array([idx[tuple(c)] for c in self.cells], dtype=np.int64)

    @cached_property
    def cell_orientation(self):
        """Orientation signs aligned with ``simplices(dim)``."""
        out = np.zeros(self.n_simplices(self.dim), dtype=np.int64)
        out[self._cell_perm] = self.orientation
        return out

    def coboundary(self, k):
        """Signed incidence matrix from k-cochains to (k+1)-cochains (COO, int)."""
        rows, cols, vals = [], [], []
        upper = self.simplices(k + 1)
        idx = self._index[k] if k <= self.dim else {}
        for r, s in enumerate(upper):
            for i in range(k + 2):
                face = tuple(np.delete(s, i))
                rows.append(r)
                cols.append(idx[face])
                vals.append(-1 if i % 2 else 1)
        shape = (len(upper), self.n_simplices(k))
        return coo_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=shape).tocsr()

    @cached_property
    def facet_cell_count(self):
        if self.dim == 0:
            return np.zeros(0, dtype=np.int64)
        d = self.coboundary(self.dim - 1)
        return np.asarray(abs(d).sum(axis=0)).ravel().astype(np.int64)

    @cached_property
    def boundary_facets(self):
        """Indices (into ``simplices(dim-1)``) of facets with a single cell."""
        return np.flatnonzero(self.facet_cell_count == 1)

    @cached_property
    def induced_orientation(self):
        """Induced orientation sign of each boundary facet (aligned with
        ``boundary_facets``)."""
        if self.dim == 0 or len(self.boundary_facets) == 0:
            return np.zeros(0, dtype=np.int64)
        d = self.coboundary(self.dim - 1).tocsc()
        signs = self.cell_orientation
        out = []
        for f in self.boundary_facets:
            lo, hi = d.indptr[f], d.indptr[f + 1]
            cell = d.indices[lo]
            out.append(int(d.data[lo]) * int(signs[cell]))
        return np.array(out, dtype=np.int64)

    def boundary_components(self):
        """Connected components of the boundary as arrays of facet indices."""
        facets = self.boundary_facets
        if len(facets) == 0:
            return []
        if self.dim == 1:
            return [facets[[i]] for i in range(len(facets))]
        ridges = self.simplices(self.dim - 2)
        ridx = self._index[self.dim - 2]
        fac = self.simplices(self.dim - 1)[facets]
        rows, cols = [], []
        for i, f in enumerate(fac):
            for j in range(len(f)):
                rows.append(i)
                cols.append(ridx[tuple(np.delete(f, j))])
        inc = coo_matrix((np.ones(len(rows)), (rows, cols)),
                         shape=(len(facets), len(ridges))).tocsr()
        adj = inc @ inc.T
        ncomp, labels = connected_components(adj, directed=False)
        order = sorted(range(ncomp), key=lambda c: facets[labels == c].min())
        return [facets[labels == c] for c in order]

    @property
    def is_closed(self):
        return len(self.boundary_facets) == 0

    def with_name(self, name):
        return replace(self, name=name)

    def oriented_top(self):
        """Per-simplex orientation signs of ``simplices(dim)`` as a cochain.

        On a hypersurface this is the cochain of the oriented volume form
        integrated over each cell, e.g. the uniform circulation on a circle.
        """
        return self.cell_orientation.astype(float)

    def validate(self):
        _validate(self)
        return self

    # ------------------------------------------------------------------
    # serialization
    def to_json_dict(self):
        cells = []
        for c, s in zip(self.cells, self.orientation):
            c = [int(v) for v in c]
            if s < 0:
                c[0], c[1] = c[1], c[0]
            cells.append(c)
        labels = {k: [int(i) for i in v] for k, v in sorted(self.boundary_labels.items())}
        out = {
            "dim": int(self.dim),
            "vertices": [[float(x) for x in v] for v in self.vertices],
            "cells": cells,
            "boundary_labels": labels,
            "metric_source": self.metric_source,
        }
        if self.gluing_maps:
            out["gluing_maps"] = [g.to_dict() for g in self.gluing_maps]
        return out


def dump_mesh(mesh):
    """Serialize to the JSON mesh format (bytes, deterministic)."""
    return (json.dumps(mesh.to_json_dict(), indent=1, sort_keys=True) + "\n").encode()


def load_mesh(content, name="M"):
    """Parse and validate a JSON mesh.

    Raises
    ------
    ParseError, NonManifoldError, OrientationError, DegenerateSimplexError
    """
    if isinstance(content, (bytes, bytearray)):
        content = content.decode()
    try:
        data = json.loads(content)
        dim = int(data["dim"])
        vertices = np.asarray(data["vertices"], dtype=float)
        cells = data["cells"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"malformed mesh file: {exc}") from exc
    if not cells:
        raise ParseError("mesh has no cells")
    if dim not in (1, 2, 3):
        raise ParseError(f"unsupported dimension {dim}")
    cells = np.asarray(cells, dtype=np.int64)
    if cells.ndim != 2 or cells.shape[1] != dim + 1:
        raise ParseError("cells must be lists of dim+1 vertex indices")
    if vertices.ndim != 2 or cells.min() < 0 or cells.max() >= len(vertices):
        raise ParseError("cell references an unknown vertex")
    if any(len(set(c)) != len(c) for c in cells.tolist()):
        raise DegenerateSimplexError("cell with repeated vertex")
    labels = {str(k): np.asarray(v, dtype=np.int64)
              for k, v in data.get("boundary_labels", {}).items()}
    mesh = SimplicialComplex.from_oriented_cells(
        vertices, cells, dim=dim, boundary_labels=labels,
        metric_source=data.get("metric_source", "embedded"), name=name)
    try:
        gmaps = tuple(GluingMap.from_dict(g) for g in data.get("gluing_maps", []))
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"malformed gluing map: {exc}") from exc
    if gmaps:
        mesh = replace(mesh, gluing_maps=gmaps)
    if not labels:
        mesh = _autolabel(mesh)
    return mesh.validate()


# ----------------------------------------------------------------------
# validation
def _simplex_volume(points):
    """Unsigned k-volume of a simplex given as (k+1, ambient) points."""
    edges = (points[1:] - points[0]).T
    k = edges.shape[1]
    if k == 0:
        return 1.0
    gram = edges.T @ edges
    return math.sqrt(max(np.linalg.det(gram), 0.0)) / math.factorial(k)


def _tup(simplex):
    return tuple(int(v) for v in simplex)


def _validate(mesh):
    n = mesh.dim
    cells = mesh.cells
    if len(cells) == 0:
        return
    if len(np.unique(cells, axis=0)) != len(cells):
        raise NonManifoldError("duplicate cells")
    for c in cells:
        if len(set(c.tolist())) != n + 1:
            raise DegenerateSimplexError(f"cell {_tup(c)} repeats a vertex", _tup(c))
    # zero-volume check
    scale = np.ptp(mesh.vertices, axis=0).max() if len(mesh.vertices) else 1.0
    for c in cells:
        vol = _simplex_volume(mesh.vertices[c])
        if vol <= 1e-12 * max(scale, 1e-300) ** n:
            raise DegenerateSimplexError(f"cell {_tup(c)} has zero volume", _tup(c))
    if n == 0:
        return
    counts = mesh.facet_cell_count
    bad = np.flatnonzero(counts > 2)
    if len(bad):
        f = _tup(mesh.simplices(n - 1)[bad[0]])
        raise NonManifoldError(f"facet {f} is shared by {counts[bad[0]]} cells")
    # interior facets must receive opposite induced orientations
    d = mesh.coboundary(n - 1).tocsc()
    signs = mesh.cell_orientation
    for f in np.flatnonzero(counts == 2):
        lo = d.indptr[f]
        s = d.data[lo:lo + 2] * signs[d.indices[lo:lo + 2]]
        if s[0] == s[1]:
            raise OrientationError(
                f"cells adjacent across facet {_tup(mesh.simplices(n - 1)[f])} are inconsistently oriented")
    _check_boundary_closed(mesh)
    bset = set(mesh.boundary_facets.tolist())
    seen = set()
    for label, facets in mesh.boundary_labels.items():
        fs = set(int(i) for i in facets)
        if not fs <= bset:
            raise NonManifoldError(f"boundary label {label!r} contains interior facets")
        if fs & seen:
            raise NonManifoldError(f"boundary label {label!r} overlaps another component")
        seen |= fs
        _check_closed_facets(mesh, np.array(sorted(fs), dtype=np.int64), label)
    if mesh.boundary_labels and seen != bset:
        raise NonManifoldError("boundary labels do not cover the boundary")


def _check_closed_facets(mesh, facets, label="boundary"):
    n = mesh.dim
    if n < 2 or len(facets) == 0:
        return
    ridge_count = {}
    for f in mesh.simplices(n - 1)[facets]:
        for j in range(n):
            r = tuple(np.delete(f, j))
            ridge_count[r] = ridge_count.get(r, 0) + 1
    bad = [r for r, c in ridge_count.items() if c != 2]
    if bad:
        raise NonManifoldError(
            f"{label} is not a closed manifold near {bad[0]} "
            f"({ridge_count[bad[0]]} incident boundary facets)")


def _check_boundary_closed(mesh):
    _check_closed_facets(mesh, mesh.boundary_facets)


def _autolabel(mesh, prefix="Sigma"):
    comps = mesh.boundary_components()
    labels = {f"{prefix}{i + 1}": c for i, c in enumerate(comps)}
    return replace(mesh, boundary_labels=labels)


def euler_characteristic(mesh):
    return int(sum((-1) ** k * mesh.n_simplices(k) for k in range(mesh.dim + 1)))


# ----------------------------------------------------------------------
# orientation helpers
def _orient_consistently(cells, seeds):
    """Choose cell orientations so adjacent cells induce opposite signs on
    shared facets.  ``seeds`` maps a cell index to its fixed sign; every
    connected component must contain one seed.
    """
    cells = np.sort(np.asarray(cells, dtype=np.int64), axis=1)
    n = cells.shape[1] - 1
    facet_owner = {}
    for ci, c in enumerate(cells):
        for i in range(n + 1):
            facet_owner.setdefault(tuple(np.delete(c, i)), []).append((ci, i))
    sign = np.zeros(len(cells), dtype=np.int64)
    stack = []
    for ci, s in seeds.items():
        if sign[ci] == 0:
            sign[ci] = s
            stack.append(ci)
        while stack:
            ci = stack.pop()
            c = cells[ci]
            for i in range(n + 1):
                for cj, j in facet_owner[tuple(np.delete(c, i))]:
                    if cj == ci:
                        continue
                    want = -sign[ci] * (-1) ** i * (-1) ** j
                    if sign[cj] == 0:
                        sign[cj] = want
                        stack.append(cj)
                    elif sign[cj] != want:
                        raise OrientationError("complex is not orientable")
    if np.any(sign == 0):
        raise OrientationError("orientation seeds do not reach every component")
    return cells, sign


def _planar_sign(points):
    """Sign of the oriented area/volume of a simplex in R^n (sorted order)."""
    edges = points[1:] - points[0]
    return 1 if np.linalg.det(edges) > 0 else -1


def _planar_complex(vertices, cells, **kwargs):
    vertices = np.asarray(vertices, dtype=float)
    cells = np.sort(np.asarray(cells, dtype=np.int64), axis=1)
    orient = np.array([_planar_sign(vertices[c]) for c in cells], dtype=np.int64)
    mesh = SimplicialComplex(dim=cells.shape[1] - 1, vertices=vertices, cells=cells,
                             orientation=orient, **kwargs)
    return mesh


# ----------------------------------------------------------------------
# generators
def _ring(m, radius, phase=0.0):
    t = 2 * np.pi * (np.arange(m) + phase) / m
    return np.column_stack([radius * np.cos(t), radius * np.sin(t)])


def gen_circle(m, radius=1.0, name=None):
    """Closed polygonal circle with ``m`` vertices, oriented counter-clockwise."""
    if m < 3:
        raise ValueError("a circle needs at least 3 edges")
    if radius <= 0:
        raise ValueError("radius must be positive")
    cells = [(i, (i + 1) % m) for i in range(m)]
    mesh = SimplicialComplex.from_oriented_cells(
        _ring(m, radius), cells, dim=1, name=name or f"circle{m}",
        cell_groups={"Sigma": np.arange(m)})
    return mesh.validate()


def _zip_rings(inner_ids, inner_ang, outer_ids, outer_ang):
    """Triangulate the band between two concentric rings by merging angles."""
    tris = []
    a, b = len(inner_ids), len(outer_ids)
    i = j = 0
    while i < a or j < b:
        ni = inner_ang[i + 1] if i + 1 <= a else np.inf
        nj = outer_ang[j + 1] if j + 1 <= b else np.inf
        if j < b and (i >= a or nj <= ni):
            tris.append((inner_ids[i % a], outer_ids[j % b], outer_ids[(j + 1) % b]))
            j += 1
        else:
            tris.append((inner_ids[i % a], outer_ids[j % b], inner_ids[(i + 1) % a]))
            i += 1
    return tris


def gen_disk(m, name=None):
    """Triangulated unit disk with ``m`` boundary edges.

    Interior rings shrink linearly toward a centre vertex; consecutive rings
    are stitched by merging their vertex angles.
    """
    if m < 3:
        raise ValueError("a disk needs at least 3 boundary edges")
    nrings = max(1, round(m / (2 * np.pi)))
    counts = [max(3, round(m * r / nrings)) for r in range(1, nrings + 1)]
    counts[-1] = m
    verts = [np.zeros((1, 2))]
    ids = []
    start = 1
    for r, c in enumerate(counts, 1):
        verts.append(_ring(c, r / nrings))
        ids.append(np.arange(start, start + c))
        start += c
    tris = [(0, ids[0][i], ids[0][(i + 1) % counts[0]]) for i in range(counts[0])]
    for r in range(nrings - 1):
        ai = np.arange(counts[r] + 1) / counts[r]
        ao = np.arange(counts[r + 1] + 1) / counts[r + 1]
        tris += _zip_rings(ids[r], ai, ids[r + 1], ao)
    mesh = _planar_complex(np.vstack(verts), tris, name=name or f"disk{m}")
    return _autolabel(mesh).validate()


def gen_annulus(m, r_in=1.0, r_out=2.0, rings=None, name=None):
    """Triangulated annulus with ``m`` edges on each boundary circle.

    The number of radial layers defaults to the smallest count (at least 3)
    giving roughly square cells, so that the two circles can be glued into a
    simplicial torus.
    """
    if m < 3:
        raise ValueError("an annulus needs at least 3 edges per circle")
    if not (0 < r_in < r_out):
        raise ValueError("radii must satisfy 0 < r_in < r_out")
    if rings is None:
        rings = max(3, math.ceil(m * (r_out - r_in) / (np.pi * (r_in + r_out))))
    radii = np.linspace(r_in, r_out, rings + 1)
    verts = np.vstack([_ring(m, r) for r in radii])
    tris = []
    for j in range(rings):
        for i in range(m):
            a, b = j * m + i, j * m + (i + 1) % m
            c, d = (j + 1) * m + i, (j + 1) * m + (i + 1) % m
            tris += [(a, b, d), (a, d, c)]
    mesh = _planar_complex(verts, tris, name=name or f"annulus{m}")
    comps = mesh.boundary_components()
    labels = {}
    fac = mesh.simplices(1)
    for comp in comps:
        r = np.linalg.norm(mesh.vertices[fac[comp[0], 0]])
        labels["Sigma_inner" if r < 0.5 * (r_in + r_out) else "Sigma_outer"] = comp
    return replace(mesh, boundary_labels=labels).validate()


_KUHN = list(itertools.permutations(range(3)))


def gen_cube(k, name=None):
    """Unit cube split into ``k**3`` sub-cubes of six Kuhn tetrahedra each."""
    if k < 1:
        raise ValueError("need at least one cube per side")
    g = np.arange(k + 1) / k
    verts = np.array([(x, y, z) for x in g for y in g for z in g])

    def vid(i, j, l):
        return (i * (k + 1) + j) * (k + 1) + l

    tets = []
    for i in range(k):
        for j in range(k):
            for l in range(k):
                for perm in _KUHN:
                    p = [i, j, l]
                    path = [vid(*p)]
                    for axis in perm:
                        p[axis] += 1
                        path.append(vid(*p))
                    tets.append(path)
    mesh = _planar_complex(verts, tets, name=name or f"cube{k}")
    return _autolabel(mesh).validate()


# ----------------------------------------------------------------------
# boundary complex
@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Boundary complex of ``M`` with the index maps used for trace matrices.

    ``index_maps[k][j]`` is the k-simplex of ``M`` underlying boundary
    k-simplex ``j``; ``vertex_map`` sends boundary vertices to vertices of M.
    """

    complex: SimplicialComplex
    vertex_map: np.ndarray
    index_maps: tuple


def boundary_complex(mesh):
    """Return ``(dM, index_maps)`` with ``dM`` closed and induced orientation."""
    bt = _boundary_trace(mesh)
    return bt.complex, bt.index_maps


def _boundary_trace(mesh):
    n = mesh.dim
    facets_idx = mesh.boundary_facets
    facets = mesh.simplices(n - 1)[facets_idx] if n >= 1 else np.zeros((0, 1), dtype=np.int64)
    vmap = np.unique(facets) if len(facets) else np.zeros(0, dtype=np.int64)
    local = {int(v): i for i, v in enumerate(vmap)}
    cells = np.array([[local[int(v)] for v in f] for f in facets], dtype=np.int64).reshape(-1, n)
    pos = {int(f): i for i, f in enumerate(facets_idx)}
    groups = {label: np.array(sorted(pos[int(f)] for f in fs), dtype=np.int64)
              for label, fs in mesh.boundary_labels.items()}
    dm = SimplicialComplex(
        dim=n - 1, vertices=mesh.vertices[vmap], cells=cells,
        orientation=mesh.induced_orientation.copy(), name=f"boundary({mesh.name})",
        metric_source=mesh.metric_source, cell_groups=groups)
    maps = []
    for k in range(n):
        rows = dm.simplices(k)
        maps.append(np.array([mesh.index_of(k, vmap[r]) for r in rows], dtype=np.int64))
    return BoundaryTrace(dm, vmap, tuple(maps))


# ----------------------------------------------------------------------
# collars
def collar(sigma, layers, eps, name=None):
    """Product-metric prism collar ``sigma x [0, eps]``.

    Vertex ``l * N + v`` sits over vertex ``v`` of ``sigma`` at height
    ``eps * l / layers``.  Prisms are split by the staircase rule on sorted
    base vertices, so every layer is combinatorially identical.  The bottom
    component is labelled ``"Sigma"`` and carries the orientation of
    ``sigma``; the top is ``"Sigma'"``.  The canonical identification of the
    bottom with the top is recorded in ``gluing_maps``.
    """
    if not sigma.is_closed or len(sigma.cells) == 0:
        raise MeshError("collar base must be a closed, nonempty hypersurface")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    N = sigma.n_vertices
    k = sigma.dim
    heights = eps * np.arange(layers + 1) / layers
    verts = np.vstack([np.column_stack([sigma.vertices, np.full(N, h)]) for h in heights])
    cells = []
    for l in range(layers):
        for c in sigma.cells:
            bot = [l * N + v for v in c]
            top = [(l + 1) * N + v for v in c]
            for i in range(k + 1):
                cells.append(bot[: i + 1] + top[i:])
    cells = np.array(cells, dtype=np.int64)
    # seed one prism simplex per base component, then fix by the bottom facet
    ncomp, comp_of_vertex = _vertex_components(sigma)
    seeds = {}
    for ci, c in enumerate(cells):
        comp = comp_of_vertex[c[0] % N]
        if comp not in seeds.values() and c[0] < N:
            seeds[ci] = comp
    seed_cells = {ci: 1 for ci in seeds}
    cells, sign = _orient_consistently(cells, seed_cells)
    mesh = SimplicialComplex(dim=k + 1, vertices=verts, cells=cells, orientation=sign,
                             metric_source="product_collar", name=name or f"collar({sigma.name})")
    # flip components whose bottom orientation disagrees with sigma
    fac = mesh.simplices(k)
    induced = dict(zip(mesh.boundary_facets.tolist(), mesh.induced_orientation.tolist()))
    sig_orient = {tuple(c): s for c, s in zip(sigma.cells, sigma.orientation)}
    flip = np.ones(ncomp, dtype=np.int64)
    done = set()
    for f, s in induced.items():
        verts_f = fac[f]
        if verts_f.max() >= N:
            continue
        comp = comp_of_vertex[verts_f[0]]
        if comp in done:
            continue
        flip[comp] = s * sig_orient[tuple(verts_f)]
        done.add(comp)
    sign = sign * flip[comp_of_vertex[cells[:, 0] % N]]
    mesh = SimplicialComplex(dim=k + 1, vertices=verts, cells=cells, orientation=sign,
                             metric_source="product_collar", name=mesh.name,
                             vertex_layer=np.repeat(np.arange(layers + 1), N),
                             base_vertex=np.tile(np.arange(N), layers + 1))
    fac_b = mesh.boundary_facets
    top_max = mesh.simplices(k)[fac_b].max(axis=1)
    bottom = fac_b[top_max < N]
    top = fac_b[mesh.simplices(k)[fac_b].min(axis=1) >= layers * N]
    gmap = GluingMap("Sigma", "Sigma'", tuple((v, layers * N + v) for v in range(N)))
    mesh = replace(mesh, boundary_labels={"Sigma": bottom, "Sigma'": top}, gluing_maps=(gmap,))
    return mesh.validate()


def _vertex_components(mesh):
    n = mesh.n_vertices
    e = mesh.simplices(1) if mesh.dim >= 1 else np.zeros((0, 2), dtype=np.int64)
    adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    return connected_components(adj, directed=False)


# ----------------------------------------------------------------------
# gluing
def annulus_gluing_map(mesh, source="Sigma_outer", target="Sigma_inner"):
    """Identify the two annulus circles vertex-by-vertex at equal angle."""
    fac = mesh.simplices(1)
    sv = np.unique(fac[mesh.boundary_labels[source]])
    tv = np.unique(fac[mesh.boundary_labels[target]])
    ang = lambda v: np.round(np.arctan2(mesh.vertices[v, 1], mesh.vertices[v, 0]), 9)
    by_angle = {ang(v): v for v in tv}
    pairs = tuple((int(v), int(by_angle[ang(v)])) for v in sv)
    return GluingMap(source, target, pairs)


def glue(mesh, gmap, name=None):
    """Identify boundary component ``gmap.target_component`` with
    ``gmap.source_component``.  Coordinates of identified vertices are taken
    from the source side.
    """
    labels = mesh.boundary_labels
    src, tgt = gmap.source_component, gmap.target_component
    if src not in labels or tgt not in labels:
        raise GluingError("gluing components are not boundary components of the mesh")
    if src == tgt:
        raise GluingError("cannot glue a component to itself")
    n = mesh.dim
    fac = mesh.simplices(n - 1)
    bpos = {int(f): i for i, f in enumerate(mesh.boundary_facets)}
    induced = mesh.induced_orientation
    fmap = dict((int(a), int(b)) for a, b in gmap.vertex_bijection)
    src_vertices = set(np.unique(fac[labels[src]]).tolist())
    tgt_vertices = set(np.unique(fac[labels[tgt]]).tolist())
    if src_vertices & tgt_vertices:
        raise GluingError("components are not disjoint")
    if set(fmap) != src_vertices or set(fmap.values()) != tgt_vertices \
            or len(set(fmap.values())) != len(fmap):
        raise GluingError("vertex map is not a bijection between the two components")
    tgt_facets = {tuple(fac[f]): int(f) for f in labels[tgt]}
    if len(labels[src]) != len(labels[tgt]):
        raise GluingError("components have different numbers of facets")
    for f in labels[src]:
        image = [fmap[int(v)] for v in fac[f]]
        key = tuple(sorted(image))
        if key not in tgt_facets:
            raise GluingError(f"facet {_tup(fac[f])} is not mapped onto a facet")
        g = tgt_facets[key]
        s_src = induced[bpos[int(f)]]
        s_img = s_src * _parity(image)
        if s_img != -induced[bpos[g]]:
            raise GluingError("gluing map must reverse the induced orientation")
    # replace target vertices by their source partners and renumber
    inverse = {b: a for a, b in fmap.items()}
    keep = np.array([v for v in range(mesh.n_vertices) if v not in inverse], dtype=np.int64)
    new_id = -np.ones(mesh.n_vertices, dtype=np.int64)
    new_id[keep] = np.arange(len(keep))
    for b, a in inverse.items():
        new_id[b] = new_id[a]
    oriented = []
    for c, s in zip(mesh.cells, mesh.orientation):
        image = [int(new_id[v]) for v in c]
        if len(set(image)) != len(image):
            raise GluingError(f"cell {_tup(c)} collapses under the gluing map")
        oriented.append((image, s))
    cells = np.array([sorted(c) for c, _ in oriented], dtype=np.int64)
    if len(np.unique(cells, axis=0)) != len(cells):
        raise GluingError("gluing map identifies distinct cells")
    orient = np.array([s * _parity(c) for c, s in oriented], dtype=np.int64)
    glued = SimplicialComplex(dim=n, vertices=mesh.vertices[keep], cells=cells,
                              orientation=orient, metric_source=mesh.metric_source,
                              name=name or f"glue({mesh.name})")
    new_fac = glued._index[n - 1] if n >= 1 else {}
    new_labels = {}
    for label, fs in labels.items():
        if label in (src, tgt):
            continue
        new_labels[label] = np.array(
            sorted(new_fac[tuple(sorted(int(new_id[v]) for v in fac[f]))] for f in fs),
            dtype=np.int64)
    glued = replace(glued, boundary_labels=new_labels)
    try:
        return glued.validate()
    except MeshError as exc:
        raise GluingError(f"glued complex is invalid: {exc}") from exc
