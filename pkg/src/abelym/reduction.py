"""Symplectic reduction of boundary data, complex structure and gluing counts.

Boundary data are pairs ``(phiD, phiN)`` of 1-cochains on a closed
hypersurface, stored as stacked vectors ``[phiD; phiN]`` of length
``2 * n1``.  The pair space carries the product mass metric
``g = M1 ⊕ M1``; subspaces of pairs are kept orthonormal in it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .dec import BoundaryDatum, DecOperators, bracket, build_operators
from .dn import DnOperator, assemble_dn, neumann_trace
from .hodge import coexact_neumann, coclosed_basis, exact_cochains, harmonic_neumann
from .linalg import DEFAULT_RANK_TOL, Metric, Subspace, as_dense, null_space
from .mesh import GluingMap, MeshError, SimplicialComplex, glue

__all__ = [
    "SymplecticModel",
    "ReducedSpace",
    "ComplexStructureCertificate",
    "AdmissibleSpace",
    "LagrangianReport",
    "build_symplectic",
    "degeneracy_kernel",
    "gauge_directions",
    "apply_J",
    "symplectic_complement_in",
    "reduce_hypersurface",
    "admissible_space",
    "literal_admissible_span",
    "symplectic_complement",
    "lagrangian_check",
    "dynamics_space",
    "complex_structure",
    "hermitian_form",
    "codimension",
    "gluing_compare",
]


def _pair_metric(M1):
    n = M1.shape[0]
    G = np.zeros((2 * n, 2 * n))
    G[:n, :n] = M1
    G[n:, n:] = M1
    return Metric(G)


def _split(v, n):
    return v[:n], v[n:]


@dataclass
class SymplecticModel:
    """Presymplectic form on pairs of boundary 1-cochains.

    ``model_basis`` spans (all Dirichlet cochains) x (coclosed Neumann
    cochains).  ``gram`` holds the form on that basis.
    """

    ops: DecOperators
    Q: np.ndarray  # coclosed basis, M1-orthonormal
    model_basis: np.ndarray
    gram: np.ndarray
    pair_metric: Metric

    @property
    def n1(self):
        return self.ops.n(1)

    def bracket(self, a, b):
        n = self.n1
        aD, _ = _split(a, n)
        _, bN = _split(b, n)
        return bracket(self.ops, BoundaryDatum(aD, aD * 0, self.ops.name),
                       BoundaryDatum(bN * 0, bN, self.ops.name))

    def bracket_matrix(self, A, B):
        """Matrix of ``bracket(A[:, i], B[:, j])``."""
        n = self.n1
        return A[:n].T @ self.ops.M(1) @ B[n:]

    def omega(self, a, b):
        return 0.5 * (self.bracket(a, b) - self.bracket(b, a))

    def omega_matrix(self, A, B=None):
        B = A if B is None else B
        return 0.5 * (self.bracket_matrix(A, B) - self.bracket_matrix(B, A).T)


def build_symplectic(sigma_ops: DecOperators, tol=DEFAULT_RANK_TOL) -> SymplecticModel:
    if not sigma_ops.mesh.is_closed:
        raise MeshError("the symplectic model lives on a closed hypersurface")
    n = sigma_ops.n(1)
    Q = coclosed_basis(sigma_ops, 1, tol).basis
    q = Q.shape[1]
    basis = np.zeros((2 * n, n + q))
    basis[:n, :n] = np.eye(n)
    basis[n:, n:] = Q
    model = SymplecticModel(sigma_ops, Q, basis, np.zeros((n + q, n + q)),
                            _pair_metric(sigma_ops.M(1)))
    model.gram = model.omega_matrix(basis)
    return model


def _null_of_form(W, tol):
    if W.shape[0] == 0:
        return np.zeros((0, 0))
    return null_space(W, tol)


def degeneracy_kernel(model: SymplecticModel, tol=DEFAULT_RANK_TOL) -> Subspace:
    """Vectors of the model space pairing to zero with the whole model space."""
    C = _null_of_form(model.gram, tol)
    B = model.pair_metric.orthonormalize(model.model_basis @ C, tol)
    return Subspace(model.ops.name, 1, B, "DEGENERACY", model.pair_metric)


def gauge_directions(model: SymplecticModel, tol=DEFAULT_RANK_TOL) -> np.ndarray:
    """Pairs ``(d f, 0)``: exact Dirichlet data with zero Neumann part."""
    n = model.n1
    E = exact_cochains(model.ops, 1, tol)
    V = np.vstack([E, np.zeros_like(E)])
    return model.pair_metric.orthonormalize(V, tol)


@dataclass
class ComplexStructureCertificate:
    j2_residual: float
    taming_min: float
    taming_max: float
    omega_min_singular: float

    def ok(self, j_tol=1e-12, tame_tol=1e-10):
        return (self.j2_residual <= j_tol and abs(self.taming_min - 1) <= tame_tol
                and abs(self.taming_max - 1) <= tame_tol)


@dataclass
class ReducedSpace:
    """Symplectic space of coclosed boundary pairs.

    ``basis`` columns are pairs orthonormal for ``g``; ``omega``, ``J`` and
    ``g`` are matrices in those coordinates.
    """

    name: str
    basis: np.ndarray
    omega: np.ndarray
    J: np.ndarray
    g: np.ndarray
    tag: str
    model: SymplecticModel = field(repr=False)

    @property
    def dim(self):
        return int(self.basis.shape[1])

    def coords(self, V):
        """Coordinates of pair vectors in ``basis`` (g-orthogonal projection)."""
        return self.basis.T @ (self.model.pair_metric.matrix @ V)

    def to_json(self):
        return {"space": self.name, "tag": self.tag, "dim": self.dim,
                "omega": self.omega.tolist(), "J": self.J.tolist(), "g": self.g.tolist()}


def _swap_structure(q):
    Z = np.zeros((q, q))
    I = np.eye(q)
    return np.block([[Z, -I], [I, Z]])


def _doubled_space(model, K, name, tag):
    """Space ``K ⊕ K`` of pairs with both components in span(K)."""
    n = model.n1
    q = K.shape[1]
    B = np.zeros((2 * n, 2 * q))
    B[:n, :q] = K
    B[n:, q:] = K
    om = model.omega_matrix(B)
    return ReducedSpace(name, B, om, _swap_structure(q), np.eye(2 * q), tag, model)


def reduce_hypersurface(sigma_ops: DecOperators, tol=DEFAULT_RANK_TOL, model=None) -> ReducedSpace:
    """Gauge-fixed boundary space: coclosed Dirichlet and Neumann cochains
    with the swap complex structure ``(phiD, phiN) -> (-phiN, phiD)``."""
    model = model or build_symplectic(sigma_ops, tol)
    return _doubled_space(model, model.Q, f"L({sigma_ops.name})", "L_Sigma")


def complex_structure(space: ReducedSpace, n_samples=100, seed=0) -> ComplexStructureCertificate:
    """Check ``J^2 = -Id`` and the taming ratio ``2 omega(v, Jv) / g(v, v)``."""
    J, om, g = space.J, space.omega, space.g
    r = space.dim
    if r == 0:
        return ComplexStructureCertificate(0.0, 1.0, 1.0, np.inf)
    sv = np.linalg.svd(om, compute_uv=False)
    if sv.min() <= DEFAULT_RANK_TOL * sv.max():
        raise ValueError("omega is degenerate on this space")
    j2 = float(np.abs(J @ J + np.eye(r)).max())
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((r, n_samples))
    num = 2 * np.einsum("ij,ij->j", V, om @ (J @ V))
    den = np.einsum("ij,ij->j", V, g @ V)
    ratio = num / den
    # the exact extremes over all v come from a generalized eigenproblem
    T = om @ J
    T = T + T.T
    ev = sla.eigh(T, g, eigvals_only=True)
    lo = min(ratio.min(), ev.min())
    hi = max(ratio.max(), ev.max())
    return ComplexStructureCertificate(j2, float(lo), float(hi), float(sv.min()))


def hermitian_form(space: ReducedSpace, a, b):
    """``{a, b} = g(a, b) + 2i omega(a, b)`` in the coordinates of ``space``."""
    return complex(a @ space.g @ b, 2 * (a @ space.omega @ b))


# ----------------------------------------------------------------------
@dataclass
class AdmissibleSpace:
    """Boundary data allowed by the topology of a region.

    ``pre_gauge``: Dirichlet traces of Neumann harmonic fields plus exact
    boundary cochains, paired with the zero-energy coclosed Neumann data.
    ``gauge``: the exact Dirichlet directions.  ``K``: coclosed traces with a
    flat extension (the kernel of the reduced DN operator).  ``reduced``: the
    space ``K ⊕ K`` inside the reduced boundary space.
    """

    model: SymplecticModel
    dn: DnOperator | None
    K: np.ndarray
    pre_gauge: np.ndarray
    gauge: np.ndarray
    reduced: ReducedSpace

    @property
    def dim(self):
        return self.reduced.dim


def _closed_boundary_ops(ops):
    return ops.boundary


def admissible_space(ops: DecOperators, dn: DnOperator | None = None, tol=DEFAULT_RANK_TOL) -> AdmissibleSpace:
    """Topologically admissible boundary data of a region and their reduction."""
    bops = _closed_boundary_ops(ops)
    model = build_symplectic(bops, tol)
    n = model.n1
    pm = model.pair_metric
    if ops.mesh.is_closed:
        empty = np.zeros((0, 0))
        red = _doubled_space(model, np.zeros((0, 0)), f"L({ops.name})", "L_M_boundary")
        return AdmissibleSpace(model, None, empty, empty, empty, red)
    dn = dn or assemble_dn(ops, tol=tol)
    Mb = bops.mass(1)
    hN = harmonic_neumann(ops, 1, tol).basis
    T = as_dense(ops.trace(1))
    trace_h = T @ hN
    # flat extensions exist exactly for traces of closed cochains; their
    # coclosed parts are the traces of Neumann harmonic fields projected
    K = Mb.orthonormalize(model.Q @ (model.Q.T @ (Mb.matrix @ trace_h)), tol)
    exact = exact_cochains(bops, 1, tol)
    D = np.hstack([trace_h, exact])
    pre = np.vstack([np.hstack([D, np.zeros((n, K.shape[1]))]),
                     np.hstack([np.zeros((n, D.shape[1])), K])])
    pre = pm.orthonormalize(pre, tol)
    gauge = gauge_directions(model, tol)
    red = _doubled_space(model, K, f"L({ops.name})", "L_M_boundary")
    return AdmissibleSpace(model, dn, K, pre, gauge, red)


def literal_admissible_span(ops: DecOperators, tol=DEFAULT_RANK_TOL):
    """Span of (trace, Neumann trace) over Neumann harmonic and coexact fields,
    filtered to coclosed Neumann data and projected to coclosed Dirichlet data.

    Kept as a diagnostic: the coexact summand contributes Dirichlet data with
    nonzero energy, so this span is larger than the admissible space.
    Returns an orthonormal basis of pairs inside the reduced boundary space.
    """
    bops = ops.boundary
    model = build_symplectic(bops, tol)
    n = model.n1
    Mb = bops.mass(1)
    fields = np.hstack([harmonic_neumann(ops, 1, tol).basis, coexact_neumann(ops, 1, tol).basis])
    T = as_dense(ops.trace(1))
    D = T @ fields
    N = np.column_stack([neumann_trace(ops, f) for f in fields.T]) if fields.shape[1] else np.zeros((n, 0))
    # keep combinations whose Neumann part is coclosed
    E = exact_cochains(bops, 1, tol)
    constraint = E.T @ Mb.matrix @ N
    C = null_space(constraint, tol) if constraint.size else np.eye(fields.shape[1])
    D, N = D @ C, N @ C
    P = model.Q @ model.Q.T @ Mb.matrix
    pairs = np.vstack([P @ D, P @ N])
    return model.pair_metric.orthonormalize(pairs, tol)


def symplectic_complement(space: np.ndarray, model: SymplecticModel, tol=DEFAULT_RANK_TOL) -> np.ndarray:
    """Vectors of ``span(space)`` pairing to zero with all of ``span(space)``."""
    if space.shape[1] == 0:
        return space
    W = model.omega_matrix(space)
    C = _null_of_form(W, tol)
    return model.pair_metric.orthonormalize(space @ C, tol) if C.shape[1] else space[:, :0]


@dataclass
class LagrangianReport:
    contained: float
    isotropic: bool
    coisotropic: bool
    lagrangian: bool
    graph: bool
    isotropy_residual: float
    graph_residual: float
    dim: int
    ambient_dim: int

    def to_json(self):
        return {k: (v if not isinstance(v, (np.floating, np.bool_)) else v.item())
                for k, v in self.__dict__.items()}


def lagrangian_check(sub: np.ndarray, amb: ReducedSpace, lam_red_full=None,
                     tol=DEFAULT_RANK_TOL, angle_tol=1e-8) -> LagrangianReport:
    """Isotropy, coisotropy and graph tests for a subspace of pairs.

    ``lam_red_full`` is the reduced DN operator acting on boundary cochains;
    when given, the graph test checks that Neumann components equal it
    applied to Dirichlet components.
    """
    model = amb.model
    pm = model.pair_metric
    n = model.n1
    contained = pm.contains(amb.basis, sub)
    if contained > angle_tol:
        raise ValueError(f"subspace is not contained in the ambient space (sine {contained:.2e})")
    s = sub.shape[1]
    W = model.omega_matrix(sub) if s else np.zeros((0, 0))
    iso_res = float(np.abs(W).max()) if s else 0.0
    isotropic = iso_res <= max(tol, 1e-12)
    comp = symplectic_complement_in(amb, sub, tol)
    coiso = pm.contains(sub, comp) <= angle_tol if comp.shape[1] else True
    graph = False
    graph_res = np.nan
    if s:
        D, N = sub[:n], sub[n:]
        injective = np.linalg.matrix_rank(model.ops.mass(1).half(D), tol=1e-8) == s
        if lam_red_full is not None:
            scale = max(np.linalg.norm(lam_red_full, 2), 1.0)
            graph_res = float(np.abs(N - lam_red_full @ D).max() / scale)
            graph = bool(injective and graph_res <= 1e-8)
        else:
            graph = bool(injective)
    else:
        graph, graph_res = True, 0.0
    return LagrangianReport(contained, bool(isotropic), bool(coiso),
                            bool(isotropic and coiso), graph, iso_res, graph_res, s, amb.dim)


def symplectic_complement_in(amb: ReducedSpace, sub: np.ndarray, tol=DEFAULT_RANK_TOL):
    """``{v in amb : omega(v, w) = 0 for all w in sub}``."""
    model = amb.model
    if amb.dim == 0:
        return amb.basis
    if sub.shape[1] == 0:
        return amb.basis
    W = model.omega_matrix(amb.basis, sub)
    C = null_space(W.T, tol)
    return model.pair_metric.orthonormalize(amb.basis @ C, tol) if C.shape[1] else amb.basis[:, :0]


def dynamics_space(adm: AdmissibleSpace, tol=DEFAULT_RANK_TOL):
    """Graph of the reduced DN operator over the admissible Dirichlet data."""
    model = adm.model
    n = model.n1
    K = adm.K
    if K.shape[1] == 0:
        return np.zeros((2 * n, 0))
    N = adm.dn.reduced_full @ K
    return model.pair_metric.orthonormalize(np.vstack([K, N]), tol)


def apply_J(space: ReducedSpace, V):
    """Apply the complex structure of ``space`` to pair vectors in its span."""
    return space.basis @ (space.J @ space.coords(V))


# ----------------------------------------------------------------------
def codimension(ops: DecOperators, tol=DEFAULT_RANK_TOL, adm=None):
    """``dim (coclosed)^2 - dim`` of the reduced admissible space."""
    if ops.mesh.is_closed:
        return 0
    adm = adm or admissible_space(ops, tol=tol)
    return int(2 * adm.model.Q.shape[1] - adm.dim)


def gluing_compare(mesh: SimplicialComplex, gmap: GluingMap, tol=DEFAULT_RANK_TOL):
    """Codimension before and after gluing; passes when it does not grow."""
    c0 = codimension(build_operators(mesh), tol)
    glued = glue(mesh, gmap)
    c1 = codimension(build_operators(glued), tol)
    return c0, c1, c1 <= c0
