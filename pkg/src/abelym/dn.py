"""Yang-Mills boundary value problems and the Dirichlet-to-Neumann operator.

The stiffness form of a 1-cochain is ``<d phi, d phi>`` in the degree-2 mass
inner product.  Its minimiser under a Dirichlet constraint is unique only up
to gauge directions (coboundaries of trace-free functions) and Dirichlet
harmonic fields.  Two penalties remove these directions:

* a Coulomb term measuring the weak codifferential at interior vertices, and
* the squared M-projection onto the Dirichlet harmonic fields.

For every Dirichlet datum some energy minimiser makes both penalties vanish,
so the boundary Schur complement does not depend on the penalty weight.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .dec import DecOperators, build_operators
from .hodge import coclosed_basis, harmonic_dirichlet
from .linalg import DEFAULT_RANK_TOL, Metric, Subspace, as_dense, canonical_signs
from .mesh import MeshError, SimplicialComplex, collar

__all__ = [
    "SolverError",
    "StiffnessSystem",
    "DnOperator",
    "stiffness_system",
    "solve_ym_dirichlet",
    "neumann_trace",
    "weak_neumann_trace",
    "flux_residual",
    "assemble_dn",
    "dn_kernel_range",
    "dn_hypersurface",
    "HypersurfaceDn",
    "j_isomorphism_sign",
    "zero_energy_traces",
    "stationarity_residual",
]


class SolverError(RuntimeError):
    pass


def j_isomorphism_sign(k):
    """Sign relating Dirichlet data to the Neumann side for k-forms.

    Only ``k = 1`` is exercised by the package, where the map is the identity.
    """
    return (-1) ** (k * (1 + k))


@dataclass
class StiffnessSystem:
    """Penalised stiffness matrix split into boundary and interior edges."""

    ops: DecOperators
    weight: float
    A: np.ndarray  # curvature energy d1^T M2 d1
    K: np.ndarray  # A + weight * (Coulomb + Dirichlet-harmonic) penalties
    bnd: np.ndarray  # edge indices in boundary-complex order
    inner: np.ndarray

    @cached_property
    def _chol_ii(self):
        Kii = self.K[np.ix_(self.inner, self.inner)]
        if Kii.size == 0:
            return None
        try:
            return sla.cho_factor(Kii, lower=True)
        except np.linalg.LinAlgError as exc:
            raise SolverError(
                f"interior stiffness block of {self.ops.name} is singular "
                f"({len(self.inner)} interior edges)") from exc

    def solve_interior(self, rhs):
        if self._chol_ii is None:
            return np.zeros((0,) + np.shape(rhs)[1:])
        return sla.cho_solve(self._chol_ii, rhs)

    @cached_property
    def schur(self):
        Kbb = self.K[np.ix_(self.bnd, self.bnd)]
        Kib = self.K[np.ix_(self.inner, self.bnd)]
        S = Kbb - Kib.T @ self.solve_interior(Kib)
        return S

    @cached_property
    def extension(self):
        """Matrix mapping Dirichlet data to the full minimising cochain."""
        n1 = self.ops.n(1)
        E = np.zeros((n1, len(self.bnd)))
        E[self.bnd] = np.eye(len(self.bnd))
        Kib = self.K[np.ix_(self.inner, self.bnd)]
        E[self.inner] = -self.solve_interior(Kib)
        return E


def stiffness_system(ops: DecOperators, weight=1.0, tol=DEFAULT_RANK_TOL) -> StiffnessSystem:
    if weight <= 0:
        raise ValueError("penalty weight must be positive")
    if ops.mesh.dim < 2:
        raise ValueError("Yang-Mills problems need a region of dimension >= 2")
    d1 = as_dense(ops.d(1))
    M1 = ops.M(1)
    A = d1.T @ ops.M(2) @ d1
    iv = ops.interior(0)
    if len(iv):
        B = M1 @ as_dense(ops.d(0))[:, iv]
        M0ii = ops.M(0)[np.ix_(iv, iv)]
        C = B @ sla.cho_solve(sla.cho_factor(M0ii, lower=True), B.T)
    else:
        C = np.zeros_like(A)
    H = harmonic_dirichlet(ops, 1, tol).basis
    P = (M1 @ H) @ (M1 @ H).T
    # scale the penalties like the curvature energy so weight 1 is neutral
    scale = np.linalg.norm(A, 2) / max(np.linalg.norm(C + P, 2), 1e-300)
    K = A + weight * scale * (C + P)
    K = 0.5 * (K + K.T)
    bnd = ops.trace_index(1)
    return StiffnessSystem(ops, float(weight), A, K, bnd, ops.interior(1))


def solve_ym_dirichlet(ops: DecOperators, phiD, weight=1.0, system=None):
    """Minimise the curvature energy with Coulomb gauge penalty subject to
    the boundary trace ``phiD``; returns the full 1-cochain."""
    system = system or stiffness_system(ops, weight)
    phiD = np.asarray(phiD, dtype=float)
    if ops.mesh.is_closed:
        raise ValueError("the Dirichlet problem needs a nonempty boundary")
    if phiD.shape != (len(system.bnd),):
        raise ValueError("Dirichlet datum has the wrong length")
    return system.extension @ phiD


def stationarity_residual(system: StiffnessSystem, phi):
    """Relative residual of the interior equations ``(K phi)_inner = 0``."""
    r = (system.K @ phi)[system.inner]
    scale = np.linalg.norm(system.K, 2) * max(np.linalg.norm(phi), 1e-300)
    return float(np.linalg.norm(r) / scale)


def neumann_trace(ops: DecOperators, phi):
    """Weak Neumann trace of a 1-cochain.

    Returns the boundary 1-cochain ``phiN`` with
    ``<phiN, psi>_boundary = <d phi, d E psi> - <r, E psi>`` for every
    boundary ``psi``, where ``r`` is the interior part of ``d^T M2 d phi``.
    The right hand side does not depend on the extension ``E``, so the
    identity extension by zero is used.
    """
    d1 = as_dense(ops.d(1))
    flux = d1.T @ (ops.M(2) @ (d1 @ phi))
    return ops.boundary.mass(1).solve(flux[ops.trace_index(1)])


def weak_neumann_trace(ops: DecOperators, phi, extension):
    """Neumann trace through an explicit extension operator.

    ``extension`` maps boundary 1-cochains to 1-cochains on M with the same
    trace; the result agrees with :func:`neumann_trace` for every extension.
    """
    d1 = as_dense(ops.d(1))
    M2 = ops.M(2)
    nb = len(ops.trace_index(1))
    inner = ops.interior(1)
    residual = np.zeros(ops.n(1))
    residual[inner] = (d1.T @ (M2 @ (d1 @ phi)))[inner]
    rhs = np.empty(nb)
    for j in range(nb):
        e = np.zeros(nb)
        e[j] = 1.0
        Ee = extension(e)
        rhs[j] = (d1 @ Ee) @ (M2 @ (d1 @ phi)) - residual @ Ee
    return ops.boundary.mass(1).solve(rhs)


def flux_residual(ops: DecOperators, phiN):
    """Relative size of ``d^T M phiN`` on the boundary.

    Neumann data of a solution pair to zero against every boundary
    coboundary ``d g``; this is the discrete form of Stokes' theorem for the
    flux form and says that Neumann data are coclosed.
    """
    b = ops.boundary
    M = b.M(1)
    d0 = as_dense(b.d(0))
    r = d0.T @ (M @ phiN)
    scale = np.linalg.norm(d0, 2) * np.linalg.norm(M @ phiN)
    return float(np.linalg.norm(r) / scale) if scale > 0 else 0.0


@dataclass
class DnOperator:
    """Dirichlet-to-Neumann operator of a region.

    ``S`` is the energy form on boundary edges and ``Lambda = Mb^{-1} S``.
    ``Q`` is an M-orthonormal basis of coclosed boundary 1-cochains and
    ``Lambda_red = Q^T S Q`` the operator on coclosed data in that basis.
    """

    ops: DecOperators
    system: StiffnessSystem
    S: np.ndarray
    Lambda: np.ndarray
    Q: np.ndarray
    Lambda_red: np.ndarray
    tol: float = DEFAULT_RANK_TOL
    _kr: tuple | None = field(default=None, repr=False)

    @property
    def boundary_ops(self):
        return self.ops.boundary

    @property
    def boundary_metric(self) -> Metric:
        return self.ops.boundary.mass(1)

    @property
    def weight(self):
        return self.system.weight

    @property
    def reduced_full(self):
        """``P Lambda P`` acting on boundary 1-cochains, P the coclosed projector."""
        Mb = self.boundary_metric.matrix
        return self.Q @ self.Lambda_red @ self.Q.T @ Mb

    def energy(self, phiD):
        return float(phiD @ self.S @ phiD)

    @property
    def kernel(self) -> Subspace:
        return self.kernel_range()[0]

    @property
    def range(self) -> Subspace:
        return self.kernel_range()[1]

    def kernel_range(self, tau=None):
        if tau is None and self._kr is not None:
            return self._kr
        kr = dn_kernel_range(self, self.tol if tau is None else tau)
        if tau is None:
            self._kr = kr
        return kr

    def scale(self):
        """Largest generalised eigenvalue of the boundary stiffness block,
        an upper bound for the spectrum of Lambda."""
        Kbb = self.system.K[np.ix_(self.system.bnd, self.system.bnd)]
        Mb = self.boundary_metric.matrix
        if Kbb.size == 0:
            return 0.0
        return float(sla.eigh(Kbb, Mb, eigvals_only=True)[-1])

    def spectrum(self):
        """Eigenvalues of Lambda_red, ascending."""
        if self.Lambda_red.size == 0:
            return np.zeros(0)
        return np.linalg.eigvalsh(self.Lambda_red)


def assemble_dn(ops: DecOperators, weight=1.0, tol=DEFAULT_RANK_TOL) -> DnOperator:
    """Schur complement of the penalised stiffness over boundary edges."""
    if ops.mesh.is_closed:
        raise MeshError("the Dirichlet-to-Neumann operator needs a nonempty boundary")
    system = stiffness_system(ops, weight, tol)
    S = system.schur
    S = 0.5 * (S + S.T)
    bops = ops.boundary
    Lam = bops.mass(1).solve(S)
    Q = coclosed_basis(bops, 1, tol).basis
    Lr = Q.T @ S @ Q
    return DnOperator(ops, system, S, Lam, Q, 0.5 * (Lr + Lr.T), tol)


def dn_kernel_range(dn: DnOperator, tau=DEFAULT_RANK_TOL):
    """Kernel and range of the reduced operator as boundary subspaces.

    Eigenvalues of ``Lambda_red`` below ``tau`` times the spectral scale of
    the boundary stiffness count as zero.
    """
    metric = dn.boundary_metric
    name = dn.boundary_ops.name
    if dn.Lambda_red.size == 0:
        empty = np.zeros((metric.size, 0))
        return (Subspace(name, 1, empty, "KER_LAMBDA", metric),
                Subspace(name, 1, empty, "RAN_LAMBDA", metric))
    w, V = np.linalg.eigh(dn.Lambda_red)
    zero = np.abs(w) <= tau * max(dn.scale(), 1e-300)
    K = canonical_signs(dn.Q @ V[:, zero])
    R = canonical_signs(dn.Q @ V[:, ~zero])
    return (Subspace(name, 1, K, "KER_LAMBDA", metric),
            Subspace(name, 1, R, "RAN_LAMBDA", metric))


@dataclass
class HypersurfaceDn:
    """DN operator attached to a closed hypersurface through a collar."""

    sigma_ops: DecOperators
    collar_dn: DnOperator
    S: np.ndarray
    Lambda: np.ndarray
    Q: np.ndarray
    Lambda_red: np.ndarray
    eps: float
    layers: int
    lift: np.ndarray  # boundary data of the collar produced by sigma data


def dn_hypersurface(sigma: SimplicialComplex, eps, layers, weight=1.0, tol=DEFAULT_RANK_TOL):
    """DN operator of ``sigma`` from the collar ``sigma x [0, eps]``.

    The Dirichlet datum on the bottom is transported to the top through the
    layer identification; the resulting quadratic energy is split evenly
    between the two copies of ``sigma``, which symmetrises the readout.
    """
    if not sigma.is_closed:
        raise MeshError("hypersurface must be closed")
    C = collar(sigma, layers, eps)
    ops = build_operators(C)
    dn = assemble_dn(ops, weight, tol)
    sops = build_operators(sigma)
    bd = ops.trace_data
    base = C.base_vertex
    layer = C.vertex_layer
    n1 = sops.n(1)
    lift = np.zeros((dn.S.shape[0], n1))
    for j, e in enumerate(bd.complex.simplices(1)):
        gv = bd.vertex_map[e]
        i = sigma.index_of(1, base[gv])
        # sorted order is preserved by the vertical translation, so the
        # pulled-back coefficient is copied unchanged
        lift[j, i] = 1.0
        assert len(set(layer[gv].tolist())) == 1
    S = 0.5 * lift.T @ dn.S @ lift
    S = 0.5 * (S + S.T)
    Lam = sops.mass(1).solve(S)
    Q = coclosed_basis(sops, 1, tol).basis
    Lr = Q.T @ S @ Q
    return HypersurfaceDn(sops, dn, S, Lam, Q, 0.5 * (Lr + Lr.T), float(eps), int(layers), lift)


def zero_energy_traces(ops: DecOperators, tol=DEFAULT_RANK_TOL) -> Subspace:
    """Coclosed boundary 1-cochains that are traces of closed 1-cochains.

    Computed as the intersection of ``ker delta`` on the boundary with the
    trace image of ``ker d_1``, without reference to the DN operator.
    """
    from .hodge import closed_cochains

    bops = ops.boundary
    metric = bops.mass(1)
    Q = coclosed_basis(bops, 1, tol).basis
    V = metric.orthonormalize(as_dense(ops.trace(1)) @ closed_cochains(ops, 1, tol), tol)
    if Q.shape[1] == 0 or V.shape[1] == 0:
        return Subspace(bops.name, 1, np.zeros((metric.size, 0)), "ZERO_ENERGY", metric)
    # x = Q a = V b  <=>  [Q, -V] (a, b) = 0
    N = sla.null_space(metric.half(np.hstack([Q, -V])), rcond=tol)
    B = metric.orthonormalize(Q @ N[: Q.shape[1]], tol)
    return Subspace(bops.name, 1, canonical_signs(B), "ZERO_ENERGY", metric)
