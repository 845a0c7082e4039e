"""Numerical checks of every structural identity, grouped per mesh.

Each check records a short statement of the property it tests, the measured
value, the tolerance (or expected integer) and whether it passed.  The
built-in suite runs the disk, the annulus, a collar over the circle and the
torus obtained by gluing the annulus.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dec import DecOperators, build_operators
from .dn import (
    assemble_dn,
    dn_hypersurface,
    flux_residual,
    neumann_trace,
    solve_ym_dirichlet,
    zero_energy_traces,
)
from .hodge import (
    HmfSpaces,
    coclosed_basis,
    harmonic_dirichlet,
    harmonic_fields,
    harmonic_neumann,
)
from .linalg import as_dense, sym_rel
from .mesh import annulus_gluing_map, collar, gen_annulus, gen_circle, gen_disk, glue
from .reduction import (
    admissible_space,
    apply_J,
    build_symplectic,
    codimension,
    complex_structure,
    degeneracy_kernel,
    dynamics_space,
    gauge_directions,
    hermitian_form,
    lagrangian_check,
    reduce_hypersurface,
    symplectic_complement,
)
from .topology import betti_numbers, predicted_codimension, relative_betti_numbers

__all__ = [
    "Tolerances",
    "Check",
    "exactness_checks",
    "betti_checks",
    "hmf_checks",
    "dn_checks",
    "kernel_checks",
    "symplectic_checks",
    "admissible_checks",
    "stability_check",
    "region_checks",
    "hypersurface_checks",
    "suite_meshes",
    "run_suite",
]


@dataclass(frozen=True)
class Tolerances:
    rank: float = 1e-10
    res: float = 1e-8
    angle: float = 1e-6

    def __post_init__(self):
        if min(self.rank, self.res, self.angle) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class Check:
    name: str
    claim: str
    value: float
    tolerance: float
    passed: bool

    def to_json(self):
        val = self.value
        if isinstance(val, (np.integer, np.floating)):
            val = val.item()
        tol = self.tolerance.item() if isinstance(self.tolerance, np.generic) else self.tolerance
        return {"name": self.name, "claim": self.claim, "value": val,
                "tolerance": tol, "pass": bool(self.passed)}

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name}: value={self.value:.3g} tol={self.tolerance:.3g}"


def le(name, ref, value, tol):
    value = float(value)
    return Check(name, ref, value, float(tol), bool(np.isfinite(value) and value <= tol))


def eq(name, ref, value, expected):
    return Check(name, ref, int(value), int(expected), int(value) == int(expected))


# ----------------------------------------------------------------------
def exactness_checks(ops: DecOperators):
    out = []
    for k in range(ops.dim - 1):
        dd = abs(ops.d(k + 1) @ ops.d(k)).sum()
        out.append(le(f"d{k + 1}d{k}=0", "coboundary of a coboundary vanishes", dd, 0))
    if not ops.mesh.is_closed:
        b = ops.boundary
        for k in range(ops.dim - 1):
            r = abs(ops.trace(k + 1) @ ops.d(k) - b.d(k) @ ops.trace(k)).sum()
            out.append(le(f"T{k + 1}d{k}=dT{k}", "traces commute with the exterior derivative", r, 0))
    return out


def adjointness_residual(ops: DecOperators, k, rng):
    a = rng.standard_normal(ops.n(k - 1))
    b = rng.standard_normal(ops.n(k))
    lhs = (ops.d(k - 1) @ a) @ ops.M(k) @ b
    rhs = a @ ops.M(k - 1) @ ops.apply_codifferential(k, b)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def betti_checks(ops: DecOperators, tol: Tolerances, expected=None):
    mesh = ops.mesh
    b1 = betti_numbers(mesh)[1]
    rb1 = relative_betti_numbers(mesh)[1]
    hN = harmonic_neumann(ops, 1, tol.rank).dim
    hD = harmonic_dirichlet(ops, 1, tol.rank).dim
    out = [eq("dim H_N^1 = b1", "Neumann harmonic fields represent absolute cohomology", hN, b1),
           eq("dim H_D^1 = relative b1", "Dirichlet harmonic fields represent relative cohomology", hD, rb1)]
    if expected is not None:
        out.append(eq("b1 table", "expected first Betti number", b1, expected[0]))
        out.append(eq("relative b1 table", "expected relative first Betti number", rb1, expected[1]))
    return out


def hmf_checks(ops: DecOperators, tol: Tolerances, n_random=100, seed=0):
    rng = np.random.default_rng(seed)
    spaces = HmfSpaces(ops, 1, tol.rank)
    metric = ops.mass(1)
    recon = orth = 0.0
    for _ in range(n_random):
        w = rng.standard_normal(ops.n(1))
        nw2 = metric.inner(w, w)
        split = spaces.split(w)
        comps = split.components()
        recon = max(recon, metric.norm(split.total() - w) / np.sqrt(nw2))
        for a, b in itertools.combinations(comps, 2):
            orth = max(orth, abs(metric.inner(a, b)) / nw2)
    H = harmonic_fields(ops, 1, tol.rank).basis
    contain = max(metric.contains(H, harmonic_neumann(ops, 1, tol.rank).basis),
                  metric.contains(H, harmonic_dirichlet(ops, 1, tol.rank).basis))
    return [le("HMF reconstruction", "the four summands add up to the input", recon, tol.res),
            le("HMF orthogonality", "the four summands are mutually orthogonal", orth, tol.res),
            le("H contains H_N and H_D", "boundary-conditioned harmonic fields are harmonic", contain, tol.res),
            le("adjointness d/delta", "codifferential is the metric adjoint of d",
               adjointness_residual(ops, 1, rng), 1e-12)]


def dn_checks(ops: DecOperators, tol: Tolerances, dn=None, seed=0, weights=(0.1, 1.0, 10.0)):
    rng = np.random.default_rng(seed)
    dn = dn or assemble_dn(ops, 1.0, tol.rank)
    S = dn.S
    nS = np.linalg.norm(S, 2)
    out = [le("S symmetric", "DN energy form is symmetric", sym_rel(dn.system.schur), 1e-10)]
    mineig = np.linalg.eigvalsh(S).min()
    out.append(le("S positive semidefinite", "DN energy form is nonnegative",
                  max(0.0, -mineig) / nS, 1e-10))
    # traces of closed cochains: exact ones and Neumann harmonic fields
    T = as_dense(ops.trace(1))
    closed = [ops.d(0) @ rng.standard_normal(ops.n(0)) for _ in range(5)]
    closed += list(harmonic_neumann(ops, 1, tol.rank).basis.T)
    Mb = dn.boundary_metric
    scale = dn.scale()
    worst = 0.0
    for phi in closed:
        g = T @ phi
        if Mb.norm(g) == 0:
            continue
        worst = max(worst, Mb.norm(dn.Lambda @ g) / (scale * Mb.norm(g)))
    out.append(le("Lambda kills closed traces", "closed extensions carry no Neumann data", worst, tol.res))
    base = dn.Lambda
    dev = 0.0
    for w in weights:
        other = assemble_dn(ops, w, tol.rank).Lambda
        dev = max(dev, np.abs(other - base).max() / np.abs(base).max())
    out.append(le("penalty weight independence", "gauge penalty does not change the DN map", dev, 1e-9))
    # solutions: stationarity, flux law and reciprocity
    nb = S.shape[0]
    flux = recip = 0.0
    for _ in range(5):
        g, h = rng.standard_normal(nb), rng.standard_normal(nb)
        phi = solve_ym_dirichlet(ops, g, system=dn.system)
        flux = max(flux, flux_residual(ops, neumann_trace(ops, phi)))
        raw = dn.system.schur
        a, b = g @ raw @ h, h @ raw @ g
        recip = max(recip, abs(a - b) / max(abs(a), abs(b), 1e-300))
    out.append(le("Neumann data coclosed", "Stokes identity for the flux of a solution", flux, tol.res))
    out.append(le("reciprocity", "DN map is symmetric on data pairs", recip, 1e-10))
    return out


def kernel_checks(ops: DecOperators, tol: Tolerances, dn=None, expected_dim=None):
    dn = dn or assemble_dn(ops, 1.0, tol.rank)
    ker = dn.kernel
    z = zero_energy_traces(ops, tol.rank)
    ang = dn.boundary_metric.max_angle(ker.basis, z.basis)
    out = [le("ker Lambda_red = flat coclosed traces", "kernel consists of data with flat extensions", ang, tol.angle),
           eq("dim ker + dim ran = dim coclosed", "rank-nullity on coclosed data",
              ker.dim + dn.range.dim, dn.Q.shape[1])]
    if expected_dim is not None:
        out.append(eq("dim ker Lambda_red", "expected kernel dimension", ker.dim, expected_dim))
    return out


def symplectic_checks(sigma_ops: DecOperators, tol: Tolerances, seed=0, expected_kernel=None):
    """Presymplectic model, degeneracy kernel and reduced space of a closed
    hypersurface."""
    rng = np.random.default_rng(seed)
    model = build_symplectic(sigma_ops, tol.rank)
    W = model.gram
    out = [le("omega antisymmetric", "presymplectic form is antisymmetric", np.abs(W + W.T).max(), 0.0)]
    ker = degeneracy_kernel(model, tol.rank)
    gauge = gauge_directions(model, tol.rank)
    out.append(le("degeneracy kernel = exact x 0", "degenerate directions are pure gauge",
                  model.pair_metric.max_angle(ker.basis, gauge), 1e-8))
    if expected_kernel is not None:
        out.append(eq("degeneracy kernel dim", "expected kernel dimension", ker.dim, expected_kernel))
    q = model.Q.shape[1]
    out.append(eq("quotient dim = 2 dim ker delta", "reduced space is two copies of coclosed forms",
                  model.model_basis.shape[1] - ker.dim, 2 * q))
    # gauge invariance of the bracket against coclosed Neumann data
    n = model.n1
    dev = 0.0
    for _ in range(5):
        aD = rng.standard_normal(n)
        bN = model.Q @ rng.standard_normal(q)
        f = sigma_ops.d(0) @ rng.standard_normal(sigma_ops.n(0))
        a = np.concatenate([aD, np.zeros(n)])
        a2 = np.concatenate([aD + f, np.zeros(n)])
        b = np.concatenate([np.zeros(n), bN])
        v1, v2 = model.omega(a, b), model.omega(a2, b)
        dev = max(dev, abs(v1 - v2) / max(abs(v1), 1e-300))
    out.append(le("gauge invariance of omega", "exact shifts of Dirichlet data pair trivially", dev, 1e-10))
    red = reduce_hypersurface(sigma_ops, tol.rank, model)
    out += complex_checks(red, tol, "L_Sigma", seed)
    return out


def complex_checks(space, tol: Tolerances, label, seed=0):
    cert = complex_structure(space, 100, seed)
    rng = np.random.default_rng(seed + 1)
    herm = 0.0
    for _ in range(20):
        a, b = rng.standard_normal(space.dim), rng.standard_normal(space.dim)
        hab = hermitian_form(space, a, b)
        r1 = abs(hermitian_form(space, a, space.J @ b) - 1j * hab)
        r2 = abs(hermitian_form(space, space.J @ a, b) + 1j * hab)
        r3 = abs(hermitian_form(space, b, a) - np.conj(hab))
        herm = max(herm, max(r1, r2, r3) / max(abs(hab), 1e-300))
    return [le(f"J^2=-Id ({label})", "complex structure squares to minus one", cert.j2_residual, 1e-12),
            le(f"taming ({label})", "g equals 2 omega(., J .)",
               max(abs(cert.taming_min - 1), abs(cert.taming_max - 1)), 1e-10),
            le(f"Hermitian form ({label})", "g + 2i omega is sesquilinear for J", herm, 1e-10)]


def admissible_checks(ops: DecOperators, tol: Tolerances, dn=None, expected_codim=None):
    out = []
    adm = admissible_space(ops, dn, tol.rank)
    cod = codimension(ops, tol.rank, adm)
    if ops.mesh.dim == 2:
        out.append(eq("codimension = topological count", "codimension is fixed by topology",
                      cod, predicted_codimension(ops.mesh)))
    if expected_codim is not None:
        out.append(eq("codimension table", "expected codimension", cod, expected_codim))
    if ops.mesh.is_closed:
        return out
    pm = adm.model.pair_metric
    comp = symplectic_complement(adm.pre_gauge, adm.model, tol.rank)
    out.append(le("complement = exact Dirichlet", "degenerate admissible directions are gauge",
                  pm.max_angle(comp, adm.gauge), 1e-8))
    if adm.dim == 0:
        return out
    out += complex_checks(adm.reduced, tol, "L_M", 0)
    Lt = dynamics_space(adm, tol.rank)
    rep = lagrangian_check(Lt, adm.reduced, adm.dn.reduced_full, tol.rank)
    out.append(le("dynamics isotropic", "graph of the DN map is isotropic", rep.isotropy_residual, 1e-12))
    out.append(eq("dynamics Lagrangian", "graph of the DN map is Lagrangian", int(rep.lagrangian), 1))
    out.append(eq("dynamics is a graph", "dynamics is the graph of the reduced DN map", int(rep.graph), 1))
    out.append(eq("2 dim = dim L", "dynamics has half the dimension", 2 * rep.dim, adm.dim))
    JL = apply_J(adm.reduced, Lt)
    both = pm.orthonormalize(np.hstack([Lt, JL]), tol.rank)
    out.append(eq("L = dyn + J dyn", "dynamics and its J image span the space", both.shape[1], adm.dim))
    # smallest principal angle between the two summands
    if Lt.shape[1]:
        cos = np.linalg.svd(Lt.T @ pm.matrix @ pm.orthonormalize(JL, tol.rank), compute_uv=False).max()
        angle = float(np.arccos(min(1.0, cos)))
    else:
        angle = float(np.pi / 2)
    out.append(Check("dyn and J dyn transverse", "dynamics meets its J image trivially",
                     angle, 1e-6, angle >= 1e-6))
    return out


def stability_check(sigma, a=(0.5, 4), b=(0.25, 2), weight=1.0, tol: Tolerances = Tolerances()):
    """Compare reduced hypersurface DN matrices for two collars.

    Entries are compared relative to the larger of the matrix norm and the
    stiffness scale of the collar, because the reduced operator vanishes on
    product collars over a circle.
    """
    h1 = dn_hypersurface(sigma, a[0], a[1], weight, tol.rank)
    h2 = dn_hypersurface(sigma, b[0], b[1], weight, tol.rank)
    diff = np.abs(h1.Lambda_red - h2.Lambda_red).max() if h1.Lambda_red.size else 0.0
    scale = max(np.abs(h1.Lambda_red).max(initial=0.0), h1.collar_dn.scale(), h2.collar_dn.scale())
    return le("hypersurface DN eps-stability", "hypersurface DN map does not depend on the collar width",
              diff / scale, 1e-2), h1, h2


# ----------------------------------------------------------------------
def region_checks(mesh, tol: Tolerances = Tolerances(), expected=None, seed=0, n_random=100):
    """All checks for one region.  ``expected`` may hold the keys
    ``betti`` (b1, relative b1), ``ker`` and ``codim``."""
    expected = expected or {}
    ops = build_operators(mesh)
    out = exactness_checks(ops)
    out += betti_checks(ops, tol, expected.get("betti"))
    out += hmf_checks(ops, tol, n_random, seed)
    dn = None
    if not mesh.is_closed:
        dn = assemble_dn(ops, 1.0, tol.rank)
        out += dn_checks(ops, tol, dn, seed)
        out += kernel_checks(ops, tol, dn, expected.get("ker"))
        out += symplectic_checks(ops.boundary, tol, seed)
    out += admissible_checks(ops, tol, dn, expected.get("codim"))
    return out


def hypersurface_checks(sigma, tol: Tolerances = Tolerances(), seed=0):
    ops = build_operators(sigma)
    out = exactness_checks(ops)
    out += symplectic_checks(ops, tol, seed, expected_kernel=ops.n(0) - 1)
    stab, *_ = stability_check(sigma, tol=tol)
    out.append(stab)
    return out


def _torus():
    a = gen_annulus(16, 1.0, 2.0)
    return glue(a, annulus_gluing_map(a), name="torus16")


def suite_meshes(name="default"):
    """``(id, kind, builder, expected)`` for each mesh of a built-in suite."""
    if name != "default":
        raise ValueError(f"unknown suite {name!r}")
    return [
        ("disk16", "region", lambda: gen_disk(16), {"betti": (0, 0), "ker": 0, "codim": 2}),
        ("annulus16", "region", lambda: gen_annulus(16, 1.0, 2.0), {"betti": (1, 1), "ker": 1, "codim": 2}),
        ("collar_circle16", "region", lambda: collar(gen_circle(16), 4, 1.0),
         {"betti": (1, 1), "ker": 1, "codim": 2}),
        ("torus16", "region", _torus, {"betti": (2, 2), "codim": 0}),
        ("circle16", "hypersurface", lambda: gen_circle(16), {}),
    ]


def _gluing_report(tol):
    out = []
    a = gen_annulus(16, 1.0, 2.0)
    c = collar(gen_circle(16), 4, 1.0)
    for label, mesh, gmap in (("annulus->torus", a, annulus_gluing_map(a)),
                              ("collar->torus", c, c.gluing_maps[0])):
        c0 = codimension(build_operators(mesh), tol.rank)
        c1 = codimension(build_operators(glue(mesh, gmap)), tol.rank)
        out.append(Check(f"gluing monotone ({label})", "codimension does not grow under gluing",
                         c1 - c0, 0, c1 <= c0))
    return out


def run_one(entry, tol: Tolerances, seed=0):
    mid, kind, build, expected = entry
    mesh = build()
    checks = region_checks(mesh, tol, expected, seed) if kind == "region" else hypersurface_checks(mesh, tol, seed)
    return {"mesh": mid, "checks": [c.to_json() for c in checks]}


def run_suite(name="default", tol: Tolerances = Tolerances(), workers=4, seed=0):
    """Run every check of a suite; meshes are processed concurrently."""
    entries = suite_meshes(name)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(lambda e: run_one(e, tol, seed), entries))
    reports.append({"mesh": "gluing", "checks": [c.to_json() for c in _gluing_report(tol)]})
    ok = all(c["pass"] for r in reports for c in r["checks"])
    return {"suite": name, "pass": ok, "reports": reports}
