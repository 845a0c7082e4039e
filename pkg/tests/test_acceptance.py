"""The ten acceptance criteria, each run at its stated tolerance.

Every test prints one PASS/FAIL line (visible with ``-s``) and adds it to the
summary that pytest shows at the end of the run.
"""
import numpy as np
import pytest

from abelym.dec import build_operators
from abelym.dn import assemble_dn
from abelym.mesh import annulus_gluing_map, collar, gen_annulus, gen_circle, gen_cube, gen_disk, glue
from abelym.reduction import admissible_space, codimension, reduce_hypersurface
from abelym.verify import (
    Check,
    Tolerances,
    admissible_checks,
    betti_checks,
    complex_checks,
    dn_checks,
    eq,
    exactness_checks,
    hmf_checks,
    kernel_checks,
    stability_check,
    symplectic_checks,
)

TOL = Tolerances(rank=1e-10, res=1e-8, angle=1e-6)


@pytest.fixture(scope="module")
def suite():
    annulus = gen_annulus(16, 1.0, 2.0)
    c = collar(gen_circle(16), 4, 1.0)
    meshes = {
        "disk": gen_disk(16),
        "annulus": annulus,
        "collar": c,
        "torus": glue(annulus, annulus_gluing_map(annulus)),
        "circle": gen_circle(16),
    }
    return {name: build_operators(m) for name, m in meshes.items()}


@pytest.fixture(scope="module")
def dns(suite):
    return {name: assemble_dn(suite[name]) for name in ("disk", "annulus", "collar")}


def record(log, number, title, checks):
    failed = [c for c in checks if not c.passed]
    status = "PASS" if not failed else "FAIL"
    detail = f"{len(checks)} checks" if not failed else "; ".join(
        f"{c.name}={c.value:.3g} (tol {c.tolerance:.3g})" for c in failed)
    line = f"[{status}] criterion {number:2d} {title}: {detail}"
    print(line)
    log.append(line)
    assert not failed, line


def tagged(checks, label):
    for c in checks:
        c.name = f"{label}: {c.name}"
    return checks


def test_c01_exactness(suite, acceptance_log):
    checks = []
    for name, ops in suite.items():
        checks += tagged(exactness_checks(ops), name)
    checks += tagged(exactness_checks(build_operators(gen_cube(2))), "cube")
    record(acceptance_log, 1, "exactness", checks)


def test_c02_betti(suite, acceptance_log):
    expected = {"disk": (0, 0), "annulus": (1, 1), "torus": (2, 2)}
    checks = []
    for name, table in expected.items():
        checks += tagged(betti_checks(suite[name], TOL, table), name)
    record(acceptance_log, 2, "Betti agreement", checks)


def test_c03_hmf(suite, acceptance_log):
    checks = []
    for name in ("disk", "annulus", "collar", "torus"):
        checks += tagged(hmf_checks(suite[name], TOL, n_random=100, seed=0), name)
    record(acceptance_log, 3, "HMF decomposition", checks)


def test_c04_dn_structure(suite, dns, acceptance_log):
    checks = []
    for name, dn in dns.items():
        checks += tagged(dn_checks(suite[name], TOL, dn, weights=(0.1, 1.0, 10.0)), name)
    record(acceptance_log, 4, "DN structure", checks)


def test_c05_kernel_law(suite, dns, acceptance_log):
    checks = []
    for name, dim in (("disk", 0), ("annulus", 1)):
        checks += tagged(kernel_checks(suite[name], TOL, dns[name], expected_dim=dim), name)
    record(acceptance_log, 5, "kernel law", checks)


def test_c06_symplectic(suite, acceptance_log):
    checks = symplectic_checks(suite["circle"], TOL, expected_kernel=15)
    # the complex-structure part of this group belongs to criterion 7
    checks = [c for c in checks if "L_Sigma" not in c.name]
    record(acceptance_log, 6, "symplectic layer", tagged(checks, "circle"))


def test_c07_complex_structure(suite, acceptance_log):
    checks = tagged(complex_checks(reduce_hypersurface(suite["circle"]), TOL, "L_Sigma"), "circle")
    adm = admissible_space(suite["annulus"])
    checks += tagged(complex_checks(adm.reduced, TOL, "L_M"), "annulus")
    record(acceptance_log, 7, "complex structure", checks)


def test_c08_dynamics(suite, dns, acceptance_log):
    checks = admissible_checks(suite["annulus"], TOL, dns["annulus"], expected_codim=2)
    keep = ("dynamics", "2 dim", "L = dyn", "dyn and J dyn")
    checks = [c for c in checks if c.name.startswith(keep)]
    names = {c.name for c in checks}
    assert {"dynamics Lagrangian", "2 dim = dim L", "L = dyn + J dyn"} <= names
    record(acceptance_log, 8, "dynamics as Lagrangian graph", tagged(checks, "annulus"))


def test_c09_gluing(suite, acceptance_log):
    checks = []
    for name, want in (("disk", 2), ("annulus", 2), ("torus", 0)):
        checks.append(eq(f"codim {name}", "codimension table", codimension(suite[name]), want))
    for label, region, glued in (("annulus->torus", "annulus", "torus"), ("collar->torus", "collar", None)):
        c0 = codimension(suite[region])
        if glued is None:
            mesh = suite[region].mesh
            c1 = codimension(build_operators(glue(mesh, mesh.gluing_maps[0])))
        else:
            c1 = codimension(suite[glued])
        checks.append(Check(f"monotone {label}", "codimension does not grow", c1 - c0, 0, c1 <= c0))
    record(acceptance_log, 9, "gluing codimension", checks)


def test_c10_hypersurface_stability(suite, acceptance_log):
    circle = suite["circle"].mesh
    check, h1, h2 = stability_check(circle, a=(0.5, 4), b=(0.25, 2), tol=TOL)
    assert h1.Lambda_red.shape == h2.Lambda_red.shape == (1, 1)
    record(acceptance_log, 10, "hypersurface DN eps-stability", [check])
