"""Discrete exterior calculus for abelian Yang-Mills boundary data.

Modules
-------
mesh       oriented simplicial complexes, generators, collars, gluing
dec        coboundaries, Whitney mass matrices, traces, boundary bracket
hodge      harmonic fields and orthogonal decompositions
dn         Dirichlet-to-Neumann operators of regions and hypersurfaces
reduction  presymplectic reduction, complex structure, codimension counts
verify     numerical checks grouped per mesh
"""
from .dec import BoundaryDatum, Cochain, DecOperators, bracket, build_operators, extend_collar
from .dn import DnOperator, assemble_dn, dn_hypersurface, dn_kernel_range, neumann_trace, solve_ym_dirichlet
from .hodge import (
    HmfSplit,
    coclosed_projector,
    harmonic_dirichlet,
    harmonic_fields,
    harmonic_neumann,
    hmf_decompose,
    hodge_decompose_closed,
)
from .linalg import Subspace
from .mesh import (
    GluingMap,
    SimplicialComplex,
    boundary_complex,
    collar,
    dump_mesh,
    gen_annulus,
    gen_circle,
    gen_cube,
    gen_disk,
    glue,
    load_mesh,
)
from .reduction import (
    admissible_space,
    build_symplectic,
    codimension,
    complex_structure,
    degeneracy_kernel,
    gluing_compare,
    lagrangian_check,
    reduce_hypersurface,
    symplectic_complement,
)

__version__ = "0.1.0"
