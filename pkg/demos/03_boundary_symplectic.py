"""
Symplectic boundary data and the dynamics Lagrangian
====================================================

Pairs (Dirichlet, Neumann) of boundary cochains carry an antisymmetric
pairing.  After removing gauge directions and restricting to coclosed data
we get a symplectic space with a compatible complex structure.  On the
annulus, boundary values of solutions form the graph of the reduced DN map.
"""

import numpy as np

from abelym import build_operators, gen_annulus, gen_circle
from abelym.reduction import (
    admissible_space,
    apply_J,
    build_symplectic,
    complex_structure,
    degeneracy_kernel,
    dynamics_space,
    lagrangian_check,
    reduce_hypersurface,
)

circle = build_operators(gen_circle(16))
model = build_symplectic(circle)
print("model space dim:", model.model_basis.shape[1])
print("degenerate directions (exact Dirichlet data):", degeneracy_kernel(model).dim)

red = reduce_hypersurface(circle)
cert = complex_structure(red)
print("reduced dim:", red.dim, " |J^2 + 1| =", cert.j2_residual,
      " taming ratio in", (round(cert.taming_min, 12), round(cert.taming_max, 12)))

ops = build_operators(gen_annulus(16, 1.0, 2.0))
adm = admissible_space(ops)
print("annulus: boundary space dim", 2 * adm.model.Q.shape[1], " admissible dim", adm.dim)

dyn = dynamics_space(adm)
rep = lagrangian_check(dyn, adm.reduced, adm.dn.reduced_full)
print("dynamics: dim", rep.dim, " isotropic", rep.isotropic, " Lagrangian", rep.lagrangian,
      " graph", rep.graph)

# the dynamics and its image under J fill the admissible space
both = np.hstack([dyn, apply_J(adm.reduced, dyn)])
print("rank of dynamics + J dynamics:", np.linalg.matrix_rank(both), "of", adm.dim)
