"""
Gluing and codimension
======================

Glue the two boundary circles of an annulus (or the two ends of a collar)
to get a torus and watch the codimension of the admissible boundary data
drop to zero.
"""

from abelym import build_operators, collar, gen_annulus, gen_circle, glue
from abelym.mesh import annulus_gluing_map
from abelym.reduction import codimension
from abelym.topology import betti_numbers, predicted_codimension

annulus = gen_annulus(16, 1.0, 2.0)
torus = glue(annulus, annulus_gluing_map(annulus))
print("annulus Betti", betti_numbers(annulus), " torus Betti", betti_numbers(torus))

for mesh in (annulus, torus):
    ops = build_operators(mesh)
    pred = predicted_codimension(mesh)
    print(f"{mesh.name:>14s}: codimension {codimension(ops)}  (from Betti numbers: {pred})")

# a product collar over the circle records how its ends match up
c = collar(gen_circle(16), 4, 1.0)
gmap = c.gluing_maps[0]
print("collar gluing:", gmap.source_component, "->", gmap.target_component,
      "with", len(gmap.vertex_bijection), "vertex pairs")
closed = glue(c, gmap)
print("collar codimension", codimension(build_operators(c)), "-> glued", codimension(build_operators(closed)))
