import json

import numpy as np
import pytest

from abelym.mesh import (
    DegenerateSimplexError,
    GluingError,
    GluingMap,
    MeshError,
    NonManifoldError,
    OrientationError,
    ParseError,
    boundary_complex,
    collar,
    dump_mesh,
    euler_characteristic,
    gen_annulus,
    gen_circle,
    gen_cube,
    gen_disk,
    glue,
    load_mesh,
)
from abelym.topology import betti_numbers


def _boundary_counts(mesh):
    return {k: len(v) for k, v in mesh.boundary_labels.items()}


def test_disk_counts(disk):
    assert disk.dim == 2
    assert euler_characteristic(disk) == 1
    assert list(_boundary_counts(disk).values()) == [16]


def test_annulus_counts(annulus):
    assert euler_characteristic(annulus) == 0
    assert _boundary_counts(annulus) == {"Sigma_inner": 16, "Sigma_outer": 16}


def test_circle_counts(circle):
    assert circle.dim == 1
    assert circle.is_closed
    assert circle.n_simplices(0) == 16 and circle.n_simplices(1) == 16


@pytest.mark.parametrize("m", [3, 4, 7, 16, 25])
def test_euler_characteristic_generators(m):
    assert euler_characteristic(gen_disk(m)) == 1
    assert euler_characteristic(gen_annulus(m, 0.5, 3.0)) == 0


def test_generator_parameter_errors():
    with pytest.raises(ValueError):
        gen_disk(2)
    with pytest.raises(ValueError):
        gen_annulus(16, 2.0, 1.0)
    with pytest.raises(ValueError):
        gen_annulus(16, 0.0, 1.0)
    with pytest.raises(ValueError):
        gen_circle(2)


def test_boundary_components_cover_boundary(disk, annulus, circle_collar):
    for mesh in (disk, annulus, circle_collar):
        counts = mesh.facet_cell_count
        once = set(np.flatnonzero(counts == 1).tolist())
        labelled = set(np.concatenate(list(mesh.boundary_labels.values())).tolist())
        assert once == labelled
        assert counts.max() <= 2


def test_interior_facets_opposite_orientation(annulus):
    d = annulus.coboundary(1).tocsc()
    signs = annulus.cell_orientation
    for f in np.flatnonzero(annulus.facet_cell_count == 2):
        lo = d.indptr[f]
        s = d.data[lo:lo + 2] * signs[d.indices[lo:lo + 2]]
        assert s[0] == -s[1]


def test_planar_meshes_positively_oriented(disk):
    # orientation sign must agree with the signed area of the sorted triangle
    for c, s in zip(disk.cells, disk.orientation):
        p = disk.vertices[c]
        area = np.linalg.det(p[1:] - p[0])
        assert np.sign(area) == s


def test_collar_examples(circle):
    c = collar(circle, 4, 0.5)
    assert _boundary_counts(c) == {"Sigma": 16, "Sigma'": 16}
    assert euler_characteristic(collar(circle, 1, 0.1)) == 0
    with pytest.raises(MeshError):
        collar(gen_disk(8), 1, 0.1)
    with pytest.raises(ValueError):
        collar(circle, 0, 0.1)
    with pytest.raises(ValueError):
        collar(circle, 2, -1.0)


def test_collar_bottom_matches_base_orientation(circle):
    c = collar(circle, 3, 0.2)
    bd, _ = boundary_complex(c)
    base = {tuple(cell): s for cell, s in zip(circle.cells, circle.orientation)}
    for idx in bd.cell_groups["Sigma"]:
        verts = bd.cells[idx]
        # bottom boundary vertices keep the base numbering and coordinates
        assert base[tuple(int(v) for v in verts)] == bd.orientation[idx]
        assert np.allclose(circle.vertices[verts], bd.vertices[verts][:, :2])


def test_collar_layers_identical(circle):
    c = collar(circle, 3, 0.3)
    N = circle.n_vertices
    by_layer = {}
    for cell in c.cells:
        layer = int(cell.min() // N)
        by_layer.setdefault(layer, set()).add(tuple(cell - layer * N))
    assert by_layer[0] == by_layer[1] == by_layer[2]


def test_boundary_complex_examples(disk, annulus, torus):
    bd, maps = boundary_complex(disk)
    assert bd.dim == 1 and bd.n_simplices(1) == 16 and bd.is_closed
    assert len(bd.boundary_components()) == 0
    bd2, _ = boundary_complex(annulus)
    assert bd2.n_simplices(1) == 32
    assert betti_numbers(bd2)[0] == 2
    bd3, maps3 = boundary_complex(torus)
    assert bd3.n_simplices(1) == 0 and all(len(m) == 0 for m in maps3)


def test_boundary_index_maps_point_to_same_vertices(annulus):
    bd, maps = boundary_complex(annulus)
    from abelym.mesh import _boundary_trace

    vmap = _boundary_trace(annulus).vertex_map
    for k, m in enumerate(maps):
        for j, s in enumerate(bd.simplices(k)):
            assert tuple(vmap[s]) == tuple(annulus.simplices(k)[m[j]])


def test_glue_collar_gives_torus(circle_collar):
    t = glue(circle_collar, circle_collar.gluing_maps[0])
    assert t.is_closed
    assert euler_characteristic(t) == 0
    assert betti_numbers(t) == [1, 2, 1]


def test_glue_annulus_gives_torus(torus):
    assert torus.is_closed
    assert betti_numbers(torus) == [1, 2, 1]


def test_glue_keeps_remaining_components():
    a = gen_annulus(12, 1.0, 2.0)
    c = collar(boundary_complex(a)[0], 3, 0.5)
    assert set(c.boundary_labels) == {"Sigma", "Sigma'"}
    t = glue(c, c.gluing_maps[0])
    # two circles times an interval glued end to end: two tori
    assert t.is_closed and betti_numbers(t) == [2, 4, 2]


def test_glue_rejects_orientation_preserving_map(circle_collar):
    N = 16
    layers = 4
    # reflection reverses the circle; with the translation it preserves orientation
    bad = GluingMap("Sigma", "Sigma'", tuple((v, layers * N + (-v) % N) for v in range(N)))
    with pytest.raises(GluingError):
        glue(circle_collar, bad)


def test_glue_rejects_bad_maps(circle_collar):
    with pytest.raises(GluingError):
        glue(circle_collar, GluingMap("Sigma", "nope", ()))
    with pytest.raises(GluingError):
        glue(circle_collar, GluingMap("Sigma", "Sigma", ()))
    shuffled = GluingMap("Sigma", "Sigma'", tuple((v, 64 + (v * 3) % 16) for v in range(16)))
    with pytest.raises(GluingError):
        glue(circle_collar, shuffled)


def test_single_layer_collar_glue_collapses(circle):
    c = collar(circle, 1, 0.5)
    with pytest.raises(GluingError):
        glue(c, c.gluing_maps[0])


def test_round_trip(disk):
    data = dump_mesh(disk)
    back = load_mesh(data)
    assert back.dim == 2
    assert np.array_equal(back.cells, disk.cells)
    assert np.array_equal(back.orientation, disk.orientation)
    assert {k: list(v) for k, v in back.boundary_labels.items()} == {k: list(v) for k, v in disk.boundary_labels.items()}
    assert dump_mesh(back) == data


def test_load_errors(disk):
    with pytest.raises(ParseError):
        load_mesh(b"not json")
    with pytest.raises(ParseError):
        load_mesh(json.dumps({"dim": 2, "vertices": [[0, 0]], "cells": []}))
    # three triangles sharing one edge
    verts = [[0, 0], [1, 0], [0, 1], [1, 1], [-1, -1]]
    three = {"dim": 2, "vertices": verts, "cells": [[0, 1, 2], [1, 0, 3], [0, 1, 4]]}
    with pytest.raises(NonManifoldError):
        load_mesh(json.dumps(three))
    bowtie = {"dim": 2, "vertices": [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1]],
              "cells": [[0, 1, 2], [0, 3, 4]]}
    with pytest.raises(NonManifoldError):
        load_mesh(json.dumps(bowtie))
    square = [[0, 0], [1, 0], [0, 1], [1, 1]]
    ok = load_mesh(json.dumps({"dim": 2, "vertices": square, "cells": [[0, 1, 2], [1, 3, 2]]}))
    assert ok.n_simplices(2) == 2
    with pytest.raises(OrientationError):
        load_mesh(json.dumps({"dim": 2, "vertices": square, "cells": [[0, 1, 2], [2, 3, 1]]}))
    with pytest.raises(DegenerateSimplexError):
        load_mesh(json.dumps({"dim": 2, "vertices": [[0, 0], [1, 0], [2, 0]], "cells": [[0, 1, 2]]}))


def test_load_rejects_open_label():
    data = json.loads(dump_mesh(gen_disk(8)))
    labels = data["boundary_labels"]["Sigma1"]
    data["boundary_labels"] = {"a": labels[:3], "b": labels[3:]}
    with pytest.raises(NonManifoldError):
        load_mesh(json.dumps(data))


def test_cube_mesh():
    c = gen_cube(2)
    assert c.dim == 3
    assert euler_characteristic(c) == 1
    bd, _ = boundary_complex(c)
    assert euler_characteristic(bd) == 2


def test_gluing_maps_survive_serialization():
    c = collar(gen_circle(6), 3, 0.5)
    back = load_mesh(dump_mesh(c))
    assert back.gluing_maps == c.gluing_maps
    assert dump_mesh(back) == dump_mesh(c)
