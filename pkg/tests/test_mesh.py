import numpy as np
import pytest

from hpeig.mesh import (
    Mesh,
    build_mesh,
    refine,
    slit_square_grid,
    square_grid,
    triangle_grid,
    triangle_hole_grid,
    uniform_refine,
)


def test_square_grid_counts():
    m = square_grid(4)
    assert m.n_vertices == 25
    assert m.n_elements == 32
    assert abs(m.area.sum() - 1.0) < 1e-14
    assert np.sum(m.boundary_mask) == 16
    # all boundary edges tagged, interior edges untagged
    assert np.all(m.edge_tag[m.boundary_mask] >= 0)
    assert np.all(m.edge_tag[~m.boundary_mask] == -1)


def test_refinement_edge_is_longest_edge_initially():
    for m in (square_grid(3), triangle_grid(3), triangle_hole_grid()):
        v = m.vertices[m.elements]
        ref_len = np.linalg.norm(v[:, 1] - v[:, 0], axis=1)
        assert np.all(ref_len >= m.h - 1e-12)


def test_uniform_refine_bisects_every_element():
    m = square_grid(2)
    fine = uniform_refine(m)
    assert fine.n_elements == 2 * m.n_elements
    assert abs(fine.area.sum() - 1.0) < 1e-14
    # children partition their parent
    for k in range(fine.n_elements):
        c = fine.vertices[fine.elements[k]].mean(axis=0)
        p = fine.parent[k]
        pv = m.vertices[m.elements[p]]
        # barycentric coordinates of the child centroid in the parent
        T = np.column_stack([pv[1] - pv[0], pv[2] - pv[0]])
        xi = np.linalg.solve(T, c - pv[0])
        assert xi.min() > -1e-12 and xi.sum() < 1 + 1e-12
    areas = np.zeros(m.n_elements)
    np.add.at(areas, fine.parent, fine.area)
    assert np.allclose(areas, m.area, atol=1e-14)


def test_local_refinement_stays_conforming():
    rng = np.random.default_rng(5)
    m = square_grid(3)
    for _ in range(6):
        marked = rng.choice(m.n_elements, size=max(1, m.n_elements // 6),
                            replace=False)
        m = refine(m, marked)  # constructor validates conformity
    assert abs(m.area.sum() - 1.0) < 1e-12
    assert np.all(m.area > 0)


def test_shape_regularity_bounded():
    m = square_grid(2)
    g0 = m.shape_regularity()
    rng = np.random.default_rng(11)
    for _ in range(8):
        marked = rng.choice(m.n_elements, size=max(1, m.n_elements // 5),
                            replace=False)
        m = refine(m, marked)
    # newest-vertex bisection cycles through finitely many shapes
    assert m.shape_regularity() <= 2.01 * g0


def test_vertex_ids_preserved_by_refine():
    m = square_grid(3)
    fine = refine(m, [0, 5, 7])
    assert np.allclose(fine.vertices[: m.n_vertices], m.vertices)


def test_slit_square_duplicates_vertices():
    m = slit_square_grid(4)
    assert m.n_vertices == 25 + 2
    coords = np.round(m.vertices, 12)
    _, counts = np.unique(coords, axis=0, return_counts=True)
    assert np.sum(counts == 2) == 2  # (0.75, 0.5) and (1.0, 0.5)
    assert len(m.edges_with_tag("slit")) == 4
    assert abs(m.area.sum() - 1.0) < 1e-14


def test_slit_survives_refinement():
    m = uniform_refine(slit_square_grid(4), 2)
    slit = m.edges_with_tag("slit")
    assert len(slit) == 8
    # each slit edge sees exactly one element
    assert np.all(m.edge_elems[slit, 1] == -1)
    coords = np.round(m.vertices, 12)
    _, counts = np.unique(coords, axis=0, return_counts=True)
    # slit side vertices coincide pairwise
    assert np.sum(counts == 2) == 4


def test_triangle_grid():
    m = triangle_grid(4, side=2.0)
    assert m.n_elements == 16
    assert abs(m.area.sum() - np.sqrt(3.0)) < 1e-12


def test_triangle_hole_grid():
    m = triangle_hole_grid()
    assert m.n_elements == 15
    assert abs(m.area.sum() - 15.0 / 16.0 * np.sqrt(3.0)) < 1e-12
    assert len(m.edges_with_tag("hole")) == 3
    assert len(m.edges_with_tag("outer")) == 12
    # hole is concentric with the outer triangle
    hole_edges = m.edges_with_tag("hole")
    hole_verts = np.unique(m.edges[hole_edges])
    assert np.allclose(m.vertices[hole_verts].mean(axis=0),
                       [1.0, np.sqrt(3.0) / 3.0], atol=1e-12)


def test_mesh_validation():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        Mesh(verts, [[0, 2, 1]], {})  # negative orientation
    with pytest.raises(ValueError):
        Mesh(verts, [[0, 1, 2]], {(0, 1): "b"})  # missing tags


def test_build_mesh_dispatch():
    assert build_mesh("square", n=2).n_elements == 8
    with pytest.raises(ValueError):
        build_mesh("hexagon")
