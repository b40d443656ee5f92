import numpy as np
import pytest

from hpeig.mesh import refine, slit_square_grid, square_grid
from hpeig.space import DofHandler, transfer


def mixed_degrees(mesh, lo=2, hi=4, seed=0):
    rng = np.random.default_rng(seed)
    return rng.integers(lo, hi + 1, size=mesh.n_elements)


def edge_sample_points(mesh, e, n=5):
    """Matched physical points strictly inside edge e."""
    t = np.linspace(0.15, 0.85, n)
    a, b = mesh.edges[e]
    return mesh.vertices[a] + t[:, None] * (mesh.vertices[b] - mesh.vertices[a])


def to_ref(mesh, k, phys):
    maps = mesh.maps()
    return (phys - maps["origin"][k]) @ maps["Jinv"][k].T


def test_dof_count_fixed_degree():
    # 8x8 grid, degree 3, homogeneous Dirichlet everywhere:
    # 49 interior vertices, 176 interior edges x 2 modes, 128 bubbles
    mesh = square_grid(8)
    h = DofHandler(mesh, 3, dirichlet_tags=("boundary",))
    n_int_edges = mesh.n_edges - np.sum(mesh.boundary_mask)
    assert n_int_edges == 176
    assert h.n_dofs == 49 + 176 * 2 + 128
    assert h.n_full == 81 + 208 * 2 + 128


def test_minimum_rule():
    mesh = square_grid(2)
    degrees = np.full(mesh.n_elements, 2)
    degrees[0] = 4
    h = DofHandler(mesh, degrees)
    for l in range(3):
        e = mesh.elem_edges[0, l]
        other = mesh.edge_elems[e, 1] if mesh.edge_elems[e, 0] == 0 else mesh.edge_elems[e, 0]
        expect = 4 if other < 0 else 2
        assert h.p_conf[e] == expect
        assert h.p_edge_max[e] == 4
    # local modes above the conforming degree are absent
    g = h.l2g[0]
    absent = np.sum(g < 0)
    shared = [e for e in mesh.elem_edges[0] if mesh.edge_elems[e, 1] >= 0]
    assert absent == 2 * len(shared)


def test_continuity_across_interior_edges():
    mesh = refine(square_grid(3), [0, 1, 4, 7, 11])
    h = DofHandler(mesh, mixed_degrees(mesh, 1, 5))
    rng = np.random.default_rng(7)
    coeffs = h.expand(rng.standard_normal(h.n_dofs))
    for e in range(mesh.n_edges):
        k0, k1 = mesh.edge_elems[e]
        if k1 < 0:
            continue
        phys = edge_sample_points(mesh, e)
        v0 = h.evaluate(coeffs, [k0], to_ref(mesh, k0, phys))[0]
        v1 = h.evaluate(coeffs, [k1], to_ref(mesh, k1, phys))[0]
        assert np.max(np.abs(v0 - v1)) < 1e-11


def test_dirichlet_mask():
    mesh = square_grid(3)
    h = DofHandler(mesh, 3, dirichlet_tags=("boundary",))
    kinds = mesh.edge_kinds(("boundary",))
    for e in np.nonzero(kinds == 1)[0]:
        assert not h.free_mask[mesh.edges[e]].any()
        assert not h.free_mask[h.edge_offset[e]:h.edge_offset[e + 1]].any()
    # interior vertex dofs stay free
    interior = np.setdiff1d(np.arange(mesh.n_vertices),
                            np.unique(mesh.edges[kinds == 1]))
    assert h.free_mask[interior].all()


def test_unknown_dirichlet_tag_rejected():
    mesh = square_grid(2)
    with pytest.raises(ValueError):
        DofHandler(mesh, 2, dirichlet_tags=("no_such_tag",))


def test_interpolate_reproduces_space_members():
    mesh = refine(square_grid(2), [0, 3])
    h = DofHandler(mesh, mixed_degrees(mesh, 3, 5, seed=2))

    def f(x):
        x = np.atleast_2d(x)
        return 2.0 + x[:, 0] ** 2 + x[:, 0] * x[:, 1] - x[:, 1] ** 3

    coeffs = h.interpolate(f)
    rng = np.random.default_rng(1)
    pts = rng.dirichlet(np.ones(3), size=20)[:, 1:]
    for k in range(mesh.n_elements):
        got = h.evaluate(coeffs, [k], pts)[0]
        maps = mesh.maps()
        phys = maps["origin"][k] + pts @ maps["J"][k].T
        assert np.max(np.abs(got - f(phys))) < 1e-11


def test_transfer_is_exact_on_refinement():
    mesh = square_grid(2)
    degrees = mixed_degrees(mesh, 2, 4, seed=3)
    h = DofHandler(mesh, degrees)
    rng = np.random.default_rng(4)
    coeffs = h.expand(rng.standard_normal(h.n_dofs))

    fine = refine(mesh, [0, 2, 5])
    fine_degrees = degrees[fine.parent].copy()
    fine_degrees[::3] += 1
    hf = DofHandler(fine, fine_degrees)
    out = transfer(h, hf, coeffs)

    pts = rng.dirichlet(np.ones(3), size=12)[:, 1:]
    maps = fine.maps()
    for k in range(fine.n_elements):
        phys = maps["origin"][k] + pts @ maps["J"][k].T
        kp = fine.parent[k]
        want = h.evaluate(coeffs, [kp], to_ref(mesh, kp, phys))[0]
        got = hf.evaluate(out, [k], pts)[0]
        assert np.max(np.abs(got - want)) < 1e-11


def test_transfer_pure_degree_increase():
    mesh = square_grid(2)
    h = DofHandler(mesh, 2)
    rng = np.random.default_rng(9)
    coeffs = h.expand(rng.standard_normal(h.n_dofs))
    hf = DofHandler(mesh, 4)
    out = transfer(h, hf, coeffs)
    pts = rng.dirichlet(np.ones(3), size=10)[:, 1:]
    for k in range(mesh.n_elements):
        a = h.evaluate(coeffs, [k], pts)[0]
        b = hf.evaluate(out, [k], pts)[0]
        assert np.max(np.abs(a - b)) < 1e-12


def test_transfer_rejects_degree_drop():
    mesh = square_grid(2)
    h = DofHandler(mesh, 3)
    with pytest.raises(ValueError):
        transfer(h, DofHandler(mesh, 2), np.zeros(h.n_full))


def test_slit_sides_are_independent():
    mesh = slit_square_grid(4)
    h = DofHandler(mesh, 2, dirichlet_tags=("outer",))
    # find a duplicated vertex pair on the slit
    coords = np.round(mesh.vertices, 12)
    uniq, inverse, counts = np.unique(coords, axis=0, return_inverse=True,
                                      return_counts=True)
    pair = np.nonzero(inverse == np.nonzero(counts == 2)[0][0])[0]
    v_lo, v_hi = pair
    assert h.free_mask[v_lo] and h.free_mask[v_hi]

    full = np.zeros(h.n_full)
    full[v_lo] = 1.0
    # the spike on one slit side vanishes identically on elements that
    # reference the twin vertex
    for k in range(mesh.n_elements):
        tri = mesh.elements[k]
        if v_hi in tri:
            vals = h.evaluate(full, [k], np.array([[1 / 3, 1 / 3]]))[0]
            assert np.max(np.abs(vals)) < 1e-15
        if v_lo in tri:
            vals = h.evaluate(full, [k], np.full((1, 2), 1 / 3))[0]
            assert np.max(np.abs(vals)) > 0.1
