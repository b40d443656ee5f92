"""Global hp finite element spaces on triangle meshes.

A DofHandler numbers the conforming degrees of freedom of a space with
per-element polynomial degrees.  On an edge shared by elements of
different degree only the modes up to the smaller degree exist (minimum
rule); the higher-degree element's extra edge modes are dropped from the
space entirely.  Edge mode k is odd under endpoint swap for odd k, so
elements whose local edge runs against the global orientation (from the
lower to the higher vertex id) carry a -1 sign on their odd edge modes.

Dofs are numbered: vertices first, then edge blocks, then per-element
interior blocks.  Dirichlet constraints are a mask on this full
numbering; matrices and solution vectors live on the free subset.
"""

import functools

import numpy as np
import scipy.linalg

from .basis import (
    EDGE_VERTICES,
    bubble_indices,
    edge_mode_indices,
    edge_shapes,
    n_local,
    layout,
    tri_shapes,
)
from .quadrature import interval_rule, triangle_rule


@functools.lru_cache(maxsize=None)
def _ref_mass(p):
    pts, w = triangle_rule(2 * p)
    V = tri_shapes(p, pts, nderiv=0)["val"]
    M = (V * w[:, None]).T @ V
    return scipy.linalg.cho_factor(M)


@functools.lru_cache(maxsize=None)
def _edge_gram(nmodes, p_full):
    t, w = interval_rule(2 * p_full + 2)
    E = edge_shapes(p_full, t)[:, 2 : 2 + nmodes]
    return scipy.linalg.cho_factor((E * w[:, None]).T @ E), t, w, E


class DofHandler:
    """Conforming dof numbering for a variable-degree space on a mesh.

    Parameters
    ----------
    mesh : Mesh
    degrees : int or ndarray (ne,)
        Polynomial degree per element, >= 1.
    dirichlet_tags : iterable of str
        Boundary tags with essential conditions; everything else is
        natural.
    """

    def __init__(self, mesh, degrees, dirichlet_tags=()):
        self.mesh = mesh
        if np.isscalar(degrees):
            degrees = np.full(mesh.n_elements, int(degrees), dtype=np.int64)
        self.degrees = np.asarray(degrees, dtype=np.int64)
        if self.degrees.shape != (mesh.n_elements,) or self.degrees.min() < 1:
            raise ValueError("degrees must be a positive int per element")
        self.dirichlet_tags = frozenset(dirichlet_tags)
        unknown = self.dirichlet_tags - set(mesh.tag_names)
        if unknown:
            raise ValueError(f"unknown boundary tags {sorted(unknown)}")

        ne, nE, nv = mesh.n_elements, mesh.n_edges, mesh.n_vertices

        # minimum rule: conforming degree per edge
        self.p_conf = np.full(nE, np.iinfo(np.int64).max)
        np.minimum.at(self.p_conf, mesh.elem_edges.ravel(),
                      np.repeat(self.degrees, 3))
        # larger adjacent degree, used for edge weights in error bounds
        self.p_edge_max = np.zeros(nE, dtype=np.int64)
        np.maximum.at(self.p_edge_max, mesh.elem_edges.ravel(),
                      np.repeat(self.degrees, 3))

        edge_counts = np.maximum(self.p_conf - 1, 0)
        self.edge_offset = nv + np.concatenate([[0], np.cumsum(edge_counts)])
        bubble_counts = (self.degrees - 1) * (self.degrees - 2) // 2
        self.bubble_offset = self.edge_offset[-1] + np.concatenate(
            [[0], np.cumsum(bubble_counts)])
        self.n_full = int(self.bubble_offset[-1])

        self.l2g = []
        self.signs = []
        for k in range(ne):
            p = self.degrees[k]
            g = np.full(n_local(p), -1, dtype=np.int64)
            s = np.ones(n_local(p))
            g[:3] = mesh.elements[k]
            if p >= 2:
                idx = edge_mode_indices(p)
                for l in range(3):
                    e = mesh.elem_edges[k, l]
                    a = mesh.elements[k, EDGE_VERTICES[l][0]]
                    reversed_edge = a != mesh.edges[e, 0]
                    for kk in range(2, p + 1):
                        if kk <= self.p_conf[e]:
                            g[idx[l, kk - 2]] = self.edge_offset[e] + kk - 2
                            if reversed_edge and kk % 2 == 1:
                                s[idx[l, kk - 2]] = -1.0
            nb = bubble_counts[k]
            if nb:
                g[bubble_indices(p)] = self.bubble_offset[k] + np.arange(nb)
            self.l2g.append(g)
            self.signs.append(s)

        # Dirichlet constraints
        free = np.ones(self.n_full, dtype=bool)
        kinds = mesh.edge_kinds(self.dirichlet_tags)
        for e in np.nonzero(kinds == 1)[0]:
            free[mesh.edges[e]] = False
            free[self.edge_offset[e]:self.edge_offset[e + 1]] = False
        self.free_mask = free
        self.free_to_full = np.nonzero(free)[0]
        self.full_to_free = np.full(self.n_full, -1, dtype=np.int64)
        self.full_to_free[self.free_to_full] = np.arange(self.free_to_full.size)
        self.n_dofs = int(self.free_to_full.size)

        self.groups = {}
        for p in np.unique(self.degrees):
            self.groups[int(p)] = np.nonzero(self.degrees == p)[0]

    def group_l2g(self, p):
        """Stacked l2g and signs for all elements of degree p."""
        ids = self.groups[p]
        g = np.stack([self.l2g[k] for k in ids])
        s = np.stack([self.signs[k] for k in ids])
        return ids, g, s

    def expand(self, reduced):
        reduced = np.asarray(reduced)
        out = np.zeros((self.n_full,) + reduced.shape[1:])
        out[self.free_to_full] = reduced
        return out

    def restrict(self, full):
        return np.asarray(full)[self.free_to_full]

    def local_coeffs(self, coeffs, elems):
        """Local coefficient arrays (signed) for the given elements.

        coeffs has shape (n_full,) or (n_full, m).  Returns a list of
        arrays, one per element.
        """
        coeffs = np.asarray(coeffs)
        out = []
        for k in elems:
            g = self.l2g[k]
            c = np.where((g >= 0)[:, None] if coeffs.ndim == 2 else g >= 0,
                         coeffs[np.maximum(g, 0)], 0.0)
            s = self.signs[k]
            out.append(c * (s[:, None] if coeffs.ndim == 2 else s))
        return out

    def evaluate(self, coeffs, elems, ref_pts, deriv=0):
        """Evaluate a coefficient vector on elements at reference points.

        Returns values of shape (len(elems), npts) for deriv=0 or
        physical gradients (len(elems), npts, 2) for deriv=1.
        """
        elems = np.asarray(elems, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=float)
        maps = self.mesh.maps()
        npts = np.asarray(ref_pts).shape[0]
        out = np.zeros((elems.size, npts) if deriv == 0
                       else (elems.size, npts, 2))
        local = self.local_coeffs(coeffs, elems)
        for i, k in enumerate(elems):
            sh = tri_shapes(int(self.degrees[k]), ref_pts, nderiv=deriv)
            if deriv == 0:
                out[i] = sh["val"] @ local[i]
            else:
                g = np.einsum("qld,l->qd", sh["grad"], local[i])
                out[i] = g @ maps["Jinv"][k]
        return out

    def interpolate(self, f):
        """Coefficients (full numbering) approximating a callable f.

        Vertex values are interpolated; edge and interior modes are
        L2 projections of the remaining residual, so any f already in
        the space is reproduced exactly.
        """
        mesh = self.mesh
        coeffs = np.zeros(self.n_full)
        coeffs[:mesh.n_vertices] = f(mesh.vertices)

        for e in range(mesh.n_edges):
            nmodes = self.p_conf[e] - 1
            if nmodes < 1:
                continue
            a, b = mesh.edges[e]
            va, vb = mesh.vertices[a], mesh.vertices[b]
            chol, t, w, E = _edge_gram(nmodes, int(self.p_conf[e]))
            pts = va[None, :] + t[:, None] * (vb - va)[None, :]
            resid = f(pts) - (coeffs[a] * (1 - t) + coeffs[b] * t)
            rhs = E.T @ (w * resid)
            coeffs[self.edge_offset[e]:self.edge_offset[e] + nmodes] = \
                scipy.linalg.cho_solve(chol, rhs)

        maps = self.mesh.maps()
        for k in range(mesh.n_elements):
            p = int(self.degrees[k])
            if p < 3:
                continue
            pts, w = triangle_rule(2 * p)
            phys = maps["origin"][k] + pts @ maps["J"][k].T
            V = tri_shapes(p, pts, nderiv=0)["val"]
            g = self.l2g[k]
            s = self.signs[k]
            edge_part = np.where(g >= 0, coeffs[np.maximum(g, 0)], 0.0) * s
            bi = bubble_indices(p)
            edge_part[bi] = 0.0
            resid = f(phys) - V @ edge_part
            rhs = V.T @ (w * resid)
            d = scipy.linalg.cho_solve(_ref_mass(p), rhs)
            coeffs[g[bi]] = d[bi] * s[bi]
        return coeffs


def transfer(old, new, coeffs):
    """Carry coefficients from one handler to a refined or enriched one.

    The new handler's mesh must descend from the old one through a
    single refine call (its parent array indexes old elements, old
    vertex ids are preserved), or be the same mesh, and new degrees must
    dominate old degrees elementwise through the parent map.  The
    transferred function is identical as an element of the larger space
    up to roundoff.

    coeffs uses the old full numbering, shape (n_full,) or (n_full, m);
    returns the same in the new full numbering.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    squeeze = coeffs.ndim == 1
    if squeeze:
        coeffs = coeffs[:, None]
    m = coeffs.shape[1]
    mo, mn = old.mesh, new.mesh
    out = np.zeros((new.n_full, m))

    # a reused mesh object keeps the parent array of its own creation,
    # so identity is the right element map in that case
    parent = (np.arange(mn.n_elements, dtype=np.int64) if mn is mo
              else mn.parent)
    if np.any(new.degrees < old.degrees[parent]):
        raise ValueError("transfer requires non-decreasing degrees")

    # vertex values survive by hierarchy
    out[:mo.n_vertices] = coeffs[:mo.n_vertices]

    # surviving edges keep their trace coefficients
    for key, e_new in mn._edge_index.items():
        e_old = mo._edge_index.get(key)
        if e_old is None:
            continue
        n_old = old.p_conf[e_old] - 1
        if n_old < 1:
            continue
        out[new.edge_offset[e_new]:new.edge_offset[e_new] + n_old] = \
            coeffs[old.edge_offset[e_old]:old.edge_offset[e_old] + n_old]

    maps_new = mn.maps()
    maps_old = mo.maps()
    same = np.zeros(mn.n_elements, dtype=bool)
    for k in range(mn.n_elements):
        same[k] = np.array_equal(mn.elements[k], mo.elements[parent[k]])

    # unrefined elements: bubble blocks embed by the degree-prefix layout
    for k in np.nonzero(same)[0]:
        kp = parent[k]
        nb_old = (old.degrees[kp] - 1) * (old.degrees[kp] - 2) // 2
        if nb_old:
            out[new.bubble_offset[k]:new.bubble_offset[k] + nb_old] = \
                coeffs[old.bubble_offset[kp]:old.bubble_offset[kp] + nb_old]

    # refined elements: local L2 projection of the parent function, which
    # lies in the child's local space, so the projection is exact
    for k in np.nonzero(~same)[0]:
        kp = int(parent[k])
        p_new = int(new.degrees[k])
        p_old = int(old.degrees[kp])
        pts, w = triangle_rule(2 * p_new)
        phys = maps_new["origin"][k] + pts @ maps_new["J"][k].T
        ref_old = (phys - maps_old["origin"][kp]) @ maps_old["Jinv"][kp].T
        g_old = old.l2g[kp]
        loc_old = np.where((g_old >= 0)[:, None], coeffs[np.maximum(g_old, 0)], 0.0)
        loc_old *= old.signs[kp][:, None]
        vals = tri_shapes(p_old, ref_old, nderiv=0)["val"] @ loc_old
        V = tri_shapes(p_new, pts, nderiv=0)["val"]
        d = scipy.linalg.cho_solve(_ref_mass(p_new), V.T @ (w[:, None] * vals))
        g_new = new.l2g[k]
        ok = g_new >= 0
        out[g_new[ok]] = d[ok] * new.signs[k][ok, None]

    return out[:, 0] if squeeze else out
