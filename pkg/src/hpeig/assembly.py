"""Assembly of stiffness, mass and load for piecewise constant data.

The bilinear forms are

    B(u, v) = int A grad(u) . grad(v) + c u v,      (u, v) = int u v

with A a symmetric positive definite 2x2 matrix and c >= 0 a scalar,
both constant on each material region.  Because the data is constant
per element and reference maps are affine, every element matrix is a
contraction of precomputed reference matrices:

    K_loc = sum_ab C_ab S_ab + c detJ M_ref,
    C = detJ Jinv A Jinv^T,   S_ab = G_a^T W G_b

so assembly loops only over degree classes, not elements.
"""

import functools

import numpy as np
import scipy.sparse

from .basis import tri_shapes
from .quadrature import triangle_rule


class Coefficients:
    """Material data per region: x -> (A, c), constant on each region.

    Parameters
    ----------
    A : list of 2x2 arrays (or a single one), indexed by mesh region.
    c : list of floats (or a single one), indexed by mesh region.
    """

    def __init__(self, A=((1.0, 0.0), (0.0, 1.0)), c=0.0):
        A = np.asarray(A, dtype=float)
        if A.ndim == 2:
            A = A[None, :, :]
        self.A = A
        self.c = np.atleast_1d(np.asarray(c, dtype=float))
        for i, Ai in enumerate(self.A):
            if not np.allclose(Ai, Ai.T, atol=1e-14):
                raise ValueError(f"A[{i}] is not symmetric")
            if np.linalg.eigvalsh(Ai).min() <= 0:
                raise ValueError(f"A[{i}] is not positive definite")
        if self.c.min() < 0:
            raise ValueError("c must be nonnegative")

    def on_elements(self, mesh):
        """Per-element (A (ne,2,2), c (ne,)) resolved through regions."""
        nr = int(mesh.region.max()) + 1 if mesh.n_elements else 1
        A = self.A if self.A.shape[0] > 1 else np.repeat(self.A, nr, axis=0)
        c = self.c if self.c.shape[0] > 1 else np.repeat(self.c, nr)
        if A.shape[0] < nr or c.shape[0] < nr:
            raise ValueError("fewer material entries than mesh regions")
        return A[mesh.region], c[mesh.region]


@functools.lru_cache(maxsize=None)
def reference_kernels(p):
    """Cached reference tables for degree p.

    Returns dict with quadrature (pts, w), value table V (nq, nl),
    gradient tables G (nq, nl, 2), hessian table H (nq, nl, 3),
    stiffness blocks S (2, 2, nl, nl) and mass M (nl, nl).
    """
    pts, w = triangle_rule(2 * p)
    sh = tri_shapes(p, pts, nderiv=2)
    V, G, H = sh["val"], sh["grad"], sh["hess"]
    S = np.einsum("qia,q,qjb->abij", G, w, G)
    M = (V * w[:, None]).T @ V
    return {"pts": pts, "w": w, "V": V, "G": G, "H": H, "S": S, "M": M}


def _scatter(handler, build_local):
    """Assemble a symmetric bilinear form given per-group local matrices."""
    rows, cols, vals = [], [], []
    mesh = handler.mesh
    maps = mesh.maps()
    for p, ids in handler.groups.items():
        ids, g, s = handler.group_l2g(p)
        loc = build_local(p, ids, maps)
        loc = loc * s[:, :, None] * s[:, None, :]
        gf = np.where(g >= 0, handler.full_to_free[np.maximum(g, 0)], -1)
        r = np.broadcast_to(gf[:, :, None], loc.shape)
        c = np.broadcast_to(gf[:, None, :], loc.shape)
        ok = (r >= 0) & (c >= 0)
        rows.append(r[ok])
        cols.append(c[ok])
        vals.append(loc[ok])
    n = handler.n_dofs
    A = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()
    return 0.5 * (A + A.T)


def assemble_stiffness(handler, coeffs):
    """Matrix of B(u, v) on the free dofs, CSR."""
    mesh = handler.mesh
    A_el, c_el = coeffs.on_elements(mesh)

    def build(p, ids, maps):
        ker = reference_kernels(p)
        detJ = maps["detJ"][ids]
        Jinv = maps["Jinv"][ids]
        C = detJ[:, None, None] * np.einsum(
            "kab,kbc,kdc->kad", Jinv, A_el[ids], Jinv)
        loc = np.einsum("kab,abij->kij", C, ker["S"])
        loc += (c_el[ids] * detJ)[:, None, None] * ker["M"][None]
        return loc

    return _scatter(handler, build)


def assemble_mass(handler):
    """Matrix of the L2 inner product on the free dofs, CSR."""
    def build(p, ids, maps):
        ker = reference_kernels(p)
        return maps["detJ"][ids][:, None, None] * ker["M"][None]

    return _scatter(handler, build)


def assemble_load(handler, coeffs_full):
    """Load vector (f, v) for f given by coefficients in the same space.

    Uses pointwise quadrature values of f, independently of the
    assembled mass matrix.  Returns the free vector.
    """
    mesh = handler.mesh
    maps = mesh.maps()
    coeffs_full = np.asarray(coeffs_full, dtype=float)
    squeeze = coeffs_full.ndim == 1
    if squeeze:
        coeffs_full = coeffs_full[:, None]
    out = np.zeros((handler.n_dofs, coeffs_full.shape[1]))
    for p, _ in handler.groups.items():
        ids, g, s = handler.group_l2g(p)
        ker = reference_kernels(p)
        loc = np.where((g >= 0)[:, :, None], coeffs_full[np.maximum(g, 0)], 0.0)
        loc = loc * s[:, :, None]
        fvals = np.einsum("ql,klm->kqm", ker["V"], loc)
        rhs = np.einsum("ql,q,kqm->klm", ker["V"], ker["w"], fvals)
        rhs *= maps["detJ"][ids][:, None, None]
        rhs *= s[:, :, None]
        gf = np.where(g >= 0, handler.full_to_free[np.maximum(g, 0)], -1)
        ok = gf >= 0
        np.add.at(out, gf[ok], rhs[ok])
    return out[:, 0] if squeeze else out
