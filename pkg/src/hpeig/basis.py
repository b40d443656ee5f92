"""Hierarchical shape functions on the reference triangle.

The local space of degree p is the full polynomial space P_p.  The basis
splits into vertex, edge and interior (bubble) functions:

  vertex   : barycentric coordinates lam_0, lam_1, lam_2
  edge l,k : lam_a * lam_b * psi_{k-2}(lam_b - lam_a),  2 <= k <= p
  bubble   : lam_0 * lam_1 * lam_2 * P_i(lam_1 - lam_0) * P_j(2*lam_2 - 1)

where psi_j is the integrated-Legendre kernel.  With L_k the k-th
integrated Legendre polynomial, L_k(s) = (1 - s^2)/4 * psi_{k-2}(s), so
the trace of an edge function on its edge is L_k of the edge coordinate
and it vanishes on the other two edges.  The kernel is evaluated through
the stable identity psi_{k-2}(s) = -4 c_k P'_{k-1}(s) / ((k-1) k) with
c_k = sqrt((2k-1)/2), which avoids the removable singularity at s = +-1.

Bases are ordered by degree: the degree-p layout is a prefix of the
degree-(p+1) layout, so coefficient vectors embed by zero padding.

Edge functions of odd k are odd under swapping the edge endpoints, so a
local edge whose endpoints appear in the opposite order from the global
edge orientation carries a sign flip on its odd modes.
"""

import functools

import numpy as np
from scipy.special import eval_jacobi

from .quadrature import triangle_rule

# local edge l is opposite local vertex l
EDGE_VERTICES = ((1, 2), (2, 0), (0, 1))

# gradients of the barycentric coordinates on the reference triangle
GRAD_LAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def n_local(p):
    """Dimension of P_p on a triangle."""
    return (p + 1) * (p + 2) // 2


@functools.lru_cache(maxsize=None)
def layout(p):
    """Mode descriptors for the degree-p local basis, in storage order.

    Returns a tuple of tuples: ("v", i) for vertex modes, ("e", l, k) for
    the degree-k mode on local edge l, ("b", i, j) for the bubble
    lam0*lam1*lam2*P_i(lam1-lam0)*P_j(2*lam2-1) of degree i + j + 3.
    """
    modes = [("v", 0), ("v", 1), ("v", 2)]
    for k in range(2, p + 1):
        for l in range(3):
            modes.append(("e", l, k))
        for j in range(k - 2):
            modes.append(("b", k - 3 - j, j))
    assert len(modes) == n_local(p)
    return tuple(modes)


@functools.lru_cache(maxsize=None)
def edge_mode_indices(p):
    """Local indices of edge modes: array (3, p-1), entry [l, k-2]."""
    idx = np.zeros((3, max(p - 1, 0)), dtype=np.int64)
    for i, mode in enumerate(layout(p)):
        if mode[0] == "e":
            _, l, k = mode
            idx[l, k - 2] = i
    return idx


@functools.lru_cache(maxsize=None)
def bubble_indices(p):
    return np.array(
        [i for i, m in enumerate(layout(p)) if m[0] == "b"], dtype=np.int64
    )


def legendre_table(x, n, nderiv=1):
    """Legendre polynomials P_0..P_n and derivatives at points x.

    Returns an array of shape (nderiv+1, n+1, len(x)); entry [d, m] is
    the d-th derivative of P_m.
    """
    x = np.asarray(x, dtype=float)
    T = np.zeros((nderiv + 1, n + 1, x.shape[0]))
    T[0, 0] = 1.0
    if n >= 1:
        T[0, 1] = x
        if nderiv >= 1:
            T[1, 1] = 1.0
    # (m+1) P_{m+1} = (2m+1) x P_m - m P_{m-1}, differentiated d times
    for m in range(1, n):
        for d in range(nderiv + 1):
            lower = d * T[d - 1, m] if d >= 1 else 0.0
            T[d, m + 1] = ((2 * m + 1) * (x * T[d, m] + lower) - m * T[d, m - 1]) / (m + 1)
    return T


def kernel_table(x, jmax, nderiv=0):
    """Kernels psi_0..psi_jmax and derivatives at points x.

    Returns shape (nderiv+1, jmax+1, len(x)).  psi_j has degree j.
    """
    x = np.asarray(x, dtype=float)
    P = legendre_table(x, jmax + 1, nderiv=nderiv + 1)
    K = np.zeros((nderiv + 1, jmax + 1, x.shape[0]))
    for j in range(jmax + 1):
        k = j + 2
        scale = -4.0 * np.sqrt((2 * k - 1) / 2.0) / ((k - 1) * k)
        for d in range(nderiv + 1):
            K[d, j] = scale * P[d + 1, k - 1]
    return K


def edge_shapes(p, t):
    """Trace basis on an edge parametrized by t in [0, 1].

    Columns: endpoint at t=0, endpoint at t=1, then modes k = 2..p.
    Shape (len(t), p+1).
    """
    t = np.asarray(t, dtype=float)
    s = 2.0 * t - 1.0
    out = np.zeros((t.shape[0], p + 1))
    out[:, 0] = 1.0 - t
    out[:, 1] = t
    if p >= 2:
        psi = kernel_table(s, p - 2)[0]
        blend = 0.25 * (1.0 - s * s)
        for k in range(2, p + 1):
            out[:, k] = blend * psi[k - 2]
    return out


def _sym2(u, v):
    """Packed u (x) v + v (x) u with component order (xx, xy, yy)."""
    return np.array([2.0 * u[0] * v[0], u[0] * v[1] + u[1] * v[0], 2.0 * u[1] * v[1]])


def _outer2(u):
    """Packed u (x) u."""
    return np.array([u[0] * u[0], u[0] * u[1], u[1] * u[1]])


def _sym2_pointwise(dq, u):
    """Packed dq (x) u + u (x) dq for pointwise dq (n, 2), constant u."""
    return np.stack(
        [
            2.0 * dq[:, 0] * u[0],
            dq[:, 0] * u[1] + dq[:, 1] * u[0],
            2.0 * dq[:, 1] * u[1],
        ],
        axis=1,
    )


def tri_shapes(p, pts, nderiv=1):
    """Shape functions of degree p at reference points.

    Parameters
    ----------
    p : int
        Polynomial degree, >= 1.
    pts : ndarray, shape (n, 2)
        Points in the reference triangle.
    nderiv : int
        0 for values, 1 to add gradients, 2 to add second derivatives.

    Returns
    -------
    dict with "val" (n, nloc), and depending on nderiv "grad"
    (n, nloc, 2) and "hess" (n, nloc, 3) with order (xx, xy, yy).
    """
    pts = np.asarray(pts, dtype=float)
    npts = pts.shape[0]
    nloc = n_local(p)
    lam = np.stack([1.0 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])

    val = np.zeros((npts, nloc))
    out = {"val": val}
    if nderiv >= 1:
        grad = np.zeros((npts, nloc, 2))
        out["grad"] = grad
    if nderiv >= 2:
        hess = np.zeros((npts, nloc, 3))
        out["hess"] = hess

    for i in range(3):
        val[:, i] = lam[i]
        if nderiv >= 1:
            grad[:, i] = GRAD_LAMBDA[i]

    if p >= 2:
        idx = edge_mode_indices(p)
        for l, (a, b) in enumerate(EDGE_VERTICES):
            u = lam[b] - lam[a]
            psi = kernel_table(u, p - 2, nderiv=nderiv)
            q = lam[a] * lam[b]
            du = GRAD_LAMBDA[b] - GRAD_LAMBDA[a]
            dq = np.outer(lam[b], GRAD_LAMBDA[a]) + np.outer(lam[a], GRAD_LAMBDA[b])
            hq = _sym2(GRAD_LAMBDA[a], GRAD_LAMBDA[b])
            for k in range(2, p + 1):
                j = k - 2
                li = idx[l, j]
                val[:, li] = q * psi[0, j]
                if nderiv >= 1:
                    grad[:, li] = dq * psi[0, j][:, None] + np.outer(q * psi[1, j], du)
                if nderiv >= 2:
                    hess[:, li] = (
                        np.outer(psi[0, j], hq)
                        + _sym2_pointwise(dq, du) * psi[1, j][:, None]
                        + np.outer(q * psi[2, j], _outer2(du))
                    )

    if p >= 3:
        u01 = lam[1] - lam[0]
        v2 = 2.0 * lam[2] - 1.0
        du = GRAD_LAMBDA[1] - GRAD_LAMBDA[0]
        dv = 2.0 * GRAD_LAMBDA[2]
        Pu = legendre_table(u01, p - 3, nderiv=nderiv)
        Pv = legendre_table(v2, p - 3, nderiv=nderiv)
        w = lam[0] * lam[1] * lam[2]
        dw = (
            np.outer(lam[1] * lam[2], GRAD_LAMBDA[0])
            + np.outer(lam[0] * lam[2], GRAD_LAMBDA[1])
            + np.outer(lam[0] * lam[1], GRAD_LAMBDA[2])
        )
        hw = (
            np.outer(lam[2], _sym2(GRAD_LAMBDA[0], GRAD_LAMBDA[1]))
            + np.outer(lam[1], _sym2(GRAD_LAMBDA[0], GRAD_LAMBDA[2]))
            + np.outer(lam[0], _sym2(GRAD_LAMBDA[1], GRAD_LAMBDA[2]))
        )
        pos = {m: i for i, m in enumerate(layout(p))}
        for i_deg in range(p - 2):
            for j_deg in range(p - 2 - i_deg):
                li = pos[("b", i_deg, j_deg)]
                g, h = Pu[0, i_deg], Pv[0, j_deg]
                val[:, li] = w * g * h
                if nderiv >= 1:
                    gp, hp = Pu[1, i_deg], Pv[1, j_deg]
                    grad[:, li] = (
                        dw * (g * h)[:, None]
                        + np.outer(w * gp * h, du)
                        + np.outer(w * g * hp, dv)
                    )
                if nderiv >= 2:
                    gpp, hpp = Pu[2, i_deg], Pv[2, j_deg]
                    hess[:, li] = (
                        hw * (g * h)[:, None]
                        + _sym2_pointwise(dw, du) * (gp * h)[:, None]
                        + _sym2_pointwise(dw, dv) * (g * hp)[:, None]
                        + np.outer(w * gpp * h, _outer2(du))
                        + np.outer(w * gp * hp, _sym2(du, dv))
                        + np.outer(w * g * hpp, _outer2(dv))
                    )

    return out


@functools.lru_cache(maxsize=None)
def _dubiner_norms(p):
    pts, w = triangle_rule(2 * p + 2)
    vals = _dubiner_raw(p, pts)
    return np.sqrt(np.einsum("qi,qi,q->i", vals, vals, w))


@functools.lru_cache(maxsize=None)
def dubiner_degrees(p):
    """Total degree of each mode in the degree-p orthonormal basis."""
    return np.array([q for q in range(p + 1) for _ in range(q + 1)], dtype=np.int64)


def _dubiner_raw(p, pts):
    x, y = pts[:, 0], pts[:, 1]
    omy = 1.0 - y
    safe = np.where(omy > 1e-14, omy, 1.0)
    a = np.where(omy > 1e-14, 2.0 * x / safe - 1.0, 0.0)
    b = 2.0 * y - 1.0
    Pa = legendre_table(a, p, nderiv=0)[0]
    cols = []
    for q in range(p + 1):
        for i in range(q + 1):
            j = q - i
            cols.append(Pa[i] * omy**i * eval_jacobi(j, 2 * i + 1, 0, b))
    return np.column_stack(cols)


def dubiner(p, pts):
    """L2-orthonormal polynomial basis on the reference triangle.

    Modes are ordered by total degree q = 0..p, then by the degree of
    the first factor, matching dubiner_degrees(p).
    Shape (len(pts), (p+1)(p+2)/2).
    """
    return _dubiner_raw(p, np.asarray(pts, dtype=float)) / _dubiner_norms(p)
