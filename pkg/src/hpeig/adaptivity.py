"""Adaptive refinement loop driven by the residual indicators.

Each step solves for the lowest cluster, estimates per-element error,
marks a fixed fraction of elements by largest value-weighted indicator,
and splits the marked set between bisection and degree increment using
a per-element analyticity estimate: the local solution is expanded in
an orthonormal modal basis, the block norms a_q per total degree q are
fitted to log a_q ~ const - sigma q, and large decay rates choose the
degree increment.  Degrees of neighboring elements are smoothed to
differ by at most one (raising the lower side).
"""

import math
from dataclasses import dataclass

import numpy as np

from .assembly import assemble_mass, assemble_stiffness
from .basis import dubiner, dubiner_degrees, tri_shapes
from .eigensolve import solve_lowest
from .estimator import estimate
from .mesh import refine
from .quadrature import triangle_rule
from .space import DofHandler, transfer

H_REFINE = "h"
P_INCREMENT = "p"


@dataclass
class AdaptConfig:
    """Knobs for the adaptive loop.

    m is the cluster size; theta the marking fraction; sigma0 the decay
    threshold above which a marked element takes a degree increment;
    p_max caps degrees (capped elements fall back to bisection).  With
    mode "uniform" every element is bisected each step and degrees stay
    at p_init.
    """
    m: int
    theta: float = 0.3
    sigma0: float = 1.0
    p_max: int = 10
    p_init: int = 2
    dof_budget: int = 30000
    mode: str = "adaptive"
    max_steps: int = 100
    solver_tol: float = 1e-10
    solver_max_iter: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("adaptive", "uniform"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if self.m < 1 or self.p_init < 1 or self.p_max < self.p_init:
            raise ValueError("need m >= 1 and 1 <= p_init <= p_max")


@dataclass
class ConvergenceRecord:
    """One adaptive step: discrete space, eigenpairs, indicators."""
    step: int
    handler: DofHandler
    cluster: object
    field: object

    @property
    def n_dofs(self):
        return self.handler.n_dofs


def mark_fixed_fraction(indicators, theta):
    """Ids of the ceil(theta n) largest indicators, ties to lower id."""
    indicators = np.asarray(indicators, dtype=float)
    n = indicators.size
    count = int(math.ceil(theta * n))
    order = np.lexsort((np.arange(n), -indicators))
    return np.sort(order[:count])


def estimate_analyticity(handler, coeffs_full, elems, members):
    """Modal decay rate sigma per (element, member) pair.

    The local field is projected onto the orthonormal modal basis of
    its element; block norms a_q per polynomial degree decay like
    exp(-sigma q) for analytic fields.  The fit drops blocks below
    1e-14 of the largest and ignores the constant block once p >= 3;
    fewer than two surviving points means the expansion is resolved
    and returns +inf.
    """
    sigmas = np.empty(len(elems))
    for i, (k, mode) in enumerate(zip(elems, members)):
        p = int(handler.degrees[k])
        pts, w = triangle_rule(2 * p)
        V = tri_shapes(p, pts, nderiv=0)["val"]
        D = dubiner(p, pts)
        local = handler.local_coeffs(coeffs_full[:, mode], [k])[0]
        coef = D.T @ (w * (V @ local))
        degs = dubiner_degrees(p)
        a = np.array([np.linalg.norm(coef[degs == q]) for q in range(p + 1)])
        q = np.arange(p + 1)
        keep = a >= 1e-14 * max(a.max(), 1e-300)
        if p >= 3:
            keep[0] = False
        if keep.sum() < 2:
            sigmas[i] = np.inf
            continue
        slope = np.polyfit(q[keep], np.log(a[keep]), 1)[0]
        sigmas[i] = -slope
    return sigmas


def decide_refinements(handler, field, vectors, marked, cfg):
    """Split marked elements into bisection and degree-increment sets.

    Each marked element is judged by its dominant cluster member (the
    one with the largest value-weighted local indicator).  Low degrees
    always bisect; analytic decay at degree below p_max increments.
    Returns (h_marked, p_marked, sigmas).
    """
    empty = np.array([], dtype=np.int64)
    if marked.size == 0:
        return empty, empty, np.array([])
    if field.included.any():
        members = np.asarray(np.argmax(field.scaled_local[marked], axis=1))
    else:
        members = np.zeros(marked.size, dtype=np.int64)
    coeffs_full = handler.expand(vectors)
    sigmas = estimate_analyticity(handler, coeffs_full, marked, members)
    p_el = handler.degrees[marked]
    take_p = (p_el >= 2) & (sigmas >= cfg.sigma0) & (p_el < cfg.p_max)
    return marked[~take_p], marked[take_p], sigmas


def adapt_loop(mesh, co, dirichlet_tags, cfg):
    """Generate ConvergenceRecords until the dof budget is met.

    Solves are warm-started by carrying the previous cluster through
    mesh refinement and degree increases.  Pure Neumann problems use a
    negative shift to keep the factorization nonsingular.
    """
    degrees = np.full(mesh.n_elements, cfg.p_init, dtype=np.int64)
    shift = 0.0 if dirichlet_tags else -1.0
    prev = None
    for step in range(cfg.max_steps):
        handler = DofHandler(mesh, degrees, dirichlet_tags)
        B = assemble_stiffness(handler, co)
        M = assemble_mass(handler)
        x0 = None
        if prev is not None:
            carried = transfer(prev.handler, handler,
                               prev.handler.expand(prev.cluster.vectors))
            x0 = handler.restrict(carried)
        cluster = solve_lowest(B, M, cfg.m, shift=shift, tol=cfg.solver_tol,
                               max_iter=cfg.solver_max_iter, seed=cfg.seed,
                               x0=x0)
        field = estimate(handler, cluster.vectors, cluster.values, co)
        record = ConvergenceRecord(step, handler, cluster, field)
        yield record
        if handler.n_dofs >= cfg.dof_budget:
            return
        prev = record

        if cfg.mode == "uniform":
            mesh = refine(mesh, np.arange(mesh.n_elements))
            degrees = degrees[mesh.parent]
            continue

        marked = mark_fixed_fraction(field.element_totals, cfg.theta)
        h_marked, p_marked, _ = decide_refinements(
            handler, field, cluster.vectors, marked, cfg)

        degrees = degrees.copy()
        degrees[p_marked] += 1
        if h_marked.size:
            mesh = refine(mesh, h_marked)
            degrees = degrees[mesh.parent]
        degrees = smooth_degrees(mesh, degrees)


def smooth_degrees(mesh, degrees):
    """Raise degrees until neighbors differ by at most one."""
    degrees = degrees.copy()
    interior = mesh.edge_elems[:, 1] >= 0
    ka = mesh.edge_elems[interior, 0]
    kb = mesh.edge_elems[interior, 1]
    while True:
        req = degrees.copy()
        np.maximum.at(req, ka, degrees[kb] - 1)
        np.maximum.at(req, kb, degrees[ka] - 1)
        if np.array_equal(req, degrees):
            return degrees
        degrees = req
