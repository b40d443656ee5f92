"""Benchmark problem definitions: geometry, materials, references.

Each problem pairs a mesh factory with boundary conditions, piecewise
constant materials, and the key of its reference spectrum.  The
checkerboard problems put the contrast on the lower-left and
upper-right quadrants of the unit square.
"""

from dataclasses import dataclass

import numpy as np

from .assembly import Coefficients
from .mesh import (slit_square_grid, square_grid, triangle_grid,
                   triangle_hole_grid)


def _quadrants(centroids):
    return ((centroids[:, 0] >= 0.5).astype(np.int64)
            + 2 * (centroids[:, 1] >= 0.5).astype(np.int64))


@dataclass(frozen=True)
class ProblemSpec:
    """A named benchmark: mesh builder, boundary data, materials."""
    key: str
    description: str
    build: object
    default_cells: int
    dirichlet_tags: tuple
    coefficients: Coefficients
    reference: str
    m: int

    def mesh(self, cells=None):
        """Initial mesh with the given (or default) resolution."""
        return self.build(self.default_cells if cells is None else cells)


def _checkerboard(kind, value):
    if kind == "reaction":
        return Coefficients(c=[value, 0.0, 0.0, value])
    eye = np.eye(2)
    return Coefficients(A=[value * eye, eye, eye, value * eye],
                        c=[0.0, 0.0, 0.0, 0.0])


def _registry():
    sq = lambda n: square_grid(n)
    sq_q = lambda n: square_grid(n, region_fn=_quadrants)
    tri = lambda n: triangle_grid(n, side=1.0)
    hole = lambda n: triangle_hole_grid()
    slit = lambda n: slit_square_grid(n)
    return {
        "square_dirichlet": ProblemSpec(
            "square_dirichlet",
            "Laplacian on the unit square, Dirichlet boundary",
            sq, 4, ("boundary",), Coefficients(), "square_dirichlet", 4),
        "square_neumann": ProblemSpec(
            "square_neumann",
            "Laplacian on the unit square, Neumann boundary",
            sq, 4, (), Coefficients(), "square_neumann", 4),
        "triangle": ProblemSpec(
            "triangle",
            "Laplacian on the unit equilateral triangle, Dirichlet",
            tri, 4, ("boundary",), Coefficients(), "triangle", 4),
        "triangle_hole": ProblemSpec(
            "triangle_hole",
            "equilateral triangle, side 2, concentric side-1/2 hole, "
            "Dirichlet on both boundaries",
            hole, 0, ("outer", "hole"), Coefficients(), "triangle_hole", 3),
        "reaction_kappa10": ProblemSpec(
            "reaction_kappa10",
            "checkerboard zero-order term, contrast 10, Neumann",
            sq_q, 4, (), _checkerboard("reaction", 10.0),
            "reaction_kappa10", 4),
        "reaction_kappa100": ProblemSpec(
            "reaction_kappa100",
            "checkerboard zero-order term, contrast 100, Neumann",
            sq_q, 4, (), _checkerboard("reaction", 100.0),
            "reaction_kappa100", 4),
        "diffusion_a10": ProblemSpec(
            "diffusion_a10",
            "checkerboard diffusion, contrast 10, Dirichlet",
            sq_q, 4, ("boundary",), _checkerboard("diffusion", 10.0),
            "diffusion_a10", 3),
        "diffusion_a100": ProblemSpec(
            "diffusion_a100",
            "checkerboard diffusion, contrast 100, Dirichlet",
            sq_q, 4, ("boundary",), _checkerboard("diffusion", 100.0),
            "diffusion_a100", 3),
        "slit_square": ProblemSpec(
            "slit_square",
            "unit square with interior slit, shifted operator, Dirichlet "
            "outside, Neumann on the slit",
            slit, 4, ("outer",), Coefficients(c=1.0), "slit_square", 4),
    }


_PROBLEMS = None


def problem(key):
    """Look up a benchmark by key; raises KeyError with the options."""
    global _PROBLEMS
    if _PROBLEMS is None:
        _PROBLEMS = _registry()
    if key not in _PROBLEMS:
        raise KeyError(f"unknown problem {key!r}; choose from "
                       f"{sorted(_PROBLEMS)}")
    return _PROBLEMS[key]


def problem_keys():
    global _PROBLEMS
    if _PROBLEMS is None:
        _PROBLEMS = _registry()
    return sorted(_PROBLEMS)
