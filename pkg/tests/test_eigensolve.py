import numpy as np
import pytest
import scipy.sparse

from hpeig.assembly import Coefficients, assemble_mass, assemble_stiffness
from hpeig.eigensolve import SolverError, dense_reference, solve_lowest
from hpeig.mesh import square_grid, uniform_refine
from hpeig.space import DofHandler


def random_pencil(n, seed=0):
    rng = np.random.default_rng(seed)
    Q = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.05)
    B = scipy.sparse.csr_matrix(Q @ Q.T + np.diag(np.linspace(1, 50, n)))
    R = rng.standard_normal((n, n)) * 0.02
    M = scipy.sparse.csr_matrix(R @ R.T + np.eye(n))
    return B, M


def test_subspace_iteration_matches_dense():
    B, M = random_pencil(300)
    got = solve_lowest(B, M, 6, dense_cutoff=10, seed=1)
    ref_vals, _ = dense_reference(B, M, 6)
    assert np.allclose(got.values, ref_vals, rtol=1e-9)
    G = got.vectors.T @ (M @ got.vectors)
    assert np.allclose(G, np.eye(6), atol=1e-9)
    assert got.residuals.max() <= 1e-10
    T = got.vectors.T @ (B @ got.vectors)
    assert np.allclose(T, np.diag(got.values), atol=1e-7 * got.values.max())


def test_dense_path_used_for_small_problems():
    B, M = random_pencil(120, seed=3)
    got = solve_lowest(B, M, 4)
    assert got.iterations == 0
    ref_vals, _ = dense_reference(B, M, 4)
    assert np.allclose(got.values, ref_vals, rtol=1e-12)


def test_dirichlet_laplacian_on_square():
    mesh = uniform_refine(square_grid(4), 2)
    h = DofHandler(mesh, 2, dirichlet_tags=("boundary",))
    B = assemble_stiffness(h, Coefficients())
    M = assemble_mass(h)
    got = solve_lowest(B, M, 4, dense_cutoff=100, seed=0)
    exact = np.pi**2 * np.array([2.0, 5.0, 5.0, 8.0])
    assert np.all(got.values >= exact - 1e-9)  # Ritz values from above
    assert np.max(np.abs(got.values / exact - 1.0)) < 5e-3
    assert abs(got.values[1] - got.values[2]) < 1e-2 * exact[1]


def test_neumann_zero_mode_with_negative_shift():
    mesh = uniform_refine(square_grid(4), 2)
    h = DofHandler(mesh, 2)
    B = assemble_stiffness(h, Coefficients())
    M = assemble_mass(h)
    got = solve_lowest(B, M, 4, shift=-1.0, dense_cutoff=100, seed=0)
    exact = np.pi**2 * np.array([0.0, 1.0, 1.0, 2.0])
    assert abs(got.values[0]) < 1e-8
    assert np.max(np.abs(got.values[1:] / exact[1:] - 1.0)) < 2e-3


def test_warm_start_reduces_iterations():
    B, M = random_pencil(400, seed=5)
    cold = solve_lowest(B, M, 5, dense_cutoff=10, seed=2)
    warm = solve_lowest(B, M, 5, dense_cutoff=10, seed=2, x0=cold.vectors)
    assert warm.iterations <= max(2, cold.iterations // 2)
    assert np.allclose(warm.values, cold.values, rtol=1e-9)


def test_failure_raises():
    B, M = random_pencil(250, seed=7)
    with pytest.raises(SolverError):
        solve_lowest(B, M, 4, dense_cutoff=10, tol=1e-15, max_iter=2)
    with pytest.raises(ValueError):
        solve_lowest(B, M, 251)
