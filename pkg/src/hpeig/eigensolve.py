"""Lowest eigenpairs of the pencil (B, M) with symmetric B, positive M.

Small problems go to a dense generalized eigensolver.  Larger ones use
shift-and-invert subspace iteration: factor B - shift M once, iterate a
block slightly larger than the requested count, and extract Ritz pairs.
A negative shift keeps the factorization definite when B itself is only
semidefinite (pure Neumann problems).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg


class SolverError(RuntimeError):
    """Eigenvalue iteration failed to converge."""


@dataclass
class EigenCluster:
    """Lowest eigenpairs, ascending; vectors are M-orthonormal columns."""
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    iterations: int


def _residuals(B, M, values, vectors):
    BX = B @ vectors
    MX = M @ vectors
    R = BX - MX * values[None, :]
    scale = np.linalg.norm(BX, axis=0) + np.abs(values) * np.linalg.norm(MX, axis=0)
    scale = np.maximum(scale, np.linalg.norm(MX, axis=0))
    return np.linalg.norm(R, axis=0) / scale


def _m_orthonormalize(X, M):
    G = X.T @ (M @ X)
    try:
        L = scipy.linalg.cholesky(G, lower=True)
        return scipy.linalg.solve_triangular(L, X.T, lower=True).T
    except scipy.linalg.LinAlgError:
        w, Q = scipy.linalg.eigh(G)
        keep = w > 1e-14 * w.max()
        return (X @ Q[:, keep]) / np.sqrt(w[keep])


def solve_lowest(B, M, m, shift=0.0, tol=1e-10, max_iter=500, seed=0,
                 x0=None, dense_cutoff=2000):
    """Lowest m eigenpairs of B x = lambda M x.

    Parameters
    ----------
    B, M : sparse matrices, symmetric; M positive definite.
    m : number of pairs.
    shift : pole of the inverted operator; must stay below the spectrum
        (0 for coercive B, negative when B is singular).
    x0 : optional (n, k) block of starting vectors (a transferred
        cluster from a previous space), used to warm start.
    dense_cutoff : below this dimension a dense solver is used.

    Returns
    -------
    EigenCluster
    """
    n = B.shape[0]
    if m > n:
        raise ValueError(f"asked for {m} pairs in dimension {n}")

    if n <= dense_cutoff:
        Bd = B.toarray() if scipy.sparse.issparse(B) else np.asarray(B)
        Md = M.toarray() if scipy.sparse.issparse(M) else np.asarray(M)
        values, vectors = scipy.linalg.eigh(Bd, Md, subset_by_index=[0, m - 1])
        return EigenCluster(values, vectors,
                            _residuals(B, M, values, vectors), 0)

    block = min(n, m + 5)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, block))
    if x0 is not None:
        x0 = np.atleast_2d(np.asarray(x0, dtype=float))
        if x0.shape[0] != n:
            x0 = x0.T
        k = min(block, x0.shape[1])
        X[:, :k] = x0[:, :k]

    F = scipy.sparse.linalg.splu((B - shift * M).tocsc())
    X = _m_orthonormalize(X, M)
    for it in range(1, max_iter + 1):
        Y = F.solve(M @ X)
        Y = _m_orthonormalize(Y, M)
        T = Y.T @ (B @ Y)
        theta, Q = scipy.linalg.eigh(0.5 * (T + T.T))
        X = Y @ Q
        res = _residuals(B, M, theta[:m], X[:, :m])
        if res.max() <= tol:
            return EigenCluster(theta[:m], X[:, :m], res, it)
    raise SolverError(
        f"no convergence in {max_iter} iterations, residual {res.max():.2e}")


def dense_reference(B, M, m):
    """Full dense solve of the lowest m pairs, as an independent check."""
    Bd = B.toarray() if scipy.sparse.issparse(B) else np.asarray(B)
    Md = M.toarray() if scipy.sparse.issparse(M) else np.asarray(M)
    values, vectors = scipy.linalg.eigh(Bd, Md)
    return values[:m], vectors[:, :m]
