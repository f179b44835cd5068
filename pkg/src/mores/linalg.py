"""Dense linear-algebra kernels for small symmetric matrices.

All routines operate on plain numpy arrays and are pure functions: they
never mutate their inputs and hold no state, so they are safe to call
from multiple threads.  LAPACK (through numpy/scipy) does the heavy
lifting; this module adds the validation, symmetrization and error
mapping the rest of the package relies on.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import ConvergenceFailure, DimensionMismatch, NotPositiveDefinite

__all__ = [
    "Tolerances",
    "TOL",
    "EigenPair",
    "cholesky",
    "sym_eig",
    "gen_eig_spd",
    "spd_inverse",
    "symmetrize",
]


@dataclass
class Tolerances:
    """Numerical thresholds used across the kernels."""

    symmetry: float = 1e-12          # allowed asymmetry on input matrices
    cholesky_jitter: float = 1e-10   # relative diagonal jitter on pivot failure
    orthonormality: float = 1e-9     # max-norm bound on V^T V - I


#: Module-level settings record; tests may tighten or relax it.
TOL = Tolerances()


@dataclass
class EigenPair:
    """Eigenvalues (ascending) and a matrix whose columns are eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def _check_square(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite(f"{name} contains non-finite entries")
    return a


def symmetrize(a):
    """Return (a + a^T) / 2; guards against asymmetry drift."""
    a = np.asarray(a, dtype=float)
    return (a + a.T) / 2.0


def cholesky(a):
    """Lower-triangular R with R R^T = a for symmetric positive definite a.

    On a pivot failure one retry is made with a small diagonal jitter
    proportional to trace(a)/n; a second failure raises
    NotPositiveDefinite.
    """
    a = _check_square(a)
    a = symmetrize(a)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pass
    n = a.shape[0]
    jitter = TOL.cholesky_jitter * np.trace(a) / max(n, 1)
    if jitter <= 0:
        raise NotPositiveDefinite("matrix is not positive definite")
    try:
        return np.linalg.cholesky(a + jitter * np.eye(n))
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("matrix is not positive definite after jitter retry")


def sym_eig(a):
    """Eigendecomposition of a symmetric matrix.

    The input is symmetrized internally; eigenvalues come back in
    ascending order with orthonormal eigenvectors as columns.
    """
    a = _check_square(a)
    a = symmetrize(a)
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}")
    return EigenPair(values=values, vectors=vectors)


def gen_eig_spd(omega, gamma):
    """Solve the symmetric-definite pencil omega v = lambda gamma v.

    Both inputs must be SPD of the same size.  Returns (L, U) with
    gamma^-1 omega U = U diag(L) and all entries of L strictly positive,
    obtained by Cholesky reduction: gamma = R R^T, eigendecomposition of
    R^-1 omega R^-T, then U = R^-T W.
    """
    omega = _check_square(omega, "omega")
    gamma = _check_square(gamma, "gamma")
    if omega.shape != gamma.shape:
        raise DimensionMismatch(
            f"pencil operands differ in shape: {omega.shape} vs {gamma.shape}"
        )
    r = cholesky(gamma)
    # B = R^-1 omega R^-T via two triangular solves
    b = solve_triangular(r, symmetrize(omega), lower=True)
    b = solve_triangular(r, b.T, lower=True).T
    pair = sym_eig(b)
    u = solve_triangular(r.T, pair.vectors, lower=False)
    return pair.values, u


def spd_inverse(a):
    """Inverse of an SPD matrix, computed via Cholesky and symmetrized."""
    r = cholesky(a)
    n = r.shape[0]
    rinv = solve_triangular(r, np.eye(n), lower=True)
    return symmetrize(rinv.T @ rinv)
