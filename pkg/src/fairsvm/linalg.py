"""Dense symmetric linear algebra: eigendecomposition, covariance, PSD splitting.

The difference-of-convex structure used by the fair SVM trainers comes from
``spectral_split``: an indefinite symmetric matrix is written as the
difference of two positive semidefinite matrices built from its positive and
negative eigenvalues.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .exceptions import DegenerateGroupError, InputError

__all__ = [
    "EigenDecomposition",
    "SpectralSplit",
    "as_symmetric",
    "jacobi_eig",
    "sym_eig",
    "spectral_split",
    "sample_covariance",
    "min_eigenvalue",
]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


@dataclass(frozen=True)
class SpectralSplit:
    """PSD pair with ``u_plus - u_minus`` equal to the split matrix."""

    u_plus: np.ndarray
    u_minus: np.ndarray

    def quadratic_forms(self, v):
        """Return ``(v' u_plus v, v' u_minus v)``."""
        v = np.asarray(v, dtype=float)
        return float(v @ self.u_plus @ v), float(v @ self.u_minus @ v)


def as_symmetric(a, name="a"):
    """Validate a square finite matrix and mirror its lower triangle.

    Only the lower triangle is read, so tiny asymmetries from floating point
    assembly never leak into the eigensolver.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    lower = np.tril(a)
    return lower + np.tril(a, -1).T


def _fix_signs(V):
    # largest-magnitude entry of each column made positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def jacobi_eig(a, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigensolver.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
    drops below ``tol * ||a||_F``. Cost is O(n^3) per sweep with Python-level
    loops, so this is meant for small matrices and cross-checks.

    Returns
    -------
    EigenDecomposition
    """
    A = as_symmetric(a).copy()
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return EigenDecomposition(np.zeros(n), np.eye(n))
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(diff) + 1e8 * abs(apq) == abs(diff):
                    # tiny angle: theta would overflow, t ~ 1/(2 theta)
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                v_p = V[:, p].copy()
                v_q = V[:, q].copy()
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], _fix_signs(V[:, order]))


def sym_eig(a, method="lapack"):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Symmetric matrix; only the lower triangle is used.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls the divide-and-conquer LAPACK driver and is the
        default for anything larger than a toy problem. ``"jacobi"`` uses
        :func:`jacobi_eig`.

    Eigenvector signs are normalized so the largest-magnitude entry of each
    vector is positive.
    """
    A = as_symmetric(a)
    if method == "jacobi":
        return jacobi_eig(A)
    if method != "lapack":
        raise InputError(f"unknown eigensolver {method!r}")
    w, V = sla.eigh(A, lower=True, driver="evd")
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], _fix_signs(V[:, order]))


def spectral_split(a, zero_tol=None):
    """Split a symmetric matrix into a difference of two PSD matrices.

    Eigenvalues above ``zero_tol`` build ``u_plus``, eigenvalues below
    ``-zero_tol`` build ``u_minus`` (with their sign flipped), and the rest are
    dropped. ``zero_tol`` defaults to ``1e-9`` times the largest eigenvalue
    magnitude.
    """
    eig = sym_eig(a)
    zeta, V = eig.eigenvalues, eig.eigenvectors
    if zero_tol is None:
        zero_tol = 1e-9 * (np.max(np.abs(zeta)) if zeta.size else 0.0)
    elif zero_tol < 0:
        raise InputError("zero_tol must be nonnegative")
    pos = zeta > zero_tol
    neg = zeta < -zero_tol
    u_plus = (V[:, pos] * zeta[pos]) @ V[:, pos].T
    u_minus = (V[:, neg] * -zeta[neg]) @ V[:, neg].T
    # exact symmetry for downstream PSD checks
    u_plus = 0.5 * (u_plus + u_plus.T)
    u_minus = 0.5 * (u_minus + u_minus.T)
    return SpectralSplit(u_plus, u_minus)


def sample_covariance(rows):
    """Population covariance ``(1/m) Xc' Xc`` of the rows of a matrix.

    Rows are samples, so the result is p x p for an m x p input.
    """
    X = np.asarray(rows, dtype=float)
    if X.ndim != 2:
        raise InputError(f"rows must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] < 2:
        raise DegenerateGroupError(f"covariance needs at least 2 rows, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise InputError("rows contain non-finite values")
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / X.shape[0]
    return 0.5 * (S + S.T)


def min_eigenvalue(a):
    """Smallest eigenvalue of a symmetric matrix (lower triangle used)."""
    A = as_symmetric(a)
    return float(sla.eigh(A, lower=True, eigvals_only=True, subset_by_index=[0, 0])[0])
