"""Dense factorizations on small post-sketch matrices.

Thin, contract-enforcing wrappers over LAPACK: Householder QR with a
nonnegative-diagonal sign convention, SVD, exact least squares through the
QR factors, and triangular inversion.  These serve both as solver
subroutines and as the exact oracles the verification lab compares
sketched results against.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import ParameterError, SingularTriangularError


class QRResult(NamedTuple):
    q: np.ndarray  # m x d, orthonormal columns
    r: np.ndarray  # d x d, upper triangular, nonnegative diagonal


class SVDResult(NamedTuple):
    u: np.ndarray      # m x k, orthonormal columns
    sigma: np.ndarray  # nonincreasing nonnegative singular values
    v: np.ndarray      # d x k, orthonormal columns


def qr(a) -> QRResult:
    """Reduced QR of a tall matrix with R's diagonal made nonnegative."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise ParameterError(f"qr expects a tall 2-D matrix, got shape {a.shape}")
    q, r = np.linalg.qr(a, mode="reduced")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return QRResult(q * signs, np.triu(r * signs[:, None]))


def svd(a) -> SVDResult:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ParameterError("svd expects a 2-D matrix")
    u, sigma, vt = np.linalg.svd(a, full_matrices=False)
    return SVDResult(u, sigma, vt.T)


def singular_values(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ParameterError("singular_values expects a 2-D matrix")
    return np.linalg.svd(a, compute_uv=False)


def solve_least_squares(a, b) -> np.ndarray:
    """argmin_x ||a x - b|| through the QR factors.

    Directions whose R diagonal falls below 1e-12 times ||a||_F are dropped
    (their coefficients are set to zero); the minimum-norm solution is not
    guaranteed in that case.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    squeeze = b.ndim == 1
    if squeeze:
        b = b[:, None]
    if a.shape[0] != b.shape[0]:
        raise ParameterError(f"a has {a.shape[0]} rows but b has {b.shape[0]}")
    q, r = qr(a)
    y = q.T @ b
    d = a.shape[1]
    x = np.zeros((d, b.shape[1]))
    drop = np.abs(np.diag(r)) <= 1e-12 * np.linalg.norm(a)
    for i in range(d - 1, -1, -1):
        if drop[i]:
            continue
        x[i] = (y[i] - r[i, i + 1:] @ x[i + 1:]) / r[i, i]
    return x[:, 0] if squeeze else x


def invert_upper_triangular(r) -> np.ndarray:
    """Inverse of an upper triangular matrix by columnwise back-substitution."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {r.shape}")
    d = r.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    diag = np.abs(np.diag(r))
    floor = 1e-12 * np.max(np.abs(r))
    bad = np.nonzero(diag <= floor)[0]
    if bad.size:
        i = int(bad[0])
        raise SingularTriangularError(
            f"diagonal entry {i} of the triangular matrix is numerically zero", index=i
        )
    return scipy.linalg.solve_triangular(r, np.eye(d), lower=False)


def truncate_rank_k(result: SVDResult, k: int) -> SVDResult:
    """Keep the top-k singular triplets of an SVD."""
    if not (0 <= k <= len(result.sigma)):
        raise ParameterError(f"k={k} out of range [0, {len(result.sigma)}]")
    return SVDResult(result.u[:, :k], result.sigma[:k], result.v[:, :k])


def rank_k_error(sigma, k: int) -> float:
    """Frobenius error of the best rank-k approximation: the tail of sigma.

    This is the exact optimum over all rank-k matrices, used as the
    baseline every sketched low-rank result is compared against.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if not (0 <= k <= len(sigma)):
        raise ParameterError(f"k={k} out of range [0, {len(sigma)}]")
    return float(np.sqrt(np.sum(sigma[k:] ** 2)))
