"""Input validation helpers shared by the solvers, estimators, and CLI."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .exceptions import ParameterError
from .matio import canonicalize


def is_sparse(x) -> bool:
    return sp.issparse(x)


def as_matrix(x, name: str = "matrix"):
    """Coerce to a finite float64 2-D array or canonical CSC matrix."""
    if sp.issparse(x):
        a = canonicalize(x)
        if not np.all(np.isfinite(a.data)):
            raise ParameterError(f"{name} contains non-finite entries")
        return a
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ParameterError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{name} contains non-finite entries")
    return a


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Coerce to a finite float64 1-D array; accepts n-vectors and n x 1 matrices."""
    if sp.issparse(x):
        x = x.toarray()
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 2 and a.shape[1] == 1:
        a = a[:, 0]
    if a.ndim != 1:
        raise ParameterError(f"{name} must be 1-D or a single-column matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{name} contains non-finite entries")
    return a


def densify(x) -> np.ndarray:
    return x.toarray() if sp.issparse(x) else np.asarray(x, dtype=np.float64)


def check_eps(eps: float, name: str = "eps") -> float:
    eps = float(eps)
    if not (0.0 < eps < 1.0):
        raise ParameterError(f"{name} must lie in (0, 1), got {eps}")
    return eps


def check_delta(delta: float, name: str = "delta") -> float:
    # delta == 1 is allowed: it just removes the failure-probability slack.
    delta = float(delta)
    if not (0.0 < delta <= 1.0):
        raise ParameterError(f"{name} must lie in (0, 1], got {delta}")
    return delta


def check_positive_int(value, name: str) -> int:
    iv = int(value)
    if iv < 1:
        raise ParameterError(f"{name} must be a positive integer, got {value}")
    return iv
