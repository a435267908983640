"""Sketch-and-solve pipelines: least squares, leverage scores, low rank.

Each solver reduces the n-row problem to a small dense problem on the
sketched matrix and inherits a (1 + O(eps)) guarantee from the subspace
embedding property, which the verification lab checks empirically.
All three are pure functions of (inputs, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import dense
from .exceptions import ParameterError, RankDeficiencyError
from .hashing import mix, rademacher
from .sketch import (
    KIND_OSNAP_GLOBAL,
    KIND_TZ,
    Sketch,
    SketchSpec,
    recommend_params,
    spec_for_subspace,
)
from .validation import as_matrix, as_vector, check_delta, check_eps, densify

_TAG_REPEAT = 0x52
_TAG_JL = 0x4C


@dataclass(frozen=True, eq=False)
class RegressionResult:
    """Sketched least-squares solution.

    ``sketched_residual`` is the residual of the reduced system, not the
    full one; recompute ``||a x - b||`` against the original data when the
    true residual is needed.
    """

    x: np.ndarray
    sketched_residual: float
    spec: SketchSpec


@dataclass(frozen=True, eq=False)
class LeverageResult:
    """Per-row leverage score estimates, accurate to (1 +- eps)^2 per row."""

    scores: np.ndarray
    eps: float
    spec: SketchSpec


@dataclass(frozen=True, eq=False)
class LowRankResult:
    """Rank-k factors u (n x k), sigma (k,), v (d x k) and the achieved error."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    error: float


def sketched_lstsq(
    a,
    b,
    eps: float,
    delta: float = 1.0 / 3.0,
    kind: str = KIND_TZ,
    seed: int = 0,
    repeats: int = 1,
    gamma: float = 1.0,
    c_m: float = 1.0,
    c_s: float = 1.0,
) -> RegressionResult:
    """Approximate argmin_x ||a x - b|| by solving the sketched system.

    The sketch is sized for a (d+1)-dimensional subspace so it covers the
    span of a's columns together with b.  With probability at least
    1 - delta over the seed, the returned solution satisfies
    ``||a x - b|| <= (1 + eps) / (1 - eps) * min_x ||a x - b||``.

    ``repeats > 1`` runs that many independent sketches and keeps the x
    with the smallest true residual, amplifying the success probability.
    """
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    n, d = a.shape
    if b.shape[0] != n:
        raise ParameterError(f"a has {n} rows but b has {b.shape[0]}")
    eps = check_eps(eps)
    delta = check_delta(delta)
    if repeats < 1:
        raise ParameterError("repeats must be >= 1")

    if sp.issparse(a):
        stacked = sp.hstack([a, sp.csc_array(b.reshape(-1, 1))], format="csc")
    else:
        stacked = np.hstack([a, b.reshape(-1, 1)])

    best = None
    best_true = math.inf
    for rep in range(repeats):
        rep_seed = seed if rep == 0 else mix(seed, _TAG_REPEAT, rep)
        spec = spec_for_subspace(
            kind, n=n, dim=d + 1, eps=eps, delta=delta, seed=rep_seed,
            gamma=gamma, c_m=c_m, c_s=c_s,
        )
        sketched = Sketch(spec).apply(stacked)
        sa, sb = sketched[:, :d], sketched[:, d]
        x = dense.solve_least_squares(sa, sb)
        result = RegressionResult(x, float(np.linalg.norm(sa @ x - sb)), spec)
        if repeats == 1:
            return result
        true_residual = float(np.linalg.norm(a @ x - b))
        if true_residual < best_true:
            best, best_true = result, true_residual
    return best


def leverage_scores(
    a,
    eps: float,
    delta: float = 1.0 / 3.0,
    seed: int = 0,
    c_m: float = 1.0,
    c_s: float = 1.0,
    c_t: float = 8.0,
) -> LeverageResult:
    """Estimate every leverage score of a full-column-rank matrix.

    Pipeline: sketch a, take R from the QR of the sketch so that the
    sketched matrix times R^-1 has orthonormal columns, then compress
    R^-1 with a dense Rademacher projection of t = ceil(c_t / eps^2 * ln n)
    columns and read the scores off the squared row norms of a (R^-1 P).
    The matrix product a (R^-1 P) is the only pass over a, so the whole
    thing costs O(t * nnz(a)) beyond the sketch.

    Rank-deficient inputs are rejected rather than repaired.
    """
    a = as_matrix(a, "a")
    n, d = a.shape
    eps = check_eps(eps)
    delta = check_delta(delta)

    spec = spec_for_subspace(
        KIND_OSNAP_GLOBAL, n=n, dim=d, eps=eps, delta=delta, seed=seed, c_m=c_m, c_s=c_s
    )
    sa = Sketch(spec).apply(a)
    sv = dense.singular_values(sa)
    if sv[0] == 0.0 or sv[-1] <= 1e-10 * sv[0]:
        raise RankDeficiencyError(
            "input does not have full column rank (smallest sketched singular "
            f"value {sv[-1]:.3e} vs largest {sv[0]:.3e})"
        )
    r = dense.qr(sa).r
    r_inv = dense.invert_upper_triangular(r)

    t = max(1, math.ceil(c_t / eps**2 * math.log(max(n, 2))))
    proj = rademacher(mix(seed, _TAG_JL), d * t).reshape(d, t) / math.sqrt(t)
    g = r_inv @ proj
    ag = a @ g
    scores = np.einsum("ij,ij->i", ag, ag)
    return LeverageResult(scores, eps, spec)


def low_rank(
    a,
    k: int,
    eps: float,
    delta: float = 1.0 / 3.0,
    seed: int = 0,
    c_m: float = 1.0,
    c_s: float = 1.0,
) -> LowRankResult:
    """Rank-k approximation with Frobenius error within (1 + eps) of optimal.

    Pipeline: sketch a's rows with a sketch sized for a k-dimensional
    subspace at accuracy eps/3, orthonormalize the sketched row space,
    project a onto it, and take the exact rank-k SVD of the small
    projection.  The reported error is recomputed from the factors.

    The sketch never uses more than n rows: with m >= n the sketch is
    generically injective, the captured row space is already all of a's,
    and the result is the exact optimum, so larger m buys nothing.
    """
    a = as_matrix(a, "a")
    n, d = a.shape
    eps = check_eps(eps)
    delta = check_delta(delta)
    if not (1 <= k <= min(n, d)):
        raise ParameterError(f"k={k} out of range [1, {min(n, d)}]")

    rec_m, rec_s = recommend_params(k, eps / 3.0, delta, KIND_OSNAP_GLOBAL, c_m=c_m, c_s=c_s)
    m = min(rec_m, n)
    spec = spec_for_subspace(
        KIND_OSNAP_GLOBAL, n=n, dim=k, eps=eps / 3.0, delta=delta, seed=seed,
        c_m=c_m, c_s=c_s, m=m, s=min(rec_s, m),
    )
    y = Sketch(spec).apply(a)  # m x d
    # Orthonormal basis of y's row space.  For a tall sketch the d x d Gram
    # eigenbasis spans it at BLAS-3 cost; a short-and-wide sketch keeps the
    # plain QR of y^T.
    if y.shape[0] >= y.shape[1]:
        basis = np.linalg.eigh(y.T @ y)[1]  # d x d
    else:
        basis = np.linalg.qr(y.T, mode="reduced")[0]  # d x m'
    if k > basis.shape[1]:
        raise RankDeficiencyError(f"sketched row space has rank {basis.shape[1]} < k={k}")
    b = a @ basis  # n x m'
    ub, sigma_b, vbt = np.linalg.svd(b, full_matrices=False)
    u = ub[:, :k]
    sigma = sigma_b[:k]
    v = basis @ vbt.T[:, :k]
    error = float(np.linalg.norm(densify(a) - (u * sigma) @ v.T))
    return LowRankResult(u, sigma, v, error)
