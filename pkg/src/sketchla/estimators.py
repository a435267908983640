"""Scikit-learn compatible front end.

Wraps the functional core in fit/transform/predict estimators so sketches
and sketched solvers drop into pipelines, cross-validation, and anything
else that speaks ``get_params``/``set_params``.  Rows of ``X`` are samples
throughout, matching sklearn's convention: :class:`SubspaceEmbedding`
embeds each row of ``X`` from ``R^n_features`` into ``R^m`` exactly like
``sklearn.random_projection``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .exceptions import ParameterError
from .sketch import KIND_TZ, Sketch, SketchSpec, recommended_independence, spec_for_subspace
from .solvers import leverage_scores, low_rank, sketched_lstsq
from .validation import as_matrix


def _check_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call 'fit' first."
        )


class SubspaceEmbedding(TransformerMixin, BaseEstimator):
    """Sparse random projection of sample vectors into R^m.

    Each row of ``X`` is treated as a vector in ``R^{n_features}`` and mapped
    to ``R^m`` by a seed-defined sparse sketch with exactly ``s`` nonzeros of
    magnitude ``1/sqrt(s)`` per input coordinate.  With ``m`` and ``s`` from
    the accuracy parameters, all vectors in any fixed ``subspace_dim``
    dimensional subspace keep their norms to within ``1 +- eps`` with
    probability at least ``1 - delta``.

    Parameters
    ----------
    kind : {"tz", "osnap-global", "osnap-block"}
        Sketch construction. "tz" puts a single signed entry per coordinate.
    eps : float or None
        Target distortion, required when m is not given explicitly.
    delta : float
        Failure probability budget for the embedding guarantee.
    subspace_dim : int or None
        Dimension of the subspace to preserve; required when m is None.
    m, s : int or None
        Explicit sketch size; overrides the recommendation.
    gamma : float
        Row-count exponent knob for "osnap-block".
    c_m, c_s : float
        Constant multipliers for the recommended m and s.
    seed : int
        64-bit seed defining the sketch.
    """

    def __init__(self, kind=KIND_TZ, eps=None, delta=1.0 / 3.0, subspace_dim=None,
                 m=None, s=None, gamma=1.0, c_m=1.0, c_s=1.0, seed=0):
        self.kind = kind
        self.eps = eps
        self.delta = delta
        self.subspace_dim = subspace_dim
        self.m = m
        self.s = s
        self.gamma = gamma
        self.c_m = c_m
        self.c_s = c_s
        self.seed = seed

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        n = X.shape[1]
        if self.m is not None:
            s = self.s if self.s is not None else 1
            dim = self.subspace_dim if self.subspace_dim is not None else 2
            spec = SketchSpec(
                kind=self.kind, m=int(self.m), n=n, s=int(s),
                independence=recommended_independence(dim, self.kind), seed=self.seed,
            )
        else:
            if self.eps is None or self.subspace_dim is None:
                raise ParameterError("either m or both eps and subspace_dim must be given")
            spec = spec_for_subspace(
                self.kind, n=n, dim=self.subspace_dim, eps=self.eps, delta=self.delta,
                seed=self.seed, gamma=self.gamma, c_m=self.c_m, c_s=self.c_s, s=self.s,
            )
        self.n_features_in_ = n
        self.spec_ = spec
        self.sketch_ = Sketch(spec)
        return self

    def transform(self, X):
        _check_fitted(self, "sketch_")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ParameterError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        xt = X.T.tocsc() if sp.issparse(X) else X.T
        return self.sketch_.apply(xt).T


class SketchedLinearRegression(RegressorMixin, BaseEstimator):
    """Least squares fitted on a sketch of the data instead of the data.

    ``fit`` sketches ``[X, y]`` down to a small system sized for the column
    span of X and y, solves it exactly, and stores the coefficients.  With
    probability at least ``1 - delta`` the fitted residual is within a
    ``(1 + eps) / (1 - eps)`` factor of the optimal one; ``repeats`` runs
    independent sketches and keeps the best by true residual.

    No intercept is fitted; append a constant column when one is needed.
    """

    def __init__(self, eps=0.5, delta=1.0 / 3.0, kind=KIND_TZ, seed=0, repeats=1,
                 gamma=1.0, c_m=1.0, c_s=1.0):
        self.eps = eps
        self.delta = delta
        self.kind = kind
        self.seed = seed
        self.repeats = repeats
        self.gamma = gamma
        self.c_m = c_m
        self.c_s = c_s

    def fit(self, X, y):
        result = sketched_lstsq(
            X, y, eps=self.eps, delta=self.delta, kind=self.kind, seed=self.seed,
            repeats=self.repeats, gamma=self.gamma, c_m=self.c_m, c_s=self.c_s,
        )
        self.coef_ = result.x
        self.sketched_residual_ = result.sketched_residual
        self.spec_ = result.spec
        self.n_features_in_ = result.x.shape[0]
        return self

    def predict(self, X):
        _check_fitted(self, "coef_")
        X = as_matrix(X, "X")
        return np.asarray(X @ self.coef_)


class ApproxLeverageScores(BaseEstimator):
    """Row leverage score estimator.

    After ``fit(X)``, ``leverage_scores_[i]`` approximates the squared norm
    of row i of any orthonormal basis of X's column space to within a
    ``(1 +- eps)^2`` factor.  X must have full column rank.
    """

    def __init__(self, eps=0.3, delta=1.0 / 3.0, seed=0, c_m=1.0, c_s=1.0, c_t=8.0):
        self.eps = eps
        self.delta = delta
        self.seed = seed
        self.c_m = c_m
        self.c_s = c_s
        self.c_t = c_t

    def fit(self, X, y=None):
        result = leverage_scores(
            X, eps=self.eps, delta=self.delta, seed=self.seed,
            c_m=self.c_m, c_s=self.c_s, c_t=self.c_t,
        )
        self.leverage_scores_ = result.scores
        self.spec_ = result.spec
        return self


class SketchedTruncatedSVD(TransformerMixin, BaseEstimator):
    """Rank-k factorization via a row-space sketch, sklearn TruncatedSVD style.

    ``fit(X)`` stores ``components_`` (k x n_features), ``singular_values_``
    and the achieved Frobenius ``error_``; ``transform(X)`` projects onto the
    components.  The error is within ``(1 + eps)`` of the best possible
    rank-k error with good probability.
    """

    def __init__(self, n_components=2, eps=0.5, delta=1.0 / 3.0, seed=0, c_m=1.0, c_s=1.0):
        self.n_components = n_components
        self.eps = eps
        self.delta = delta
        self.seed = seed
        self.c_m = c_m
        self.c_s = c_s

    def fit(self, X, y=None):
        result = low_rank(
            X, k=self.n_components, eps=self.eps, delta=self.delta, seed=self.seed,
            c_m=self.c_m, c_s=self.c_s,
        )
        self.components_ = result.v.T
        self.singular_values_ = result.sigma
        self.left_vectors_ = result.u
        self.error_ = result.error
        self.n_features_in_ = result.v.shape[0]
        return self

    def transform(self, X):
        _check_fitted(self, "components_")
        X = as_matrix(X, "X")
        out = X @ self.components_.T
        return np.asarray(out)
