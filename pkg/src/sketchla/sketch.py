"""Sparse subspace embeddings defined implicitly by a seed.

Three constructions are provided, all with exactly ``s`` nonzero entries
of magnitude ``1/sqrt(s)`` per column:

* ``tz`` (CountSketch-style): s = 1, one signed entry per column at a
  pairwise-independent row, signs 4-wise independent.
* ``osnap-global``: s distinct rows per column chosen by a seeded sparse
  Fisher-Yates shuffle driven by a k-wise independent value stream.
* ``osnap-block``: the m rows are split into s blocks of m/s; each column
  gets one signed entry per block at a hashed in-block position.

A sketch is never materialized unless asked to: ``column_nonzeros`` lists
a column's entries straight from the hash functions, applying the sketch
to a matrix costs O(s * nnz) hash evaluations and multiply-adds, and a
single streamed update to the input costs O(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .exceptions import ParameterError
from .hashing import MERSENNE61, KWiseHash, mix
from .matio import canonicalize

_TAG_POSITION = 0x01
_TAG_SIGN = 0x02
_TAG_COLUMN = 0x03

KIND_TZ = "tz"
KIND_OSNAP_GLOBAL = "osnap-global"
KIND_OSNAP_BLOCK = "osnap-block"
KINDS = (KIND_TZ, KIND_OSNAP_GLOBAL, KIND_OSNAP_BLOCK)


@dataclass(frozen=True)
class SketchSpec:
    """Complete description of one sketch: everything but the data.

    Attributes:
        kind: one of ``tz``, ``osnap-global``, ``osnap-block``.
        m: number of sketch rows.
        n: number of sketch columns (the input row count).
        s: nonzeros per column; forced to 1 for ``tz``, must divide m
           for ``osnap-block``.
        independence: degree of the underlying hash families.
        seed: 64-bit value from which all hash coefficients derive.
    """

    kind: str
    m: int
    n: int
    s: int = 1
    independence: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown sketch kind '{self.kind}' (expected one of {KINDS})")
        if self.m < 1 or self.n < 1:
            raise ParameterError(f"sketch shape {self.m} x {self.n} must be positive")
        if not (1 <= self.s <= self.m):
            raise ParameterError(f"s={self.s} must satisfy 1 <= s <= m={self.m}")
        if self.kind == KIND_TZ:
            if self.s != 1:
                raise ParameterError("tz sketches have exactly one nonzero per column (s=1)")
            if self.independence < 4:
                raise ParameterError("tz sketches need independence >= 4 for the sign hash")
        if self.kind == KIND_OSNAP_BLOCK and self.m % self.s != 0:
            raise ParameterError(f"osnap-block needs s={self.s} to divide m={self.m}")
        if self.independence < 1:
            raise ParameterError("independence must be >= 1")


def recommend_params(
    d: int,
    eps: float,
    delta: float,
    kind: str = KIND_TZ,
    gamma: float = 1.0,
    c_m: float = 1.0,
    c_s: float = 1.0,
) -> tuple[int, int]:
    """Pick (m, s) guaranteeing a (1 +- eps) embedding of a d-dimensional subspace.

    For ``tz`` the row count comes from a closed-form second-moment bound and
    holds with probability at least 1 - delta.  For the two OSNAP kinds the
    theory fixes only the shape of the bounds, so the constants ``c_m`` and
    ``c_s`` are exposed as tunable multipliers (defaults of 1 are validated
    empirically by the verification lab).
    """
    if d < 1:
        raise ParameterError("subspace dimension d must be >= 1")
    eps = float(eps)
    delta = float(delta)
    if not (0.0 < eps < 1.0):
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if not (0.0 < delta <= 1.0):
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")
    if kind == KIND_TZ:
        m = math.ceil((d * d + d) / (delta * (2.0 * eps - eps * eps) ** 2))
        return m, 1
    if kind == KIND_OSNAP_GLOBAL:
        log_term = math.log(max(d / delta, math.e))
        m = math.ceil(c_m * d * log_term**8 / eps**2)
        s = math.ceil(c_s * log_term**3 / eps)
        return m, min(s, m)
    if kind == KIND_OSNAP_BLOCK:
        if gamma <= 0.0:
            raise ParameterError(f"gamma must be positive, got {gamma}")
        s = math.ceil(c_s / eps)
        m = math.ceil(c_m * d ** (1.0 + gamma) / eps**2)
        m = ((m + s - 1) // s) * s
        return m, s
    raise ParameterError(f"unknown sketch kind '{kind}'")


def recommended_independence(d: int, kind: str = KIND_TZ) -> int:
    """Hash independence degree adequate for embedding a d-dimensional subspace."""
    if kind == KIND_TZ:
        return 4
    return max(2, math.ceil(math.log2(max(d, 2))))


def spec_for_subspace(
    kind: str,
    n: int,
    dim: int,
    eps: float,
    delta: float = 1.0 / 3.0,
    seed: int = 0,
    gamma: float = 1.0,
    c_m: float = 1.0,
    c_s: float = 1.0,
    m: int | None = None,
    s: int | None = None,
) -> SketchSpec:
    """Build a SketchSpec for embedding a dim-dimensional subspace of R^n.

    m and s default to :func:`recommend_params`; explicit values override.
    """
    rec_m, rec_s = recommend_params(dim, eps, delta, kind, gamma=gamma, c_m=c_m, c_s=c_s)
    if m is None:
        m = rec_m
    if s is None:
        s = 1 if kind == KIND_TZ else min(rec_s, m)
    return SketchSpec(
        kind=kind, m=int(m), n=int(n), s=int(s),
        independence=recommended_independence(dim, kind), seed=seed,
    )


class Sketch:
    """A concrete sketch drawn from a :class:`SketchSpec`.

    All structure derives from domain-separated sub-seeds of ``spec.seed``,
    so two sketches with equal specs behave identically.  Instances are
    immutable and safe to share across threads.
    """

    def __init__(self, spec: SketchSpec):
        self.spec = spec
        m, n, s, k = spec.m, spec.n, spec.s, spec.independence
        pos_seed = mix(spec.seed, _TAG_POSITION)
        sign_seed = mix(spec.seed, _TAG_SIGN)
        if spec.kind == KIND_TZ:
            self._pos = KWiseHash(2, n, m, pos_seed)
            self._sign = KWiseHash(k, n, 2, sign_seed)
        elif spec.kind == KIND_OSNAP_BLOCK:
            self._pos = KWiseHash(k, n * s, m // s, pos_seed)
            self._sign = KWiseHash(k, n * s, 2, sign_seed)
        else:
            self._pos = None
            self._sign = KWiseHash(k, n * s, 2, sign_seed)
        self._inv_sqrt_s = 1.0 / math.sqrt(s)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.spec.m, self.spec.n)

    def column_nonzeros(self, j: int) -> list[tuple[int, float]]:
        """All nonzero (row, value) pairs of column j, sorted by row.

        Costs O(s) hash evaluations; the sketch is never materialized.
        """
        j = int(j)
        if not (0 <= j < self.spec.n):
            raise ParameterError(f"column {j} out of range [0, {self.spec.n})")
        rows, vals = self._columns(np.array([j], dtype=np.uint64))
        return list(zip(rows[0].tolist(), vals[0].tolist()))

    def _columns(self, js: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Rows and signed values for each requested column, (len(js), s) each.

        Rows are strictly increasing inside every column, which fixes the
        accumulation order used by :meth:`apply`.
        """
        spec = self.spec
        m, s = spec.m, spec.s
        count = len(js)
        if spec.kind == KIND_TZ:
            rows = self._pos.eval(js).astype(np.int64).reshape(count, 1)
            vals = self._sign.sign(js).reshape(count, 1)
            return rows, vals
        if spec.kind == KIND_OSNAP_BLOCK:
            block = m // s
            rows = np.empty((count, s), dtype=np.int64)
            vals = np.empty((count, s), dtype=np.float64)
            for t in range(s):
                idx = js * np.uint64(s) + np.uint64(t)
                rows[:, t] = self._pos.eval(idx).astype(np.int64) + t * block
                vals[:, t] = self._sign.sign(idx) * self._inv_sqrt_s
            return rows, vals
        return self._columns_global(js)

    def _columns_global(self, js: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        spec = self.spec
        m, s, k = spec.m, spec.s, spec.independence
        count = len(js)
        rows = np.empty((count, s), dtype=np.int64)
        vals = np.empty((count, s), dtype=np.float64)
        slots = np.arange(s, dtype=np.uint64)
        chosen = np.empty(s, dtype=np.int64)
        for out, j in enumerate(js.tolist()):
            stream = KWiseHash(k, s, MERSENNE61, mix(spec.seed, _TAG_COLUMN, j))
            draws = stream.eval(slots)
            # Sparse Fisher-Yates: s distinct rows out of [0, m) in O(s).
            perm: dict[int, int] = {}
            for t in range(s):
                r = t + int(draws[t]) % (m - t)
                chosen[t] = perm.get(r, r)
                perm[r] = perm.get(t, t)
            signs = self._sign.sign(np.uint64(j * s) + slots) * self._inv_sqrt_s
            order = np.argsort(chosen, kind="stable")
            rows[out] = chosen[order]
            vals[out] = signs[order]
        return rows, vals

    def apply(self, a) -> np.ndarray:
        """Sketch a matrix: returns the dense m x d product of this sketch with a.

        Sparse input is visited entry by entry in O(s * nnz(a)); dense input
        visits all n * d entries.  Accumulation order is deterministic:
        columns of `a` ascending, entries within a column ascending by row,
        sketch nonzeros ascending by row.
        """
        n = self.spec.n
        if sp.issparse(a):
            a = canonicalize(a)
            if a.shape[0] != n:
                raise ParameterError(f"input has {a.shape[0]} rows, sketch expects {n}")
            d = a.shape[1]
            entry_cols = np.repeat(np.arange(d, dtype=np.intp), np.diff(a.indptr))
            return self._scatter(a.indices.astype(np.uint64), entry_cols, a.data, d)
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ParameterError("expected a 2-D matrix")
        if a.shape[0] != n:
            raise ParameterError(f"input has {a.shape[0]} rows, sketch expects {n}")
        d = a.shape[1]
        entry_rows = np.tile(np.arange(n, dtype=np.uint64), d)
        entry_cols = np.repeat(np.arange(d, dtype=np.intp), n)
        return self._scatter(entry_rows, entry_cols, a.ravel(order="F"), d)

    def _scatter(self, entry_rows, entry_cols, data, d) -> np.ndarray:
        out = np.zeros((self.spec.m, d))
        if data.size == 0:
            return out
        uniq, inverse = np.unique(entry_rows, return_inverse=True)
        rows_u, vals_u = self._columns(uniq)
        s = self.spec.s
        sk_rows = rows_u[inverse].ravel()
        contrib = (vals_u[inverse] * data[:, None]).ravel()
        np.add.at(out, (sk_rows, np.repeat(entry_cols, s)), contrib)
        return out

    def materialize(self) -> sp.csc_array:
        """The sketch as an explicit m x n CSC matrix (for oracles and export)."""
        spec = self.spec
        rows, vals = self._columns(np.arange(spec.n, dtype=np.uint64))
        indptr = np.arange(0, (spec.n + 1) * spec.s, spec.s, dtype=np.int64)
        return sp.csc_array(
            (vals.ravel(), rows.ravel(), indptr), shape=(spec.m, spec.n)
        )


class SketchState:
    """Running sketch of a matrix receiving entry-wise streamed updates.

    Holds the dense m x d sketched matrix; each update ((i, j), v) adds v
    times column i of the sketch to column j of the state, exactly s
    fused multiply-adds.  Single writer; readers must be externally
    excluded while updates are in flight.
    """

    def __init__(self, sketch: Sketch, d: int):
        if d < 1:
            raise ParameterError("d must be >= 1")
        self.sketch = sketch
        self.d = d
        self.sketched = np.zeros((sketch.spec.m, d))

    def update(self, i: int, j: int, v: float) -> None:
        if not (0 <= i < self.sketch.spec.n):
            raise ParameterError(f"row {i} out of range [0, {self.sketch.spec.n})")
        if not (0 <= j < self.d):
            raise ParameterError(f"column {j} out of range [0, {self.d})")
        rows, vals = self.sketch._columns(np.array([i], dtype=np.uint64))
        self.sketched[rows[0], j] += vals[0] * v


def build_sketch(spec: SketchSpec) -> Sketch:
    """Construct the sketch described by `spec`."""
    return Sketch(spec)


def with_seed(spec: SketchSpec, seed: int) -> SketchSpec:
    """Copy of `spec` with a different seed (for independent trials)."""
    return replace(spec, seed=seed)
