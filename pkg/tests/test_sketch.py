"""Structure and application tests for the three sketch constructions:
exact per-column sparsity, block layout, turnstile replay, the
materialized-matrix oracle, and parameter recommendation."""

import math

import numpy as np
import pytest
import scipy.sparse as sp

from sketchla.exceptions import ParameterError
from sketchla.hashing import gaussians, mix, stream_u64
from sketchla.sketch import (
    KIND_OSNAP_BLOCK,
    KIND_OSNAP_GLOBAL,
    KIND_TZ,
    KINDS,
    Sketch,
    SketchSpec,
    SketchState,
    recommend_params,
    recommended_independence,
    spec_for_subspace,
    with_seed,
)


def _spec(kind, m=12, n=20, s=None, seed=0):
    if s is None:
        s = 1 if kind == KIND_TZ else 3
    return SketchSpec(kind, m=m, n=n, s=s, independence=4, seed=seed)


# ---------------------------------------------------------------- structure

def test_tz_single_signed_entry_per_column():
    sk = Sketch(SketchSpec(KIND_TZ, m=8, n=4, s=1, independence=4, seed=7))
    for j in range(4):
        nz = sk.column_nonzeros(j)
        assert len(nz) == 1
        row, val = nz[0]
        assert 0 <= row < 8
        assert val in (-1.0, 1.0)


def test_block_one_entry_per_block():
    sk = Sketch(SketchSpec(KIND_OSNAP_BLOCK, m=8, n=10, s=2, independence=4, seed=3))
    for j in range(10):
        nz = sk.column_nonzeros(j)
        assert len(nz) == 2
        (r0, v0), (r1, v1) = nz
        assert 0 <= r0 < 4 and 4 <= r1 < 8
        assert abs(v0) == pytest.approx(1 / math.sqrt(2))
        assert abs(v1) == pytest.approx(1 / math.sqrt(2))


def test_global_distinct_rows_and_magnitudes():
    sk = Sketch(SketchSpec(KIND_OSNAP_GLOBAL, m=10, n=25, s=3, independence=4, seed=11))
    for j in range(25):
        nz = sk.column_nonzeros(j)
        rows = [r for r, _ in nz]
        assert len(rows) == 3 and len(set(rows)) == 3
        assert rows == sorted(rows)
        for _, v in nz:
            assert abs(v) == pytest.approx(1 / math.sqrt(3))


@pytest.mark.parametrize("kind", KINDS)
def test_column_sparsity_and_unit_energy(kind):
    # Exactly s entries of magnitude 1/sqrt(s): squared column sums are 1.
    for seed in range(5):
        spec = _spec(kind, m=24, n=40, seed=seed)
        sk = Sketch(spec)
        for j in range(40):
            nz = sk.column_nonzeros(j)
            assert len(nz) == spec.s
            assert sum(v * v for _, v in nz) == pytest.approx(1.0, abs=1e-12)
            for _, v in nz:
                assert abs(v) == pytest.approx(1 / math.sqrt(spec.s))


@pytest.mark.parametrize("kind", KINDS)
def test_equal_specs_are_bit_identical(kind):
    spec = _spec(kind, seed=99)
    a, b = Sketch(spec), Sketch(spec)
    for j in range(spec.n):
        assert a.column_nonzeros(j) == b.column_nonzeros(j)
    x = gaussians(5, spec.n * 3).reshape(spec.n, 3)
    assert np.array_equal(a.apply(x), b.apply(x))


def test_column_out_of_range():
    sk = Sketch(_spec(KIND_TZ))
    with pytest.raises(ParameterError):
        sk.column_nonzeros(20)


# ---------------------------------------------------------------- validation

def test_spec_validation():
    with pytest.raises(ParameterError):
        SketchSpec(KIND_TZ, m=8, n=4, s=2)  # tz forces s=1
    with pytest.raises(ParameterError):
        SketchSpec(KIND_TZ, m=8, n=4, s=1, independence=2)  # signs need 4
    with pytest.raises(ParameterError):
        SketchSpec(KIND_OSNAP_BLOCK, m=8, n=4, s=3)  # s must divide m
    with pytest.raises(ParameterError):
        SketchSpec(KIND_OSNAP_GLOBAL, m=4, n=4, s=5)  # s <= m
    with pytest.raises(ParameterError):
        SketchSpec("gaussian", m=8, n=4, s=1)


# ---------------------------------------------------------------- application

@pytest.mark.parametrize("kind", KINDS)
def test_apply_zero_matrix(kind):
    sk = Sketch(_spec(kind))
    out = sk.apply(sp.csc_array((20, 5)))
    assert out.shape == (12, 5)
    assert not out.any()


@pytest.mark.parametrize("kind", KINDS)
def test_apply_single_entry_places_sketch_column(kind):
    # e_i e_j^T maps to (column i of the sketch) placed in output column j.
    sk = Sketch(_spec(kind))
    i, j = 13, 2
    a = sp.csc_array(([1.0], ([i], [j])), shape=(20, 5))
    out = sk.apply(a)
    expect = np.zeros((12, 5))
    for r, v in sk.column_nonzeros(i):
        expect[r, j] = v
    assert np.array_equal(out, expect)


@pytest.mark.parametrize("kind", KINDS)
def test_apply_matches_materialized_product(kind):
    rows = (stream_u64(1, 120) % np.uint64(50)).astype(np.int64)
    cols = (stream_u64(2, 120) % np.uint64(4)).astype(np.int64)
    vals = gaussians(3, 120)
    a = sp.coo_array((vals, (rows, cols)), shape=(50, 4)).tocsc()
    spec = _spec(kind, m=15, n=50, seed=31)
    sk = Sketch(spec)
    direct = sk.apply(a)
    oracle = sk.materialize().toarray() @ a.toarray()
    assert np.allclose(direct, oracle, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_apply_dense_equals_apply_on_csc_exactly(kind):
    a = gaussians(9, 20 * 6).reshape(20, 6)
    sk = Sketch(_spec(kind))
    assert np.array_equal(sk.apply(a), sk.apply(sp.csc_array(a)))


def test_apply_identity_materializes_sketch():
    spec = _spec(KIND_OSNAP_BLOCK, m=12, n=12, s=3)
    sk = Sketch(spec)
    out = sk.apply(np.eye(12))
    assert np.array_equal(out, sk.materialize().toarray())


def test_apply_dimension_mismatch():
    sk = Sketch(_spec(KIND_TZ))
    with pytest.raises(ParameterError):
        sk.apply(np.zeros((19, 2)))


def test_apply_column_norm_unbiased():
    # E||(Pa)_j||^2 = ||a_j||^2; Monte Carlo mean over 500 seeds within 5%.
    a = gaussians(77, 30 * 3).reshape(30, 3)
    target = np.sum(a * a, axis=0)
    spec = _spec(KIND_TZ, m=64, n=30)
    total = np.zeros(3)
    trials = 500
    for t in range(trials):
        out = Sketch(with_seed(spec, mix(4242, t))).apply(a)
        total += np.sum(out * out, axis=0)
    ratio = (total / trials) / target
    assert np.all(ratio > 0.95) and np.all(ratio < 1.05)


def test_norm_preservation_fixed_unit_vector():
    # Mean of ||Px||^2 over 1000 seeds in [0.95, 1.05] for each kind.
    x = gaussians(55, 40).reshape(40, 1)
    x /= np.linalg.norm(x)
    for kind in KINDS:
        spec = _spec(kind, m=18, n=40)
        acc = 0.0
        for t in range(1000):
            out = Sketch(with_seed(spec, mix(777, t))).apply(x)
            acc += float(np.sum(out * out))
        assert 0.95 <= acc / 1000 <= 1.05, kind


def test_global_row_subsets_uniform():
    # The sparse Fisher-Yates draw covers all row subsets uniformly:
    # m=5, s=2 gives 10 subsets; over 5000 seeds each lands near 500.
    trials = 5000
    counts = {}
    for t in range(trials):
        spec = SketchSpec(KIND_OSNAP_GLOBAL, m=5, n=1, s=2, independence=4,
                          seed=mix(909, t))
        rows = tuple(r for r, _ in Sketch(spec).column_nonzeros(0))
        counts[rows] = counts.get(rows, 0) + 1
    assert len(counts) == 10
    expected = trials / 10
    sigma = math.sqrt(trials * 0.1 * 0.9)
    assert max(abs(c - expected) for c in counts.values()) <= 4 * sigma


def test_pairwise_collision_probability_tz():
    # Placement negative correlation, spot check: two distinct input
    # coordinates land on any common row with frequency about 1/m^2 per row,
    # i.e. P(h(i)=h(j)) ~ 1/m.
    m, trials = 4, 4000
    spec = SketchSpec(KIND_TZ, m=m, n=2, s=1, independence=4, seed=0)
    hits = 0
    for t in range(trials):
        sk = Sketch(with_seed(spec, mix(31337, t)))
        r0 = sk.column_nonzeros(0)[0][0]
        r1 = sk.column_nonzeros(1)[0][0]
        hits += r0 == r1
    rate = hits / trials
    sigma = math.sqrt((1 / m) * (1 - 1 / m) / trials)
    assert abs(rate - 1 / m) <= 4 * sigma


# ---------------------------------------------------------------- turnstile

def test_turnstile_zero_update_is_noop():
    sk = Sketch(_spec(KIND_OSNAP_GLOBAL))
    st = SketchState(sk, d=3)
    st.update(5, 1, 0.0)
    assert not st.sketched.any()


@pytest.mark.parametrize("kind", KINDS)
def test_turnstile_single_update_equals_batch(kind):
    sk = Sketch(_spec(kind))
    st = SketchState(sk, d=4)
    st.update(7, 2, 3.5)
    batch = sk.apply(sp.csc_array(([3.5], ([7], [2])), shape=(20, 4)))
    assert np.array_equal(st.sketched, batch)


@pytest.mark.parametrize("kind", KINDS)
def test_turnstile_replay_matches_batch(kind):
    # 1000 random updates with repeats: state equals the batch sketch of the
    # accumulated matrix within 1e-12 per entry.
    spec = _spec(kind, m=12, n=30, seed=5)
    sk = Sketch(spec)
    st = SketchState(sk, d=4)
    ii = (stream_u64(1, 1000) % np.uint64(30)).astype(int)
    jj = (stream_u64(2, 1000) % np.uint64(4)).astype(int)
    vv = gaussians(3, 1000)
    acc = np.zeros((30, 4))
    for i, j, v in zip(ii, jj, vv):
        st.update(int(i), int(j), float(v))
        acc[i, j] += v
    batch = sk.apply(sp.csc_array(acc))
    assert np.max(np.abs(st.sketched - batch)) <= 1e-12


def test_turnstile_index_validation():
    st = SketchState(Sketch(_spec(KIND_TZ)), d=3)
    with pytest.raises(ParameterError):
        st.update(20, 0, 1.0)
    with pytest.raises(ParameterError):
        st.update(0, 3, 1.0)


# ---------------------------------------------------------------- parameters

def test_recommend_params_tz_closed_form():
    assert recommend_params(2, 0.5, 1 / 3, KIND_TZ) == (32, 1)
    # delta = 1 is the minimal-m edge of the closed form.
    m, s = recommend_params(1, 0.5, 1.0, KIND_TZ)
    assert (m, s) == (math.ceil(2 / (2 * 0.5 - 0.25) ** 2), 1) == (4, 1)


def test_recommend_params_block_divisibility():
    m, s = recommend_params(100, 0.5, 1 / 3, KIND_OSNAP_BLOCK, gamma=0.5)
    assert s == 2
    assert m % s == 0
    assert m == math.ceil(100**1.5 / 0.25)  # 4000, already even


def test_recommend_params_global_shapes():
    m, s = recommend_params(6, 0.5, 1 / 3, KIND_OSNAP_GLOBAL)
    log_term = math.log(18)
    assert m == math.ceil(6 * log_term**8 / 0.25)
    assert s == math.ceil(log_term**3 / 0.5)


def test_recommend_params_range_validation():
    for eps, delta in [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.5), (-0.1, 0.5)]:
        with pytest.raises(ParameterError):
            recommend_params(4, eps, delta, KIND_TZ)


def test_recommended_independence():
    assert recommended_independence(6, KIND_TZ) == 4
    assert recommended_independence(6, KIND_OSNAP_GLOBAL) == 3
    assert recommended_independence(2, KIND_OSNAP_BLOCK) == 2


def test_spec_for_subspace_fills_and_overrides():
    spec = spec_for_subspace(KIND_TZ, n=100, dim=2, eps=0.5, delta=1 / 3, seed=9)
    assert (spec.m, spec.s, spec.seed) == (32, 1, 9)
    spec = spec_for_subspace(KIND_OSNAP_BLOCK, n=100, dim=4, eps=0.5, m=16, s=2)
    assert (spec.m, spec.s) == (16, 2)
