"""Monte Carlo verification of the package's quantitative guarantees.

Every experiment returns a :class:`VerificationReport` whose ``passed``
flag is recomputable from (statistic, op, threshold).  ``bound`` always
carries the raw theoretical target; ``threshold`` is the acceptance cut
after Monte Carlo slack (one-sided binomial confidence for success rates,
a standard-error factor for moment estimates) so that honest runs at the
nominal parameters do not flake.

Trials are independent: trial t derives its own seed as mix(seed0, t),
so serial and thread-pooled schedules produce identical statistics.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dense import singular_values
from .exceptions import ParameterError
from .hashing import KWiseHash, gaussians, is_prime, mix, stream_u64
from .matio import frobenius_norm
from .sketch import KIND_TZ, Sketch, SketchSpec, with_seed
from .validation import as_matrix, densify

#: one-sided z value for 99% binomial confidence.
Z99 = 2.326


@dataclass
class VerificationReport:
    """Outcome of one experiment, serializable as a single JSON object."""

    experiment: str
    params: dict
    trials: int
    statistic: float
    bound: float
    threshold: float
    op: str  # "le" or "ge": how statistic is compared against threshold
    passed: bool
    seeds_used: list = field(default_factory=list)
    wall_times: list | None = None

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "params": self.params,
            "trials": self.trials,
            "statistic": self.statistic,
            "bound": self.bound,
            "threshold": self.threshold,
            "op": self.op,
            "passed": self.passed,
            "seeds_used": self.seeds_used,
        }
        if self.wall_times is not None:
            payload["wall_times"] = self.wall_times
        return json.dumps(payload)


def _verdict(statistic: float, op: str, threshold: float) -> bool:
    if op == "le":
        return statistic <= threshold
    if op == "ge":
        return statistic >= threshold
    raise ParameterError(f"unknown comparison op '{op}'")


def binomial_slack(p0: float, trials: int, z: float = Z99) -> float:
    """One-sided normal-approximation slack for an empirical rate."""
    return z * math.sqrt(p0 * (1.0 - p0) / trials)


def _run_trials(fn, trials: int, threads: int | None):
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(trials)))
    return [fn(t) for t in range(trials)]


def gaussian_matrix(n: int, d: int, seed: int) -> np.ndarray:
    """n x d matrix of independent standard normals from the counter PRNG."""
    return gaussians(seed, n * d).reshape(n, d)


def random_orthonormal(n: int, d: int, seed: int) -> np.ndarray:
    """Q-factor of a seeded Gaussian matrix: a rotation-invariant random basis."""
    if n < d:
        raise ParameterError(f"need n >= d, got {n} < {d}")
    return np.linalg.qr(gaussian_matrix(n, d, seed), mode="reduced")[0]


def embedding_success_rate(
    spec: SketchSpec,
    n: int,
    d: int,
    eps: float,
    trials: int,
    seed0: int = 0,
    target_rate: float = 2.0 / 3.0,
    threads: int | None = None,
) -> VerificationReport:
    """Fraction of trials where the sketch embeds a random d-dimensional subspace.

    A trial succeeds when every singular value of the sketched basis lies in
    [1 - eps, 1 + eps].  Passes when the success fraction clears the target
    rate minus one-sided 99% binomial slack.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if spec.n != n:
        raise ParameterError(f"spec has n={spec.n}, experiment wants n={n}")
    if not (1 <= d <= n):
        raise ParameterError(f"need 1 <= d <= n, got d={d}, n={n}")

    seeds = [mix(seed0, t) for t in range(trials)]

    def trial(t: int) -> bool:
        st = seeds[t]
        u = random_orthonormal(n, d, mix(st, 1))
        sk = Sketch(with_seed(spec, mix(st, 2)))
        sv = singular_values(sk.apply(u))
        return bool(np.all(sv >= 1.0 - eps) and np.all(sv <= 1.0 + eps))

    successes = _run_trials(trial, trials, threads)
    statistic = sum(successes) / trials
    threshold = target_rate - binomial_slack(target_rate, trials)
    return VerificationReport(
        experiment="embedding_success_rate",
        params={"kind": spec.kind, "m": spec.m, "s": spec.s, "n": n, "d": d,
                "eps": eps, "target_rate": target_rate},
        trials=trials,
        statistic=statistic,
        bound=target_rate,
        threshold=threshold,
        op="ge",
        passed=_verdict(statistic, "ge", threshold),
        seeds_used=seeds,
    )


def frobenius_moment_check(
    n: int,
    d: int,
    m: int,
    trials: int,
    seed0: int = 0,
    threads: int | None = None,
) -> VerificationReport:
    """Mean of ||(PU)^T (PU) - I||_F^2 for the s=1 sketch against (d^2+d)/m.

    The theoretical bound is an exact expectation bound; the acceptance
    threshold adds a 4/sqrt(trials) standard-error allowance.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if m < 1:
        raise ParameterError("m must be >= 1")
    spec = SketchSpec(kind=KIND_TZ, m=m, n=n, s=1, independence=4, seed=0)
    seeds = [mix(seed0, t) for t in range(trials)]
    eye = np.eye(d)

    def trial(t: int) -> float:
        st = seeds[t]
        u = random_orthonormal(n, d, mix(st, 1))
        pu = Sketch(with_seed(spec, mix(st, 2))).apply(u)
        diff = pu.T @ pu - eye
        return float(np.sum(diff * diff))

    values = _run_trials(trial, trials, threads)
    statistic = float(np.mean(values))
    bound = (d * d + d) / m
    threshold = bound * (1.0 + 4.0 / math.sqrt(trials))
    return VerificationReport(
        experiment="frobenius_moment_check",
        params={"n": n, "d": d, "m": m},
        trials=trials,
        statistic=statistic,
        bound=bound,
        threshold=threshold,
        op="le",
        passed=_verdict(statistic, "le", threshold),
        seeds_used=seeds,
    )


def matrix_product_error_check(
    a,
    b,
    spec: SketchSpec,
    trials: int,
    eps: float,
    seed0: int = 0,
    delta_target: float = 1.0 / 3.0,
    threads: int | None = None,
) -> VerificationReport:
    """Rate at which ||(Pa)^T (Pb) - a^T b||_F exceeds (3 eps / 2) ||a||_F ||b||_F.

    Passes when the failure fraction stays below delta_target plus one-sided
    99% binomial slack.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0] or a.shape[0] != spec.n:
        raise ParameterError(
            f"row counts must match spec.n: a has {a.shape[0]}, b has {b.shape[0]}, spec.n={spec.n}"
        )
    exact = densify(a).T @ densify(b)
    scale = 1.5 * eps * frobenius_norm(a) * frobenius_norm(b)
    seeds = [mix(seed0, t) for t in range(trials)]

    def trial(t: int) -> bool:
        sk = Sketch(with_seed(spec, seeds[t]))
        err = np.linalg.norm(sk.apply(a).T @ sk.apply(b) - exact)
        return bool(err > scale)

    exceeded = _run_trials(trial, trials, threads)
    statistic = sum(exceeded) / trials
    threshold = delta_target + binomial_slack(delta_target, trials)
    return VerificationReport(
        experiment="matrix_product_error_check",
        params={"kind": spec.kind, "m": spec.m, "s": spec.s, "n": spec.n,
                "d_a": a.shape[1], "d_b": b.shape[1], "eps": eps,
                "delta_target": delta_target},
        trials=trials,
        statistic=statistic,
        bound=delta_target,
        threshold=threshold,
        op="le",
        passed=_verdict(statistic, "le", threshold),
        seeds_used=seeds,
    )


def hash_independence_exhaustive(k: int, p: int) -> VerificationReport:
    """Exact k-wise independence over the full coefficient space of a small prime.

    Enumerates all p^k coefficient vectors and checks that on every set of k
    distinct inputs each output k-tuple (before range reduction) occurs
    exactly once.  The statistic is the largest deviation from one and must
    be exactly zero.
    """
    if not is_prime(p):
        raise ParameterError(f"p={p} must be prime")
    if p > 13:
        raise ParameterError("p must be <= 13 to keep enumeration tractable")
    if k < 1:
        raise ParameterError("k must be >= 1")
    total = p**k
    if total > 30000:
        raise ParameterError(f"p^k = {total} too large to enumerate")

    hashes = [
        KWiseHash.from_coefficients(coeffs, p, p)
        for coeffs in itertools.product(range(p), repeat=k)
    ]
    max_dev = 0
    for points in itertools.combinations(range(p), k):
        counts: dict[tuple, int] = {}
        for h in hashes:
            key = tuple(h.eval(x) for x in points)
            counts[key] = counts.get(key, 0) + 1
        if len(counts) != total:
            max_dev = max(max_dev, 1)
        max_dev = max(max_dev, max(abs(c - 1) for c in counts.values()))
    return VerificationReport(
        experiment="hash_independence_exhaustive",
        params={"k": k, "p": p},
        trials=total,
        statistic=float(max_dev),
        bound=0.0,
        threshold=0.0,
        op="le",
        passed=_verdict(float(max_dev), "le", 0.0),
        seeds_used=[],
    )


def _random_csc(n: int, d: int, nnz: int, seed: int):
    import scipy.sparse as sp

    rows = (stream_u64(mix(seed, 1), nnz) % np.uint64(n)).astype(np.int64)
    cols = (stream_u64(mix(seed, 2), nnz) % np.uint64(d)).astype(np.int64)
    vals = gaussians(mix(seed, 3), nnz)
    return sp.coo_array((vals, (rows, cols)), shape=(n, d)).tocsc()


def nnz_scaling_benchmark(
    spec: SketchSpec,
    nnz_levels,
    reps: int = 3,
    d: int = 8,
    seed0: int = 0,
) -> VerificationReport:
    """Check that sketch application time grows (at most) linearly with nnz.

    Times the sketch on random CSC matrices at each nnz level (fixed shape,
    varying density) and reports the worst adjacent-level ratio of time
    growth to nnz growth.  Passes at a loose factor-2 tolerance; this is a
    wall-clock property, inherently noisy, and is reported as informational.
    """
    levels = sorted(int(x) for x in nnz_levels if int(x) > 0)
    if len(levels) < 3:
        raise ParameterError("need at least 3 positive nnz levels")
    if levels[-1] < 100 * levels[0]:
        raise ParameterError("nnz levels must span at least a factor of 100")
    if reps < 1:
        raise ParameterError("reps must be >= 1")

    sk = Sketch(spec)
    times = []
    actual_nnz = []
    for idx, level in enumerate(levels):
        a = _random_csc(spec.n, d, level, mix(seed0, idx))
        sk.apply(a)  # warmup
        best = math.inf
        for _ in range(reps):
            t0 = time.perf_counter()
            sk.apply(a)
            best = min(best, time.perf_counter() - t0)
        times.append(best)
        actual_nnz.append(a.nnz)

    worst = 0.0
    for i in range(len(levels) - 1):
        time_ratio = times[i + 1] / max(times[i], 1e-12)
        nnz_ratio = actual_nnz[i + 1] / actual_nnz[i]
        worst = max(worst, time_ratio / nnz_ratio)
    return VerificationReport(
        experiment="nnz_scaling_benchmark",
        params={"kind": spec.kind, "m": spec.m, "s": spec.s, "n": spec.n,
                "d": d, "nnz_levels": actual_nnz, "reps": reps},
        trials=len(levels),
        statistic=worst,
        bound=2.0,
        threshold=2.0,
        op="le",
        passed=_verdict(worst, "le", 2.0),
        seeds_used=[mix(seed0, i) for i in range(len(levels))],
        wall_times=times,
    )
