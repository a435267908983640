"""Seeded k-wise independent hashing over a prime field.

A ``KWiseHash`` is a random degree-(k-1) polynomial with coefficients drawn
uniformly from ``[0, p)`` for a prime ``p`` at least as large as the input
domain.  Evaluating it at k distinct points gives k-wise independent values
in ``[0, p)``, which are then reduced modulo the requested output range.
Everything is derived deterministically from a 64-bit seed through a
splitmix64-style counter generator, so a hash (and hence a whole sketch) is
reconstructible from a few machine words.

The module also hosts the shared counter-mode PRNG primitives (uniform,
Gaussian via Box-Muller, Rademacher) used wherever the package needs
reproducible randomness that is independent of any external RNG state.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ParameterError

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

#: Mersenne prime 2^61 - 1, the default field modulus.
MERSENNE61 = (1 << 61) - 1

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_M61 = np.uint64(MERSENNE61)


def u64(x: int) -> int:
    """Reduce an integer into the unsigned 64-bit domain."""
    return x & _MASK64


def mix64(x: int) -> int:
    """Splitmix64 finalizer: a stateless 64-bit bit mixer."""
    z = u64(x)
    z = u64((z ^ (z >> 30)) * _MIX1)
    z = u64((z ^ (z >> 27)) * _MIX2)
    return z ^ (z >> 31)


def mix(seed: int, *salts: int) -> int:
    """Derive a new 64-bit seed from a base seed and salt values.

    Used for domain separation: sub-seeds for position/sign hashes,
    per-column streams, and per-trial seeds all come from here.
    """
    z = mix64(seed)
    for salt in salts:
        z = mix64(u64(z + _GOLDEN + u64(salt)))
    return z


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def stream_u64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Counter-mode stream of `count` raw 64-bit words for `seed`."""
    if count < 0:
        raise ParameterError("count must be nonnegative")
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    return _mix64_array(np.uint64(u64(seed)) + idx * _U64_GOLDEN)


def uniform01(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Deterministic stream of float64 uniforms in [0, 1)."""
    return (stream_u64(seed, count, offset) >> np.uint64(11)) * 2.0**-53


def gaussians(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Deterministic stream of standard normals (Box-Muller)."""
    pairs = (count + 1) // 2
    raw = stream_u64(seed, 2 * pairs, offset)
    # u1 in (0, 1] so the log is finite; u2 in [0, 1).
    u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u2 = (raw[1::2] >> np.uint64(11)) * 2.0**-53
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]


def rademacher(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Deterministic stream of +-1.0 values."""
    return 1.0 - 2.0 * (stream_u64(seed, count, offset) & np.uint64(1)).astype(np.float64)


_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n % w == 0:
            return n == w
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    c = max(n, 2)
    while not is_prime(c):
        c += 1
    return c


def _mulmod_m61(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b) mod 2^61-1 for uint64 arrays with entries < 2^61.

    The 122-bit product is assembled from 32-bit halves; 2^61 == 1 and
    2^64 == 8 modulo the Mersenne prime, so every partial sum stays
    below 2^64 and the reduction is two shift-and-add folds.
    """
    lo32 = np.uint64(0xFFFFFFFF)
    a_hi, a_lo = a >> np.uint64(32), a & lo32
    b_hi, b_lo = b >> np.uint64(32), b & lo32
    hh = a_hi * b_hi
    mid = a_hi * b_lo + a_lo * b_hi
    ll = a_lo * b_lo
    r = (hh << np.uint64(3)) + (mid >> np.uint64(29))
    r = r + ((mid & np.uint64((1 << 29) - 1)) << np.uint64(32))
    r = r + (ll & _U64_M61) + (ll >> np.uint64(61))
    r = (r & _U64_M61) + (r >> np.uint64(61))
    r = (r & _U64_M61) + (r >> np.uint64(61))
    return np.where(r >= _U64_M61, r - _U64_M61, r)


def _horner_m61(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.full(x.shape, coeffs[-1], dtype=np.uint64)
    for c in coeffs[-2::-1]:
        acc = _mulmod_m61(acc, x) + c
        acc = (acc & _U64_M61) + (acc >> np.uint64(61))
        acc = np.where(acc >= _U64_M61, acc - _U64_M61, acc)
    return acc


def _horner_small(coeffs: np.ndarray, x: np.ndarray, p: int) -> np.ndarray:
    # Safe for p < 2^32: (p-1)^2 + (p-1) fits in uint64.
    pp = np.uint64(p)
    acc = np.full(x.shape, coeffs[-1], dtype=np.uint64)
    for c in coeffs[-2::-1]:
        acc = (acc * x + c) % pp
    return acc


class KWiseHash:
    """k-wise independent hash from ``[0, domain_size)`` to ``[0, range_size)``.

    The hash is the polynomial ``sum_t coeffs[t] * x^t mod prime`` reduced
    modulo ``range_size``.  Coefficients are derived from ``seed`` through
    the counter generator, so equal parameters always reproduce the same
    function, bit for bit, on any platform.

    Instances are immutable after construction and safe for concurrent use.
    """

    __slots__ = ("degree", "domain_size", "range_size", "prime", "coeffs", "seed", "_coeff_arr")

    def __init__(self, degree: int, domain_size: int, range_size: int, seed: int, prime: int | None = None):
        if degree < 1:
            raise ParameterError("degree must be >= 1")
        if domain_size < 1:
            raise ParameterError("domain_size must be >= 1")
        if range_size < 1:
            raise ParameterError("range_size must be >= 1")
        if prime is None:
            prime = MERSENNE61 if domain_size <= MERSENNE61 else next_prime(domain_size)
        elif not is_prime(prime):
            raise ParameterError(f"{prime} is not prime")
        elif prime < domain_size:
            raise ParameterError("prime must be >= domain_size")
        self.degree = degree
        self.domain_size = domain_size
        self.range_size = range_size
        self.prime = prime
        self.seed = u64(seed)
        self.coeffs = tuple(self._derive_coefficients())
        self._coeff_arr = (
            np.array(self.coeffs, dtype=np.uint64) if prime < (1 << 62) else None
        )

    @classmethod
    def from_coefficients(
        cls, coeffs, prime: int, range_size: int, domain_size: int | None = None
    ) -> "KWiseHash":
        """Build a hash with explicit coefficients (used for enumeration)."""
        if not is_prime(prime):
            raise ParameterError(f"{prime} is not prime")
        coeffs = tuple(int(c) for c in coeffs)
        if not coeffs:
            raise ParameterError("need at least one coefficient")
        if any(c < 0 or c >= prime for c in coeffs):
            raise ParameterError("coefficients must lie in [0, prime)")
        h = cls.__new__(cls)
        h.degree = len(coeffs)
        h.domain_size = prime if domain_size is None else domain_size
        if h.domain_size > prime:
            raise ParameterError("prime must be >= domain_size")
        if range_size < 1:
            raise ParameterError("range_size must be >= 1")
        h.range_size = range_size
        h.prime = prime
        h.seed = None
        h.coeffs = coeffs
        h._coeff_arr = np.array(coeffs, dtype=np.uint64) if prime < (1 << 62) else None
        return h

    def _derive_coefficients(self):
        words_per = 1 if self.prime <= _MASK64 else (self.prime.bit_length() + 63) // 64 + 1
        raw = stream_u64(self.seed, self.degree * words_per)
        for t in range(self.degree):
            value = 0
            for w in range(words_per):
                value = (value << 64) | int(raw[t * words_per + w])
            yield value % self.prime

    def eval(self, x):
        """Hash value(s) in [0, range_size) for input(s) x < domain_size."""
        if np.isscalar(x) or isinstance(x, (int, np.integer)):
            xi = int(x)
            if xi < 0 or xi >= self.domain_size:
                raise ParameterError(f"input {xi} outside domain [0, {self.domain_size})")
            acc = self.coeffs[-1]
            for c in self.coeffs[-2::-1]:
                acc = (acc * xi + c) % self.prime
            return acc % self.range_size
        xs = np.asarray(x, dtype=np.uint64)
        if xs.size and int(xs.max()) >= self.domain_size:
            raise ParameterError("input outside domain")
        if self.prime == MERSENNE61:
            vals = _horner_m61(self._coeff_arr, xs)
        elif self.prime < (1 << 32):
            vals = _horner_small(self._coeff_arr, xs, self.prime)
        else:
            # Rare fallback for primes without a fast modular path.
            return np.array([self.eval(int(v)) for v in xs.ravel()], dtype=np.uint64).reshape(xs.shape)
        return vals % np.uint64(self.range_size)

    def sign(self, x):
        """+-1 value(s): +1 when the hash value is even, -1 when odd.

        Carries the independence degree whenever range_size is even.
        """
        v = self.eval(x)
        if isinstance(v, np.ndarray):
            return 1.0 - 2.0 * (v & np.uint64(1)).astype(np.float64)
        return 1.0 if v % 2 == 0 else -1.0
