"""Seeded random streams usable from both Python and jitted kernels.

Every stochastic routine in the package takes a :class:`RandomSource`. The
kernels read the very same PCG64 state through numpy's ctypes interface, so
a Python-level call and a kernel-level call consume one shared stream.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# All PCG64 instances share the same C entry points; only the state differs.
_PROTO = np.random.PCG64(0)
_next_double = _PROTO.ctypes.next_double


class RandomSource:
    """A single-owner PCG64 stream.

    ``address`` is the raw state pointer handed to kernels; it stays valid for
    the lifetime of this object.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._bitgen = np.random.PCG64(self.seed)
        self.address = self._bitgen.ctypes.state_address

    @classmethod
    def derive(cls, master: int, *index: int) -> RandomSource:
        return cls(derive_seed(master, *index))

    def random(self) -> float:
        return _uniform(self.address)

    def randbelow(self, k: int) -> int:
        if k < 1:
            raise ValueError("randbelow needs k >= 1")
        return int(randbelow(self.address, k))


def derive_seed(master: int, *index: int) -> int:
    """A 64-bit seed for the stream ``index`` of ``master``.

    Distinct index tuples give statistically independent streams.
    """
    if master < 0 or any(i < 0 for i in index):
        raise ValueError("seeds and stream indices must be non-negative")
    seq = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(i) for i in index))
    return int(seq.generate_state(1, np.uint64)[0])


@njit
def _uniform(state):
    return _next_double(state)


@njit
def randbelow(state, k):
    """Uniform integer in [0, k)."""
    r = np.int64(_next_double(state) * k)
    if r >= k:
        r = k - 1
    return r


@njit
def shuffle_prefix(state, arr, k):
    """Fisher-Yates shuffle of ``arr[:k]`` in place."""
    for i in range(k - 1, 0, -1):
        j = randbelow(state, i + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp


@njit
def _contains(arr, k, value):
    for i in range(k):
        if arr[i] == value:
            return True
    return False


@njit
def floyd_sample(state, population, k, out):
    """Write ``k`` distinct values from ``[0, population)`` into ``out[:k]``.

    Floyd's algorithm; every k-subset is equally likely but the order is not
    uniform, callers shuffle or sort as they need.
    """
    if k <= 8:
        idx = 0
        for top in range(population - k, population):
            t = randbelow(state, top + 1)
            if _contains(out, idx, t):
                t = top
            out[idx] = t
            idx += 1
        return
    # open addressing on a power-of-two table at most half full; the values
    # are uniform already, so the low bits serve as the hash
    size = 16
    while size < 2 * k:
        size *= 2
    mask = size - 1
    table = np.full(size, -1, dtype=np.int64)
    idx = 0
    for top in range(population - k, population):
        t = randbelow(state, top + 1)
        h = t & mask
        while table[h] != -1 and table[h] != t:
            h = (h + 1) & mask
        if table[h] == t:
            t = top
            h = t & mask
            while table[h] != -1:
                h = (h + 1) & mask
        table[h] = t
        out[idx] = t
        idx += 1


@njit
def sample_ordered(state, population, k, out):
    """``k`` distinct values from ``[0, population)`` in uniformly random order.

    Sequential draws with rejection of repeats when ``k`` is at most half the
    population (at most two draws per value on average), otherwise Floyd
    followed by a shuffle.
    """
    if 2 * k > population:
        floyd_sample(state, population, k, out)
        shuffle_prefix(state, out, k)
        return
    if k <= 8:
        idx = 0
        while idx < k:
            t = randbelow(state, population)
            if not _contains(out, idx, t):
                out[idx] = t
                idx += 1
        return
    size = 16
    while size < 2 * k:
        size *= 2
    mask = size - 1
    table = np.full(size, -1, dtype=np.int64)
    idx = 0
    while idx < k:
        t = randbelow(state, population)
        h = t & mask
        while table[h] != -1 and table[h] != t:
            h = (h + 1) & mask
        if table[h] == -1:
            table[h] = t
            out[idx] = t
            idx += 1


@njit
def _log_pmf(trials, p, k):
    return (
        math.lgamma(trials + 1.0)
        - math.lgamma(k + 1.0)
        - math.lgamma(trials - k + 1.0)
        + k * math.log(p)
        + (trials - k) * math.log1p(-p)
    )


@njit
def binomial(state, trials, p):
    """Exact binomial draw by inversion started at the mode.

    Outcomes are visited mode, mode+1, mode-1, ... which keeps the expected
    search length at O(standard deviation) even for millions of trials.
    """
    if p <= 0.0 or trials == 0:
        return 0
    if p >= 1.0:
        return trials
    mode = np.int64((trials + 1) * p)
    if mode > trials:
        mode = trials
    pm = math.exp(_log_pmf(trials, p, mode))
    u = _next_double(state) - pm
    if u < 0.0:
        return mode
    ratio = p / (1.0 - p)
    lo = mode
    hi = mode
    plo = pm
    phi = pm
    while True:
        moved = False
        if hi < trials:
            phi *= (trials - hi) / (hi + 1.0) * ratio
            hi += 1
            u -= phi
            if u < 0.0:
                return hi
            moved = True
        if lo > 0:
            plo *= lo / (trials - lo + 1.0) / ratio
            lo -= 1
            u -= plo
            if u < 0.0:
                return lo
            moved = True
        # leftover mass below double resolution
        if not moved or (phi < 1e-300 and plo < 1e-300):
            return mode


@njit
def positive_binomial_inverse(state, trials, p):
    """Exact inversion of ``[B(trials, p) | > 0]``, scanning upward from 1."""
    if p >= 1.0:
        return trials
    log_q = math.log1p(-p)
    mass = -math.expm1(trials * log_q)
    u = _next_double(state) * mass
    pk = math.exp(math.log(trials * p) + (trials - 1) * log_q)
    ratio = p / (1.0 - p)
    k = 1
    while True:
        u -= pk
        if u < 0.0 or k == trials:
            return k
        pk *= (trials - k) / (k + 1.0) * ratio
        k += 1


@njit
def positive_binomial(state, trials, p):
    """Draw from ``[B(trials, p) | > 0]``.

    Small means use exact inversion of the conditional law directly. Larger
    ones reject zero, falling back to inversion after 100 rejections.
    """
    if trials * p <= 16.0:
        return positive_binomial_inverse(state, trials, p)
    for _ in range(100):
        k = binomial(state, trials, p)
        if k > 0:
            return k
    return positive_binomial_inverse(state, trials, p)
