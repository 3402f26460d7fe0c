"""Elementary mutations on permutations, their integer codec and sampling.

Three families are supported:

* ``exchange`` -- swap positions ``i < j``; ``m = n(n-1)/2``.
* ``reverse`` -- reverse the closed segment ``[i..j]``, ``i < j``; ``m = n(n-1)/2``.
* ``jump`` -- remove the element at ``i`` and reinsert it so that it lands at
  ``j`` (``i != j``), intermediates shift towards ``i``; ``m = n(n-1)``.

Codes enumerate the ``(i, j)`` pairs lexicographically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numba import njit

from .core import Permutation
from .rng import RandomSource, floyd_sample, positive_binomial, randbelow, sample_ordered

EXCHANGE = 0
REVERSE = 1
JUMP = 2

KINDS = {"exchange": EXCHANGE, "reverse": REVERSE, "jump": JUMP}


def space_size(kind: int, n: int) -> int:
    if kind == JUMP:
        return n * (n - 1)
    return n * (n - 1) // 2


@dataclass(frozen=True)
class MutationFamily:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown mutation family {self.kind!r}; pick one of {sorted(KINDS)}")
        if self.n < 2:
            raise ValueError("mutations need n >= 2")

    @property
    def code(self) -> int:
        return KINDS[self.kind]

    @property
    def m(self) -> int:
        return space_size(self.code, self.n)

    def decode(self, code: int) -> tuple[int, int]:
        return decode(code, self)

    def encode(self, i: int, j: int) -> int:
        return encode(i, j, self)

    def mutation(self, i: int, j: int) -> ElementaryMutation:
        return ElementaryMutation(self.encode(i, j), self)


@dataclass(frozen=True)
class ElementaryMutation:
    code: int
    family: MutationFamily

    def __post_init__(self):
        if not 0 <= self.code < self.family.m:
            raise ValueError(f"code {self.code} outside [0, {self.family.m})")

    @property
    def pair(self) -> tuple[int, int]:
        """1-based ``(i, j)``."""
        return decode(self.code, self.family)

    def __repr__(self) -> str:
        i, j = self.pair
        return f"<{self.family.kind} {i},{j}>"


@dataclass(frozen=True)
class MutationList:
    """An ordered list of mutation codes; applied left to right.

    Codes are distinct unless ``allow_repeats`` is set, which only the
    with-replacement verifier mode uses.
    """

    family: MutationFamily
    codes: tuple[int, ...]
    allow_repeats: bool = False

    def __post_init__(self):
        codes = tuple(int(c) for c in self.codes)
        object.__setattr__(self, "codes", codes)
        m = self.family.m
        if any(not 0 <= c < m for c in codes):
            raise ValueError(f"mutation codes must lie in [0, {m})")
        if not self.allow_repeats and len(set(codes)) != len(codes):
            raise ValueError("duplicate mutation codes in a MutationList")

    @classmethod
    def of_pairs(cls, family: MutationFamily, pairs: Iterable[tuple[int, int]], allow_repeats: bool = False) -> MutationList:
        return cls(family, tuple(family.encode(i, j) for i, j in pairs), allow_repeats)

    @property
    def items(self) -> tuple[ElementaryMutation, ...]:
        return tuple(ElementaryMutation(c, self.family) for c in self.codes)

    def pairs(self) -> list[tuple[int, int]]:
        return [decode(c, self.family) for c in self.codes]

    def reversed(self) -> MutationList:
        return MutationList(self.family, self.codes[::-1], self.allow_repeats)

    def __len__(self) -> int:
        return len(self.codes)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.codes, dtype=np.int64)


# -- codec --------------------------------------------------------------------

@njit
def _row_start(i, n):
    # number of pairs (a, b), a < b, with a < i
    return i * n - i * (i + 1) // 2


@njit
def decode_pair(kind, n, code):
    """0-based ``(i, j)`` for ``code``."""
    if kind == JUMP:
        i = code // (n - 1)
        r = code - i * (n - 1)
        j = r + 1 if r >= i else r
        return i, j
    b = 2.0 * n - 1.0
    i = np.int64((b - math.sqrt(b * b - 8.0 * code)) / 2.0)
    if i < 0:
        i = 0
    while i > 0 and _row_start(i, n) > code:
        i -= 1
    while _row_start(i + 1, n) <= code:
        i += 1
    j = code - _row_start(i, n) + i + 1
    return i, j


@njit
def encode_pair(kind, n, i, j):
    if kind == JUMP:
        return i * (n - 1) + (j - 1 if j > i else j)
    return _row_start(i, n) + (j - i - 1)


def decode(code: int, family: MutationFamily) -> tuple[int, int]:
    """1-based pair of a mutation code."""
    if not 0 <= code < family.m:
        raise ValueError(f"code {code} outside [0, {family.m})")
    i, j = decode_pair(family.code, family.n, code)
    return int(i) + 1, int(j) + 1


def encode(i: int, j: int, family: MutationFamily) -> int:
    n = family.n
    if not (1 <= i <= n and 1 <= j <= n) or i == j:
        raise ValueError(f"invalid positions ({i}, {j}) for n={n}")
    if family.kind != "jump" and i > j:
        raise ValueError(f"{family.kind} pairs are written with i < j, got ({i}, {j})")
    return int(encode_pair(family.code, n, i - 1, j - 1))


def mutation_space_size(family: MutationFamily) -> int:
    return family.m


# -- application --------------------------------------------------------------

@njit
def _apply_reverse(x, target, i, j):
    d = 0
    for k in range(i, j + 1):
        d -= x[k] == target[k]
    lo = i
    hi = j
    while lo < hi:
        tmp = x[lo]
        x[lo] = x[hi]
        x[hi] = tmp
        lo += 1
        hi -= 1
    for k in range(i, j + 1):
        d += x[k] == target[k]
    return d


@njit
def _apply_jump(x, target, i, j):
    lo = min(i, j)
    hi = max(i, j)
    d = 0
    for k in range(lo, hi + 1):
        d -= x[k] == target[k]
    v = x[i]
    if i < j:
        for k in range(i, j):
            x[k] = x[k + 1]
    else:
        for k in range(i, j, -1):
            x[k] = x[k - 1]
    x[j] = v
    for k in range(lo, hi + 1):
        d += x[k] == target[k]
    return d


@njit
def apply_pair(kind, x, target, i, j):
    """Apply the 0-based mutation ``(i, j)`` in place; return the fitness change."""
    if kind == EXCHANGE:
        xi = x[i]
        xj = x[j]
        d = (
            np.int64(xj == target[i])
            + np.int64(xi == target[j])
            - np.int64(xi == target[i])
            - np.int64(xj == target[j])
        )
        x[i] = xj
        x[j] = xi
        return d
    if kind == REVERSE:
        return _apply_reverse(x, target, i, j)
    return _apply_jump(x, target, i, j)


@njit
def undo_pair(kind, x, target, i, j):
    if kind == EXCHANGE:
        tmp = x[i]
        x[i] = x[j]
        x[j] = tmp
    elif kind == REVERSE:
        _apply_reverse(x, target, i, j)
    else:
        _apply_jump(x, target, j, i)


@njit
def apply_code(kind, n, x, target, code):
    """Apply one mutation in place and return the fitness change."""
    i, j = decode_pair(kind, n, code)
    return apply_pair(kind, x, target, i, j)


@njit
def undo_code(kind, n, x, target, code):
    """Inverse of :func:`apply_code`."""
    i, j = decode_pair(kind, n, code)
    undo_pair(kind, x, target, i, j)


@njit
def apply_codes(kind, n, x, target, codes, count):
    d = 0
    for k in range(count):
        d += apply_code(kind, n, x, target, codes[k])
    return d


@njit
def undo_codes(kind, n, x, target, codes, count):
    for k in range(count - 1, -1, -1):
        undo_code(kind, n, x, target, codes[k])


# Hot loops decode each sampled code once into ``i * n + j`` and work on that.

@njit
def pack_codes(kind, n, codes, count):
    """Replace ``codes[:count]`` by packed 0-based pairs ``i * n + j``."""
    for k in range(count):
        i, j = decode_pair(kind, n, codes[k])
        codes[k] = i * n + j


@njit
def apply_packed(kind, n, x, target, packed):
    i = packed // n
    return apply_pair(kind, x, target, i, packed - i * n)


@njit
def undo_packed(kind, n, x, target, packed):
    i = packed // n
    undo_pair(kind, x, target, i, packed - i * n)


@njit
def apply_packed_list(kind, n, x, target, packed, count):
    d = 0
    for k in range(count):
        d += apply_packed(kind, n, x, target, packed[k])
    return d


@njit
def undo_packed_list(kind, n, x, target, packed, count):
    for k in range(count - 1, -1, -1):
        undo_packed(kind, n, x, target, packed[k])


def apply_mutation(x: Permutation, mu: ElementaryMutation) -> Permutation:
    if mu.family.n != x.n:
        raise ValueError("mutation and permutation sizes differ")
    arr = x.to_array()
    apply_code(mu.family.code, x.n, arr, arr.copy(), mu.code)
    return Permutation.from_array(arr)


def apply_mutation_list(x: Permutation, ms: MutationList) -> Permutation:
    if ms.family.n != x.n:
        raise ValueError("mutation list and permutation sizes differ")
    arr = x.to_array()
    codes = ms.to_array()
    apply_codes(ms.family.code, x.n, arr, arr.copy(), codes, len(codes))
    return Permutation.from_array(arr)


# -- sampling -----------------------------------------------------------------

def _check_probability(p: float):
    if not 0.0 < p <= 1.0:
        raise ValueError(f"probability must lie in (0, 1], got {p}")


def sample_mutation_count(m: int, p: float, rng: RandomSource) -> int:
    """``ell ~ [B(m, p) | ell > 0]``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    _check_probability(p)
    return int(positive_binomial(rng.address, m, p))


def sample_crossover_size(ell: int, c: float, rng: RandomSource) -> int:
    """``s ~ [B(ell, c) | s > 0]``."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    _check_probability(c)
    return int(positive_binomial(rng.address, ell, c))


@njit
def sample_codes(state, m, ell, out):
    """``ell`` distinct codes, uniformly ordered, into ``out[:ell]``."""
    sample_ordered(state, m, ell, out)


@njit
def sample_codes_with_replacement(state, m, ell, out):
    for k in range(ell):
        out[k] = randbelow(state, m)


@njit
def sample_positions_sorted(state, ell, s, out):
    """A uniform ``s``-subset of ``[0, ell)`` in increasing order."""
    floyd_sample(state, ell, s, out)
    out[:s].sort()


def sample_mutation_list(family: MutationFamily, ell: int, rng: RandomSource) -> MutationList:
    """``ell`` distinct uniform mutations in uniformly random order."""
    if not 1 <= ell <= family.m:
        raise ValueError(f"ell must lie in [1, {family.m}], got {ell}")
    out = np.empty(ell, dtype=np.int64)
    sample_codes(rng.address, family.m, ell, out)
    return MutationList(family, tuple(out.tolist()))


def subsample_preserving_order(ms: MutationList, s: int, rng: RandomSource) -> MutationList:
    """A uniform ``s``-element sub-list, keeping the original relative order."""
    if not 1 <= s <= len(ms):
        raise ValueError(f"s must lie in [1, {len(ms)}], got {s}")
    idx = subsample_positions(len(ms), s, rng)
    return MutationList(ms.family, tuple(ms.codes[k] for k in idx), ms.allow_repeats)


def subsample_positions(ell: int, s: int, rng: RandomSource) -> list[int]:
    out = np.empty(s, dtype=np.int64)
    sample_positions_sorted(rng.address, ell, s, out)
    return out.tolist()


def exchange_family(n: int) -> MutationFamily:
    return MutationFamily("exchange", n)

