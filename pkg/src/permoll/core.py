"""Permutations and the Hamming fitness family.

Values and positions are 1-based at the public surface; the kernels work on
0-based ``int64`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numba import njit

from .rng import RandomSource, shuffle_prefix

# Fitness values are plain ints in [0, n]; the distance is n - fitness.
FitnessValue = int


@dataclass(frozen=True)
class Permutation:
    """A bijection on ``[1..n]`` stored as a tuple of 1-based values."""

    elements: tuple[int, ...]

    def __post_init__(self):
        elements = tuple(int(v) for v in self.elements)
        object.__setattr__(self, "elements", elements)
        n = len(elements)
        if n < 1:
            raise ValueError("a permutation needs n >= 1")
        if sorted(elements) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of [1..{n}]: {elements!r}")

    @classmethod
    def of(cls, values: Iterable[int]) -> Permutation:
        return cls(tuple(values))

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> Permutation:
        """Build from a 0-based array."""
        return cls(tuple(int(v) + 1 for v in arr))

    @property
    def n(self) -> int:
        return len(self.elements)

    def to_array(self) -> np.ndarray:
        """0-based ``int64`` copy, the kernel representation."""
        return np.asarray(self.elements, dtype=np.int64) - 1

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self) -> str:
        return f"Permutation({list(self.elements)})"


@dataclass(frozen=True)
class HamProblem:
    """``Ham_p``: the number of positions where a query agrees with ``target``."""

    target: Permutation

    @classmethod
    def identity(cls, n: int) -> HamProblem:
        return cls(Permutation.identity(n))

    @property
    def n(self) -> int:
        return self.target.n

    def target_array(self) -> np.ndarray:
        return self.target.to_array()

    def _check(self, x: Permutation):
        if x.n != self.n:
            raise ValueError(f"size mismatch: problem has n={self.n}, permutation has n={x.n}")


def random_permutation(n: int, rng: RandomSource) -> Permutation:
    """Uniform permutation of ``[1..n]`` (Fisher-Yates on the given stream)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Permutation.from_array(random_permutation_array(n, rng.address))


@njit
def random_permutation_array(n, state):
    arr = np.arange(n)
    shuffle_prefix(state, arr, n)
    return arr


@njit
def fitness(x, target):
    f = 0
    for k in range(x.shape[0]):
        if x[k] == target[k]:
            f += 1
    return f


@njit
def exchange_delta(x, target, i, j):
    """Fitness change of swapping 0-based positions ``i`` and ``j``."""
    xi = x[i]
    xj = x[j]
    return (
        np.int64(xj == target[i])
        + np.int64(xi == target[j])
        - np.int64(xi == target[i])
        - np.int64(xj == target[j])
    )


def ham_evaluate(problem: HamProblem, x: Permutation) -> FitnessValue:
    problem._check(x)
    return sum(1 for a, b in zip(x.elements, problem.target.elements) if a == b)


def ham_delta_exchange(problem: HamProblem, x: Permutation, i: int, j: int) -> int:
    """Fitness change caused by exchanging 1-based positions ``i < j``.

    Looks only at the two touched positions.
    """
    problem._check(x)
    if not 1 <= i < j <= x.n:
        raise ValueError(f"need 1 <= i < j <= {x.n}, got ({i}, {j})")
    t = problem.target.elements
    e = x.elements
    xi, xj = e[i - 1], e[j - 1]
    ti, tj = t[i - 1], t[j - 1]
    return (xj == ti) + (xi == tj) - (xi == ti) - (xj == tj)


def distance(problem: HamProblem, x: Permutation) -> int:
    return problem.n - ham_evaluate(problem, x)

