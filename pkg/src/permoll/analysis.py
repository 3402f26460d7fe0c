"""Good-iteration lower bounds for exchange mutations on Ham, and their check.

An iteration with ``lam`` mutants of ``ell`` exchanges each is *good* for a
threshold ``tau`` in {-2, -1, 0} when exactly one mutant carries an exchange
that improves the parent on its own, that exchange is isolated from the rest
of its mutant whose remaining steps each change fitness by at least ``tau``,
and every step of every other mutant changes fitness by at most ``tau``.

``bound_tau0``/``bound_tau1``/``bound_tau2`` give closed-form lower bounds on
the probability of that event; :func:`estimate_good_probability` measures it.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

import numpy as np
from numba import njit

from .core import HamProblem, Permutation, exchange_delta, ham_delta_exchange, ham_evaluate
from .mutation import (
    EXCHANGE,
    MutationList,
    apply_code,
    decode_pair,
    sample_codes,
    sample_codes_with_replacement,
    undo_codes,
)
from .rng import RandomSource, floyd_sample, shuffle_prefix

THRESHOLDS = (0, -1, -2)
MODES = ("with_replacement", "without_replacement")
Z99 = NormalDist().inv_cdf(0.995)


@dataclass(frozen=True)
class IterationModel:
    n: int
    f: int
    lam: int
    ell: int
    mode: str = "with_replacement"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0 <= self.f < self.n:
            raise ValueError(f"need 0 <= f < n, got f={self.f}")
        if self.lam < 1:
            raise ValueError("lam must be >= 1")
        m = self.n * (self.n - 1) // 2
        if not 1 <= self.ell <= m:
            raise ValueError(f"ell must lie in [1, {m}]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


def _check_tau(tau: int):
    if tau not in THRESHOLDS:
        raise ValueError(f"tau must be one of {THRESHOLDS}, got {tau}")


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


# -- closed-form bounds -----------------------------------------------------------

def bound_tau0(model: IterationModel) -> float:
    n, f, lam, ell = model.n, model.f, model.lam, model.ell
    if n < 4:
        raise ValueError("the tau=0 bound needs n >= 4")
    reach = min(n, f + 2 * ell + 1)
    if n - reach <= 0:
        return 0.0
    exponent = -2.0 * ell * (lam - 1) / (n - 3) - 2.0 * ell * reach / (n - reach)
    return _clamp(lam * ell / n * math.exp(exponent))


def bound_tau1(model: IterationModel) -> float:
    n, f, lam, ell = model.n, model.f, model.lam, model.ell
    if f < 3:
        raise ValueError("the tau=-1 bound needs f >= 3")
    worse = (f + 1) / (n - 1) * (2.0 - f / n) - 4.0 * ell / (n - 1)
    power = (lam - 1) * ell
    if power == 0:
        bad_part = 1.0
    elif worse < 0:
        return 0.0
    else:
        bad_part = worse ** power
    keep = 1.0 - (2.0 * ell * (n + f - 3) + (f - 2) * (f - 3)) / (n * (n - 1))
    if keep < 0:
        return 0.0
    return _clamp(lam * ell / (n + f - 3) * bad_part * keep ** ell)


def bound_tau2(model: IterationModel) -> float:
    n, f, lam, ell = model.n, model.f, model.lam, model.ell
    if f < 3:
        raise ValueError("the tau=-2 bound needs f >= 3")
    if n < 4:
        raise ValueError("the tau=-2 bound needs n >= 4")
    spread = min(n, (n - f) + 2 * (ell - 1))
    if n - 1 <= 2 * spread:
        return 0.0
    lead = lam * ell * max(1, (n - f) - 2 * (ell - 1)) / (n * (n - 1))
    exponent = (
        -2.0 * (ell - 1) * (2 * n - 3) / ((n - 2) * (n - 3))
        - 2.0 * (lam - 1) * ell * spread / (n - 1 - 2 * spread)
    )
    return _clamp(lead * math.exp(exponent))


BOUNDS = {0: bound_tau0, -1: bound_tau1, -2: bound_tau2}


def bound(tau: int, model: IterationModel) -> float:
    _check_tau(tau)
    return BOUNDS[tau](model)


def maximize_bound(tau: int, n: int, f: int, values: Sequence[int], mode: str = "with_replacement"):
    """Best ``(lam, ell, bound)`` over ``lam, ell`` drawn from ``values``."""
    best = (0, 0, -1.0)
    for lam in values:
        for ell in values:
            b = bound(tau, IterationModel(n, f, lam, ell, mode))
            if b > best[2]:
                best = (lam, ell, b)
    return best


# -- reference classifier (plain Python) --------------------------------------------

def classify_iteration(parent: Permutation, problem: HamProblem, mutants: Sequence[MutationList], tau: int) -> bool:
    """Whether the iteration that produced ``mutants`` from ``parent`` is good for ``tau``."""
    _check_tau(tau)
    if not mutants:
        raise ValueError("need at least one mutant")
    n = problem.n
    if parent.n != n:
        raise ValueError("parent and problem sizes differ")
    for ms in mutants:
        if ms.family.kind != "exchange" or ms.family.n != n:
            raise ValueError("the classifier works on exchange mutations of the problem size")

    pairs = [ms.pairs() for ms in mutants]
    alone = [[ham_delta_exchange(problem, parent, i, j) for i, j in ps] for ps in pairs]
    with_good = [a for a, ds in enumerate(alone) if any(d > 0 for d in ds)]
    if len(with_good) != 1:
        return False
    g = with_good[0]

    steps = [_sequential_deltas(parent, problem, ps) for ps in pairs]
    for a, ds in enumerate(steps):
        if a != g and any(d > tau for d in ds):
            return False

    ps, ds = pairs[g], steps[g]
    for k, (i1, i2) in enumerate(ps):
        if alone[g][k] <= 0:
            continue
        if all(
            i1 not in ps[k2] and i2 not in ps[k2] and ds[k2] >= tau
            for k2 in range(len(ps)) if k2 != k
        ):
            return True
    return False


def _sequential_deltas(parent: Permutation, problem: HamProblem, pairs: list[tuple[int, int]]) -> list[int]:
    x = list(parent.elements)
    t = problem.target.elements
    out = []
    for i, j in pairs:
        before = (x[i - 1] == t[i - 1]) + (x[j - 1] == t[j - 1])
        x[i - 1], x[j - 1] = x[j - 1], x[i - 1]
        out.append((x[i - 1] == t[i - 1]) + (x[j - 1] == t[j - 1]) - before)
    return out


# -- kernel classifier ---------------------------------------------------------------

@njit
def classify_codes(n, x, target, codes, lam, ell, tau, seq, totals):
    """Jitted twin of :func:`classify_iteration` on a ``lam x ell`` code matrix.

    ``x`` is restored before returning. Fills ``totals`` with each mutant's
    fitness change when the iteration is good.
    """
    g = -1
    for a in range(lam):
        for k in range(ell):
            i, j = decode_pair(EXCHANGE, n, codes[a, k])
            if exchange_delta(x, target, i, j) > 0:
                if g >= 0:
                    return False
                g = a
                break
    if g < 0:
        return False

    for a in range(lam):
        if a == g:
            continue
        total = 0
        ok = True
        applied = 0
        for k in range(ell):
            d = apply_code(EXCHANGE, n, x, target, codes[a, k])
            applied += 1
            total += d
            if d > tau:
                ok = False
                break
        undo_codes(EXCHANGE, n, x, target, codes[a], applied)
        if not ok:
            return False
        totals[a] = total

    total = 0
    for k in range(ell):
        i, j = decode_pair(EXCHANGE, n, codes[g, k])
        seq[k] = exchange_delta(x, target, i, j)
        total += seq[k]
        tmp = x[i]
        x[i] = x[j]
        x[j] = tmp
    undo_codes(EXCHANGE, n, x, target, codes[g], ell)
    totals[g] = total

    for k in range(ell):
        i1, i2 = decode_pair(EXCHANGE, n, codes[g, k])
        if exchange_delta(x, target, i1, i2) <= 0:
            continue
        witness = True
        for k2 in range(ell):
            if k2 == k:
                continue
            a2, b2 = decode_pair(EXCHANGE, n, codes[g, k2])
            if a2 == i1 or a2 == i2 or b2 == i1 or b2 == i2 or seq[k2] < tau:
                witness = False
                break
        if witness:
            return True
    return False


@njit
def _random_parent(state, n, target, d, x, pos, perm):
    """``x`` becomes ``target`` deranged on ``d`` uniformly chosen positions."""
    for k in range(n):
        x[k] = target[k]
    floyd_sample(state, n, d, pos)
    while True:
        for k in range(d):
            perm[k] = k
        shuffle_prefix(state, perm, d)
        fixed = False
        for k in range(d):
            if perm[k] == k:
                fixed = True
                break
        if not fixed:
            break
    for k in range(d):
        x[pos[k]] = target[pos[perm[k]]]


@njit
def _good_trials(n, parent, target, lam, ell, tau, with_replacement, random_parent, trials, state):
    m = n * (n - 1) // 2
    d = n
    for k in range(n):
        if parent[k] == target[k]:
            d -= 1
    x = parent.copy()
    codes = np.empty((lam, ell), dtype=np.int64)
    seq = np.empty(ell, dtype=np.int64)
    totals = np.empty(lam, dtype=np.int64)
    pos = np.empty(max(d, 1), dtype=np.int64)
    perm = np.empty(max(d, 1), dtype=np.int64)
    good = 0
    violations = 0
    for _ in range(trials):
        if random_parent:
            _random_parent(state, n, target, d, x, pos, perm)
        for a in range(lam):
            if with_replacement:
                sample_codes_with_replacement(state, m, ell, codes[a])
            else:
                sample_codes(state, m, ell, codes[a])
        if classify_codes(n, x, target, codes, lam, ell, tau, seq, totals):
            good += 1
            # the good mutant must strictly beat every other mutant
            g = 0
            for a in range(lam):
                if totals[a] > totals[g]:
                    g = a
            for a in range(lam):
                if a != g and totals[a] >= totals[g]:
                    violations += 1
                    break
    return good, violations


# -- estimation ----------------------------------------------------------------------

def cycle_parent(problem: HamProblem, f: int) -> Permutation:
    """The target with its first ``n - f`` positions rotated into one cycle."""
    n = problem.n
    d = n - f
    if not 0 <= f <= n:
        raise ValueError(f"need 0 <= f <= n, got {f}")
    if d == 1:
        raise ValueError("no permutation is at distance 1 from the target")
    t = list(problem.target.elements)
    x = t[:]
    for k in range(d):
        x[k] = t[(k + 1) % d]
    return Permutation(tuple(x))


@dataclass(frozen=True)
class Estimate:
    estimate: float
    halfwidth: float
    successes: int
    trials: int


def estimate_good_probability(model: IterationModel, tau: int, trials: int, rng: RandomSource, *,
                              problem: HamProblem | None = None, parent: str = "cycle") -> Estimate:
    """Monte-Carlo frequency of good iterations with a 99% normal half-width.

    ``parent`` picks the canonical single-cycle parent at fitness ``model.f``
    (``"cycle"``) or a fresh random parent at that fitness per trial
    (``"random"``).
    """
    _check_tau(tau)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if parent not in ("cycle", "random"):
        raise ValueError("parent must be 'cycle' or 'random'")
    problem = problem or HamProblem.identity(model.n)
    if problem.n != model.n:
        raise ValueError("model and problem sizes differ")
    start = cycle_parent(problem, model.f)
    good, violations = _good_trials(
        model.n, start.to_array(), problem.target_array(), model.lam, model.ell, tau,
        model.mode == "with_replacement", parent == "random", trials, rng.address,
    )
    if violations:
        raise AssertionError(f"{violations} good iterations without a strictly best good mutant")
    p = good / trials
    return Estimate(p, Z99 * math.sqrt(p * (1.0 - p) / trials), int(good), trials)


def classify_with_kernel(parent: Permutation, problem: HamProblem, mutants: Sequence[MutationList], tau: int) -> bool:
    """Run the jitted classifier on explicit mutants (equal lengths required)."""
    ell = len(mutants[0])
    if any(len(ms) != ell for ms in mutants):
        raise ValueError("the kernel classifier needs equally long mutants")
    codes = np.array([ms.codes for ms in mutants], dtype=np.int64).reshape(len(mutants), ell)
    return bool(classify_codes(
        problem.n, parent.to_array(), problem.target_array(), codes, len(mutants), ell, tau,
        np.empty(ell, dtype=np.int64), np.empty(len(mutants), dtype=np.int64),
    ))


# -- exhaustive exchange census --------------------------------------------------------

def enumerate_exchange_effects(problem: HamProblem, x: Permutation) -> dict[int, int]:
    """Count of every fitness change over all ``n(n-1)/2`` exchanges of ``x``."""
    n = problem.n
    if n < 2:
        raise ValueError("n must be >= 2")
    census = Counter(
        ham_delta_exchange(problem, x, i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)
    )
    return dict(sorted(census.items()))


def closed_form_census(n: int, d: int) -> dict[str, int]:
    """Exchange counts that depend on the distance alone."""
    return {
        "minus2": (n - d) * (n - d - 1) // 2,
        "minus1": (n - d) * d,
        "wrong_pairs": d * (d - 1) // 2,
    }


def improvement_mass(census: dict[int, int]) -> int:
    """Sum of positive fitness changes over all exchanges; equals the distance."""
    return sum(delta * count for delta, count in census.items() if delta > 0)


def exact_single_exchange_success(problem: HamProblem, x: Permutation) -> float:
    """Probability that one uniform exchange improves ``x``."""
    census = enumerate_exchange_effects(problem, x)
    m = problem.n * (problem.n - 1) // 2
    return sum(c for delta, c in census.items() if delta > 0) / m


def distance_of(problem: HamProblem, x: Permutation) -> int:
    return problem.n - ham_evaluate(problem, x)
