"""RLS, the (1+1) EA and the (1+(lambda,lambda)) GA on permutations.

All three run inside jitted loops that share one in-place parent array and
evaluate offspring incrementally: a mutant is applied to the parent, its
fitness read off the accumulated deltas, and the mutations undone.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .core import FitnessValue, HamProblem, Permutation, fitness, random_permutation
from .mutation import (
    MutationFamily,
    apply_packed,
    apply_packed_list,
    exchange_family,
    pack_codes,
    sample_codes,
    sample_positions_sorted,
    undo_packed,
    undo_packed_list,
)
from .rng import RandomSource, positive_binomial, randbelow

# policy kinds understood by the run kernel
STATIC = 0
ADJUST = 1
THEORY = 2

# iteration status
RUNNING = 0
SOLVED = 1
OUT_OF_BUDGET = 2


# -- lambda control -----------------------------------------------------------

@dataclass
class LambdaPolicy:
    """How lambda evolves over a run.

    ``static`` keeps ``lam`` fixed; ``self_adjusting`` applies the 1/5-th rule
    with factor ``F`` inside ``[lam_min, lam_max]``; ``theoretical`` derives
    lambda from the current fitness on every iteration.
    """

    variant: str
    lam: float = 1.0
    F: float = 1.5
    lam_min: float = 1.0
    lam_max: float = math.inf
    c1: float = 0.4
    c2: float = 0.6
    label: str = ""

    def __post_init__(self):
        if self.variant == "static":
            if self.lam < 1:
                raise ValueError("static lambda must be >= 1")
        elif self.variant == "self_adjusting":
            if not 1.0 < self.F < 2.0:
                raise ValueError("the update factor F must lie in (1, 2)")
            if not 1.0 <= self.lam_min <= self.lam_max:
                raise ValueError("need 1 <= lam_min <= lam_max")
            self.lam = min(max(self.lam, self.lam_min), self.lam_max)
        elif self.variant == "theoretical":
            if not 0.0 < self.c1 < 0.5 < self.c2 < 1.0:
                raise ValueError("need 0 < c1 < 1/2 < c2 < 1")
        else:
            raise ValueError(f"unknown lambda policy {self.variant!r}")
        if not self.label:
            self.label = self._default_label()

    @classmethod
    def static(cls, lam: float) -> LambdaPolicy:
        return cls("static", lam=float(lam), label=f"static:{lam:g}")

    @classmethod
    def static_log(cls, n: int) -> LambdaPolicy:
        return cls("static", lam=2.0 * math.log(n + 1), label="log")

    @classmethod
    def self_adjusting(cls, F: float = 1.5, lam_min: float = 1.0, lam_max: float = math.inf) -> LambdaPolicy:
        return cls("self_adjusting", lam=lam_min, F=F, lam_min=lam_min, lam_max=lam_max)

    @classmethod
    def theoretical(cls, c1: float = 0.4, c2: float = 0.6) -> LambdaPolicy:
        return cls("theoretical", c1=c1, c2=c2)

    def _default_label(self) -> str:
        if self.variant == "static":
            return f"static:{self.lam:g}"
        if self.variant == "self_adjusting":
            return f"adjust:{self.F:g},{self.lam_min:g},{self.lam_max:g}"
        return f"theory:{self.c1:g},{self.c2:g}"

    @property
    def kernel_kind(self) -> int:
        return {"static": STATIC, "self_adjusting": ADJUST, "theoretical": THEORY}[self.variant]


def lambda_policy_update(policy: LambdaPolicy, improved: bool) -> LambdaPolicy:
    """One step of the 1/5-th rule; static and theoretical policies pass through."""
    if policy.variant != "self_adjusting":
        return policy
    lam = adjust_lambda(policy.lam, improved, policy.F, policy.lam_min, policy.lam_max)
    return LambdaPolicy(
        "self_adjusting", lam=lam, F=policy.F, lam_min=policy.lam_min,
        lam_max=policy.lam_max, label=policy.label,
    )


@njit
def adjust_lambda(lam, improved, F, lam_min, lam_max):
    if improved:
        lam = lam / F
    else:
        lam = lam * F ** 0.25
    return min(max(lam, lam_min), lam_max)


@njit
def theory_lambda(n, f, c1, c2):
    root = math.sqrt(n)
    if f <= root:
        lam = root
    elif f < c1 * n:
        lam = n / f
    elif f <= c2 * n:
        lam = 1.0
    elif f < n - n ** (1.0 / 3.0):
        lam = math.sqrt(n / (n - f))
    else:
        lam = (2.0 * n / 3.0) ** (1.0 / 3.0)
    return max(lam, 1.0)


def lambda_schedule_theoretical(n: int, f: FitnessValue, c1: float = 0.4, c2: float = 0.6) -> float:
    """Fitness-dependent lambda with unit leading constants in all five regimes."""
    if not 0 <= f < n:
        raise ValueError(f"the schedule needs 0 <= f < n, got f={f}, n={n}")
    if not 0.0 < c1 < 0.5 < c2 < 1.0:
        raise ValueError("need 0 < c1 < 1/2 < c2 < 1")
    return float(theory_lambda(n, f, c1, c2))


# -- results ------------------------------------------------------------------

@dataclass
class RunResult:
    evaluations: int
    iterations: int
    final_fitness: int
    n: int
    seed: int
    finished: bool
    per_level_costs: dict[int, int] | None = None
    per_level_iterations: dict[int, int] | None = field(default=None, repr=False)

    @property
    def evals_over_n2(self) -> float:
        return self.evaluations / (self.n * self.n)


@dataclass(frozen=True)
class OllgaIterationParams:
    lam: float
    m: int
    ell: int | None = None

    def __post_init__(self):
        if self.lam < 1:
            raise ValueError("lambda must be >= 1")
        if self.ell is not None and not 1 <= self.ell <= self.m:
            raise ValueError(f"ell must lie in [1, {self.m}]")

    @property
    def lam_int(self) -> int:
        return math.ceil(self.lam)

    @property
    def p(self) -> float:
        return min(1.0, self.lam / self.m)

    @property
    def c(self) -> float:
        return 1.0 / self.lam


# -- kernels ------------------------------------------------------------------
# Each mutation family gets its own compiled kernels with the family baked in
# as a constant; a runtime family switch costs several-fold in the inner loops.

class Kernels(NamedTuple):
    ea: object
    step: object
    run: object


@functools.lru_cache(maxsize=None)
def kernels(kind: int) -> Kernels:
    KIND = kind

    @njit
    def ea_kernel(n, m, x, target, fx, fixed_ell, budget, state, level_evals, level_iters):
        """(1+1) EA; ``fixed_ell = 1`` turns it into RLS."""
        evals = 1
        iters = 0
        buf = np.empty(m if m < 4096 else 4096, dtype=np.int64)
        p = 1.0 / m
        while fx < n:
            if evals >= budget:
                return fx, evals, iters, False
            if fixed_ell > 0:
                ell = fixed_ell
            else:
                ell = positive_binomial(state, m, p)
            if ell > buf.shape[0]:
                buf = np.empty(ell, dtype=np.int64)
            sample_codes(state, m, ell, buf)
            pack_codes(KIND, n, buf, ell)
            fy = fx + apply_packed_list(KIND, n, x, target, buf, ell)
            evals += 1
            iters += 1
            d = n - fx
            level_evals[d] += 1
            level_iters[d] += 1
            if fy >= fx:
                fx = fy
            else:
                undo_packed_list(KIND, n, x, target, buf, ell)
        return fx, evals, iters, True


    @njit
    def ollga_step(n, m, x, target, fx, lam, ell, budget, evals, state, mut, best_mut, sub, best_sub):
        """One iteration on the parent ``x`` (modified in place) with ``ell`` given.

        Returns ``(new fitness, evaluations, improved, status)``. The four buffers
        must hold at least ``ell`` entries.
        """
        lam_int = np.int64(math.ceil(lam))
        c = min(1.0, 1.0 / lam)

        # phase 1: mutation
        best_f = np.int64(-1)
        ties = 0
        for _ in range(lam_int):
            if evals >= budget:
                return fx, evals, False, OUT_OF_BUDGET
            sample_codes(state, m, ell, mut)
            pack_codes(KIND, n, mut, ell)
            fy = fx + apply_packed_list(KIND, n, x, target, mut, ell)
            evals += 1
            if fy == n:
                return fy, evals, True, SOLVED
            undo_packed_list(KIND, n, x, target, mut, ell)
            take = False
            if fy > best_f:
                best_f = fy
                ties = 1
                take = True
            elif fy == best_f:
                ties += 1
                take = randbelow(state, ties) == 0
            if take:
                best_mut[:ell] = mut[:ell]

        # phase 2: crossover as order-preserving subsampling of the winner's list
        best_y = np.int64(-1)
        best_s = 0
        ties = 0
        for _ in range(lam_int):
            s = positive_binomial(state, ell, c)
            if s == ell:
                # identical to the winning mutant: not re-evaluated
                fy = best_f
            else:
                if evals >= budget:
                    return fx, evals, False, OUT_OF_BUDGET
                sample_positions_sorted(state, ell, s, sub)
                fy = fx
                for k in range(s):
                    fy += apply_packed(KIND, n, x, target, best_mut[sub[k]])
                evals += 1
                if fy == n:
                    return fy, evals, True, SOLVED
                for k in range(s - 1, -1, -1):
                    undo_packed(KIND, n, x, target, best_mut[sub[k]])
            take = False
            if fy > best_y:
                best_y = fy
                ties = 1
                take = True
            elif fy == best_y:
                ties += 1
                take = randbelow(state, ties) == 0
            if take:
                best_s = s
                if s < ell:
                    best_sub[:s] = sub[:s]

        improved = best_y > fx
        if best_y >= fx:
            if best_s == ell:
                apply_packed_list(KIND, n, x, target, best_mut, ell)
            else:
                for k in range(best_s):
                    apply_packed(KIND, n, x, target, best_mut[best_sub[k]])
            fx = best_y
        return fx, evals, improved, RUNNING


    @njit
    def ollga_kernel(n, m, x, target, fx, policy, lam0, F, lam_min, lam_max, c1, c2,
                      budget, state, level_evals, level_iters):
        evals = 1
        iters = 0
        lam = lam0
        cap = 64
        mut = np.empty(cap, dtype=np.int64)
        best_mut = np.empty(cap, dtype=np.int64)
        sub = np.empty(cap, dtype=np.int64)
        best_sub = np.empty(cap, dtype=np.int64)
        while fx < n:
            if evals >= budget:
                return fx, evals, iters, False
            if policy == THEORY:
                lam = theory_lambda(n, fx, c1, c2)
            ell = positive_binomial(state, m, min(1.0, lam / m))
            if ell > cap:
                cap = max(ell, 2 * cap)
                mut = np.empty(cap, dtype=np.int64)
                best_mut = np.empty(cap, dtype=np.int64)
                sub = np.empty(cap, dtype=np.int64)
                best_sub = np.empty(cap, dtype=np.int64)
            d = n - fx
            before = evals
            fx, evals, improved, status = ollga_step(
                n, m, x, target, fx, lam, ell, budget, evals, state, mut, best_mut, sub, best_sub
            )
            iters += 1
            level_evals[d] += evals - before
            level_iters[d] += 1
            if status == OUT_OF_BUDGET:
                return fx, evals, iters, False
            if policy == ADJUST:
                lam = adjust_lambda(lam, improved, F, lam_min, lam_max)
        return fx, evals, iters, True

    return Kernels(ea_kernel, ollga_step, ollga_kernel)


# -- Python entry points --------------------------------------------------------

def _levels_dict(level_evals: np.ndarray) -> dict[int, int]:
    return {int(d): int(v) for d, v in enumerate(level_evals) if v > 0}


def _start(problem: HamProblem, rng: RandomSource, start: Permutation | None):
    x = start if start is not None else random_permutation(problem.n, rng)
    if x.n != problem.n:
        raise ValueError("start permutation has the wrong size")
    arr = x.to_array()
    target = problem.target_array()
    return arr, target, int(fitness(arr, target))


def _check_budget(budget: int):
    if budget < 1:
        raise ValueError("budget must be >= 1")


def _finish(problem, rng, out, level_evals, level_iters, record_levels) -> RunResult:
    fx, evals, iters, finished = out
    return RunResult(
        evaluations=int(evals),
        iterations=int(iters),
        final_fitness=int(fx),
        n=problem.n,
        seed=rng.seed,
        finished=bool(finished),
        per_level_costs=_levels_dict(level_evals) if record_levels else None,
        per_level_iterations=_levels_dict(level_iters) if record_levels else None,
    )


def opl_ea_run(problem: HamProblem, family: MutationFamily, rng: RandomSource, budget: int, *,
               start: Permutation | None = None, record_levels: bool = False,
               fixed_ell: int = 0) -> RunResult:
    """(1+1) EA with ``ell ~ [B(m, 1/m) | ell > 0]`` distinct shuffled mutations."""
    _check_budget(budget)
    if family.n != problem.n:
        raise ValueError("family and problem sizes differ")
    x, target, fx = _start(problem, rng, start)
    n = problem.n
    lev_e = np.zeros(n + 1, dtype=np.int64)
    lev_i = np.zeros(n + 1, dtype=np.int64)
    out = kernels(family.code).ea(n, family.m, x, target, fx, fixed_ell, budget, rng.address, lev_e, lev_i)
    return _finish(problem, rng, out, lev_e, lev_i, record_levels)


def rls_run(problem: HamProblem, rng: RandomSource, budget: int, *,
            start: Permutation | None = None, record_levels: bool = False) -> RunResult:
    """Randomized local search: one uniform exchange per iteration."""
    return opl_ea_run(problem, exchange_family(problem.n), rng, budget,
                      start=start, record_levels=record_levels, fixed_ell=1)


def ollga_run(problem: HamProblem, family: MutationFamily, policy: LambdaPolicy, rng: RandomSource,
              budget: int, *, start: Permutation | None = None, record_levels: bool = False) -> RunResult:
    _check_budget(budget)
    if family.n != problem.n:
        raise ValueError("family and problem sizes differ")
    x, target, fx = _start(problem, rng, start)
    n = problem.n
    lev_e = np.zeros(n + 1, dtype=np.int64)
    lev_i = np.zeros(n + 1, dtype=np.int64)
    lam_max = policy.lam_max if math.isfinite(policy.lam_max) else float(n)
    out = kernels(family.code).run(
        n, family.m, x, target, fx, policy.kernel_kind, float(policy.lam),
        float(policy.F), float(policy.lam_min), float(lam_max), float(policy.c1), float(policy.c2),
        budget, rng.address, lev_e, lev_i,
    )
    return _finish(problem, rng, out, lev_e, lev_i, record_levels)


@dataclass
class IterationOutcome:
    parent: Permutation
    fitness: int
    evaluations: int
    improved: bool
    solved: bool


def ollga_iteration(problem: HamProblem, x: Permutation, params: OllgaIterationParams,
                    family: MutationFamily, rng: RandomSource) -> IterationOutcome:
    """A single iteration from parent ``x``; ``params.ell`` pins ell when given."""
    if family.n != problem.n or x.n != problem.n:
        raise ValueError("size mismatch")
    if params.m != family.m:
        raise ValueError("params were built for a different mutation space")
    arr = x.to_array()
    target = problem.target_array()
    fx = int(fitness(arr, target))
    ell = params.ell
    if ell is None:
        ell = int(positive_binomial(rng.address, family.m, params.p))
    bufs = [np.empty(ell, dtype=np.int64) for _ in range(4)]
    fy, evals, improved, status = kernels(family.code).step(
        problem.n, family.m, arr, target, fx, float(params.lam), ell,
        np.iinfo(np.int64).max, 0, rng.address, *bufs,
    )
    return IterationOutcome(Permutation.from_array(arr), int(fy), int(evals), bool(improved), status == SOLVED)


def default_budget(n: int, multiplier: float = 50.0) -> int:
    """``multiplier * n^2 * ln n`` evaluations, at least 1."""
    return max(1, int(multiplier * n * n * math.log(max(n, 2))))
