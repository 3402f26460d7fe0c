"""Parameter landscape: cost of leaving each distance level, per static lambda."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..algorithms import LambdaPolicy, default_budget, ollga_run
from ..core import HamProblem
from ..mutation import exchange_family
from ..rng import RandomSource, derive_seed
from ._pool import ordered_map

HEADER = ["n", "lambda", "distance", "samples", "mean_evals_to_improve", "improve_prob", "rel_perf"]


@dataclass
class LandscapeConfig:
    n: int
    lam_min: float = 1.0
    lam_max: float = 64.0
    step: float = 1.05
    runs: int = 200
    seed: int = 0
    budget_mult: float = 50.0
    workers: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.step <= 1.0:
            raise ValueError("the lattice step must exceed 1")
        if self.lam_min < 1.0 or self.lam_max < self.lam_min:
            raise ValueError("need 1 <= lambda-min <= lambda-max")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")

    def lattice(self) -> list[float]:
        """``lam_min * step^k`` for every k that stays within ``lam_max``."""
        count = int(math.floor(math.log(self.lam_max / self.lam_min) / math.log(self.step) + 1e-9)) + 1
        return [self.lam_min * self.step ** k for k in range(count)]


@dataclass(frozen=True)
class LandscapeRow:
    n: int
    lam: float
    distance: int
    samples: int
    mean_evals_to_improve: float
    improve_prob: float
    rel_perf: float


@dataclass
class LandscapeResult:
    n: int
    rows: list[LandscapeRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for r in self.rows:
            writer.writerow([r.n, f"{r.lam:.6f}", r.distance, r.samples, f"{r.mean_evals_to_improve:.6f}",
                             f"{r.improve_prob:.6f}", f"{r.rel_perf:.6f}"])
        return buf.getvalue()

    def best_lambda(self, distance: int) -> float:
        """The lambda with relative performance 1 at ``distance``."""
        rows = [r for r in self.rows if r.distance == distance]
        if not rows:
            raise KeyError(f"distance {distance} was never sampled")
        return max(rows, key=lambda r: r.rel_perf).lam


def _scan_lambda(args):
    """Per-level totals for all runs at one lambda."""
    n, lam, seeds, budget = args
    problem = HamProblem.identity(n)
    family = exchange_family(n)
    policy = LambdaPolicy.static(lam)
    evals = np.zeros(n + 1, dtype=np.int64)
    iters = np.zeros(n + 1, dtype=np.int64)
    samples = np.zeros(n + 1, dtype=np.int64)
    for seed in seeds:
        res = ollga_run(problem, family, policy, RandomSource(seed), budget, record_levels=True)
        open_level = None if res.finished else n - res.final_fitness
        for d, cost in res.per_level_costs.items():
            if d == open_level:
                continue
            evals[d] += cost
            iters[d] += res.per_level_iterations[d]
            samples[d] += 1
    return evals, iters, samples


def run_landscape(config: LandscapeConfig) -> LandscapeResult:
    n = config.n
    lattice = config.lattice()
    budget = default_budget(n, config.budget_mult)
    tasks = [
        (n, lam, [derive_seed(config.seed, k, r) for r in range(config.runs)], budget)
        for k, lam in enumerate(lattice)
    ]
    totals = ordered_map(_scan_lambda, tasks, config.workers)

    means = np.full((len(lattice), n + 1), np.inf)
    for k, (evals, _, samples) in enumerate(totals):
        seen = samples > 0
        means[k, seen] = evals[seen] / samples[seen]
    best = means.min(axis=0)

    out = LandscapeResult(n)
    for k, (lam, (evals, iters, samples)) in enumerate(zip(lattice, totals)):
        for d in range(n + 1):
            if samples[d] == 0:
                continue
            out.rows.append(LandscapeRow(
                n, lam, d, int(samples[d]), float(means[k, d]),
                float(samples[d] / iters[d]), float(best[d] / means[k, d]),
            ))
    return out
