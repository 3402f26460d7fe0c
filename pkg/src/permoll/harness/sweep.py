"""Runtime sweeps over problem sizes (evaluations until the optimum)."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

from ..algorithms import LambdaPolicy, RunResult, default_budget, ollga_run, opl_ea_run, rls_run
from ..core import HamProblem
from ..mutation import MutationFamily
from ..rng import RandomSource, derive_seed
from ._pool import ordered_map
from .stats import summarize

log = logging.getLogger(__name__)

ALGORITHMS = ("rls", "ea", "ollga")
RAW_HEADER = ["algo", "policy", "n", "run", "seed", "evaluations", "iterations", "finished"]
SUMMARY_HEADER = ["algo", "policy", "n", "runs", "mean_evals_over_n2", "std_evals_over_n2"]


def parse_policy(spec: str, n: int) -> LambdaPolicy:
    """``static:<lam>``, ``log``, ``adjust[:F,lmin,lmax]`` or ``theory[:c1,c2]``.

    ``lmax`` may be a number, ``n`` or ``log`` (meaning ``2 ln(n+1)``).
    """
    name, _, args = spec.partition(":")
    parts = [a.strip() for a in args.split(",")] if args else []
    try:
        if name == "static" and len(parts) == 1:
            return LambdaPolicy("static", lam=float(parts[0]), label=spec)
        if name == "log" and not parts:
            return LambdaPolicy("static", lam=2.0 * math.log(n + 1), label=spec)
        if name == "adjust" and len(parts) in (0, 3):
            F, lo, hi = parts or ("1.5", "1", "n")
            hi_value = {"n": float(n), "log": 2.0 * math.log(n + 1)}.get(hi)
            if hi_value is None:
                hi_value = float(hi)
            return LambdaPolicy("self_adjusting", lam=float(lo), F=float(F), lam_min=float(lo),
                                lam_max=hi_value, label=spec)
        if name == "theory" and len(parts) in (0, 2):
            c1, c2 = parts or ("0.4", "0.6")
            return LambdaPolicy("theoretical", c1=float(c1), c2=float(c2), label=spec)
    except ValueError as exc:
        raise ValueError(f"bad policy {spec!r}: {exc}") from None
    raise ValueError(f"bad policy {spec!r}; expected static:<lam>, log, adjust:<F>,<lmin>,<lmax> or theory:<c1>,<c2>")


@dataclass
class SweepConfig:
    algo: str
    sizes: list[int]
    runs: int
    seed: int
    policy: str = "log"
    budget_mult: float = 50.0
    family: str = "exchange"
    include_unfinished: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"algo must be one of {ALGORITHMS}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.sizes or any(n < 2 for n in self.sizes):
            raise ValueError("sizes must be a non-empty list of values >= 2")
        if self.budget_mult <= 0:
            raise ValueError("budget multiplier must be positive")
        if self.algo == "ollga":
            for n in self.sizes:
                parse_policy(self.policy, n)
        MutationFamily(self.family, 2)

    @property
    def policy_label(self) -> str:
        return self.policy if self.algo == "ollga" else "-"


@dataclass(frozen=True)
class RawRow:
    algo: str
    policy: str
    n: int
    run: int
    seed: int
    evaluations: int
    iterations: int
    finished: bool


@dataclass(frozen=True)
class SummaryRow:
    algo: str
    policy: str
    n: int
    runs: int
    mean_evals_over_n2: float
    std_evals_over_n2: float


@dataclass
class SweepResult:
    raw: list[RawRow] = field(default_factory=list)
    summary: list[SummaryRow] = field(default_factory=list)

    def summary_for(self, n: int) -> SummaryRow:
        return next(s for s in self.summary if s.n == n)

    def raw_csv(self) -> str:
        return _to_csv(RAW_HEADER, [
            [r.algo, r.policy, r.n, r.run, r.seed, r.evaluations, r.iterations, str(r.finished).lower()]
            for r in self.raw
        ])

    def summary_csv(self) -> str:
        return _to_csv(SUMMARY_HEADER, [
            [s.algo, s.policy, s.n, s.runs, f"{s.mean_evals_over_n2:.6f}", f"{s.std_evals_over_n2:.6f}"]
            for s in self.summary
        ])


def _to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def run_single(algo: str, policy: str, family: str, n: int, seed: int, budget: int) -> RunResult:
    """One run from a recorded seed; the sweep's unit of work."""
    problem = HamProblem.identity(n)
    rng = RandomSource(seed)
    if algo == "rls":
        return rls_run(problem, rng, budget)
    fam = MutationFamily(family, n)
    if algo == "ea":
        return opl_ea_run(problem, fam, rng, budget)
    return ollga_run(problem, fam, parse_policy(policy, n), rng, budget)


def _task(args) -> RunResult:
    return run_single(*args)


def run_sweep(config: SweepConfig) -> SweepResult:
    keys = []
    tasks = []
    for n in config.sizes:
        budget = default_budget(n, config.budget_mult)
        for run in range(config.runs):
            seed = derive_seed(config.seed, run)
            keys.append((n, run, seed))
            tasks.append((config.algo, config.policy, config.family, n, seed, budget))
    results = ordered_map(_task, tasks, config.workers)

    out = SweepResult()
    for (n, run, seed), res in zip(keys, results):
        out.raw.append(RawRow(config.algo, config.policy_label, n, run, seed,
                              res.evaluations, res.iterations, res.finished))
    for n in config.sizes:
        rows = [r for r in out.raw if r.n == n]
        kept = [r for r in rows if r.finished or config.include_unfinished]
        unfinished = sum(not r.finished for r in rows)
        if unfinished:
            log.warning("n=%d: %d of %d runs exhausted the budget", n, unfinished, len(rows))
        if not kept:
            log.warning("n=%d: no runs to summarize", n)
            continue
        stat = summarize([r.evaluations / (n * n) for r in kept])
        out.summary.append(SummaryRow(config.algo, config.policy_label, n, stat.count, stat.mean, stat.std))
        log.info("%s %s n=%d: mean evals/n^2 = %.4f (std %.4f, %d runs)",
                 config.algo, config.policy_label, n, stat.mean, stat.std, stat.count)
    return out
