"""Monte-Carlo check that the closed-form bounds never exceed the measured rate."""

from __future__ import annotations

import ast
import csv
import io
import math
import operator
from dataclasses import dataclass, field

import numpy as np

from ..analysis import IterationModel, bound, estimate_good_probability
from ..rng import RandomSource, derive_seed
from ._pool import ordered_map

HEADER = ["tau", "n", "f", "lambda", "ell", "mode", "bound", "estimate", "halfwidth", "pass"]
# CLI names of the sampling modes
MODE_NAMES = {"proof": "with_replacement", "algo": "without_replacement"}


@dataclass(frozen=True)
class GridPoint:
    tau: int
    n: int
    f: int
    lam: int
    ell: int
    mode: str = "proof"

    def skip_reason(self) -> str | None:
        n, f = self.n, self.f
        if self.tau not in (0, -1, -2):
            return "tau must be 0, -1 or -2"
        if n < 4:
            return "n >= 4 required"
        if not 0 <= f < n:
            return "0 <= f < n required"
        if f == n - 1:
            return "no permutation has fitness n-1"
        if self.tau < 0 and f < 3:
            return "f >= 3 required"
        if self.lam < 1 or not 1 <= self.ell <= n * (n - 1) // 2:
            return "lambda >= 1 and 1 <= ell <= m required"
        if self.mode not in MODE_NAMES:
            return f"mode must be one of {sorted(MODE_NAMES)}"
        return None

    def model(self) -> IterationModel:
        return IterationModel(self.n, self.f, self.lam, self.ell, MODE_NAMES[self.mode])


@dataclass(frozen=True)
class VerifyRow:
    point: GridPoint
    bound: float | None
    estimate: float | None
    halfwidth: float | None
    passed: bool | None
    reason: str = ""

    @property
    def status(self) -> str:
        if self.passed is None:
            return f"skipped: {self.reason}"
        return "true" if self.passed else "false"


@dataclass
class VerifyResult:
    rows: list[VerifyRow] = field(default_factory=list)

    @property
    def failures(self) -> list[VerifyRow]:
        return [r for r in self.rows if r.passed is False]

    @property
    def skipped(self) -> list[VerifyRow]:
        return [r for r in self.rows if r.passed is None]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary_line(self) -> str:
        checked = len(self.rows) - len(self.skipped)
        return f"verify: {checked - len(self.failures)} passed, {len(self.failures)} failed, {len(self.skipped)} skipped"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for r in self.rows:
            p = r.point
            num = [("" if v is None else f"{v:.8g}") for v in (r.bound, r.estimate, r.halfwidth)]
            writer.writerow([p.tau, p.n, p.f, p.lam, p.ell, p.mode, *num, r.status])
        return buf.getvalue()


def _check(args) -> VerifyRow:
    point, trials, seed, parent = args
    reason = point.skip_reason()
    if reason:
        return VerifyRow(point, None, None, None, None, reason)
    model = point.model()
    b = bound(point.tau, model)
    est = estimate_good_probability(model, point.tau, trials, RandomSource(seed), parent=parent)
    return VerifyRow(point, b, est.estimate, est.halfwidth, est.estimate + est.halfwidth >= b)


def run_verify(points: list[GridPoint], trials: int, seed: int, *, parent: str = "cycle", workers: int = 1) -> VerifyResult:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = [(p, trials, derive_seed(seed, k), parent) for k, p in enumerate(points)]
    return VerifyResult(ordered_map(_check, tasks, workers))


def build_grid(tau: int, sizes, f_exprs, lams, ells, mode: str = "proof", paired: bool = False) -> list[GridPoint]:
    """Cartesian grid; ``paired`` zips lambda with ell instead of crossing them."""
    if paired:
        if len(lams) != len(ells):
            raise ValueError("--paired needs equally long lambda and ell lists")
        le = list(zip(lams, ells))
    else:
        le = [(a, b) for a in lams for b in ells]
    points = []
    for n in sizes:
        fs = []
        for expr in f_exprs:
            f = eval_size_expr(expr, n)
            if f not in fs:
                fs.append(f)
        for f in fs:
            for lam, ell in le:
                points.append(GridPoint(tau, n, f, lam, ell, mode))
    return points


def acceptance_grid(mode: str = "proof", sizes=(20, 50, 100), values=(1, 2, 3, 5)) -> list[GridPoint]:
    """The soundness grid: two fitness values per threshold, lambda = ell."""
    fs = {0: ["0", "ceil(sqrt(n))"], -1: ["ceil(0.4*n)", "ceil(n/2)"], -2: ["n-3", "n-ceil(cbrt(n))"]}
    points = []
    for tau, exprs in fs.items():
        points += build_grid(tau, sizes, exprs, values, values, mode, paired=True)
    return points


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_FUNCS = {"ceil": math.ceil, "floor": math.floor, "sqrt": math.sqrt, "cbrt": lambda v: float(np.cbrt(v))}


def eval_size_expr(expr: str, n: int) -> int:
    """Evaluate an integer expression in ``n`` such as ``n-ceil(cbrt(n))``."""

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "n":
            return n
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -walk(node.operand)
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](walk(node.args[0]))
        raise ValueError(f"unsupported expression {expr!r}")

    try:
        value = walk(ast.parse(expr.strip(), mode="eval"))
    except SyntaxError:
        raise ValueError(f"unsupported expression {expr!r}") from None
    rounded = round(value)
    if abs(value - rounded) > 1e-9:
        raise ValueError(f"{expr!r} is not an integer for n={n}")
    return int(rounded)
