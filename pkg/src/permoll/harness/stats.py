from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class SummaryStat:
    count: int
    mean: float
    std: float
    min: float
    max: float


def summarize(values: Sequence[float]) -> SummaryStat:
    """Mean and sample standard deviation (0 for a single value)."""
    values = [float(v) for v in values]
    if not values:
        raise ValueError("cannot summarize an empty sample")
    std = statistics.stdev(values) if len(values) >= 2 else 0.0
    return SummaryStat(len(values), statistics.fmean(values), std, min(values), max(values))
