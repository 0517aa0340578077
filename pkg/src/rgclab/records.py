"""Result records and CSV persistence shared across modules.

Every numeric field is written with 17 significant digits so that reruns can
be compared bit-for-bit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Sequence

Z95 = 1.959963984540054  # two-sided 95% normal quantile


def fmt(x) -> str:
    """Full-precision text form of a value (17 significant digits for floats)."""
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


@dataclass
class EstimateRecord:
    """One Monte Carlo statistic: model, geometry, moments and a normal CI."""

    statistic: str
    model: str
    n: float
    r: float
    replicates: int
    mean: float
    variance: float
    ci_halfwidth: float
    seed: int
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, statistic, model, n, r, values: Sequence[float], seed,
                    extra=None) -> "EstimateRecord":
        m = len(values)
        if m < 1:
            raise ValueError("need at least one replicate value")
        mean = float(sum(values)) / m
        if m >= 2:
            var = sum((v - mean) ** 2 for v in values) / (m - 1)
            ci = Z95 * math.sqrt(var / m)
        else:
            var = 0.0
            ci = math.inf
        return cls(statistic, model, float(n), float(r), m, mean, float(var),
                   float(ci), int(seed), dict(extra or {}))

    def row(self) -> list[str]:
        vals = [self.statistic, self.model, self.n, self.r, self.replicates,
                self.mean, self.variance, self.ci_halfwidth, self.seed]
        return [fmt(v) for v in vals]


ESTIMATE_HEADER = ["statistic", "model", "n", "r", "replicates", "mean",
                   "variance", "ci_halfwidth", "seed"]


def write_estimates_csv(path, records: Iterable[EstimateRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ESTIMATE_HEADER)
        for rec in records:
            w.writerow(rec.row())


def write_points_csv(path, points) -> None:
    """Point cloud as CSV with header ``x0,...,x{d-1}``, one point per row."""
    import numpy as np

    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        pts = pts.reshape(0, 2) if pts.size == 0 else pts.reshape(1, -1)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(pts.shape[1])])
        for row in pts:
            w.writerow([fmt(float(v)) for v in row])


def record_dict(rec) -> dict:
    return asdict(rec)
