from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Z95 = 1.959963984540054


@dataclass(frozen=True)
class BoundEstimate:
    """Monte Carlo estimate of a rate bound, bits per channel use.

    ``unclamped`` keeps the mean before the positive part is applied, when
    the bound clamps after averaging.
    """

    value: float
    ci_halfwidth: float
    n_samples: int
    kind: str
    unclamped: float | None = None

    def __post_init__(self):
        if self.kind not in ("lower", "upper"):
            raise ValueError(f"kind must be 'lower' or 'upper', got {self.kind!r}")
        if self.ci_halfwidth < 0:
            raise ValueError("ci_halfwidth must be >= 0")

    @property
    def ci_low(self) -> float:
        return self.value - self.ci_halfwidth

    @property
    def ci_high(self) -> float:
        return self.value + self.ci_halfwidth


def mean_ci(x: np.ndarray) -> tuple[float, float]:
    """Sample mean and 95% normal-approximation halfwidth."""
    n = len(x)
    m = float(np.mean(x))
    if n < 2:
        return m, 0.0
    return m, Z95 * float(np.std(x, ddof=1)) / math.sqrt(n)


def ratio_ci(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    """mean(num)/mean(den) with a delta-method 95% halfwidth."""
    n = len(num)
    md = float(np.mean(den))
    r = float(np.mean(num)) / md
    if n < 2:
        return r, 0.0
    resid = num - r * den
    return r, Z95 * float(np.std(resid, ddof=1)) / (md * math.sqrt(n))


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)
