"""Secrecy-capacity bounds without feedback.

The lower bound clamps the averaged rate difference; the upper bound clamps
inside the expectation and minimizes over couplings of the main and
eavesdropper rates (see :mod:`secrecy_lab.coupling`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .channel import ChannelModel, PowerConfig, eaves_info, main_info, sample_gains
from .coupling import positive_gaps
from .errors import ConfigurationWarning, UsageError
from .estimate import BoundEstimate, mean_ci
from .rng import RngStream


def lower_from_rates(a: np.ndarray, b: np.ndarray) -> BoundEstimate:
    m, ci = mean_ci(a - b)
    return BoundEstimate(max(m, 0.0), ci, len(a), "lower", unclamped=m)


def upper_from_rates(a: np.ndarray, b: np.ndarray) -> BoundEstimate:
    # CI treats the quantile gaps as i.i.d.; it is a noise gauge, not exact
    m, ci = mean_ci(positive_gaps(a, b))
    return BoundEstimate(m, ci, max(len(a), len(b)), "upper")


def _check_n(n: int) -> None:
    if n < 1:
        raise UsageError("n must be >= 1")


def lower_bound(model: ChannelModel, power: PowerConfig, n: int, rng: RngStream) -> BoundEstimate:
    _check_n(n)
    g = sample_gains(model, n, rng)
    return lower_from_rates(main_info(g, power), eaves_info(g, power))


def upper_bound(model: ChannelModel, power: PowerConfig, n: int, rng: RngStream) -> BoundEstimate:
    _check_n(n)
    g = sample_gains(model, n, rng)
    return upper_from_rates(main_info(g, power), eaves_info(g, power))


def lower_bound_no_jammer_csi(model: ChannelModel, power: PowerConfig, n: int, rng: RngStream) -> BoundEstimate:
    """Lower bound when the receiver only knows the mean jamming gain."""
    _check_n(n)
    g = sample_gains(model, n, rng)
    ez = model.hz.mean()
    a = np.log2(1.0 + power.pt * g.hm / (1.0 + power.pj * ez))
    return lower_from_rates(a, eaves_info(g, power))


def dkw_epsilon(n: int, delta: float = 0.05) -> float:
    """Dvoretzky-Kiefer-Wolfowitz radius for a sup-norm CDF band of level 1 - delta."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


class Dominance(NamedTuple):
    dominated: bool
    max_cdf_gap: float


def dominance_check(model: ChannelModel, power: PowerConfig, n: int, rng: RngStream) -> Dominance:
    """Does H_e stochastically dominate H_m / (1 + Pj H_z)?

    ``max_cdf_gap`` is max_x F_He(x) - F_Hm*(x) over the merged sample grid;
    dominance is declared when it stays below twice the DKW radius.
    """
    _check_n(n)
    g = sample_gains(model, n, rng)
    he = np.sort(g.he)
    hstar = np.sort(g.hm / (1.0 + power.pj * g.hz))
    grid = np.concatenate([he, hstar])
    gap = (np.searchsorted(he, grid, "right") - np.searchsorted(hstar, grid, "right")) / n
    worst = float(gap.max())
    return Dominance(worst <= 2.0 * dkw_epsilon(n), worst)


@dataclass(frozen=True)
class PowerLaw:
    """P -> coef * P**exponent."""

    coef: float
    exponent: float = 1.0

    def __call__(self, p: float) -> float:
        if p == 0:
            return 0.0 if self.exponent > 0 else self.coef
        return self.coef * p ** self.exponent


@dataclass(frozen=True)
class SweepPoint:
    p: float
    power: PowerConfig
    estimate: BoundEstimate


def power_scaling_sweep(
    model: ChannelModel,
    pt_of_p: PowerLaw,
    pj_of_p: PowerLaw,
    p_grid: Sequence[float],
    n: int,
    rng: RngStream,
    kind: str = "upper",
) -> list[SweepPoint]:
    """Evaluate a bound along a joint power scaling, reusing one gain sample."""
    _check_n(n)
    if any(b < a for a, b in zip(p_grid, p_grid[1:])):
        raise UsageError("p_grid must be ascending")
    if pt_of_p.exponent <= 0 or pj_of_p.exponent <= 0:
        warnings.warn("power scaling exponents should be > 0", ConfigurationWarning, stacklevel=2)
    if pj_of_p.coef == 0 or pt_of_p.exponent > pj_of_p.exponent:
        warnings.warn("transmit power grows faster than jamming power (P_t is not O(P_j))",
                      ConfigurationWarning, stacklevel=2)
    g = sample_gains(model, n, rng)
    bound = upper_from_rates if kind == "upper" else lower_from_rates
    out = []
    for p in p_grid:
        power = PowerConfig(pt_of_p(p), pj_of_p(p))
        out.append(SweepPoint(float(p), power, bound(main_info(g, power), eaves_info(g, power))))
    return out
