"""Time-sharing lower bound on the alpha-outage secrecy capacity.

A fraction gamma of every block generates key bits at rate
``r_key = gamma * C`` (C is the no-feedback or 1-bit lower bound).  The rest
carries a delay-limited message of rate ``r_s``: a part of size r_key is
one-time padded with stored key, the remainder is protected by binning at
codebook rate ``r_tilde``.  A block is in outage unless both

    (1 - gamma) * main_info >= r_tilde
    [r_tilde - (1 - gamma) * eaves_info]^+ >= r_s - r_key

hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import ChannelModel, PowerConfig, eaves_info, main_info, sample_gains
from .errors import UsageError
from .estimate import BoundEstimate, wilson_interval
from .feedback import RateSearch, one_bit_lower_bound
from .nofeedback import lower_bound
from .rng import RngStream

KEY_MODES = ("no_feedback", "one_bit")
DEFAULT_GAMMAS = tuple(round(0.05 * i, 2) for i in range(21))


@dataclass(frozen=True)
class DelayConfig:
    alpha: float
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMAS
    rate_points: int = 64
    key_mode: str = "no_feedback"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise UsageError("alpha must lie in [0, 1]")
        if not self.gamma_grid or any(not 0.0 <= g <= 1.0 for g in self.gamma_grid):
            raise UsageError("gamma grid must be nonempty and within [0, 1]")
        if self.rate_points < 2:
            raise UsageError("rate grid needs at least 2 points")
        if self.key_mode not in KEY_MODES:
            raise UsageError(f"key_mode must be one of {KEY_MODES}")


@dataclass(frozen=True)
class OutageEstimate:
    """Success probability with a 95% Wilson interval."""

    p_success: float
    ci_halfwidth: float
    n: int
    lower_edge: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.p_success <= 1.0:
            raise ValueError("p_success must lie in [0, 1]")


def _outage_estimate(k: int, n: int) -> OutageEstimate:
    lo, hi = wilson_interval(k, n)
    return OutageEstimate(k / n, (hi - lo) / 2.0, n, lo)


def success_indicator(m: np.ndarray, e: np.ndarray, gamma: float, r_tilde: float, r_s: float, r_key: float) -> np.ndarray:
    """Per-block no-outage indicator from main rates ``m`` and eavesdropper rates ``e``."""
    ok_info = (1.0 - gamma) * m >= r_tilde
    ok_eq = np.maximum(r_tilde - (1.0 - gamma) * e, 0.0) >= r_s - r_key
    return ok_info & ok_eq


def _check_triple(gamma, r_tilde, r_s, r_key):
    if not 0.0 <= gamma <= 1.0:
        raise UsageError("gamma must lie in [0, 1]")
    if r_s > r_tilde:
        raise UsageError(f"r_s={r_s} exceeds r_tilde={r_tilde}")
    if r_key > r_s:
        raise UsageError(f"r_key={r_key} exceeds r_s={r_s}")


def success_probability(
    model: ChannelModel,
    power: PowerConfig,
    gamma: float,
    r_tilde: float,
    r_s: float,
    r_key: float,
    n: int,
    rng: RngStream,
) -> OutageEstimate:
    _check_triple(gamma, r_tilde, r_s, r_key)
    g = sample_gains(model, n, rng)
    ok = success_indicator(main_info(g, power), eaves_info(g, power), gamma, r_tilde, r_s, r_key)
    return _outage_estimate(int(ok.sum()), n)


def key_rate(
    model: ChannelModel,
    power: PowerConfig,
    gamma: float,
    key_mode: str,
    n: int,
    rng: RngStream,
    n_renewals: int = 100_000,
) -> float:
    if not 0.0 <= gamma <= 1.0:
        raise UsageError("gamma must lie in [0, 1]")
    if gamma == 0.0:
        return 0.0
    return gamma * _key_base(model, power, key_mode, n, rng, n_renewals)


def _key_base(model, power, key_mode, n, rng, n_renewals) -> float:
    if key_mode == "no_feedback":
        return lower_bound(model, power, n, rng).value
    if key_mode == "one_bit":
        return one_bit_lower_bound(model, power, n, rng, n_renewals=n_renewals).value
    raise UsageError(f"unknown key mode {key_mode!r}")


@dataclass(frozen=True)
class OutageRate:
    r_s: float
    gamma: float
    r_tilde: float
    r_key: float
    success: OutageEstimate | None
    value: BoundEstimate


def _min_successes(n: int, alpha: float) -> int | None:
    """Smallest success count whose Wilson lower edge reaches 1 - alpha."""
    target = 1.0 - alpha
    if wilson_interval(n, n)[0] < target:
        return None
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if wilson_interval(mid, n)[0] >= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def maximize_outage_rate(
    model: ChannelModel,
    power: PowerConfig,
    cfg: DelayConfig,
    n: int,
    rng: RngStream,
    n_renewals: int = 100_000,
    key_base: float | None = None,
) -> OutageRate:
    """Largest r_s admitted by a (gamma, r_tilde) grid search.

    A triple is admitted when the lower Wilson edge of its success
    probability is at least 1 - alpha.  For each (gamma, r_tilde) the
    largest admissible r_s is read off the order statistics of the per-block
    slack, so r_s is not restricted to a grid.  Ties prefer larger r_s, then
    smaller gamma, then larger r_tilde.
    """
    if n < 1:
        raise UsageError("n must be >= 1")
    g = sample_gains(model, n, rng)
    m, e = main_info(g, power), eaves_info(g, power)
    base = key_base if key_base is not None else _key_base(model, power, cfg.key_mode, n, rng, n_renewals)
    k_min = _min_successes(n, cfg.alpha)
    best = None
    best_key = None
    if k_min is not None and k_min > 0:
        for gamma in cfg.gamma_grid:
            if gamma >= 1.0:
                continue  # no channel uses left for messages
            r_key = gamma * base
            mg, eg = (1.0 - gamma) * m, (1.0 - gamma) * e
            r_top = float(np.quantile(mg, 0.999, method="inverted_cdf"))
            grid = set(np.linspace(r_top / cfg.rate_points, r_top, cfg.rate_points).tolist())
            if r_key > 0:
                grid.add(r_key)
            for r_tilde in sorted(grid):
                if r_tilde < r_key or r_tilde <= 0:
                    continue
                # largest r_s with #{info ok and r_key + slack >= r_s} >= k_min
                cand = r_key + np.maximum(r_tilde - eg[mg >= r_tilde], 0.0)
                if len(cand) < k_min:
                    continue
                r_s = min(float(np.partition(cand, len(cand) - k_min)[len(cand) - k_min]), r_tilde)
                if r_s < r_key:
                    continue
                key = (r_s, -gamma, r_tilde)
                if best_key is None or key > best_key:
                    best_key = key
                    best = (r_s, gamma, r_tilde, r_key)
    if best is None:
        return OutageRate(0.0, 0.0, 0.0, 0.0, None, BoundEstimate(0.0, 0.0, n, "lower"))
    r_s, gamma, r_tilde, r_key = best
    ok = success_indicator(m, e, gamma, r_tilde, r_s, r_key)
    return OutageRate(r_s, gamma, r_tilde, r_key, _outage_estimate(int(ok.sum()), n),
                      BoundEstimate(r_s, 0.0, n, "lower"))
