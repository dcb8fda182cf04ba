"""Achievable secrecy rates with 1-bit ACK/NAK feedback.

A bit group of R bits is retransmitted until the receiver decodes it.  Each
decoding instant is a renewal; the secure reward of an epoch is
``[R - log2(1 + Pt * sum of eavesdropper gains over the epoch)]^+`` and the
long-run rate is E[reward] / E[T].

Schemes
-------
mrc        receiver combines every copy; success once log2(1 + sum SNR) >= R.
plain_arq  failed copies are discarded; success once a single block has
           log2(1 + SNR) >= R.  The eavesdropper still combines all copies.
main_csi   plain ARQ stopping, but the transmitter stays silent on blocks it
           knows would fail, so only the decoded block leaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .channel import ChannelModel, GainDist, PowerConfig, main_info, sample_gains
from .errors import UnreachableThresholdError, UsageError
from .estimate import BoundEstimate, mean_ci, ratio_ci, wilson_interval
from .nofeedback import lower_bound
from .rng import RngStream, chunk_sizes, parallel_map

SCHEMES = ("mrc", "plain_arq", "main_csi")
EPOCH_CHUNK = 8192
RENEWAL_KEY = 200
PILOT_KEY = 201
PILOT_SAMPLES = 100_000
DEFAULT_T_MAX = 10_000


@dataclass(frozen=True)
class RenewalSample:
    t: int
    sum_he: float
    reward: float
    truncated: bool = False


@dataclass(frozen=True, eq=False)
class RenewalBatch:
    t: np.ndarray
    sum_he: np.ndarray
    reward: np.ndarray
    truncated: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> RenewalSample:
        return RenewalSample(int(self.t[i]), float(self.sum_he[i]), float(self.reward[i]), bool(self.truncated[i]))

    def __iter__(self) -> Iterator[RenewalSample]:
        for i in range(len(self)):
            yield self[i]


@dataclass(frozen=True)
class RateSearch:
    r_max: float | None = None
    grid_points: int = 64
    refine_iters: int = 20

    def __post_init__(self):
        if self.r_max is not None and not self.r_max > 0:
            raise UsageError("r_max must be > 0")
        if self.grid_points < 8:
            raise UsageError("grid_points must be >= 8")


@dataclass(frozen=True)
class RateEstimate(BoundEstimate):
    r: float = 0.0
    scheme: str = "mrc"
    mean_t: float = 0.0
    truncation_fraction: float = 0.0


def _support_max(d: GainDist) -> float:
    if d.family == "exponential":
        return math.inf
    if d.family == "point":
        return d.value
    return max(a for a, p in zip(d.atoms, d.probs) if p > 0)


def _support_min(d: GainDist) -> float:
    if d.family == "exponential":
        return 0.0
    if d.family == "point":
        return d.value
    return min(a for a, p in zip(d.atoms, d.probs) if p > 0)


def max_block_info(model: ChannelModel, power: PowerConfig) -> float:
    """Essential supremum of the single-block main information."""
    if power.pt == 0 or model.hm.is_zero():
        return 0.0
    hm = _support_max(model.hm)
    if math.isinf(hm):
        return math.inf
    return math.log2(1.0 + power.pt * hm / (1.0 + power.pj * _support_min(model.hz)))


def _check_reachable(model, power, r, scheme):
    sup = max_block_info(model, power)
    if sup == 0.0 or (scheme != "mrc" and r > sup):
        raise UnreachableThresholdError(
            f"threshold r={r} exceeds the reachable main information ({sup}) for scheme {scheme}")


def _simulate_chunk(model, power, r, scheme, size, t_max, gen):
    t = np.zeros(size, dtype=np.int64)
    sum_he = np.zeros(size)
    done = np.zeros(size, dtype=bool)
    acc = np.zeros(size)
    active = np.arange(size)
    elapsed = 0
    width = 4
    while active.size and elapsed < t_max:
        b = min(width, t_max - elapsed)
        k = active.size
        hm = model.hm.sample(gen, k * b).reshape(k, b)
        he = model.he.sample(gen, k * b).reshape(k, b)
        hz = model.hz.sample(gen, k * b).reshape(k, b)
        snr = power.pt * hm / (1.0 + power.pj * hz)
        if scheme == "mrc":
            cum = acc[active, None] + np.cumsum(snr, axis=1)
            ok = np.log2(1.0 + cum) >= r
        else:
            ok = np.log2(1.0 + snr) >= r
        cum_he = sum_he[active, None] + np.cumsum(he, axis=1)
        hit = ok.any(axis=1)
        first = np.argmax(ok, axis=1)
        rows = active[hit]
        t[rows] = elapsed + first[hit] + 1
        if scheme == "main_csi":
            sum_he[rows] = he[hit, first[hit]]
        else:
            sum_he[rows] = cum_he[hit, first[hit]]
        done[rows] = True
        rest = ~hit
        if scheme == "mrc":
            acc[active[rest]] = cum[rest, -1]
        sum_he[active[rest]] = cum_he[rest, -1]
        active = active[rest]
        elapsed += b
        width = min(width * 2, 512)
    t[active] = t_max
    reward = np.where(done, np.maximum(r - np.log2(1.0 + power.pt * sum_he), 0.0), 0.0)
    return t, sum_he, reward, ~done


def simulate_renewals(
    model: ChannelModel,
    power: PowerConfig,
    r: float,
    scheme: str,
    n_renewals: int,
    t_max: int = DEFAULT_T_MAX,
    rng: RngStream | None = None,
) -> RenewalBatch:
    """Independent renewal epochs of one bit group each.

    Epochs still undecoded after ``t_max`` blocks are flagged as truncated
    and earn no reward.
    """
    if scheme not in SCHEMES:
        raise UsageError(f"unknown scheme {scheme!r}")
    if not r > 0 or n_renewals < 1 or t_max < 1:
        raise UsageError("need r > 0, n_renewals >= 1 and t_max >= 1")
    _check_reachable(model, power, r, scheme)
    rng = rng or RngStream(0)
    sizes = chunk_sizes(n_renewals, EPOCH_CHUNK)
    parts = parallel_map(
        lambda c: _simulate_chunk(model, power, r, scheme, sizes[c], t_max, rng.generator(RENEWAL_KEY, c)),
        range(len(sizes)),
    )
    return RenewalBatch(*(np.concatenate(col) for col in zip(*parts)))


def estimate_from_batch(batch: RenewalBatch, r: float, scheme: str) -> RateEstimate:
    value, ci = ratio_ci(batch.reward, batch.t.astype(float))
    return RateEstimate(
        max(value, 0.0), ci, len(batch), "lower",
        r=r, scheme=scheme, mean_t=float(np.mean(batch.t)),
        truncation_fraction=float(np.mean(batch.truncated)),
    )


def _zero(r, scheme, n):
    return RateEstimate(0.0, 0.0, n, "lower", r=r, scheme=scheme)


def rate_at(
    model: ChannelModel,
    power: PowerConfig,
    r: float,
    scheme: str,
    n_renewals: int,
    t_max: int = DEFAULT_T_MAX,
    rng: RngStream | None = None,
) -> RateEstimate:
    """Renewal-reward rate mean(reward) / mean(T).

    For the ARQ schemes this equals p_hat * mean(reward) with
    p_hat = 1 / mean(T), the per-block decoding probability.
    """
    batch = simulate_renewals(model, power, r, scheme, n_renewals, t_max, rng)
    return estimate_from_batch(batch, r, scheme)


def pilot_block_info(model: ChannelModel, power: PowerConfig, rng: RngStream) -> np.ndarray:
    """Sorted single-block main information from an auxiliary sample."""
    g = sample_gains(model, PILOT_SAMPLES, rng, prefix=(PILOT_KEY,))
    return np.sort(main_info(g, power))


def block_info_quantile(model: ChannelModel, power: PowerConfig, q: float, rng: RngStream) -> float:
    return float(np.quantile(pilot_block_info(model, power, rng), q, method="inverted_cdf"))


INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_rate(
    model: ChannelModel,
    power: PowerConfig,
    scheme: str,
    search: RateSearch = RateSearch(),
    n_renewals: int = 100_000,
    rng: RngStream | None = None,
    t_max: int = DEFAULT_T_MAX,
) -> tuple[float, RateEstimate]:
    """Grid scan then golden-section refinement of ``rate_at`` over R.

    The objective is not concave in general, so the coarse grid decides the
    basin and golden section only polishes inside the neighbouring cells.
    Every evaluation reuses the same random stream.
    """
    rng = rng or RngStream(0)
    sup = max_block_info(model, power)
    if sup == 0.0:
        return 0.0, _zero(0.0, scheme, n_renewals)
    pilot = pilot_block_info(model, power, rng)
    r_max = search.r_max if search.r_max is not None else float(np.quantile(pilot, 0.999, method="inverted_cdf"))
    if not r_max > 0:
        return 0.0, _zero(0.0, scheme, n_renewals)

    cache: dict[float, RateEstimate] = {}

    def f(r: float) -> RateEstimate:
        if r not in cache:
            if scheme != "mrc" and r > sup:
                cache[r] = _zero(r, scheme, n_renewals)
            else:
                cache[r] = rate_at(model, power, r, scheme, n_renewals, t_max, rng)
        return cache[r]

    def arq_ceiling(r: float) -> float:
        # reward <= r and 1/E[T] = P(block info >= r) for the ARQ schemes
        k = len(pilot) - int(np.searchsorted(pilot, r, side="left"))
        return r * wilson_interval(k, len(pilot))[1]

    grid = np.linspace(r_max / search.grid_points, r_max, search.grid_points)
    values = []
    best = 0.0
    for r in map(float, grid):
        if scheme != "mrc" and best > 0 and 2.0 * arq_ceiling(r) < best:
            # cannot beat the incumbent; skipping avoids epochs with huge E[T]
            values.append(0.0)
            continue
        values.append(f(r).value)
        best = max(best, values[-1])
    k = int(np.argmax(values))
    lo = float(grid[k - 1]) if k > 0 else 0.0
    hi = float(grid[k + 1]) if k + 1 < len(grid) else float(grid[k])

    a, b = lo, hi
    if b > a:
        c, d = b - INV_PHI * (b - a), a + INV_PHI * (b - a)
        for _ in range(search.refine_iters):
            if f(c).value >= f(d).value:
                b, d = d, c
                c = b - INV_PHI * (b - a)
            else:
                a, c = c, d
                d = a + INV_PHI * (b - a)

    best_r = max(cache, key=lambda r: (cache[r].value, -r))
    return best_r, cache[best_r]


def upper_bound_1bit(model: ChannelModel, power: PowerConfig, n: int, rng: RngStream) -> BoundEstimate:
    """E[log2(1 + Pt hm / (1 + max(Pj hz, Pt he)))]."""
    if n < 1:
        raise UsageError("n must be >= 1")
    g = sample_gains(model, n, rng)
    x = np.log2(1.0 + power.pt * g.hm / (1.0 + np.maximum(power.pj * g.hz, power.pt * g.he)))
    m, ci = mean_ci(x)
    return BoundEstimate(m, ci, n, "upper")


def one_bit_lower_bound(
    model: ChannelModel,
    power: PowerConfig,
    n: int,
    rng: RngStream,
    scheme: str = "mrc",
    n_renewals: int = 100_000,
    search: RateSearch = RateSearch(),
) -> BoundEstimate:
    """max(C_s^-, best renewal rate): the 1-bit feedback lower bound."""
    c_minus = lower_bound(model, power, n, rng)
    _, rate = maximize_rate(model, power, scheme, search, n_renewals, rng)
    best = rate if rate.value > c_minus.value else c_minus
    return BoundEstimate(best.value, best.ci_halfwidth, best.n_samples, "lower")
