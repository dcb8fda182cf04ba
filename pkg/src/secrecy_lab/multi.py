"""Bounds for S half-duplex adversaries, colluding or not.

The receiver sees the sum of all jamming gains.  Cross-interference gains
between adversaries do not enter any bound; they are accepted and ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np

from .channel import HE_KEY, HM_KEY, HZ_KEY, ChannelModel, GainDist, PowerConfig, sample_component
from .errors import ConfigurationError, UsageError
from .estimate import BoundEstimate
from .nofeedback import lower_from_rates, upper_from_rates
from .rng import RngStream


@dataclass(frozen=True)
class MultiModel:
    hm: GainDist
    he_list: tuple[GainDist, ...]
    hz_list: tuple[GainDist, ...]

    def __post_init__(self):
        if len(self.he_list) < 1 or len(self.he_list) != len(self.hz_list):
            raise ConfigurationError("he_list and hz_list must be nonempty and of equal length")

    @property
    def s_count(self) -> int:
        return len(self.he_list)

    @classmethod
    def from_single(cls, model: ChannelModel) -> "MultiModel":
        return cls(model.hm, (model.he,), (model.hz,))

    def to_json(self) -> dict:
        return {
            "hm": self.hm.to_json(),
            "he_list": [d.to_json() for d in self.he_list],
            "hz_list": [d.to_json() for d in self.hz_list],
        }

    @classmethod
    def from_json(cls, obj) -> "MultiModel":
        if "dependence" in obj or "joint" in obj:
            raise ConfigurationError("dependent adversary gains are not supported")
        try:
            return cls(
                GainDist.from_json(obj["hm"]),
                tuple(GainDist.from_json(d) for d in obj["he_list"]),
                tuple(GainDist.from_json(d) for d in obj["hz_list"]),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigurationError("multi-adversary model needs 'hm', 'he_list', 'hz_list'") from exc

    @classmethod
    def load(cls, path) -> "MultiModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


class MultiGains(NamedTuple):
    hm: np.ndarray
    he: list[np.ndarray]
    hz: list[np.ndarray]


def sample_multi(mm: MultiModel, n: int, rng: RngStream) -> MultiGains:
    """Adversary 0 reuses the single-adversary subkeys, so S=1 matches exactly."""
    if n < 1:
        raise UsageError("n must be >= 1")
    he = [sample_component(d, n, rng, HE_KEY if s == 0 else (HE_KEY, s)) for s, d in enumerate(mm.he_list)]
    hz = [sample_component(d, n, rng, HZ_KEY if s == 0 else (HZ_KEY, s)) for s, d in enumerate(mm.hz_list)]
    return MultiGains(sample_component(mm.hm, n, rng, HM_KEY), he, hz)


def _main_rate(g: MultiGains, power: PowerConfig) -> np.ndarray:
    hz_sum = reduce(np.add, g.hz)
    return np.log2(1.0 + power.pt * g.hm / (1.0 + power.pj * hz_sum))


def _eaves_rate(he: np.ndarray, power: PowerConfig) -> np.ndarray:
    return np.log2(1.0 + power.pt * he)


@dataclass(frozen=True)
class MultiBound:
    estimate: BoundEstimate
    s_argmin: int | None
    per_adversary: tuple[BoundEstimate, ...] = ()


def _min_over(ests: list[BoundEstimate]) -> MultiBound:
    s = min(range(len(ests)), key=lambda i: ests[i].value)
    return MultiBound(ests[s], s, tuple(ests))


def lower_noncolluding(mm: MultiModel, power: PowerConfig, n: int, rng: RngStream, cross_gains=None) -> MultiBound:
    g = sample_multi(mm, n, rng)
    a = _main_rate(g, power)
    return _min_over([lower_from_rates(a, _eaves_rate(he, power)) for he in g.he])


def upper_noncolluding(mm: MultiModel, power: PowerConfig, n: int, rng: RngStream, cross_gains=None) -> MultiBound:
    g = sample_multi(mm, n, rng)
    a = _main_rate(g, power)
    return _min_over([upper_from_rates(a, _eaves_rate(he, power)) for he in g.he])


def lower_colluding(mm: MultiModel, power: PowerConfig, n: int, rng: RngStream, cross_gains=None) -> MultiBound:
    g = sample_multi(mm, n, rng)
    b = _eaves_rate(reduce(np.add, g.he), power)
    return MultiBound(lower_from_rates(_main_rate(g, power), b), None)


def upper_colluding(mm: MultiModel, power: PowerConfig, n: int, rng: RngStream, cross_gains=None) -> MultiBound:
    g = sample_multi(mm, n, rng)
    b = _eaves_rate(reduce(np.add, g.he), power)
    return MultiBound(upper_from_rates(_main_rate(g, power), b), None)
