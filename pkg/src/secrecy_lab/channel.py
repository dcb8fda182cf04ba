"""Block-fading gain distributions, sampling and per-block information rates.

All rates are in bits per channel use (base-2 logarithms).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, UsageError
from .rng import CHUNK_SIZE, RngStream, chunk_sizes, parallel_map

# subkeys identifying which gain a draw belongs to
HM_KEY, HE_KEY, HZ_KEY = 0, 1, 2
PHI_KEY = 1000


@dataclass(frozen=True)
class GainDist:
    """Marginal law of a power gain: exponential, point mass or finite discrete."""

    family: str
    mean_: float = 0.0
    value: float = 0.0
    atoms: tuple[float, ...] = ()
    probs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.family == "exponential":
            if not (self.mean_ > 0 and math.isfinite(self.mean_)):
                raise ConfigurationError(f"exponential mean must be > 0, got {self.mean_}")
        elif self.family == "point":
            if not (self.value >= 0 and math.isfinite(self.value)):
                raise ConfigurationError(f"point mass must be >= 0, got {self.value}")
        elif self.family == "discrete":
            if len(self.atoms) == 0 or len(self.atoms) != len(self.probs):
                raise ConfigurationError("discrete atoms/probs must be nonempty and equal length")
            if any(not (a >= 0 and math.isfinite(a)) for a in self.atoms):
                raise ConfigurationError("discrete atoms must be finite and >= 0")
            if any(p < 0 for p in self.probs) or abs(math.fsum(self.probs) - 1.0) > 1e-12:
                raise ConfigurationError("discrete probs must be >= 0 and sum to 1")
        else:
            raise ConfigurationError(f"unknown gain family {self.family!r}")

    @classmethod
    def exponential(cls, mean: float) -> "GainDist":
        return cls("exponential", mean_=float(mean))

    @classmethod
    def point(cls, value: float) -> "GainDist":
        return cls("point", value=float(value))

    @classmethod
    def discrete(cls, atoms: Sequence[float], probs: Sequence[float]) -> "GainDist":
        return cls("discrete", atoms=tuple(map(float, atoms)), probs=tuple(map(float, probs)))

    def mean(self) -> float:
        if self.family == "exponential":
            return self.mean_
        if self.family == "point":
            return self.value
        return math.fsum(a * p for a, p in zip(self.atoms, self.probs))

    def is_zero(self) -> bool:
        """True when the gain is almost surely 0."""
        if self.family == "point":
            return self.value == 0.0
        if self.family == "discrete":
            return all(a == 0.0 or p == 0.0 for a, p in zip(self.atoms, self.probs))
        return False

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if self.family == "exponential":
            return gen.exponential(self.mean_, size)
        if self.family == "point":
            return np.full(size, self.value)
        # inverse-cdf lookup keeps one uniform per draw
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, gen.random(size), side="right")
        return np.asarray(self.atoms)[np.minimum(idx, len(self.atoms) - 1)]

    def to_json(self) -> dict:
        if self.family == "exponential":
            return {"exp": self.mean_}
        if self.family == "point":
            return {"point": self.value}
        return {"discrete": {"atoms": list(self.atoms), "probs": list(self.probs)}}

    @classmethod
    def from_json(cls, obj) -> "GainDist":
        if not isinstance(obj, dict) or len(obj) != 1:
            raise ConfigurationError(f"gain distribution must be a one-key object, got {obj!r}")
        (key, val), = obj.items()
        try:
            if key == "exp":
                return cls.exponential(val)
            if key == "point":
                return cls.point(val)
            if key == "discrete":
                return cls.discrete(val["atoms"], val["probs"])
        except (TypeError, KeyError) as exc:
            raise ConfigurationError(f"malformed {key!r} distribution: {val!r}") from exc
        raise ConfigurationError(f"unknown gain family {key!r}")


@dataclass(frozen=True)
class ChannelModel:
    hm: GainDist
    he: GainDist
    hz: GainDist

    def to_json(self) -> dict:
        return {"hm": self.hm.to_json(), "he": self.he.to_json(), "hz": self.hz.to_json()}

    @classmethod
    def from_json(cls, obj) -> "ChannelModel":
        try:
            return cls(*(GainDist.from_json(obj[k]) for k in ("hm", "he", "hz")))
        except (KeyError, TypeError) as exc:
            raise ConfigurationError("channel model needs 'hm', 'he' and 'hz'") from exc

    @classmethod
    def exponential(cls, hm: float, he: float, hz: float) -> "ChannelModel":
        return cls(GainDist.exponential(hm), GainDist.exponential(he), GainDist.exponential(hz))

    @classmethod
    def load(cls, path) -> "ChannelModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class PowerConfig:
    pt: float
    pj: float = 0.0

    def __post_init__(self):
        for name in ("pt", "pj"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigurationError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class GainSample:
    hm: float
    he: float
    hz: float


@dataclass(frozen=True)
class GainBatch:
    """Column storage for many :class:`GainSample` draws."""

    hm: np.ndarray
    he: np.ndarray
    hz: np.ndarray

    def __len__(self) -> int:
        return len(self.hm)

    def __getitem__(self, i: int) -> GainSample:
        return GainSample(float(self.hm[i]), float(self.he[i]), float(self.hz[i]))

    def __iter__(self) -> Iterator[GainSample]:
        for i in range(len(self)):
            yield self[i]


def sample_component(dist: GainDist, n: int, rng: RngStream, key) -> np.ndarray:
    """Draw ``n`` values of one gain; chunk ``c`` uses subkeys ``(*key, c)``."""
    key = key if isinstance(key, tuple) else (key,)
    sizes = chunk_sizes(n)
    parts = parallel_map(lambda c: dist.sample(rng.generator(*key, c), sizes[c]), range(len(sizes)))
    return np.concatenate(parts) if parts else np.empty(0)


def sample_gains(model: ChannelModel, n: int, rng: RngStream, prefix: tuple = ()) -> GainBatch:
    """``n`` i.i.d. gain triples; ``prefix`` separates auxiliary draws from the main ones."""
    if n < 1:
        raise UsageError("n must be >= 1")
    return GainBatch(
        sample_component(model.hm, n, rng, (*prefix, HM_KEY)),
        sample_component(model.he, n, rng, (*prefix, HE_KEY)),
        sample_component(model.hz, n, rng, (*prefix, HZ_KEY)),
    )


def _as_rate(x):
    return float(x) if np.ndim(x) == 0 else x


def main_info(sample, power: PowerConfig):
    """log2(1 + Pt*hm / (1 + Pj*hz)): main-channel rate under jamming."""
    return _as_rate(np.log2(1.0 + power.pt * np.asarray(sample.hm) / (1.0 + power.pj * np.asarray(sample.hz))))


def eaves_info(sample, power: PowerConfig):
    """log2(1 + Pt*he): eavesdropper rate."""
    return _as_rate(np.log2(1.0 + power.pt * np.asarray(sample.he)))


def empirical_quantile(samples, u):
    """Lower order-statistic quantile ``x_(ceil(u n))`` of sorted ``samples``."""
    x = np.asarray(samples)
    n = len(x)
    if n == 0:
        raise UsageError("empirical_quantile of an empty sample set")
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise UsageError("quantile level must lie in [0, 1]")
    # tolerance keeps u = k/n on order statistic k despite rounding
    idx = np.clip(np.ceil(u * n - 1e-9), 1, n).astype(np.int64) - 1
    return _as_rate(x[idx])


__all__ = [
    "CHUNK_SIZE", "GainDist", "ChannelModel", "PowerConfig", "GainSample", "GainBatch",
    "sample_gains", "sample_component", "main_info", "eaves_info", "empirical_quantile",
]
