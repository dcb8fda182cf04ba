"""Block-by-block model of the feedback and key-banking schemes.

The simulator keeps mutual-information ledgers instead of coded bits: a bit
group is decoded once its accumulated main information reaches R, and the
adversary's knowledge is the information it heard while eavesdropping.

Half-duplex adversary: in each block it either jams (phi = 1, its gain enters
the receiver's noise) or eavesdrops (phi = 0, it hears the block), never both.

With ``artificial_noise`` (the default) the receiver adds noise matching
the jamming power on eavesdropping blocks, so decoding always sees the jammed
SNR; this is how the analysis removes the dependence on the adversary's
choices and is what the closed-form rates assume.  The main-CSI scheme never
needs it: the transmitter already knows the main gain.
"""

from __future__ import annotations

import contextlib
import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterator

import numpy as np

from .channel import PHI_KEY, ChannelModel, GainSample, PowerConfig, sample_gains
from .errors import ConfigurationError, UsageError
from .estimate import ratio_ci, wilson_interval
from .feedback import SCHEMES
from .rng import RngStream

ADVERSARY_KINDS = ("always_eavesdrop", "always_jam", "bernoulli", "periodic", "explicit")
_BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class AdversaryStrategy:
    kind: str
    q: float = 0.5
    jam_every: int = 2
    trace: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ADVERSARY_KINDS:
            raise ConfigurationError(f"unknown adversary strategy {self.kind!r}")
        if not 0.0 <= self.q <= 1.0:
            raise ConfigurationError("bernoulli jamming probability must lie in [0, 1]")
        if self.jam_every < 1:
            raise ConfigurationError("jam_every must be >= 1")
        if any(v not in (0, 1) for v in self.trace):
            raise ConfigurationError("explicit trace values must be 0 or 1")

    @classmethod
    def bernoulli(cls, q: float) -> "AdversaryStrategy":
        return cls("bernoulli", q=q)

    @classmethod
    def periodic(cls, jam_every: int) -> "AdversaryStrategy":
        return cls("periodic", jam_every=jam_every)

    @classmethod
    def explicit(cls, trace) -> "AdversaryStrategy":
        return cls("explicit", trace=tuple(int(v) for v in trace))

    @classmethod
    def from_file(cls, path) -> "AdversaryStrategy":
        """Trace file of '0'/'1' characters; whitespace is ignored."""
        with open(path) as fh:
            text = "".join(fh.read().split())
        if any(ch not in "01" for ch in text):
            raise ConfigurationError(f"{path}: trace must contain only 0 and 1")
        return cls.explicit(int(ch) for ch in text)

    def phi(self, m: int, rng: RngStream) -> np.ndarray:
        """Jamming indicators phi(0..m-1)."""
        if self.kind == "always_eavesdrop":
            return np.zeros(m, dtype=np.int8)
        if self.kind == "always_jam":
            return np.ones(m, dtype=np.int8)
        if self.kind == "bernoulli":
            return (rng.generator(PHI_KEY).random(m) < self.q).astype(np.int8)
        if self.kind == "periodic":
            return ((np.arange(m) + 1) % self.jam_every == 0).astype(np.int8)
        if len(self.trace) < m:
            raise ConfigurationError(f"explicit trace has {len(self.trace)} entries, session needs {m}")
        return np.asarray(self.trace[:m], dtype=np.int8)


BUILTIN_STRATEGIES = (
    AdversaryStrategy("always_eavesdrop"),
    AdversaryStrategy("always_jam"),
    AdversaryStrategy.bernoulli(0.5),
    AdversaryStrategy.periodic(2),
)


@dataclass(frozen=True)
class BlockEvent:
    index: int
    phi: int
    gains: GainSample
    main_info_eff: float
    ack: bool
    leaked_info: float
    transmitted: bool = True


@dataclass(frozen=True, eq=False)
class SessionLog:
    """Column storage of a session; ``events`` yields :class:`BlockEvent` rows.

    Group columns: ``t`` blocks spent, ``sum_leaked`` eavesdropper gain the
    adversary actually heard, ``secure_bits`` the resulting reward, and the
    ``*_conservative`` twins that credit the adversary as the closed-form
    rates do.  Delay sessions fill ``outage`` and ``key_balance`` instead.
    """

    r: float
    scheme: str
    power: PowerConfig
    phi: np.ndarray
    hm: np.ndarray
    he: np.ndarray
    hz: np.ndarray
    main_info_eff: np.ndarray
    ack: np.ndarray
    leaked_info: np.ndarray
    transmitted: np.ndarray
    group_t: np.ndarray
    group_sum_leaked: np.ndarray
    group_secure_bits: np.ndarray
    group_sum_leaked_conservative: np.ndarray
    group_secure_bits_conservative: np.ndarray
    group_truncated: np.ndarray
    outage: np.ndarray | None = None
    key_balance: np.ndarray | None = None
    init_blocks: int = 0

    @property
    def n_blocks(self) -> int:
        return len(self.phi)

    @property
    def truncations(self) -> int:
        return int(np.sum(self.group_truncated))

    @property
    def empirical_rate(self) -> float:
        return empirical_secure_rate(self)

    @property
    def conservative_rate(self) -> float:
        return empirical_secure_rate(self, conservative=True)

    @property
    def groups(self) -> list[dict]:
        return [
            {"t": int(t), "sum_leaked": float(s), "secure_bits": float(b)}
            for t, s, b in zip(self.group_t, self.group_sum_leaked, self.group_secure_bits)
        ]

    def event(self, i: int) -> BlockEvent:
        return BlockEvent(
            i, int(self.phi[i]),
            GainSample(float(self.hm[i]), float(self.he[i]), float(self.hz[i])),
            float(self.main_info_eff[i]), bool(self.ack[i]), float(self.leaked_info[i]),
            bool(self.transmitted[i]),
        )

    @property
    def events(self) -> Iterator[BlockEvent]:
        for i in range(self.n_blocks):
            yield self.event(i)

    def rate_ci(self, conservative: bool = False) -> float:
        """95% halfwidth of the secure rate, treating completed groups as renewals."""
        if len(self.group_t) < 2:
            return 0.0
        bits = self.group_secure_bits_conservative if conservative else self.group_secure_bits
        return ratio_ci(bits, self.group_t.astype(float))[1]

    def outage_frequency(self) -> tuple[float, float]:
        """Outage frequency after initialization and its 95% Wilson halfwidth."""
        if self.outage is None:
            raise UsageError("session has no outage record")
        tail = self.outage[self.init_blocks:]
        if tail.size == 0:
            return 1.0, 0.0
        k = int(tail.sum())
        lo, hi = wilson_interval(k, tail.size)
        return k / tail.size, (hi - lo) / 2.0


def _groups(rows) -> dict:
    cols = list(zip(*rows)) if rows else [()] * 6
    return dict(
        group_t=np.asarray(cols[0], dtype=np.int64),
        group_sum_leaked=np.asarray(cols[1], dtype=float),
        group_secure_bits=np.asarray(cols[2], dtype=float),
        group_sum_leaked_conservative=np.asarray(cols[3], dtype=float),
        group_secure_bits_conservative=np.asarray(cols[4], dtype=float),
        group_truncated=np.asarray(cols[5], dtype=bool),
    )


def run_arq_session(
    model: ChannelModel,
    power: PowerConfig,
    r: float,
    scheme: str,
    adversary: AdversaryStrategy,
    m_blocks: int,
    rng: RngStream,
    t_max: int | None = None,
    artificial_noise: bool = True,
) -> SessionLog:
    """Run the ACK/NAK scheme for ``m_blocks`` blocks against ``adversary``.

    mrc adds per-block SNRs of a group inside one logarithm; plain_arq
    decodes each copy on its own; main_csi stays silent whenever
    r > log2(1 + Pt hm) and otherwise behaves like plain ARQ.  A group
    still open when the session ends earns nothing.
    """
    if scheme not in SCHEMES:
        raise UsageError(f"unknown scheme {scheme!r}")
    if m_blocks < 1 or not r > 0:
        raise UsageError("need m_blocks >= 1 and r > 0")
    phi = adversary.phi(m_blocks, rng)
    g = sample_gains(model, m_blocks, rng)
    pt = power.pt
    snr_clear = pt * g.hm
    snr_jam = snr_clear / (1.0 + power.pj * g.hz)
    clear_ok = (scheme == "main_csi") or not artificial_noise
    snr = np.where((phi == 1) | (not clear_ok), snr_jam, snr_clear)
    eaves = np.log2(1.0 + pt * g.he)
    if scheme == "main_csi":
        transmitted = np.log2(1.0 + snr_clear) >= r
    else:
        transmitted = np.ones(m_blocks, dtype=bool)
    heard = transmitted & (phi == 0)
    leaked = np.where(heard, eaves, 0.0)

    info = np.zeros(m_blocks)
    ack = np.zeros(m_blocks, dtype=bool)
    rows = []
    snr_l, he_l, heard_l, tx_l = snr.tolist(), g.he.tolist(), heard.tolist(), transmitted.tolist()
    acc = 0.0
    t = 0
    sum_heard = 0.0
    sum_all = 0.0
    mrc = scheme == "mrc"
    log2 = math.log2
    for i in range(m_blocks):
        t += 1
        he_i = he_l[i]
        if heard_l[i]:
            sum_heard += he_i
        sum_all += he_i
        if tx_l[i]:
            if mrc:
                acc += snr_l[i]
                x = log2(1.0 + acc)
            else:
                x = log2(1.0 + snr_l[i])
            info[i] = x
            if x >= r:
                ack[i] = True
                cons = he_i if scheme == "main_csi" else sum_all
                rows.append((t, sum_heard, max(r - log2(1.0 + pt * sum_heard), 0.0),
                             cons, max(r - log2(1.0 + pt * cons), 0.0), False))
                acc = sum_heard = sum_all = 0.0
                t = 0
                continue
        if t_max is not None and t >= t_max:
            rows.append((t, sum_heard, 0.0, sum_all, 0.0, True))
            acc = sum_heard = sum_all = 0.0
            t = 0

    return SessionLog(
        r, scheme, power, phi, g.hm, g.he, g.hz, info, ack, leaked, transmitted, **_groups(rows),
    )


def empirical_secure_rate(log: SessionLog, conservative: bool = False) -> float:
    """Secure bits delivered per block over the whole session."""
    if log.n_blocks == 0:
        raise UsageError("empty session")
    bits = log.group_secure_bits_conservative if conservative else log.group_secure_bits
    return float(np.sum(bits)) / log.n_blocks if bits.size else 0.0


@dataclass
class KeyBank:
    """Shared key bits; deposits become spendable at the next superblock."""

    superblock_len: int
    balance: float = 0.0
    pending: float = 0.0

    def deposit(self, bits: float) -> None:
        self.pending += bits

    def close_superblock(self) -> None:
        self.balance += self.pending
        self.pending = 0.0

    def withdraw(self, bits: float) -> bool:
        if bits <= 0.0:
            return True
        if self.balance + _BALANCE_TOL < bits:
            return False
        self.balance = max(self.balance - bits, 0.0)
        return True


def run_delay_session(
    model: ChannelModel,
    power: PowerConfig,
    gamma: float,
    r_tilde: float,
    r_s: float,
    r_key: float,
    adversary: AdversaryStrategy,
    m1: int,
    m2: int,
    rng: RngStream,
    artificial_noise: bool = True,
) -> SessionLog:
    """Key-banking delay-limited scheme over ``m2`` superblocks of ``m1`` blocks.

    Each block deposits ``r_key`` key bits, released at the end of its
    superblock.  From the second superblock on, every block spends ``r_key``
    bits on the one-time-padded part of its message.  The first superblock
    is initialization and is always in outage.
    """
    if not 0.0 <= gamma <= 1.0:
        raise UsageError("gamma must lie in [0, 1]")
    if r_s > r_tilde or r_key > r_s or r_key < 0:
        raise UsageError("need 0 <= r_key <= r_s <= r_tilde")
    if m1 < 1 or m2 < 1:
        raise UsageError("m1 and m2 must be >= 1")
    m = m1 * m2
    phi = adversary.phi(m, rng)
    g = sample_gains(model, m, rng)
    jam = (phi == 1) | artificial_noise
    info = (1.0 - gamma) * np.log2(1.0 + power.pt * g.hm / (1.0 + np.where(jam, power.pj * g.hz, 0.0)))
    eaves = np.log2(1.0 + power.pt * g.he)
    heard = phi == 0
    ok_info = info >= r_tilde
    ok_eq = ~heard | (np.maximum(r_tilde - (1.0 - gamma) * eaves, 0.0) >= r_s - r_key)

    bank = KeyBank(m1)
    outage = np.ones(m, dtype=bool)
    balance = np.zeros(m)
    for i in range(m):
        if i >= m1 and gamma < 1.0:
            has_key = bank.withdraw(r_key)
            outage[i] = not (has_key and ok_info[i] and ok_eq[i])
        bank.deposit(r_key)
        if (i + 1) % m1 == 0:
            bank.close_superblock()
        balance[i] = bank.balance

    empty = _groups([])
    return SessionLog(
        r_s, "delay", power, phi, g.hm, g.he, g.hz, info, ~outage,
        np.where(heard, eaves, 0.0), np.full(m, gamma < 1.0), **empty,
        outage=outage, key_balance=balance, init_blocks=m1,
    )


def _open(target):
    # accepts a path or an already open text stream
    if hasattr(target, "write"):
        return contextlib.nullcontext(target)
    return open(target, "w", newline="")


def write_jsonl(log: SessionLog, target) -> None:
    with _open(target) as fh:
        for ev in log.events:
            fh.write(json.dumps(asdict(ev), sort_keys=True) + "\n")


def write_summary_csv(log: SessionLog, target, header: str = "") -> None:
    with _open(target) as fh:
        if header:
            fh.write(header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "r", "blocks", "groups", "empirical_rate", "ci",
                    "conservative_rate", "conservative_ci", "truncations", "outage_frequency"])
        outage = f"{log.outage_frequency()[0]:.10g}" if log.outage is not None else ""
        w.writerow([log.scheme, f"{log.r:.10g}", log.n_blocks, len(log.group_t),
                    f"{log.empirical_rate:.10g}", f"{log.rate_ci():.10g}",
                    f"{log.conservative_rate:.10g}", f"{log.rate_ci(True):.10g}",
                    log.truncations, outage])
