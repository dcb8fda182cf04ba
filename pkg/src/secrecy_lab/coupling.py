"""Minimum of E[(A - B)^+] over couplings of two fixed marginals.

The cost (a - b)^+ is submodular, so pairing equal quantiles (the comonotone
coupling) is optimal.  ``lp_oracle`` solves the transportation problem
directly on finite atoms and is used to check that claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import ConfigurationError, UsageError
from .rng import RngStream

LP_MAX_ATOMS = 64


@dataclass(frozen=True, eq=False)
class EmpiricalDist:
    samples: np.ndarray

    def __post_init__(self):
        if len(self.samples) == 0:
            raise UsageError("empirical distribution needs at least one sample")

    @classmethod
    def from_samples(cls, x) -> "EmpiricalDist":
        return cls(np.sort(np.asarray(x, dtype=float)))

    def __len__(self) -> int:
        return len(self.samples)

    def to_discrete(self) -> "DiscreteDist":
        n = len(self.samples)
        return DiscreteDist(tuple(self.samples.tolist()), (1.0 / n,) * n)


@dataclass(frozen=True)
class DiscreteDist:
    atoms: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.atoms) == 0 or len(self.atoms) != len(self.probs):
            raise ConfigurationError("atoms and probs must be nonempty and of equal length")
        if any(p < 0 for p in self.probs) or abs(math.fsum(self.probs) - 1.0) > 1e-9:
            raise ConfigurationError("probs must be nonnegative and sum to 1")

    @classmethod
    def of(cls, atoms: Sequence[float], probs: Sequence[float] | None = None) -> "DiscreteDist":
        if probs is None:
            probs = [1.0 / len(atoms)] * len(atoms)
        return cls(tuple(map(float, atoms)), tuple(map(float, probs)))


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Joint weights; rows index atoms of A, columns atoms of B."""

    weights: np.ndarray

    def check(self, a: DiscreteDist, b: DiscreteDist, tol: float = 1e-9) -> bool:
        w = self.weights
        return bool(
            np.all(w >= -tol)
            and np.allclose(w.sum(axis=1), a.probs, atol=tol, rtol=0)
            and np.allclose(w.sum(axis=0), b.probs, atol=tol, rtol=0)
        )


def _sorted_values(x) -> np.ndarray:
    if isinstance(x, EmpiricalDist):
        return x.samples
    v = np.sort(np.asarray(x, dtype=float))
    if v.size == 0:
        raise UsageError("empty sample set")
    return v


def align_quantiles(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pair two sorted samples quantile by quantile.

    Returns ``(qa, qb, w)``: on each cell of the merged breakpoint grid
    {i/|a|} U {j/|b|}, the order statistics of ``a`` and ``b`` in force there
    and the cell's probability mass.  Equal sizes give the plain pairing.
    """
    na, nb = len(a), len(b)
    if na == nb:
        return a, b, np.full(na, 1.0 / na)
    # breakpoints in units of 1 / (na * nb), exact in integers
    u = np.union1d(np.arange(1, na + 1, dtype=np.int64) * nb, np.arange(1, nb + 1, dtype=np.int64) * na)
    w = np.diff(u, prepend=0) / (na * nb)
    return a[(u + nb - 1) // nb - 1], b[(u + na - 1) // na - 1], w


def positive_gaps(a, b) -> np.ndarray:
    """Per-quantile (a_(k) - b_(k))^+ under the comonotone pairing of equal-size samples."""
    xa, xb = _sorted_values(a), _sorted_values(b)
    if len(xa) != len(xb):
        raise UsageError("positive_gaps needs equal sample sizes; use min_positive_gap")
    return np.maximum(xa - xb, 0.0)


def comonotone_coupling(a: DiscreteDist, b: DiscreteDist) -> tuple[float, CouplingMatrix]:
    """Exact comonotone value and coupling for finite marginals."""
    oa, ob = np.argsort(a.atoms, kind="stable"), np.argsort(b.atoms, kind="stable")
    xa, pa = np.asarray(a.atoms)[oa], np.asarray(a.probs)[oa]
    xb, pb = np.asarray(b.atoms)[ob], np.asarray(b.probs)[ob]
    w = np.zeros((len(xa), len(xb)))
    i = j = 0
    ra, rb = pa[0], pb[0]
    while i < len(xa) and j < len(xb):
        m = min(ra, rb)
        w[oa[i], ob[j]] += m
        ra -= m
        rb -= m
        # advance whichever side ran out; both may, up to rounding
        if ra <= 1e-15:
            i += 1
            ra = pa[i] if i < len(xa) else 0.0
        if rb <= 1e-15:
            j += 1
            rb = pb[j] if j < len(xb) else 0.0
    cost = np.maximum(np.subtract.outer(np.asarray(a.atoms), np.asarray(b.atoms)), 0.0)
    return float(np.sum(w * cost)), CouplingMatrix(w)


def min_positive_gap(a, b) -> float:
    """min over couplings of E[(A - B)^+], via the comonotone pairing.

    ``a`` and ``b`` may be sorted :class:`EmpiricalDist`, raw sample arrays,
    or :class:`DiscreteDist` marginals (solved exactly).
    """
    if isinstance(a, DiscreteDist) or isinstance(b, DiscreteDist):
        da = a if isinstance(a, DiscreteDist) else EmpiricalDist.from_samples(_sorted_values(a)).to_discrete()
        db = b if isinstance(b, DiscreteDist) else EmpiricalDist.from_samples(_sorted_values(b)).to_discrete()
        return comonotone_coupling(da, db)[0]
    qa, qb, w = align_quantiles(_sorted_values(a), _sorted_values(b))
    return float(np.dot(np.maximum(qa - qb, 0.0), w))


def lp_oracle(a: DiscreteDist, b: DiscreteDist) -> tuple[float, CouplingMatrix]:
    """Exact transportation-problem minimum of sum w_ij (a_i - b_j)^+."""
    for d in (a, b):
        if abs(math.fsum(d.probs) - 1.0) > 1e-9:
            raise ConfigurationError("marginal probabilities must sum to 1")
        if len(d.atoms) > LP_MAX_ATOMS:
            raise UsageError(f"lp_oracle handles at most {LP_MAX_ATOMS} atoms per side")
    na, nb = len(a.atoms), len(b.atoms)
    cost = np.maximum(np.subtract.outer(np.asarray(a.atoms), np.asarray(b.atoms)), 0.0)
    rows = np.kron(np.eye(na), np.ones((1, nb)))
    cols = np.kron(np.ones((1, na)), np.eye(nb))
    res = linprog(
        cost.ravel(),
        A_eq=np.vstack([rows, cols]),
        b_eq=np.concatenate([a.probs, b.probs]),
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"transportation LP failed: {res.message}")
    w = np.clip(res.x.reshape(na, nb), 0.0, None)
    return float(np.sum(w * cost)), CouplingMatrix(w)


@dataclass(frozen=True)
class CouplingSolution:
    value: float
    coupling: CouplingMatrix
    lp_fallback: bool


def solve_coupling(a: DiscreteDist, b: DiscreteDist, tol: float = 1e-9) -> CouplingSolution:
    """Comonotone solution, replaced by the LP optimum (flagged) if the LP beats it."""
    value, w = comonotone_coupling(a, b)
    if len(a.atoms) <= LP_MAX_ATOMS and len(b.atoms) <= LP_MAX_ATOMS:
        lp_value, lp_w = lp_oracle(a, b)
        if lp_value < value - tol:
            return CouplingSolution(lp_value, lp_w, True)
    return CouplingSolution(value, w, False)


def independent_gap(a, b, rng: RngStream | None = None, n_pairs: int | None = None) -> float:
    """E[(A - B)^+] with A and B independent.

    Exact for :class:`DiscreteDist` inputs; otherwise a Monte Carlo average
    over uniformly resampled index pairs.
    """
    if isinstance(a, DiscreteDist) and isinstance(b, DiscreteDist):
        cost = np.maximum(np.subtract.outer(np.asarray(a.atoms), np.asarray(b.atoms)), 0.0)
        return float(np.asarray(a.probs) @ cost @ np.asarray(b.probs))
    xa, xb = _sorted_values(a), _sorted_values(b)
    rng = rng or RngStream(0)
    m = n_pairs or max(len(xa), len(xb), 100_000)
    gen = rng.generator(77)
    i = gen.integers(0, len(xa), m)
    j = gen.integers(0, len(xb), m)
    return float(np.mean(np.maximum(xa[i] - xb[j], 0.0)))
