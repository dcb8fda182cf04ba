import itertools
import math

import numpy as np
import pytest

from secrecy_lab.channel import ChannelModel, GainDist
from secrecy_lab.rng import set_threads

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def _single_thread():
    set_threads(1)
    yield
    set_threads(1)


def model_5_2_2():
    return ChannelModel.exponential(5.0, 2.0, 2.0)


def model_1_2_1():
    return ChannelModel.exponential(1.0, 2.0, 1.0)


def point_model(hm, he, hz):
    return ChannelModel(GainDist.point(hm), GainDist.point(he), GainDist.point(hz))


def atoms_of(d: GainDist):
    if d.family == "point":
        return [(d.value, 1.0)]
    return list(zip(d.atoms, d.probs))


def enumerate_rates(model: ChannelModel, pt: float, pj: float):
    """Exact joint law of (main rate, eavesdropper rate) for discrete models."""
    out = []
    for (hm, p1), (he, p2), (hz, p3) in itertools.product(*(atoms_of(d) for d in (model.hm, model.he, model.hz))):
        a = math.log2(1 + pt * hm / (1 + pj * hz))
        b = math.log2(1 + pt * he)
        out.append((a, b, p1 * p2 * p3))
    return out


def exact_lower(model, pt, pj):
    return max(sum(p * (a - b) for a, b, p in enumerate_rates(model, pt, pj)), 0.0)


def arq_success_prob_exp(mean_hm, mean_hz, pt, pj, r):
    """P(log2(1 + pt hm / (1 + pj hz)) >= r) for independent exponential gains."""
    s = 2.0 ** r - 1.0
    return math.exp(-s / (pt * mean_hm)) / (1.0 + s * pj * mean_hz / (pt * mean_hm))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
