"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import json
import math
import os
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secrecy_lab.channel import ChannelModel, GainDist, PowerConfig
from secrecy_lab.cli import run
from secrecy_lab.coupling import DiscreteDist, comonotone_coupling, lp_oracle
from secrecy_lab.delay import DelayConfig, maximize_outage_rate
from secrecy_lab.feedback import maximize_rate, rate_at, simulate_renewals, upper_bound_1bit, one_bit_lower_bound
from secrecy_lab.multi import (
    MultiModel, lower_colluding, lower_noncolluding, upper_colluding, upper_noncolluding,
)
from secrecy_lab.nofeedback import PowerLaw, dkw_epsilon, lower_bound, power_scaling_sweep, upper_bound
from secrecy_lab.protocol import AdversaryStrategy, run_arq_session
from secrecy_lab.rng import RngStream

from conftest import ACCEPTANCE_LINES, arq_success_prob_exp, model_5_2_2, model_1_2_1, point_model

PT_GRID = [0.5, 1, 2, 5, 10, 20, 50, 100]


def report(tag: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {tag}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_dominated_eavesdropper_regime():
    t0 = time.perf_counter()
    m, n = model_1_2_1(), 10**6
    worst_lower, worst_upper = 0.0, 0.0
    for pt in PT_GRID:
        p = PowerConfig(pt, 1.0)
        worst_lower = max(worst_lower, lower_bound(m, p, n, RngStream(1)).value)
        worst_upper = max(worst_upper, upper_bound(m, p, n, RngStream(1)).value)
    _, mrc = maximize_rate(m, PowerConfig(10, 1), "mrc", n_renewals=100_000, rng=RngStream(1))
    elapsed = time.perf_counter() - t0
    ok = worst_lower == 0.0 and worst_upper <= 0.02 and mrc.ci_low > 0 and elapsed <= 120
    report("1", ok, f"max lower={worst_lower}, max upper={worst_upper:.4g}, "
                    f"MRC={mrc.value:.4f}+-{mrc.ci_halfwidth:.4f}, {elapsed:.1f}s")


def test_criterion_2_feedback_gain_and_nonmonotone():
    m, n = model_5_2_2(), 10**6
    p10 = PowerConfig(10, 1)
    c_minus = lower_bound(m, p10, n, RngStream(2))
    one_bit = one_bit_lower_bound(m, p10, n, RngStream(2), n_renewals=100_000)
    ratio = one_bit.value / c_minus.value if c_minus.value > 0 else math.inf
    lows = [lower_bound(m, PowerConfig(pt, 1), n, RngStream(2)) for pt in PT_GRID]
    drop = any(a.value > b.value + 2 * (a.ci_halfwidth + b.ci_halfwidth)
               for i, a in enumerate(lows) for b in lows[i + 1:])
    ok = 1.5 <= ratio <= 2.5 and drop
    report("2", ok, f"C-={c_minus.value:.4f}, 1-bit={one_bit.value:.4f}, ratio={ratio:.2f} "
                    f"(want [1.5, 2.5]); non-monotone={drop} "
                    f"(series {[round(e.value, 4) for e in lows]})")


def test_criterion_3_joint_power_sweep():
    pts = power_scaling_sweep(model_1_2_1(), PowerLaw(1), PowerLaw(1), [1, 10, 100, 1000, 10000],
                              10**6, RngStream(3), kind="upper")
    v = [p.estimate.value for p in pts]
    tail = v[1:]
    decreasing = all(b < a for a, b in zip(tail, tail[1:]))
    ok = decreasing and v[-1] < 0.5 * max(v)
    report("3", ok, f"upper series {v} (strictly decreasing for P>=10: {decreasing})")


def test_criterion_4_coupling_oracle():
    t0 = time.perf_counter()
    gen = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        ka, kb = gen.integers(1, 9, 2)
        a = DiscreteDist.of(gen.normal(size=ka) * 3, gen.dirichlet(np.ones(ka)))
        b = DiscreteDist.of(gen.normal(size=kb) * 3, gen.dirichlet(np.ones(kb)))
        worst = max(worst, abs(comonotone_coupling(a, b)[0] - lp_oracle(a, b)[0]))
    elapsed = time.perf_counter() - t0
    report("4", worst <= 1e-9 and elapsed <= 10, f"max |quantile - LP| = {worst:.2e}, {elapsed:.2f}s")


def test_criterion_5_renewal_identities():
    m, p, r = model_1_2_1(), PowerConfig(10, 1), 2.0
    q = arq_success_prob_exp(1, 1, 10, 1, r)
    b = simulate_renewals(m, p, r, "plain_arq", 100_000, rng=RngStream(5))
    t = np.arange(1, b.t.max() + 1)
    emp = np.bincount(b.t, minlength=t.max() + 1)[1:] / len(b)
    geo = q * (1 - q) ** (t - 1)
    tv = 0.5 * (np.abs(emp - geo).sum() + (1 - geo.sum()))

    r_b = 2.69
    ref = rate_at(m, p, r_b, "mrc", 100_000, rng=RngStream(6))
    log = run_arq_session(m, p, r_b, "mrc", AdversaryStrategy("always_eavesdrop"), 10**6, RngStream(7))
    sim, sim_ci = log.empirical_rate, log.rate_ci()
    agree = abs(sim - ref.value) <= 2 * (sim_ci + ref.ci_halfwidth)

    half = ChannelModel(GainDist.discrete([0, 3], [0.5, 0.5]), GainDist.point(0), GainDist.point(0))
    c = rate_at(half, PowerConfig(1, 0), 2.0, "mrc", 100_000, rng=RngStream(8))
    ok = tv < 0.01 and agree and abs(c.value - 1.0) <= 0.02
    report("5", ok, f"(a) TV={tv:.4f}; (b) session {sim:.4f}+-{sim_ci:.4f} vs renewal "
                    f"{ref.value:.4f}+-{ref.ci_halfwidth:.4f}; (c) rate={c.value:.4f}")


def test_criterion_6_tightness():
    m, p = point_model(4, 1, 0), PowerConfig(1)
    lo, up = lower_bound(m, p, 1000, RngStream(0)).value, upper_bound(m, p, 1000, RngStream(0)).value
    target = math.log2(2.5)
    report("6", abs(lo - target) <= 1e-9 and abs(up - target) <= 1e-9, f"lower={lo!r}, upper={up!r}")


def test_criterion_7_ordering():
    n = 200_000
    checks = {}
    for name, m in (("fig1", model_5_2_2()), ("fig2", model_1_2_1())):
        p = PowerConfig(10, 1)
        lo, up = lower_bound(m, p, n, RngStream(9)), upper_bound(m, p, n, RngStream(9))
        checks[f"{name} C- <= C+"] = lo.value <= up.value + 2 * dkw_epsilon(n) + lo.ci_halfwidth
        _, arq = maximize_rate(m, p, "plain_arq", n_renewals=50_000, rng=RngStream(9))
        _, mrc = maximize_rate(m, p, "mrc", n_renewals=50_000, rng=RngStream(9))
        up1 = upper_bound_1bit(m, p, n, RngStream(9))
        checks[f"{name} ARQ <= MRC"] = arq.value <= mrc.value + 2 * (arq.ci_halfwidth + mrc.ci_halfwidth)
        checks[f"{name} MRC <= 1-bit upper"] = mrc.value <= up1.value + 2 * (mrc.ci_halfwidth + up1.ci_halfwidth)
    mm = MultiModel(GainDist.exponential(5), (GainDist.exponential(1), GainDist.exponential(0.5)),
                    (GainDist.exponential(2), GainDist.exponential(1)))
    p = PowerConfig(10, 1)
    checks["colluding <= non-colluding (lower)"] = (
        lower_colluding(mm, p, n, RngStream(10)).estimate.value
        <= lower_noncolluding(mm, p, n, RngStream(10)).estimate.value)
    checks["colluding <= non-colluding (upper)"] = (
        upper_colluding(mm, p, n, RngStream(10)).estimate.value
        <= upper_noncolluding(mm, p, n, RngStream(10)).estimate.value)
    single = model_5_2_2()
    s1 = MultiModel.from_single(single)
    checks["S=1 bit-identical"] = all(
        f(s1, p, n, RngStream(11)).estimate == g(single, p, n, RngStream(11))
        for f, g in ((lower_noncolluding, lower_bound), (upper_noncolluding, upper_bound),
                     (lower_colluding, lower_bound), (upper_colluding, upper_bound)))
    failed = [k for k, v in checks.items() if not v]
    report("7", not failed, f"{len(checks) - len(failed)}/{len(checks)} orderings hold" +
           (f"; failed: {failed}" if failed else ""))


def test_criterion_8_delay_limited():
    n = 200_000
    zero = maximize_outage_rate(model_5_2_2(), PowerConfig(10, 1), DelayConfig(0.0), n, RngStream(12)).r_s
    d = ChannelModel(GainDist.discrete([0, 3], [0.1, 0.9]), GainDist.point(0), GainDist.point(0))
    exact = maximize_outage_rate(d, PowerConfig(1), DelayConfig(0.2), n, RngStream(12)).r_s
    m, p = model_5_2_2(), PowerConfig(10, 1)
    base = lower_bound(m, p, n, RngStream(12)).value
    series = [maximize_outage_rate(m, p, DelayConfig(a), n, RngStream(12), key_base=base).r_s
              for a in (0.05, 0.1, 0.2, 0.4)]
    monotone = all(b >= a for a, b in zip(series, series[1:]))
    ok = zero == 0.0 and exact == 2.0 and series[2] > 0 and monotone
    report("8", ok, f"alpha=0 -> {zero}; discrete -> {exact!r}; 5/2/2 series {np.round(series, 5).tolist()}")


CLI_CASES = {
    "bounds": ["--model", "fig1.json", "--pt", "1", "10", "--samples", "200000"],
    "sweep": ["--model", "fig2.json", "--samples", "200000"],
    "dominance": ["--model", "fig2.json", "--pt", "1", "10", "--samples", "200000"],
    "feedback": ["--model", "fig2.json", "--pt", "10", "--schemes", "mrc", "main_csi",
                 "--renewals", "20000", "--samples", "100000"],
    "multi": ["--model", "multi.json", "--pt", "10", "--samples", "100000"],
    "delay": ["--model", "fig1.json", "--pt", "10", "--alpha", "0.1", "0.2", "--samples", "100000"],
    "simulate": ["--model", "fig2.json", "--pt", "10", "--r", "2.5", "--blocks", "100000",
                 "--events", "events.jsonl"],
    "figures": ["--pt", "1", "10", "--p", "1", "10", "--samples", "20000", "--renewals", "5000", "--outdir", "."],
}


def _run_in(tmp_path, sub, cmd, threads, monkeypatch):
    d = tmp_path / f"{sub}_{cmd}_{threads}"
    d.mkdir()
    (d / "fig1.json").write_text(json.dumps(model_5_2_2().to_json()))
    (d / "fig2.json").write_text(json.dumps(model_1_2_1().to_json()))
    (d / "multi.json").write_text(json.dumps({
        "hm": {"exp": 5.0}, "he_list": [{"exp": 2.0}, {"exp": 1.0}], "hz_list": [{"exp": 2.0}, {"exp": 1.0}]}))
    monkeypatch.chdir(d)
    argv = [cmd, *CLI_CASES[cmd], "--seed", "2024", "--threads", str(threads)]
    if cmd != "figures":
        argv += ["--out", "out.csv"]
    code = run(argv)
    inputs = {"fig1.json", "fig2.json", "multi.json"}
    return code, {f.name: f.read_bytes() for f in sorted(d.iterdir()) if f.name not in inputs}


def test_criterion_9_cli_determinism(tmp_path, monkeypatch):
    bad = []
    for cmd in CLI_CASES:
        runs = [_run_in(tmp_path, i, cmd, th, monkeypatch) for i, th in enumerate((1, 4, 1))]
        codes = {c for c, _ in runs}
        outputs = [o for _, o in runs]
        if codes != {0} or not outputs[0] or any(o != outputs[0] for o in outputs[1:]):
            bad.append(cmd)
    report("9", not bad, f"{len(CLI_CASES) - len(bad)}/{len(CLI_CASES)} subcommands byte-identical "
                         f"across --threads 1/4 and repeated runs" + (f"; differing: {bad}" if bad else ""))
