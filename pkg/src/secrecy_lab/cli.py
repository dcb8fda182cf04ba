"""Command line front end: bounds, feedback rates, sessions and figure data.

Configuration precedence, lowest to highest: built-in defaults, the JSON
object given by ``--config``, then explicit flags.  Every output file starts
with a ``#`` line holding the resolved configuration and seed.

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from . import delay, feedback, multi, nofeedback, protocol
from .channel import ChannelModel, PowerConfig
from .errors import ConfigurationError
from .rng import RngStream, default_seed, set_threads

FIG1_MODEL = {"hm": {"exp": 5.0}, "he": {"exp": 2.0}, "hz": {"exp": 2.0}}
FIG2_MODEL = {"hm": {"exp": 1.0}, "he": {"exp": 2.0}, "hz": {"exp": 1.0}}
PT_GRID = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
P_GRID = [1.0, 10.0, 100.0, 1000.0, 10000.0]
MULTI_KINDS = ["lower_noncolluding", "upper_noncolluding", "lower_colluding", "upper_colluding"]

_floats = lambda v: [float(x) for x in (v if isinstance(v, list) else [v])]
_strs = lambda v: [str(x) for x in (v if isinstance(v, list) else [v])]
_opt_float = lambda v: None if v is None else float(v)
_opt_int = lambda v: None if v is None else int(v)
_opt_str = lambda v: None if v is None else str(v)


def _bool(v):
    if isinstance(v, bool):
        return v
    raise ConfigurationError(f"expected true/false, got {v!r}")


def _model(v):
    return v


_COMMON = {"model": (_model, None), "seed": (int, None), "samples": (int, 100_000)}
_POWER = {"pt": (_floats, [10.0]), "pj": (float, 1.0)}

# key -> (coercion, default)
SCHEMAS = {
    "bounds": {**_COMMON, **_POWER, "kinds": (_strs, ["lower", "upper"])},
    "sweep": {
        **_COMMON, "p": (_floats, P_GRID), "pt_coef": (float, 1.0), "pt_exp": (float, 1.0),
        "pj_coef": (float, 1.0), "pj_exp": (float, 1.0), "kinds": (_strs, ["lower", "upper"]),
    },
    "dominance": {**_COMMON, **_POWER},
    "feedback": {
        **_COMMON, **_POWER, "schemes": (_strs, ["mrc"]), "r": (_opt_float, None),
        "renewals": (int, 100_000), "t_max": (int, feedback.DEFAULT_T_MAX),
        "grid_points": (int, 64), "refine_iters": (int, 20),
    },
    "multi": {**_COMMON, **_POWER, "kinds": (_strs, MULTI_KINDS)},
    "delay": {
        **_COMMON, **_POWER, "alpha": (_floats, [0.2]), "key_mode": (str, "no_feedback"),
        "renewals": (int, 100_000), "gamma_step": (float, 0.05), "rate_points": (int, 64),
    },
    "simulate": {
        **_COMMON, **_POWER, "mode": (str, "arq"), "scheme": (str, "mrc"), "r": (_opt_float, None),
        "adversary": (str, "bernoulli"), "q": (float, 0.5), "jam_every": (int, 2),
        "trace": (_opt_str, None), "blocks": (int, 100_000), "t_max": (_opt_int, None),
        "physical_rate": (_bool, False), "gamma": (float, 0.0), "r_tilde": (_opt_float, None),
        "r_s": (_opt_float, None), "r_key": (float, 0.0), "m1": (int, 100), "m2": (int, 100),
        "events": (_opt_str, None),
    },
    "figures": {
        "seed": (int, None), "samples": (int, 100_000), "renewals": (int, 20_000),
        "pt": (_floats, PT_GRID), "p": (_floats, P_GRID), "outdir": (str, "."),
    },
}


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


class _Table:
    def __init__(self, header: str, columns: list[str]):
        self.buf = io.StringIO()
        self.buf.write(header)
        self.buf.write(",".join(columns) + "\n")

    def row(self, *values) -> None:
        self.buf.write(",".join(_fmt(v) for v in values) + "\n")

    def text(self) -> str:
        return self.buf.getvalue()


def resolve(command: str, file_cfg: dict, flags: dict) -> dict:
    """Merge defaults, config file and flags, then coerce against the schema."""
    schema = SCHEMAS[command]
    unknown = sorted(set(file_cfg) - set(schema))
    if unknown:
        raise ConfigurationError(f"unknown config keys for {command}: {unknown}")
    raw = {k: d for k, (_, d) in schema.items()}
    raw.update(file_cfg)
    raw.update({k: v for k, v in flags.items() if k in schema})
    cfg = {}
    for k, (coerce, _) in schema.items():
        try:
            cfg[k] = raw[k] if raw[k] is None and coerce is not _floats else coerce(raw[k])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad value for {k!r}: {raw[k]!r}") from exc
    if cfg.get("seed") is None:
        cfg["seed"] = default_seed()
    if "samples" in cfg and cfg["samples"] < 1:
        raise ConfigurationError("samples must be >= 1")
    if "model" in cfg:
        cfg["model"] = _load_model_json(cfg["model"], command)
    return cfg


def _load_model_json(v, command: str) -> dict:
    if v is None:
        raise ConfigurationError(f"{command} needs --model or a 'model' config entry")
    if isinstance(v, str):
        try:
            with open(v) as fh:
                v = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read model file {v}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(v, dict):
        raise ConfigurationError("model must be a JSON object or a path to one")
    # round trip through the model classes to validate and normalize
    if command == "multi":
        return multi.MultiModel.from_json(v).to_json()
    return ChannelModel.from_json(v).to_json()


def header_line(command: str, cfg: dict) -> str:
    return f"# secrecy_lab {command} " + json.dumps(cfg, sort_keys=True, separators=(",", ":")) + "\n"


def _power(pt: float, pj: float) -> PowerConfig:
    return PowerConfig(pt, pj)


def cmd_bounds(cfg: dict) -> str:
    model = ChannelModel.from_json(cfg["model"])
    rng = RngStream(cfg["seed"])
    n = cfg["samples"]
    fns = {"lower": nofeedback.lower_bound, "upper": nofeedback.upper_bound,
           "lower_no_jammer_csi": nofeedback.lower_bound_no_jammer_csi}
    bad = [k for k in cfg["kinds"] if k not in fns]
    if bad:
        raise ConfigurationError(f"unknown bound kinds {bad}")
    powers = [_power(pt, cfg["pj"]) for pt in cfg["pt"]]
    t = _Table(header_line("bounds", cfg), ["p", "pt", "pj", "bound_kind", "value_bits", "ci", "n_samples", "seed"])
    for pw in powers:
        for kind in cfg["kinds"]:
            est = fns[kind](model, pw, n, rng)
            t.row(pw.pt, pw.pt, pw.pj, kind, est.value, est.ci_halfwidth, est.n_samples, cfg["seed"])
    return t.text()


def cmd_sweep(cfg: dict) -> str:
    model = ChannelModel.from_json(cfg["model"])
    rng = RngStream(cfg["seed"])
    pt_of, pj_of = nofeedback.PowerLaw(cfg["pt_coef"], cfg["pt_exp"]), nofeedback.PowerLaw(cfg["pj_coef"], cfg["pj_exp"])
    bad = [k for k in cfg["kinds"] if k not in ("lower", "upper")]
    if bad:
        raise ConfigurationError(f"unknown bound kinds {bad}")
    t = _Table(header_line("sweep", cfg), ["p", "pt", "pj", "bound_kind", "value_bits", "ci", "n_samples", "seed"])
    for kind in cfg["kinds"]:
        for pt in nofeedback.power_scaling_sweep(model, pt_of, pj_of, cfg["p"], cfg["samples"], rng, kind):
            e = pt.estimate
            t.row(pt.p, pt.power.pt, pt.power.pj, kind, e.value, e.ci_halfwidth, e.n_samples, cfg["seed"])
    return t.text()


def cmd_dominance(cfg: dict) -> str:
    model = ChannelModel.from_json(cfg["model"])
    rng = RngStream(cfg["seed"])
    n = cfg["samples"]
    t = _Table(header_line("dominance", cfg), ["pt", "pj", "dominated", "max_cdf_gap", "dkw_epsilon", "n_samples", "seed"])
    for pt in cfg["pt"]:
        d = nofeedback.dominance_check(model, _power(pt, cfg["pj"]), n, rng)
        t.row(pt, cfg["pj"], d.dominated, d.max_cdf_gap, nofeedback.dkw_epsilon(n), n, cfg["seed"])
    return t.text()


def cmd_feedback(cfg: dict) -> str:
    model = ChannelModel.from_json(cfg["model"])
    rng = RngStream(cfg["seed"])
    bad = [s for s in cfg["schemes"] if s not in feedback.SCHEMES]
    if bad:
        raise ConfigurationError(f"unknown schemes {bad}")
    search = feedback.RateSearch(None, cfg["grid_points"], cfg["refine_iters"])
    t = _Table(header_line("feedback", cfg),
               ["pt", "scheme", "r", "value_bits", "ci", "mean_T", "truncation_fraction", "seed"])
    for pt in cfg["pt"]:
        pw = _power(pt, cfg["pj"])
        for scheme in cfg["schemes"]:
            if cfg["r"] is None:
                r, est = feedback.maximize_rate(model, pw, scheme, search, cfg["renewals"], rng, cfg["t_max"])
            else:
                r = cfg["r"]
                est = feedback.rate_at(model, pw, r, scheme, cfg["renewals"], cfg["t_max"], rng)
            t.row(pt, scheme, r, est.value, est.ci_halfwidth, est.mean_t, est.truncation_fraction, cfg["seed"])
        up = feedback.upper_bound_1bit(model, pw, cfg["samples"], rng)
        t.row(pt, "upper_1bit", None, up.value, up.ci_halfwidth, None, None, cfg["seed"])
    return t.text()


def cmd_multi(cfg: dict) -> str:
    mm = multi.MultiModel.from_json(cfg["model"])
    rng = RngStream(cfg["seed"])
    fns = {k: getattr(multi, k) for k in MULTI_KINDS}
    bad = [k for k in cfg["kinds"] if k not in fns]
    if bad:
        raise ConfigurationError(f"unknown bound kinds {bad}")
    t = _Table(header_line("multi", cfg),
               ["p", "pt", "pj", "bound_kind", "value_bits", "ci", "n_samples", "seed", "s_argmin"])
    for pt in cfg["pt"]:
        pw = _power(pt, cfg["pj"])
        for kind in cfg["kinds"]:
            b = fns[kind](mm, pw, cfg["samples"], rng)
            e = b.estimate
            t.row(pt, pt, pw.pj, kind, e.value, e.ci_halfwidth, e.n_samples, cfg["seed"], b.s_argmin)
    return t.text()


def _gamma_grid(step: float) -> tuple[float, ...]:
    if not 0 < step <= 1:
        raise ConfigurationError("gamma_step must lie in (0, 1]")
    k = int(round(1.0 / step))
    return tuple(round(min(i * step, 1.0), 12) for i in range(k + 1))


def cmd_delay(cfg: dict) -> str:
    model = ChannelModel.from_json(cfg["model"])
    rng = RngStream(cfg["seed"])
    gammas = _gamma_grid(cfg["gamma_step"])
    t = _Table(header_line("delay", cfg),
               ["pt", "alpha", "gamma", "r_tilde", "r_s", "r_key", "p_success", "feasible", "seed"])
    for pt in cfg["pt"]:
        pw = _power(pt, cfg["pj"])
        # key generation rate does not depend on alpha
        base = delay._key_base(model, pw, cfg["key_mode"], cfg["samples"], rng, cfg["renewals"]) \
            if cfg["key_mode"] in delay.KEY_MODES else None
        for alpha in cfg["alpha"]:
            dc = delay.DelayConfig(alpha, gammas, cfg["rate_points"], cfg["key_mode"])
            o = delay.maximize_outage_rate(model, pw, dc, cfg["samples"], rng, cfg["renewals"], key_base=base)
            p = o.success.p_success if o.success else None
            t.row(pt, alpha, o.gamma, o.r_tilde, o.r_s, o.r_key, p, o.success is not None, cfg["seed"])
    return t.text()


def _adversary(cfg: dict) -> protocol.AdversaryStrategy:
    kind = cfg["adversary"]
    if kind == "bernoulli":
        return protocol.AdversaryStrategy.bernoulli(cfg["q"])
    if kind == "periodic":
        return protocol.AdversaryStrategy.periodic(cfg["jam_every"])
    if kind == "explicit":
        if cfg["trace"] is None:
            raise ConfigurationError("explicit adversary needs --trace FILE")
        return protocol.AdversaryStrategy.from_file(cfg["trace"])
    return protocol.AdversaryStrategy(kind)


def cmd_simulate(cfg: dict) -> tuple[str, dict]:
    model = ChannelModel.from_json(cfg["model"])
    rng = RngStream(cfg["seed"])
    if len(cfg["pt"]) != 1:
        raise ConfigurationError("simulate takes a single --pt value")
    pw = _power(cfg["pt"][0], cfg["pj"])
    adv = _adversary(cfg)
    if cfg["mode"] == "arq":
        if cfg["r"] is None:
            raise ConfigurationError("arq simulation needs --r")
        log = protocol.run_arq_session(model, pw, cfg["r"], cfg["scheme"], adv, cfg["blocks"], rng,
                                       cfg["t_max"], artificial_noise=not cfg["physical_rate"])
    elif cfg["mode"] == "delay":
        if cfg["r_tilde"] is None or cfg["r_s"] is None:
            raise ConfigurationError("delay simulation needs --r-tilde and --r-s")
        log = protocol.run_delay_session(model, pw, cfg["gamma"], cfg["r_tilde"], cfg["r_s"], cfg["r_key"],
                                         adv, cfg["m1"], cfg["m2"], rng,
                                         artificial_noise=not cfg["physical_rate"])
    else:
        raise ConfigurationError("mode must be 'arq' or 'delay'")
    buf = io.StringIO()
    protocol.write_summary_csv(log, buf, header_line("simulate", cfg))
    extra = {}
    if cfg["events"]:
        ev = io.StringIO()
        protocol.write_jsonl(log, ev)
        extra[cfg["events"]] = ev.getvalue()
    return buf.getvalue(), extra


def _figure_rows(t: _Table, x: float, series: str, est) -> None:
    t.row(x, series, est.value, est.ci_halfwidth)


def cmd_figures(cfg: dict) -> dict:
    rng = RngStream(cfg["seed"])
    n, nr = cfg["samples"], cfg["renewals"]
    cols = ["x", "series", "value_bits", "ci"]
    files = {}
    for name, model_json in (("fig1", FIG1_MODEL), ("fig2", FIG2_MODEL)):
        model = ChannelModel.from_json(model_json)
        t = _Table(header_line("figures", {**cfg, "figure": name, "model": model_json, "pj": 1.0}), cols)
        for pt in cfg["pt"]:
            pw = _power(pt, 1.0)
            low = nofeedback.lower_bound(model, pw, n, rng)
            _figure_rows(t, pt, "lower_nofeedback", low)
            _figure_rows(t, pt, "upper_nofeedback", nofeedback.upper_bound(model, pw, n, rng))
            _, rate = feedback.maximize_rate(model, pw, "mrc", n_renewals=nr, rng=rng)
            one_bit = rate if rate.value > low.value else low
            _figure_rows(t, pt, "lower_1bit_mrc", one_bit)
            _figure_rows(t, pt, "upper_1bit", feedback.upper_bound_1bit(model, pw, n, rng))
            if name == "fig1":
                for series, base in (("outage_nofeedback", low.value), ("outage_1bit", one_bit.value)):
                    o = delay.maximize_outage_rate(model, pw, delay.DelayConfig(0.2), n, rng, key_base=base)
                    _figure_rows(t, pt, series, o.value)
        files[name + ".csv"] = t.text()
    model = ChannelModel.from_json(FIG2_MODEL)
    t = _Table(header_line("figures", {**cfg, "figure": "fig3", "model": FIG2_MODEL}), cols)
    law = nofeedback.PowerLaw(1.0, 1.0)
    for kind in ("lower", "upper"):
        for pt in nofeedback.power_scaling_sweep(model, law, law, cfg["p"], n, rng, kind):
            _figure_rows(t, pt.p, f"{kind}_nofeedback", pt.estimate)
    files["fig3.csv"] = t.text()
    return files


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="secrecy_lab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(sp, model=True, power=True):
        sp.add_argument("--config", default=None, help="JSON object with defaults; flags override it")
        if model:
            sp.add_argument("--model", default=S, help="model JSON file")
        if power:
            sp.add_argument("--pt", type=float, nargs="+", default=S, help="transmit power(s)")
            sp.add_argument("--pj", type=float, default=S, help="jamming power")
        sp.add_argument("--samples", type=int, default=S, help="Monte Carlo sample count")
        sp.add_argument("--seed", type=int, default=S, help="RNG seed (default: $SECRECY_LAB_SEED or 0)")
        sp.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
        sp.add_argument("--out", default=None, help="output CSV (default: stdout)")

    sp = sub.add_parser("bounds", help="no-feedback lower/upper bounds")
    common(sp)
    sp.add_argument("--kinds", nargs="+", default=S)

    sp = sub.add_parser("sweep", help="bounds along Pt = a P^x, Pj = b P^y")
    common(sp, power=False)
    sp.add_argument("--p", type=float, nargs="+", default=S)
    for k in ("pt_coef", "pt_exp", "pj_coef", "pj_exp"):
        sp.add_argument("--" + k.replace("_", "-"), dest=k, type=float, default=S)
    sp.add_argument("--kinds", nargs="+", default=S)

    sp = sub.add_parser("dominance", help="test whether He dominates Hm/(1+Pj Hz)")
    common(sp)

    sp = sub.add_parser("feedback", help="1-bit feedback renewal rates")
    common(sp)
    sp.add_argument("--schemes", nargs="+", default=S, choices=feedback.SCHEMES)
    sp.add_argument("--r", type=float, default=S, help="fixed threshold; omit to optimize")
    sp.add_argument("--renewals", type=int, default=S)
    sp.add_argument("--t-max", dest="t_max", type=int, default=S)
    sp.add_argument("--grid-points", dest="grid_points", type=int, default=S)
    sp.add_argument("--refine-iters", dest="refine_iters", type=int, default=S)

    sp = sub.add_parser("multi", help="bounds with several adversaries")
    common(sp)
    sp.add_argument("--kinds", nargs="+", default=S, choices=MULTI_KINDS)

    sp = sub.add_parser("delay", help="alpha-outage time-sharing lower bound")
    common(sp)
    sp.add_argument("--alpha", type=float, nargs="+", default=S)
    sp.add_argument("--key-mode", dest="key_mode", default=S, choices=delay.KEY_MODES)
    sp.add_argument("--renewals", type=int, default=S)
    sp.add_argument("--gamma-step", dest="gamma_step", type=float, default=S)
    sp.add_argument("--rate-points", dest="rate_points", type=int, default=S)

    sp = sub.add_parser("simulate", help="block-level protocol session")
    common(sp)
    sp.add_argument("--mode", default=S, choices=("arq", "delay"))
    sp.add_argument("--scheme", default=S, choices=feedback.SCHEMES)
    sp.add_argument("--r", type=float, default=S)
    sp.add_argument("--adversary", default=S, choices=protocol.ADVERSARY_KINDS)
    sp.add_argument("--q", type=float, default=S, help="bernoulli jamming probability")
    sp.add_argument("--jam-every", dest="jam_every", type=int, default=S)
    sp.add_argument("--trace", default=S, help="file of 0/1 jamming indicators")
    sp.add_argument("--blocks", type=int, default=S)
    sp.add_argument("--t-max", dest="t_max", type=int, default=S)
    sp.add_argument("--physical-rate", dest="physical_rate", action="store_true", default=S,
                    help="decode eavesdropping blocks at the unjammed rate")
    sp.add_argument("--gamma", type=float, default=S)
    sp.add_argument("--r-tilde", dest="r_tilde", type=float, default=S)
    sp.add_argument("--r-s", dest="r_s", type=float, default=S)
    sp.add_argument("--r-key", dest="r_key", type=float, default=S)
    sp.add_argument("--m1", type=int, default=S)
    sp.add_argument("--m2", type=int, default=S)
    sp.add_argument("--events", default=S, help="JSON-lines block log")

    sp = sub.add_parser("figures", help="write fig1.csv, fig2.csv, fig3.csv")
    common(sp, model=False, power=False)
    sp.add_argument("--pt", type=float, nargs="+", default=S, help="Pt grid for fig1/fig2 (Pj = 1)")
    sp.add_argument("--p", type=float, nargs="+", default=S, help="P grid for fig3 (Pt = Pj = P)")
    sp.add_argument("--renewals", type=int, default=S)
    sp.add_argument("--outdir", default=S)
    return p


COMMANDS = {
    "bounds": cmd_bounds, "sweep": cmd_sweep, "dominance": cmd_dominance, "feedback": cmd_feedback,
    "multi": cmd_multi, "delay": cmd_delay, "simulate": cmd_simulate, "figures": cmd_figures,
}


def _write(path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = vars(ns).copy()
    command, out, threads, config_path = (flags.pop(k) for k in ("command", "out", "threads", "config"))
    try:
        set_threads(threads)
        file_cfg = {}
        if config_path:
            with open(config_path) as fh:
                file_cfg = json.load(fh)
            if not isinstance(file_cfg, dict):
                raise ConfigurationError("--config must hold a JSON object")
        cfg = resolve(command, file_cfg, flags)
        result = COMMANDS[command](cfg)
    except (ValueError, OSError) as exc:
        # ConfigurationError and UsageError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    try:
        if command == "figures":
            outdir = Path(cfg["outdir"])
            outdir.mkdir(parents=True, exist_ok=True)
            for name, text in result.items():
                _write(outdir / name, text)
            return 0
        extra = {}
        if command == "simulate":
            result, extra = result
        if out:
            _write(out, result)
        else:
            sys.stdout.write(result)
        for path, text in extra.items():
            _write(path, text)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
