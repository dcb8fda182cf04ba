import json

import pytest

from secrecy_lab.cli import run

DOMINATED = {"hm": {"exp": 1.0}, "he": {"exp": 2.0}, "hz": {"exp": 1.0}}


@pytest.fixture
def model_path(tmp_path):
    p = tmp_path / "dominated.json"
    p.write_text(json.dumps(DOMINATED))
    return p


def _rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# secrecy_lab ")
    head = lines[1].split(",")
    return [dict(zip(head, l.split(","))) for l in lines[2:]]


def test_bounds_dominated_model(tmp_path, model_path):
    out = tmp_path / "b.csv"
    assert run(["bounds", "--model", str(model_path), "--pt", "10", "--pj", "1",
                "--samples", "200000", "--seed", "42", "--out", str(out)]) == 0
    rows = _rows(out)
    assert [r["bound_kind"] for r in rows] == ["lower", "upper"]
    assert float(rows[0]["value_bits"]) == 0.0 and float(rows[1]["value_bits"]) < 0.01


def test_header_reproduces_run(tmp_path, model_path):
    out = tmp_path / "b.csv"
    run(["bounds", "--model", str(model_path), "--pt", "3", "--samples", "1000", "--seed", "5", "--out", str(out)])
    cfg = json.loads(out.read_text().splitlines()[0].split(" ", 3)[3])
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    again = tmp_path / "again.csv"
    assert run(["bounds", "--config", str(cfg_path), "--out", str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


def test_flags_override_config(tmp_path, model_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"model": str(model_path), "pt": [1.0], "samples": 500, "seed": 1}))
    out = tmp_path / "o.csv"
    assert run(["bounds", "--config", str(cfg_path), "--pt", "7", "--out", str(out)]) == 0
    assert {r["pt"] for r in _rows(out)} == {"7"}


def test_invalid_power_exit_2(tmp_path, model_path):
    out = tmp_path / "o.csv"
    assert run(["bounds", "--model", str(model_path), "--pt", "-1", "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    ["bounds", "--bogus"],
    ["bounds"],
    ["nosuch"],
    ["feedback", "--schemes", "harq"],
])
def test_usage_errors_exit_2(argv, model_path):
    assert run(argv) == 2


def test_unknown_config_key(tmp_path, model_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"model": str(model_path), "colour": "red"}))
    assert run(["bounds", "--config", str(cfg_path)]) == 2


def test_runtime_error_exit_1(tmp_path, model_path):
    assert run(["bounds", "--model", str(model_path), "--samples", "10",
                "--out", str(tmp_path / "missing_dir" / "o.csv")]) == 1


def test_unreachable_threshold_exit_1(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"hm": {"point": 3}, "he": {"point": 1}, "hz": {"point": 0}}))
    assert run(["feedback", "--model", str(p), "--pt", "1", "--schemes", "plain_arq", "--r", "3",
                "--renewals", "10", "--samples", "10"]) == 1


def test_seed_from_environment(tmp_path, model_path, monkeypatch):
    monkeypatch.setenv("SECRECY_LAB_SEED", "77")
    out = tmp_path / "o.csv"
    run(["bounds", "--model", str(model_path), "--samples", "100", "--out", str(out)])
    assert all(r["seed"] == "77" for r in _rows(out))


def test_simulate_outputs(tmp_path, model_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["simulate", "--model", str(model_path), "--r", "2", "--blocks", "500",
                "--adversary", "always_eavesdrop", "--events", "ev.jsonl", "--out", "s.csv"]) == 0
    assert len((tmp_path / "ev.jsonl").read_text().splitlines()) == 500
    assert _rows(tmp_path / "s.csv")[0]["scheme"] == "mrc"
    assert run(["simulate", "--model", str(model_path), "--mode", "delay", "--gamma", "1",
                "--r-tilde", "0", "--r-s", "0", "--m1", "5", "--m2", "3", "--out", "d.csv"]) == 0
    assert float(_rows(tmp_path / "d.csv")[0]["outage_frequency"]) == 1.0
    assert run(["simulate", "--model", str(model_path), "--adversary", "explicit"]) == 2


def test_multi_csv_has_argmin(tmp_path):
    p = tmp_path / "mm.json"
    p.write_text(json.dumps({"hm": {"point": 7}, "he_list": [{"point": 0.5}, {"point": 0.5}],
                             "hz_list": [{"point": 0}, {"point": 0}]}))
    out = tmp_path / "o.csv"
    assert run(["multi", "--model", str(p), "--pt", "1", "--samples", "10", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0]["s_argmin"] == "0" and rows[2]["s_argmin"] == ""
    assert float(rows[2]["value_bits"]) == 2.0


def test_figures_schema(tmp_path):
    assert run(["figures", "--outdir", str(tmp_path), "--pt", "10", "--p", "1", "10",
                "--samples", "5000", "--renewals", "2000"]) == 0
    for name in ("fig1", "fig2", "fig3"):
        lines = (tmp_path / f"{name}.csv").read_text().splitlines()
        assert lines[0].startswith("#") and lines[1] == "x,series,value_bits,ci"
    series = {l.split(",")[1] for l in (tmp_path / "fig1.csv").read_text().splitlines()[2:]}
    assert {"lower_nofeedback", "upper_nofeedback", "lower_1bit_mrc", "upper_1bit", "outage_nofeedback"} <= series
