import json
from datetime import date, time

import pytest

from transitvuln.config import BinLayout, RunConfig, apply_overrides, config_from_dict, load_config
from transitvuln.errors import ParseError, ValidationError


def test_defaults_match_service_day():
    cfg = RunConfig()
    bins = cfg.bins.bins()
    assert len(bins) == 6
    assert bins[0].start.hour == 5
    assert bins[-1].end.hour == 23
    assert cfg.k == 8
    assert cfg.tau_star == 60.0


def test_load_config_resolves_relative_paths(tmp_path):
    sub = tmp_path / "conf"
    sub.mkdir()
    (sub / "config.json").write_text(
        json.dumps({"stations": "net/stations.csv", "out_dir": "results", "k": 4}),
        encoding="utf-8",
    )
    cfg = load_config(sub / "config.json")
    assert cfg.stations == str(sub / "net" / "stations.csv")
    assert cfg.out_dir == str(sub / "results")
    assert cfg.k == 4


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError, match="unknown config keys"):
        config_from_dict({"statoins": "x.csv"})


def test_bins_section_parsed():
    cfg = config_from_dict(
        {"bins": {"date": "2023-06-05", "start": "06:30", "duration_min": 120, "count": 3}}
    )
    assert cfg.bins == BinLayout(date(2023, 6, 5), time(6, 30), 120.0, 3)
    with pytest.raises(ValidationError, match="bins"):
        config_from_dict({"bins": {"date": "yesterday"}})


def test_overrides_win_and_none_ignored():
    base = RunConfig(k=8, seed=1, out_dir="a")
    merged = apply_overrides(base, {"k": 3, "seed": None, "out_dir": "b"})
    assert merged.k == 3
    assert merged.seed == 1
    assert merged.out_dir == "b"


def test_validate_reports_missing_inputs(tmp_path):
    cfg = RunConfig(stations=str(tmp_path / "nope.csv"), edges=None)
    problems = cfg.validate(need_network=True)
    assert any("does not exist" in p for p in problems)
    assert any("missing the edges file" in p for p in problems)
    cfg2 = RunConfig(stations=None, edges=None, k=0, tau_star=-1)
    problems2 = cfg2.validate(need_network=False)
    assert any("k must be" in p for p in problems2)
    assert any("tau_star" in p for p in problems2)


def test_demand_requirement():
    cfg = RunConfig()
    assert any("afc file or a demand profile" in p for p in cfg.validate(need_network=False, need_demand=True))


def test_workers_resolution(monkeypatch):
    cfg = RunConfig(workers=3)
    monkeypatch.delenv("TRANSITVULN_WORKERS", raising=False)
    assert cfg.resolved_workers() == 3
    monkeypatch.setenv("TRANSITVULN_WORKERS", "5")
    assert cfg.resolved_workers() == 5
    auto = RunConfig(workers=0)
    monkeypatch.delenv("TRANSITVULN_WORKERS", raising=False)
    assert 1 <= auto.resolved_workers() <= 8


def test_bad_config_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{oops", encoding="utf-8")
    with pytest.raises(ParseError):
        load_config(path)