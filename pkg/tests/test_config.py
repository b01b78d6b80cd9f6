import json

import jsonschema
import pytest

from synthcard.config import (apply_overrides, build_run_config, config_schema, deep_merge, default_config_dict,
                              defaults_from_code, load_config)
from synthcard.errors import ConfigError


def _strip(d):
    if isinstance(d, dict):
        return {k: _strip(v) for k, v in d.items() if k != "_doc"}
    if isinstance(d, list):
        return [_strip(v) for v in d]
    return d


def test_shipped_default_file_matches_code_defaults():
    assert _strip(default_config_dict()) == json.loads(json.dumps(defaults_from_code()))


def test_shipped_defaults_validate_against_schema():
    jsonschema.Draft202012Validator(config_schema()).validate(_strip(default_config_dict()))
    run = load_config()
    assert run.seed == 7 and run.consumers == 200 and (run.start_year, run.end_year) == (1985, 2019)
    assert run.years == 35 and run.horizon[0].isoformat() == "1985-01-01"


def test_default_file_is_annotated():
    d = default_config_dict()
    assert "_doc" in d and "_doc" in d["population"] and "_doc" in d["fraud"]


@pytest.mark.parametrize("key,value", [("seed", 99), ("consumers", 17), ("start_year", 1990), ("end_year", 2001),
                                       ("out_dir", "elsewhere"), ("workers", 3)])
def test_override_equals_file_value(tmp_path, key, value):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({key: value}))
    from_file = load_config(path)
    from_flag = load_config(overrides={key: value})
    assert from_file == from_flag
    assert from_file.raw == from_flag.raw
    assert getattr(from_flag, key) == value


def test_years_override_sets_end_year():
    run = load_config(overrides={"start_year": 2000, "years": 5})
    assert (run.start_year, run.end_year) == (2000, 2004)
    assert apply_overrides({"start_year": 1985, "end_year": 2019}, {"years": None}) == {"start_year": 1985,
                                                                                         "end_year": 2019}


def test_hash_ignores_execution_keys():
    a = load_config(overrides={"workers": 1, "out_dir": "a"})
    b = load_config(overrides={"workers": 8, "out_dir": "b"})
    c = load_config(overrides={"seed": 8})
    assert a.config_hash() == b.config_hash() != c.config_hash()
    assert "workers" not in a.content_dict() and "out_dir" not in a.content_dict()


def test_deep_merge_replaces_targets_wholesale():
    base = {"a": {"x": 1, "y": 2}, "targets": {"m": {"target": 1, "tolerance": 1}}}
    out = deep_merge(base, {"a": {"y": 3}, "targets": {"n": {"target": 2, "tolerance": 0}}})
    assert out == {"a": {"x": 1, "y": 3}, "targets": {"n": {"target": 2, "tolerance": 0}}}


def test_schema_errors_listed_all_at_once(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"consumers": 0, "seed": "x", "fraud": {"bogus": 1}, "population": {"nope": 2}}))
    with pytest.raises(ConfigError) as ei:
        load_config(path)
    fields = [p for p, _ in ei.value.problems]
    assert "consumers" in fields and "seed" in fields
    assert "fraud" in fields and "population" in fields
    assert len(fields) >= 4


def test_semantic_errors_listed_all_at_once():
    d = _strip(default_config_dict())
    d["start_year"], d["end_year"] = 2010, 2000
    d["fraud"]["fraudster_share"] = 1.5
    d["world"]["total_locations"] = 10
    d["targets"] = {"fraud.rate": {"target": 0.001, "tolerance": -1}}
    with pytest.raises(ConfigError) as ei:
        build_run_config(d)
    fields = [p for p, _ in ei.value.problems]
    assert "end_year" in fields
    assert "fraud.fraudster_share" in fields
    assert "world.total_locations" in fields
    assert "targets.fraud.rate.tolerance" in fields


def test_invalid_json_and_non_object(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(p)


def test_missing_config_file_is_os_error(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.json")


def test_manifest_loads_as_config(tmp_path):
    run = load_config(overrides={"seed": 5, "consumers": 9})
    manifest = {"config": run.content_dict(), "files": {}}
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps(manifest))
    again = load_config(p)
    assert again.config_hash() == run.config_hash()
    assert again.seed == 5 and again.consumers == 9


def test_sub_configs_follow_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"engine": {"max_radius_km": 100.0}, "drift": {"chip_intro_year": 2015},
                             "fraud": {"target_fraud_rate": 0.01}, "world": {"total_locations": 20000}}))
    run = load_config(p)
    assert run.engine.max_radius_km == 100.0
    assert run.drift.chip_intro_year == 2015 and run.cards.chip_intro_date.year == 2015
    assert run.fraud.target_fraud_rate == 0.01
    assert run.world.total_locations == 20000
