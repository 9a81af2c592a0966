import pytest

from ltecoex.config import (
    EXPERIMENTS,
    ConfigError,
    RunConfig,
    config_from_dict,
    json_schema,
    parse_config,
)


def write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_file_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, 'experiment = "fig2"\n'))
    assert cfg.experiment == "fig2"
    assert cfg == RunConfig(experiment="fig2")
    assert cfg.engine.duration_ms == 20_000 and cfg.engine.drops == 20
    assert cfg.lte.lambda_grid == (0.5, 1.0, 1.5, 2.0)
    assert cfg.coexistence.t_c_ms == 1000


def test_cycle_must_divide_duration(tmp_path):
    text = "[coexistence]\nt_c_ms = 700\n[engine]\nduration_ms = 100000\n"
    with pytest.raises(ConfigError, match="multiple"):
        parse_config(write(tmp_path, text))


def test_unknown_key_named(tmp_path):
    with pytest.raises(ConfigError, match=r"lte\.bandwith"):
        parse_config(write(tmp_path, "[lte]\nbandwith = 20e6\n"))


def test_nested_unknown_key_named():
    with pytest.raises(ConfigError, match=r"wlan\.ramp\.slope"):
        config_from_dict({"wlan": {"ramp": {"slope": 1}}})


def test_type_errors_name_key():
    with pytest.raises(ConfigError, match=r"engine\.drops"):
        config_from_dict({"engine": {"drops": "many"}})
    with pytest.raises(ConfigError, match=r"lte\.full_buffer"):
        config_from_dict({"lte": {"full_buffer": 1}})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.toml")


def test_bad_toml(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "experiment = \n"))


@pytest.mark.parametrize(
    "data",
    [
        {"experiment": "fig9"},
        {"coexistence": {"mode": "greedy"}},
        {"coexistence": {"mode": "fixed", "fixed_mode": 7}},
        {"engine": {"drops": 0}},
        {"lte": {"arrival_rate_per_ms": -1.0}},
        {"cca": {"ed_threshold_dbm": -90.0, "cs_threshold_dbm": -80.0}},
        {"coexistence": {"gamma_max": [0.5, 0.1], "spared": [1, 2]}},
    ],
)
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_digest_stable_and_sensitive():
    a = RunConfig()
    assert a.digest() == RunConfig().digest()
    assert a.digest() != a.with_overrides(engine={"seed_base": 2}).digest()


def test_schema_lists_every_section():
    schema = json_schema()
    props = schema["properties"]
    assert set(props) == {"experiment", "scenario", "lte", "wlan", "cca", "coexistence", "engine", "output"}
    assert props["experiment"]["enum"][1:] == list(EXPERIMENTS)
    assert props["engine"]["properties"]["duration_ms"]["default"] == 20_000
    assert props["lte"]["additionalProperties"] is False
