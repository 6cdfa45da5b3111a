import pytest

from manet_dri.config import DEFAULT_VALUES, ScenarioConfig, SweepSpec, parse_config, parse_text
from manet_dri.traffic import ConfigError


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("")
    cfg = parse_config(p)
    assert cfg == ScenarioConfig()
    assert (cfg.duration, cfg.area, cfg.node_count, cfg.range) == (1000.0, (1000.0, 1000.0), 30, 200.0)
    assert (cfg.v_min, cfg.v_max, cfg.pause) == (5.0, 20.0, 10.0)
    assert (cfg.flow_count, cfg.packet_rate, cfg.payload, cfg.attacker_count) == (15, 2.0, 512, 2)


def test_missing_file():
    with pytest.raises(ConfigError) as exc:
        parse_config("/nonexistent/x.cfg")
    assert exc.value.key == "config"


@pytest.mark.parametrize("text,key", [
    ("v_min = 0", "v_min"),
    ("attacker_count = 30", "attacker_count"),
    ("colour = red", "colour"),
    ("node_count = many", "node_count"),
    ("protocol = dsr", "protocol"),
    ("flow_count = 900", "flow_count"),
    ("area = 100", "area"),
    ("just words", "line 1"),
])
def test_rejections_name_the_key(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_text(text)
    assert exc.value.key == key
    assert key in str(exc.value)


def test_overrides_and_comments():
    cfg = parse_text("# scenario\narea = 600x400\nseed = 9  # trailing\nstatic = yes\nloss_probability=0.1\n")
    assert cfg.area == (600.0, 400.0) and cfg.seed == 9 and cfg.static and cfg.loss_probability == 0.1


def test_baseline_has_no_effective_attackers():
    assert ScenarioConfig(protocol="aodv").effective_attackers == 0
    assert ScenarioConfig(protocol="aodv-dri").effective_attackers == 2


def test_sweep_parsing():
    spec = parse_text("sweep = connections\nrepetitions = 3\nseed = 10\n")
    assert isinstance(spec, SweepSpec)
    assert spec.values == DEFAULT_VALUES["connections"] and spec.seeds() == [10, 11, 12]


def test_max_speed_alias():
    spec = parse_text("sweep = max_speed\nvalues = 5, 20\n")
    assert spec.axis == "speed" and spec.values == (5.0, 20.0)
    assert spec.point(20.0, "aodv").v_max == 20.0 and spec.point(20.0, "aodv").v_min == 5.0


def test_sweep_validation():
    with pytest.raises(ConfigError):
        SweepSpec("connections", (5,), repetitions=0)
    with pytest.raises(ConfigError):
        parse_text("values = 1,2")
    with pytest.raises(ConfigError):
        parse_text("sweep = density")
    with pytest.raises(ConfigError):
        SweepSpec("speed", (1.0,))  # below v_min
