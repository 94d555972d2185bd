import json
import math
from pathlib import Path

import pytest

from codonsoup.analytics import EventKind
from codonsoup.config import (
    PRESETS,
    SimulationConfig,
    line_of,
    load_config,
    load_preset,
    parse_angle,
    parse_config,
    set_path,
)
from codonsoup.exceptions import ConfigException


@pytest.mark.parametrize(
    "title,text",
    [
        ("empty", ""),
        ("blank", "  \n"),
        ("empty object", "{}"),
    ],
)
def test_parse_config_defaults(title, text):
    assert parse_config(text) == SimulationConfig(), title


def test_defaults():
    cfg = SimulationConfig()
    assert cfg.iterations == 1000
    assert cfg.red_blue_tolerance == math.pi / 256
    assert cfg.vertical_tolerance == math.pi / 3
    assert cfg.geometry.max_interaction_diameter == 12.0
    assert cfg.normalized_time(200) == pytest.approx(30.0)
    assert cfg.has_brownian


def test_halved_timestep():
    cfg = parse_config('{"timestep_duration": 0.075}')
    assert cfg.timestep_duration == 0.075
    assert cfg.iterations == 2000
    assert cfg.physics.linear_viscosity == pytest.approx(1 - 0.9**0.075)


def test_tables_merge_per_colour():
    cfg = parse_config('{"angle_tolerance": {"red": "pi/16", "blue": "pi/16"}, "arm_force": {"yellow": 2}}')
    assert cfg.red_blue_tolerance == math.pi / 16
    assert cfg.angle_tolerance.green == math.pi / 3
    assert cfg.arm_force.yellow == 2.0
    assert cfg.arm_force.red == 1.8


@pytest.mark.parametrize(
    "title,text,want_key,want_line",
    [
        (
            "negative tolerance",
            '{\n  "seed_strand": "01",\n  "angle_tolerance": {"red": -1}\n}',
            "angle_tolerance.red",
            3,
        ),
        ("unknown key", '{\n  "free_type0": 3,\n  "gravity": 9.8\n}', "gravity", 3),
        ("unknown colour", '{"arm_length": {"orange": 1}}', "arm_length.orange", 1),
        ("wrong type", '{\n\n  "free_type1": "many"\n}', "free_type1", 3),
        ("float count", '{"free_type1": 2.5}', "free_type1", 1),
        ("bad bits", '{\n  "seed_strand": "0a1"\n}', "seed_strand", 2),
        ("zero timestep", '{"timestep_duration": 0}', "timestep_duration", 1),
        ("rate above one", '{"linear_viscosity": 1.5}', "linear_viscosity", 1),
        ("unknown event", '{"stop_on": "Explosion"}', "stop_on", 1),
        ("bad angle", '{"seed_angle": "tau/2"}', "seed_angle", 1),
        ("zero metrics interval", '{"metrics_every": 0}', "metrics_every", 1),
    ],
)
def test_parse_config_errors(title, text, want_key, want_line):
    with pytest.raises(ConfigException) as e:
        parse_config(text)
    assert e.value.key == want_key, title
    assert e.value.line == want_line, title
    assert want_key in str(e.value), title


@pytest.mark.parametrize(
    "title,text,want_line",
    [
        ("truncated", '{\n  "free_type0": 3,\n', 3),
        ("not an object", "[1, 2]", 1),
        ("trailing comma", '{\n  "free_type0": 3,\n}', 3),
    ],
)
def test_parse_config_malformed(title, text, want_line):
    with pytest.raises(ConfigException) as e:
        parse_config(text)
    assert e.value.line == want_line, title


@pytest.mark.parametrize(
    "title,value,want",
    [
        ("number", 0.25, 0.25),
        ("integer", 1, 1.0),
        ("pi", "pi", math.pi),
        ("fraction", "pi/256", math.pi / 256),
        ("multiple", "2*pi/3", 2 * math.pi / 3),
        ("trailing factor", "pi*2", 2 * math.pi),
        ("numeric string", "0.5", 0.5),
    ],
)
def test_parse_angle(title, value, want):
    assert parse_angle(value) == pytest.approx(want), title


@pytest.mark.parametrize(
    "title,value",
    [
        ("word", "tau"),
        ("bool", True),
        ("division by zero", "pi/0"),
        ("list", [1]),
    ],
)
def test_parse_angle_rejects(title, value):
    with pytest.raises(ValueError):
        parse_angle(value)


@pytest.mark.parametrize(
    "title,key,value,get,want",
    [
        ("scalar from text", "free_type0", "12", lambda c: c.free_type0, 12),
        ("scalar value", "rng_seed", 9, lambda c: c.rng_seed, 9),
        ("table entry", "angle_tolerance.red", "pi/16", lambda c: c.angle_tolerance.red, math.pi / 16),
        ("bit string", "seed_strand", "0101", lambda c: c.seed_strand, "0101"),
        ("event kind", "stop_on", "SpontaneousDimer", lambda c: c.stop_on, EventKind.SPONTANEOUS_DIMER),
        ("json null", "seed_x", "null", lambda c: c.seed_x, None),
        ("no seed", "seed_strand", "null", lambda c: c.seed_strand, None),
        ("angle", "seed_angle", "pi/4", lambda c: c.seed_angle, math.pi / 4),
    ],
)
def test_set_path(title, key, value, get, want):
    assert get(set_path(SimulationConfig(), key, value)) == want, title


@pytest.mark.parametrize(
    "title,key,value",
    [
        ("not a table", "free_type0.red", "1"),
        ("unparsable", "free_type0", "a lot"),
        ("unknown key", "gravity", "1"),
        ("invalid value", "container_width", "-3"),
        ("angle cannot be null", "seed_angle", "null"),
    ],
)
def test_set_path_errors(title, key, value):
    with pytest.raises(ConfigException):
        set_path(SimulationConfig(), key, value)


def test_presets():
    assert load_preset("seeded") == SimulationConfig()
    spontaneous = load_preset("spontaneous")
    assert (spontaneous.free_type0, spontaneous.free_type1, spontaneous.seed_strand) == (44, 44, None)
    assert sorted(PRESETS) == ["seeded", "spontaneous"]
    with pytest.raises(ConfigException):
        load_preset("chaos")


def test_digest_tracks_content():
    a = SimulationConfig()
    assert a.digest() == SimulationConfig().digest()
    assert a.digest() != a.with_overrides(rng_seed=2).digest()
    assert len(a.digest()) == 64


def test_document_round_trip():
    cfg = SimulationConfig(stop_on=EventKind.STRAND_COMPLETED, seed_x=30.0)
    doc = cfg.to_document()
    assert doc["stop_on"] == "StrandCompleted"
    assert parse_config(json.dumps(doc)) == cfg


def test_load_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"free_type0": 3}', encoding="utf-8")
    assert load_config(path).free_type0 == 3
    assert load_config(path, base=PRESETS["spontaneous"]).free_type1 == 44
    with pytest.raises(ConfigException):
        load_config(tmp_path / "missing.json")


@pytest.mark.parametrize(
    "title,text,key,want",
    [
        ("top level", '{\n"a": 1,\n"b": 2}', "b", 3),
        ("nested", '{\n"t": {\n"red": 1}}', "t.red", 3),
        ("missing", '{"a": 1}', "b", None),
    ],
)
def test_line_of(title, text, key, want):
    assert line_of(text, key) == want, title


@pytest.mark.parametrize("name", ["seeded", "spontaneous"])
def test_shipped_configs_parse(name):
    cfg = load_config(Path(__file__).parent.parent / "configs" / f"{name}.json")
    assert (cfg.free_type0, cfg.free_type1) == (PRESETS[name].free_type0, PRESETS[name].free_type1)
