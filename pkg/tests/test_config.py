import pytest

from pyrfstat.config import DEFAULTS, MANIFEST_NAME, RunConfig, parse_list, parse_points
from pyrfstat.errors import ConfigError


def test_defaults():
    config = RunConfig()
    assert config.seed == 0
    assert config.get("emitter", "t1") == 560.0
    assert config.get("g2", "convolve") is True
    assert config.section("interferometer") == DEFAULTS["interferometer"]


def test_values_take_the_type_of_their_default():
    config = RunConfig()
    config.set("emitter", "t1", "600")
    config.set("mc", "batches", " 4 ")
    config.set("g2", "convolve", "off")
    config.set("run", "out", "results/run1")
    assert config.get("emitter", "t1") == 600.0 and isinstance(config.get("emitter", "t1"), float)
    assert config.get("mc", "batches") == 4
    assert config.get("g2", "convolve") is False
    assert str(config.out) == "results/run1"
    config.set("hom", "convolve", True)
    assert config.get("hom", "convolve") is True


@pytest.mark.parametrize(
    "section, key, value, name",
    [
        ("emitter", "t3", "1", "emitter.t3"),
        ("laser", "power", "1", "laser.power"),
        ("mc", "batches", "2.5", "mc.batches"),
        ("g2", "convolve", "maybe", "g2.convolve"),
        ("drive", "rabi_energy", "strong", "drive.rabi_energy"),
    ],
)
def test_bad_values_name_their_key(section, key, value, name):
    with pytest.raises(ConfigError) as info:
        RunConfig().set(section, key, value)
    assert info.value.key == name


def test_overrides():
    config = RunConfig()
    config.apply_override("drive.rabi_energy=1.5")
    config.apply_override("convolve = no", default_section="g2")
    assert config.get("drive", "rabi_energy") == 1.5
    assert config.get("g2", "convolve") is False
    with pytest.raises(ConfigError):
        config.apply_override("drive.rabi_energy")
    with pytest.raises(ConfigError):
        config.apply_override("seed=3")


def test_string_round_trip():
    config = RunConfig()
    config.set("emitter", "t2", "1120")
    config.set("purcell", "points", "0:65:10, 125:400:20, 250:820:10")
    config.set("mc", "duration", "2.5e7")
    again = RunConfig.from_string(config.to_string())
    assert again.to_string() == config.to_string()
    assert again.get("mc", "duration") == 2.5e7


def test_file_and_manifest(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[drive]\nrabi_energy = 2.0\n\n[run]\nseed = 7\n")
    config = RunConfig.from_file(path)
    assert config.seed == 7
    manifest = config.write_manifest(tmp_path / "out")
    assert manifest.name == MANIFEST_NAME
    assert RunConfig.from_file(manifest).to_string() == config.to_string()


def test_unreadable_files(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("rabi_energy = 2.0\n")
    with pytest.raises(ConfigError):
        RunConfig.from_file(path)
    path.write_text("[emitter]\nlifetime = 2.0\n")
    with pytest.raises(ConfigError) as info:
        RunConfig.from_file(path)
    assert info.value.key == "emitter.lifetime"
    with pytest.raises(ConfigError):
        RunConfig.from_string("[drive]\nrabi_energy = 1\nrabi_energy = 2\n")


def test_parse_points():
    assert parse_list(" a, ,b ") == ["a", "b"]
    assert parse_points("0:65:10, 250:820:10") == [(0.0, 65.0, 10.0), (250.0, 820.0, 10.0)]
    for text in ("0:65", "0:sixty:10"):
        with pytest.raises(ConfigError) as info:
            parse_points(text)
        assert info.value.key == "purcell.points"
