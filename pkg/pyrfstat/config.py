"""
Run configuration for the rfstat command line

Configuration is INI text read with configparser. Every key has a typed
default; the type of the default decides how a value is parsed. Unknown
sections and keys are rejected.
"""

import configparser
import logging
from pathlib import Path

from pyrfstat.errors import ConfigError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.ini"

DEFAULTS = {
    "run": {"seed": 0, "out": "rfstat-out"},
    "emitter": {"t1": 560.0, "t2": 360.0},
    "drive": {"rabi_energy": 0.9},
    "instrument": {"irf_fwhm": 400.0, "rho": 0.96},
    "interferometer": {"r1": 0.5, "r2": 0.5, "delay": 13000.0, "overlap": 0.9},
    "grid": {"half_width": 20000.0, "step": 10.0},
    "g2": {"convolve": True},
    "hom": {"convolve": True},
    "visibility": {"cross": "", "parallel": ""},
    "mollow": {
        "gamma_energy": 1.1754,
        "rabi_energy": 26.7,
        "half_width": 80.0,
        "step": 0.05,
        "resolution": 0.0,
        "weak_drive": False,
    },
    "purcell": {
        "kappa": 104.4,
        "points": "0:65:10, 250:820:10",
        "kappa_free": False,
        "half_width": 400.0,
        "step": 1.0,
    },
    "mc": {
        "duration": 1e7,
        "time_step": 0.0,
        "batches": 1,
        "workers": 1,
        "split": 0.5,
        "route": "hbt",
    },
    "correlate": {
        "input": "",
        "channel_a": 0,
        "channel_b": 1,
        "bin_width": 100.0,
        "window": 20000.0,
        "exclude_zero_delay": False,
        "workers": 1,
    },
    "fit": {
        "kind": "g2",
        "data": "",
        "data_parallel": "",
        "free": "",
        "budget": 4000,
    },
}


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class RunConfig:
    """
    Fully resolved configuration of one rfstat run

    Values start at DEFAULTS and are overridden, in this order, by a config
    file, the --seed/--out flags and --set overrides.
    """

    def __init__(self):
        self._values = {section: dict(keys) for section, keys in DEFAULTS.items()}

    @classmethod
    def from_file(cls, path):
        config = cls()
        path = Path(path)
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, "r", encoding="utf-8") as handle:
                parser.read_file(handle)
        except configparser.Error as error:
            raise ConfigError(f"cannot parse {path}: {error}") from error
        config.update_from_parser(parser)
        logger.info("read configuration from %s", path)
        return config

    @classmethod
    def from_string(cls, text: str):
        config = cls()
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as error:
            raise ConfigError(f"cannot parse configuration: {error}") from error
        config.update_from_parser(parser)
        return config

    def update_from_parser(self, parser: configparser.ConfigParser):
        for section in parser.sections():
            for key, value in parser.items(section):
                self.set(section, key, value)

    def set(self, section: str, key: str, text):
        """Parse text with the type of the default and store it"""
        name = f"{section}.{key}"
        if section not in self._values:
            raise ConfigError("unknown section", name)
        if key not in self._values[section]:
            raise ConfigError("unknown key", name)
        default = DEFAULTS[section][key]
        if not isinstance(text, str):
            text = _format(text)
        text = text.strip()
        try:
            if isinstance(default, bool):
                lowered = text.lower()
                if lowered not in configparser.ConfigParser.BOOLEAN_STATES:
                    raise ValueError(text)
                value = configparser.ConfigParser.BOOLEAN_STATES[lowered]
            elif isinstance(default, int):
                value = int(text)
            elif isinstance(default, float):
                value = float(text)
            else:
                value = text
        except ValueError:
            raise ConfigError(f"cannot read {text!r} as {type(default).__name__}", name) from None
        self._values[section][key] = value

    def apply_override(self, override: str, default_section: str = None):
        """
        Apply a 'section.key=value' override

        A bare 'key=value' applies to default_section, the active subcommand.
        """
        target, sep, value = override.partition("=")
        if not sep:
            raise ConfigError(f"override {override!r} is not of the form key=value")
        section, dot, key = target.strip().rpartition(".")
        if not dot:
            if default_section is None:
                raise ConfigError(f"override {override!r} needs a section")
            section = default_section
        self.set(section, key, value)

    def get(self, section: str, key: str):
        try:
            return self._values[section][key]
        except KeyError:
            raise ConfigError("unknown key", f"{section}.{key}") from None

    def section(self, name: str) -> dict:
        if name not in self._values:
            raise ConfigError("unknown section", name)
        return dict(self._values[name])

    @property
    def seed(self) -> int:
        return self._values["run"]["seed"]

    @property
    def out(self) -> Path:
        return Path(self._values["run"]["out"])

    def to_string(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        for section, keys in self._values.items():
            parser[section] = {key: _format(value) for key, value in keys.items()}
        lines = []
        for section in parser.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{key} = {value}" for key, value in parser[section].items())
            lines.append("")
        return "\n".join(lines)

    def write_manifest(self, directory=None) -> Path:
        """Echo the resolved configuration into directory/manifest.ini"""
        directory = Path(directory) if directory is not None else self.out
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / MANIFEST_NAME
        path.write_text(self.to_string(), encoding="utf-8")
        logger.info("wrote %s", path)
        return path


def parse_list(text: str) -> list:
    """Comma-separated names, blanks dropped"""
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_points(text: str) -> list:
    """'d:t:s, d:t:s' triples of floats"""
    points = []
    for item in parse_list(text):
        try:
            points.append(tuple(float(x) for x in item.split(":")))
        except ValueError:
            raise ConfigError(f"cannot read point {item!r}", "purcell.points") from None
        if len(points[-1]) != 3:
            raise ConfigError(f"point {item!r} needs detuning:lifetime:uncertainty", "purcell.points")
    return points
