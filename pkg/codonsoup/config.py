"""
Simulation config: defaults, JSON parsing and validation.

Keys follow the parameter names of the model; per-arm parameters are tables keyed
by field colour. The viscosity and damping keys hold per-unit-time base rates,
the per-step fractions are derived from them and `timestep_duration`.
"""

import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Callable

from .analytics import EventKind
from .exceptions import ConfigException
from .model import ArmTable, Bounds, Geometry
from .physics import PhysicsParams
from .rng import MAX_SEED

COLOURS = ("red", "blue", "green", "purple", "yellow")

_ANGLE = re.compile(
    r"^\s*(?:(?P<k>[0-9]*\.?[0-9]+)\s*\*\s*)?pi"
    r"(?:\s*\*\s*(?P<m>[0-9]*\.?[0-9]+))?(?:\s*/\s*(?P<n>[0-9]*\.?[0-9]+))?\s*$"
)


def parse_angle(value: Any) -> float:
    """
    Parse an angle given as a number or as a multiple of pi.

    >>> parse_angle("pi/256") == math.pi / 256
    True
    >>> parse_angle("2*pi/3") == 2 * math.pi / 3
    True
    >>> parse_angle(0.5)
    0.5
    """
    if isinstance(value, bool):
        raise ValueError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"not an angle: {value!r}")
    m = _ANGLE.match(value)
    if not m:
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"not an angle: {value!r}") from None
    k = float(m.group("k") or 1.0) * float(m.group("m") or 1.0)
    n = float(m.group("n") or 1.0)
    if n == 0:
        raise ValueError(f"division by zero in angle: {value!r}")
    return k * math.pi / n


def _table(**kwargs: float) -> ArmTable:
    return ArmTable(**kwargs)


@dataclass(frozen=True)
class SimulationConfig:
    container_width: float = 150.0
    container_height: float = 150.0
    free_type0: int = 40
    free_type1: int = 40
    seed_strand: str | None = "00011001"
    seed_symmetric: bool = False
    seed_x: float | None = None
    seed_y: float | None = None
    seed_angle: float = math.pi / 2
    timestep_duration: float = 0.15
    linear_viscosity: float = 0.10
    angular_viscosity: float = 0.05
    linear_spring_damping: float = 0.90
    angular_spring_damping: float = 0.99
    split_duration: float = 150.0
    iterations_after_split: int | None = None
    arm_length: ArmTable = field(default_factory=lambda: _table(red=7.0, blue=7.0, green=4.0, purple=4.0, yellow=1.0))
    small_field_radius: ArmTable = field(
        default_factory=lambda: _table(red=0.01, blue=0.01, green=0.01, purple=0.01, yellow=0.01)
    )
    large_field_radius: ArmTable = field(
        default_factory=lambda: _table(red=4.0, blue=4.0, green=4.0, purple=4.0, yellow=6.0)
    )
    arm_force: ArmTable = field(default_factory=lambda: _table(red=1.8, blue=1.8, green=1.0, purple=1.0, yellow=1.0))
    angle_tolerance: ArmTable = field(
        default_factory=lambda: _table(
            red=math.pi / 256, blue=math.pi / 256, green=math.pi / 3, purple=math.pi / 3, yellow=math.pi
        )
    )
    straightening_force: ArmTable = field(
        default_factory=lambda: _table(red=1.0, blue=1.0, green=0.5, purple=0.5, yellow=0.0)
    )
    brownian_linear_amplitude: float = 0.1
    brownian_angular_amplitude: float = 0.05
    rng_seed: int = 1
    max_steps: int = 200_000
    snapshot_every: int = 10_000
    metrics_every: int = 100
    progress_every: int = 10_000
    stop_on: EventKind | None = None
    stop_on_bits: str | None = None

    def __post_init__(self):  # noqa
        _validate(self)

    @property
    def iterations(self) -> int:
        """Steps a yellow field stays large, and a strand end stays in z."""
        if self.iterations_after_split is not None:
            return self.iterations_after_split
        return int(self.split_duration / self.timestep_duration)

    @property
    def red_blue_tolerance(self) -> float:
        return min(self.angle_tolerance.red, self.angle_tolerance.blue)

    @property
    def vertical_tolerance(self) -> float:
        return min(self.angle_tolerance.green, self.angle_tolerance.purple)

    @property
    def bounds(self) -> Bounds:
        return Bounds.box(self.container_width, self.container_height)

    @property
    def has_brownian(self) -> bool:
        return self.brownian_linear_amplitude > 0.0 or self.brownian_angular_amplitude > 0.0

    @cached_property
    def geometry(self) -> Geometry:
        return Geometry(
            arm_length=self.arm_length,
            small_field_radius=self.small_field_radius,
            large_field_radius=self.large_field_radius,
        )

    @cached_property
    def physics(self) -> PhysicsParams:
        return PhysicsParams.from_rates(
            timestep_duration=self.timestep_duration,
            linear_viscosity=self.linear_viscosity,
            angular_viscosity=self.angular_viscosity,
            linear_spring_damping=self.linear_spring_damping,
            angular_spring_damping=self.angular_spring_damping,
            arm_force=self.arm_force,
            straightening_force=self.straightening_force,
            brownian_linear_amplitude=self.brownian_linear_amplitude,
            brownian_angular_amplitude=self.brownian_angular_amplitude,
            geometry=self.geometry,
        )

    def normalized_time(self, step: int) -> float:
        return step * self.timestep_duration

    def with_overrides(self, **kwargs: Any) -> "SimulationConfig":
        return replace(self, **kwargs)

    def to_document(self) -> dict[str, Any]:
        doc = asdict(self)
        if self.stop_on is not None:
            doc["stop_on"] = str(self.stop_on)
        return doc

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        canonical = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _require(ok: bool, key: str, message: str) -> None:
    if not ok:
        raise ConfigException(message, key=key)


def _validate(cfg: SimulationConfig) -> None:
    _require(cfg.container_width > 0, "container_width", "must be positive")
    _require(cfg.container_height > 0, "container_height", "must be positive")
    _require(cfg.timestep_duration > 0, "timestep_duration", "must be positive")
    _require(cfg.free_type0 >= 0, "free_type0", "must be non-negative")
    _require(cfg.free_type1 >= 0, "free_type1", "must be non-negative")
    for key in ("linear_viscosity", "angular_viscosity", "linear_spring_damping", "angular_spring_damping"):
        _require(0.0 <= getattr(cfg, key) <= 1.0, key, "rate must lie in [0, 1]")
    _require(cfg.split_duration > 0, "split_duration", "must be positive")
    if cfg.iterations_after_split is not None:
        _require(cfg.iterations_after_split >= 1, "iterations_after_split", "must be at least 1")
    for colour in COLOURS:
        tol = getattr(cfg.angle_tolerance, colour)
        _require(0.0 < tol <= math.pi, f"angle_tolerance.{colour}", "must lie in (0, pi]")
        _require(getattr(cfg.arm_length, colour) > 0, f"arm_length.{colour}", "must be positive")
        _require(getattr(cfg.small_field_radius, colour) > 0, f"small_field_radius.{colour}", "must be positive")
        _require(
            getattr(cfg.large_field_radius, colour) >= getattr(cfg.small_field_radius, colour),
            f"large_field_radius.{colour}",
            "must not be below the small radius",
        )
        _require(getattr(cfg.arm_force, colour) >= 0, f"arm_force.{colour}", "must be non-negative")
        _require(getattr(cfg.straightening_force, colour) >= 0, f"straightening_force.{colour}", "must be non-negative")
    _require(cfg.brownian_linear_amplitude >= 0, "brownian_linear_amplitude", "must be non-negative")
    _require(cfg.brownian_angular_amplitude >= 0, "brownian_angular_amplitude", "must be non-negative")
    _require(0 <= cfg.rng_seed <= MAX_SEED, "rng_seed", "must be a 64-bit unsigned integer")
    _require(cfg.max_steps >= 0, "max_steps", "must be non-negative")
    _require(cfg.snapshot_every >= 0, "snapshot_every", "must be non-negative, 0 disables periodic snapshots")
    _require(cfg.metrics_every >= 1, "metrics_every", "must be at least 1")
    _require(cfg.progress_every >= 1, "progress_every", "must be at least 1")
    if cfg.seed_strand is not None:
        _require(bool(cfg.seed_strand) and not cfg.seed_strand.strip("01"), "seed_strand", "must be a bit string")
    if cfg.stop_on_bits is not None:
        _require(bool(cfg.stop_on_bits) and not cfg.stop_on_bits.strip("01"), "stop_on_bits", "must be a bit string")


PRESETS: dict[str, SimulationConfig] = {
    "seeded": SimulationConfig(),
    "spontaneous": SimulationConfig(free_type0=44, free_type1=44, seed_strand=None),
}


def load_preset(name: str) -> SimulationConfig:
    """Return the named preset config."""
    if name not in PRESETS:
        raise ConfigException(f"unknown preset, want one of {sorted(PRESETS)}", key=name)
    return PRESETS[name]


def _number(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"want a number, got {value!r}")
    return float(value)


def _integer(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"want an integer, got {value!r}")
    return value


def _optional(convert: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def f(value: Any) -> Any:
        return None if value is None else convert(value)

    return f


def _flag(value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"want true or false, got {value!r}")
    return value


def _bits(value: Any) -> str:
    if not isinstance(value, str):
        raise ValueError(f"want a bit string, got {value!r}")
    return value


def _event_kind(value: Any) -> EventKind:
    try:
        return EventKind(value)
    except ValueError:
        raise ValueError(f"want one of {[str(k) for k in EventKind]}, got {value!r}") from None


_SCALARS: dict[str, Callable[[Any], Any]] = {
    "container_width": _number,
    "container_height": _number,
    "free_type0": _integer,
    "free_type1": _integer,
    "seed_strand": _optional(_bits),
    "seed_symmetric": _flag,
    "seed_x": _optional(_number),
    "seed_y": _optional(_number),
    "seed_angle": parse_angle,
    "timestep_duration": _number,
    "linear_viscosity": _number,
    "angular_viscosity": _number,
    "linear_spring_damping": _number,
    "angular_spring_damping": _number,
    "split_duration": _number,
    "iterations_after_split": _optional(_integer),
    "brownian_linear_amplitude": _number,
    "brownian_angular_amplitude": _number,
    "rng_seed": _integer,
    "max_steps": _integer,
    "snapshot_every": _integer,
    "metrics_every": _integer,
    "progress_every": _integer,
    "stop_on": _optional(_event_kind),
    "stop_on_bits": _optional(_bits),
}

_TABLES = (
    "arm_length",
    "small_field_radius",
    "large_field_radius",
    "arm_force",
    "angle_tolerance",
    "straightening_force",
)


def line_of(text: str, key_path: str) -> int | None:
    """Return the line of the first occurrence of `key_path` (dotted) as a JSON key in `text`."""
    pos = 0
    found = None
    for part in key_path.split("."):
        m = re.compile(r'"' + re.escape(part) + r'"\s*:').search(text, pos)
        if not m:
            return found
        pos = m.end()
        found = text.count("\n", 0, m.start()) + 1
    return found


def _merge_table(base: ArmTable, value: Any, key: str, text: str) -> ArmTable:
    if not isinstance(value, dict):
        raise ConfigException("want a table keyed by colour", key=key, line=line_of(text, key))
    convert = parse_angle if key == "angle_tolerance" else _number
    updates = {}
    for colour, v in value.items():
        path = f"{key}.{colour}"
        if colour not in COLOURS:
            raise ConfigException(f"unknown colour, want one of {list(COLOURS)}", key=path, line=line_of(text, path))
        try:
            updates[colour] = convert(v)
        except ValueError as e:
            raise ConfigException(str(e), key=path, line=line_of(text, path)) from None
    return replace(base, **updates)


def config_from_document(doc: Any, text: str = "", base: SimulationConfig | None = None) -> SimulationConfig:
    """Overlay the keys of a parsed document onto `base` (defaults when None)."""
    if not isinstance(doc, dict):
        raise ConfigException("config must be a JSON object", line=1)
    base = base if base is not None else SimulationConfig()
    known = {f.name for f in fields(SimulationConfig)}
    updates: dict[str, Any] = {}
    for key, value in doc.items():
        if key not in known:
            raise ConfigException("unknown key", key=key, line=line_of(text, key))
        if key in _TABLES:
            updates[key] = _merge_table(getattr(base, key), value, key, text)
            continue
        try:
            updates[key] = _SCALARS[key](value)
        except ValueError as e:
            raise ConfigException(str(e), key=key, line=line_of(text, key)) from None
    try:
        return replace(base, **updates)
    except ConfigException as e:
        line = line_of(text, e.key) if e.key else None
        raise ConfigException(e.message, key=e.key, line=line) from None


def parse_config(text: str, base: SimulationConfig | None = None) -> SimulationConfig:
    """
    Parse a JSON config document.

    Omitted keys keep their defaults; an empty document yields the defaults.
    """
    if not text.strip():
        return base if base is not None else SimulationConfig()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigException(f"malformed document: {e.msg}", line=e.lineno) from None
    return config_from_document(doc, text, base)


def load_config(path: str | Path, base: SimulationConfig | None = None) -> SimulationConfig:
    """Read and parse a JSON config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigException(f"cannot read {path}: {e.strerror}") from None
    return parse_config(text, base)


def set_path(cfg: SimulationConfig, key_path: str, value: Any) -> SimulationConfig:
    """
    Return `cfg` with one (possibly dotted) key replaced, e.g. `angle_tolerance.red`.

    String values are parsed as JSON, except for the keys holding bit strings,
    event kinds and angles, which take the text as is or `null`.
    """
    head, _, colour = key_path.partition(".")
    if colour:
        if head not in _TABLES:
            raise ConfigException("not a per-arm table", key=head)
        return config_from_document({head: {colour: value}}, base=cfg)
    if head in ("seed_strand", "stop_on", "stop_on_bits", "seed_angle"):
        if value == "null":
            value = None
    elif isinstance(value, str):
        try:
            value = json.loads(value)
        except json.JSONDecodeError:
            raise ConfigException(f"cannot parse value {value!r}", key=key_path) from None
    return config_from_document({head: value}, base=cfg)
