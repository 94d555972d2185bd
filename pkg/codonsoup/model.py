"""Codon identity, state and arm geometry."""

import math
from dataclasses import dataclass, replace
from enum import IntEnum, StrEnum
from typing import NamedTuple

TWO_PI = 2.0 * math.pi


class CodonType(IntEnum):
    """The bit a codon encodes."""

    TYPE0 = 0
    TYPE1 = 1

    @property
    def color(self) -> str:
        """Colour of the vertical field: purple for type 0, green for type 1."""
        return "purple" if self is CodonType.TYPE0 else "green"

    @property
    def bit(self) -> str:
        return str(int(self))

    @staticmethod
    def from_bit(bit: str) -> "CodonType":
        """
        Return the codon type encoding `bit`.

        >>> CodonType.from_bit("1")
        <CodonType.TYPE1: 1>
        """
        match bit:
            case "0":
                return CodonType.TYPE0
            case "1":
                return CodonType.TYPE1
        raise ValueError(f"not a bit: {bit!r}")


class FieldSlot(IntEnum):
    """The four fields of a codon; VERTICAL is purple or green depending on the type."""

    RED = 0
    BLUE = 1
    VERTICAL = 2
    YELLOW = 3


BOND_SLOTS = (FieldSlot.RED, FieldSlot.BLUE, FieldSlot.VERTICAL)


class FieldSize(IntEnum):
    SMALL = 0
    LARGE = 1


class SplittingState(StrEnum):
    """x: not ready to split, y: ready to split, z: splitting."""

    X = "x"
    Y = "y"
    Z = "z"


class Vec2(NamedTuple):
    x: float
    y: float

    def plus(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def minus(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def times(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        """z component of the 3D cross product."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


ZERO = Vec2(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class ArmTable:
    """A per-arm parameter, keyed by field colour."""

    red: float
    blue: float
    green: float
    purple: float
    yellow: float

    def for_slot(self, slot: FieldSlot, codon_type: CodonType) -> float:
        match slot:
            case FieldSlot.RED:
                return self.red
            case FieldSlot.BLUE:
                return self.blue
            case FieldSlot.YELLOW:
                return self.yellow
        return self.purple if codon_type is CodonType.TYPE0 else self.green

    def as_dict(self) -> dict[str, float]:
        return {
            "red": self.red,
            "blue": self.blue,
            "green": self.green,
            "purple": self.purple,
            "yellow": self.yellow,
        }


@dataclass(frozen=True, slots=True)
class Geometry:
    arm_length: ArmTable = ArmTable(red=7.0, blue=7.0, green=4.0, purple=4.0, yellow=1.0)
    small_field_radius: ArmTable = ArmTable(red=0.01, blue=0.01, green=0.01, purple=0.01, yellow=0.01)
    large_field_radius: ArmTable = ArmTable(red=4.0, blue=4.0, green=4.0, purple=4.0, yellow=6.0)

    @property
    def max_interaction_diameter(self) -> float:
        """Largest sum of two field radii, the minimum spatial index cell size."""
        radii = list(self.large_field_radius.as_dict().values()) + list(self.small_field_radius.as_dict().values())
        return 2.0 * max(radii)


DEFAULT_GEOMETRY = Geometry()


@dataclass(frozen=True, slots=True)
class CodonState:
    """
    The full state of one codon.

    `field_size` is indexed by :class: `FieldSlot`, `bond` by the first three slots.
    Bond entries are codon ids or None.
    """

    codon_id: int
    codon_type: CodonType
    position: Vec2
    angle: float
    velocity: Vec2 = ZERO
    angular_velocity: float = 0.0
    field_size: tuple[FieldSize, FieldSize, FieldSize, FieldSize] = (FieldSize.SMALL,) * 4
    bond: tuple[int | None, int | None, int | None] = (None, None, None)
    strand_location_state: int = 0
    splitting_state: SplittingState = SplittingState.X
    yellow_steps_large: int = 0
    z_steps: int = 0

    def size(self, slot: FieldSlot) -> FieldSize:
        return self.field_size[slot]

    def partner(self, slot: FieldSlot) -> int | None:
        if slot is FieldSlot.YELLOW:
            return None
        return self.bond[slot]

    def bonded(self, slot: FieldSlot) -> bool:
        return self.partner(slot) is not None

    @property
    def is_free(self) -> bool:
        return all(b is None for b in self.bond)

    @property
    def red_blue_bond_count(self) -> int:
        return int(self.bond[FieldSlot.RED] is not None) + int(self.bond[FieldSlot.BLUE] is not None)

    def with_size(self, slot: FieldSlot, size: FieldSize) -> "CodonState":
        if self.field_size[slot] is size:
            return self
        sizes = list(self.field_size)
        sizes[slot] = size
        return replace(self, field_size=tuple(sizes))  # type: ignore[arg-type]

    def with_bond(self, slot: FieldSlot, partner: int | None) -> "CodonState":
        bonds = list(self.bond)
        bonds[slot] = partner
        return replace(self, bond=tuple(bonds))  # type: ignore[arg-type]


def wrap_angle(angle: float) -> float:
    """
    Wrap an angle into (-pi, pi].

    >>> wrap_angle(-math.pi) == math.pi
    True
    """
    wrapped = math.remainder(angle, TWO_PI)
    if wrapped <= -math.pi:
        return wrapped + TWO_PI
    return wrapped


def unit_heading(angle: float) -> Vec2:
    """Return the unit vector pointing at `angle`."""
    return Vec2(math.cos(angle), math.sin(angle))


def arm_angle(angle: float, slot: FieldSlot) -> float:
    """
    Return the direction of an arm for a codon heading at `angle`.

    The red arm is on the left when the vertical arm points up.
    The yellow arm runs along the vertical arm.
    """
    match slot:
        case FieldSlot.RED:
            return angle + math.pi / 2
        case FieldSlot.BLUE:
            return angle - math.pi / 2
    return angle


def tip_position(c: CodonState, slot: FieldSlot, geometry: Geometry = DEFAULT_GEOMETRY) -> Vec2:
    """Return the center of the field `slot` of `c`."""
    length = geometry.arm_length.for_slot(slot, c.codon_type)
    return c.position.plus(unit_heading(arm_angle(c.angle, slot)).times(length))


def field_radius(c: CodonState, slot: FieldSlot, geometry: Geometry = DEFAULT_GEOMETRY) -> float:
    """Return the current radius of the field `slot` of `c`."""
    if c.field_size[slot] is FieldSize.LARGE:
        return geometry.large_field_radius.for_slot(slot, c.codon_type)
    return geometry.small_field_radius.for_slot(slot, c.codon_type)


@dataclass(frozen=True, slots=True)
class Bounds:
    """The container: codon middles stay within [min, max] on each axis."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    @staticmethod
    def box(width: float, height: float) -> "Bounds":
        return Bounds(min_x=0.0, min_y=0.0, max_x=width, max_y=height)

    def contains(self, p: Vec2) -> bool:
        return self.min_x <= p.x <= self.max_x and self.min_y <= p.y <= self.max_y

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y
