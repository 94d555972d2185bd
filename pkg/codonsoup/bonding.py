"""
Field contacts, bond formation and breaking, and the field-size rules.

Contacts are found through a uniform grid over field tips whose cell size is at
least the largest interaction diameter, so the 3x3 neighbourhood of a cell holds
every field that can touch a field in it.
"""

import math
from dataclasses import dataclass
from functools import cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .analytics import EventKind, EventRecord
from .model import (
    DEFAULT_GEOMETRY,
    CodonState,
    CodonType,
    FieldSize,
    FieldSlot,
    Geometry,
    arm_angle,
    field_radius,
    tip_position,
    wrap_angle,
)
from .physics import BondedPair

ALL_SLOTS = tuple(FieldSlot)

# tolerance on angle arithmetic in alignment tests
ANGLE_EPSILON = 1e-12


class ContactPair(NamedTuple):
    """Two intersecting field circles, `a` < `b`."""

    a: int
    b: int
    slot_a: FieldSlot
    slot_b: FieldSlot
    distance: float


# same cell first, then the forward half of the 3x3 neighbourhood, so each cell pair is visited once
_OFFSETS = ((0, 0), (1, -1), (1, 0), (1, 1), (0, 1))


def _empty_pairs() -> tuple[np.ndarray, np.ndarray]:
    return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)


@dataclass(frozen=True)
class SpatialIndex:
    """
    Uniform grid of field tips keyed by quantized position.

    Row r of the arrays is field `slot[r]` of codon `owner[r]`.
    """

    cell_size: float
    owner: np.ndarray
    slot: np.ndarray
    tip: np.ndarray
    cell: np.ndarray

    @staticmethod
    def build(
        codons: Sequence[CodonState],
        geometry: Geometry = DEFAULT_GEOMETRY,
        slots: Iterable[FieldSlot] = ALL_SLOTS,
        cell_size: float | None = None,
    ) -> "SpatialIndex":
        """Register the tip of every field in `slots` of every codon."""
        size = cell_size if cell_size is not None else geometry.max_interaction_diameter
        if size < geometry.max_interaction_diameter:
            raise ValueError(f"cell size {size} below interaction diameter {geometry.max_interaction_diameter}")
        wanted = tuple(slots)
        rows = [(c.codon_id, slot, tip_position(c, slot, geometry)) for c in codons for slot in wanted]
        tip = np.array([r[2] for r in rows], dtype=float).reshape(len(rows), 2)
        return SpatialIndex(
            cell_size=size,
            owner=np.array([r[0] for r in rows], dtype=np.int64),
            slot=np.array([int(r[1]) for r in rows], dtype=np.int64),
            tip=tip,
            cell=np.floor(tip / size).astype(np.int64),
        )

    def __len__(self) -> int:  # noqa
        return len(self.owner)

    def candidates(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the row pairs sharing a cell or in adjacent cells, each once."""
        m = len(self)
        if m < 2:
            return _empty_pairs()
        order = np.lexsort((self.cell[:, 1], self.cell[:, 0]))
        cells = self.cell[order]
        low = cells.min(axis=0) - 1
        span = int(cells[:, 1].max() - low[1]) + 2
        keys = (cells[:, 0] - low[0]) * span + (cells[:, 1] - low[1])
        rows = np.arange(m)
        firsts, seconds = [], []
        for dx, dy in _OFFSETS:
            target = (cells[:, 0] + dx - low[0]) * span + (cells[:, 1] + dy - low[1])
            end = np.searchsorted(keys, target, side="right")
            start = rows + 1 if (dx, dy) == (0, 0) else np.searchsorted(keys, target, side="left")
            counts = np.maximum(end - start, 0)
            total = int(counts.sum())
            if not total:
                continue
            first = np.repeat(rows, counts)
            second = np.repeat(start - np.cumsum(counts) + counts, counts) + np.arange(total)
            firsts.append(order[first])
            seconds.append(order[second])
        if not firsts:
            return _empty_pairs()
        return np.concatenate(firsts), np.concatenate(seconds)

    def contacts(
        self,
        codons: Sequence[CodonState],
        geometry: Geometry = DEFAULT_GEOMETRY,
        slots: Iterable[FieldSlot] | None = None,
    ) -> list[ContactPair]:
        """Return the intersecting field pairs among the registered tips, using the current radii of `codons`."""
        first, second = self.candidates()
        if slots is not None:
            wanted = np.array([int(s) for s in slots], dtype=np.int64)
            keep = np.isin(self.slot[first], wanted) & np.isin(self.slot[second], wanted)
            first, second = first[keep], second[keep]
        return _touching(self, codons, geometry, first, second)


@cache
def _radius_table(geometry: Geometry) -> np.ndarray:
    """Field radii indexed by size, codon type and slot."""
    return np.array(
        [
            [[table.for_slot(slot, codon_type) for slot in ALL_SLOTS] for codon_type in CodonType]
            for table in (geometry.small_field_radius, geometry.large_field_radius)
        ]
    )


def field_radii(codons: Sequence[CodonState], geometry: Geometry, owner: np.ndarray, slot: np.ndarray) -> np.ndarray:
    """Return the current radius of field `slot[r]` of codon `owner[r]` for every row r."""
    sizes = np.array([c.field_size for c in codons], dtype=np.int64).reshape(len(codons), len(ALL_SLOTS))
    types = np.array([int(c.codon_type) for c in codons], dtype=np.int64)
    return _radius_table(geometry)[sizes[owner, slot], types[owner], slot]


def _touching(
    index: SpatialIndex, codons: Sequence[CodonState], geometry: Geometry, first: np.ndarray, second: np.ndarray
) -> list[ContactPair]:
    keep = index.owner[first] != index.owner[second]
    first, second = first[keep], second[keep]
    if not len(first):
        return []
    radius = field_radii(codons, geometry, index.owner, index.slot)
    gap = index.tip[first] - index.tip[second]
    distance = np.hypot(gap[:, 0], gap[:, 1])
    hit = distance <= radius[first] + radius[second]
    first, second, distance = first[hit], second[hit], distance[hit]
    swap = index.owner[first] > index.owner[second]
    lo = np.where(swap, second, first)
    hi = np.where(swap, first, second)
    found = [
        ContactPair(a, b, FieldSlot(slot_a), FieldSlot(slot_b), d)
        for a, b, slot_a, slot_b, d in zip(
            index.owner[lo].tolist(),
            index.owner[hi].tolist(),
            index.slot[lo].tolist(),
            index.slot[hi].tolist(),
            distance.tolist(),
        )
    ]
    found.sort()
    return found


def detect_contacts(
    codons: Sequence[CodonState],
    geometry: Geometry = DEFAULT_GEOMETRY,
    index: SpatialIndex | None = None,
) -> list[ContactPair]:
    """Return every pair of fields of distinct codons whose circles intersect, sorted canonically."""
    if index is None:
        index = SpatialIndex.build(codons, geometry)
    return index.contacts(codons, geometry)


def detect_contacts_brute_force(
    codons: Sequence[CodonState], geometry: Geometry = DEFAULT_GEOMETRY
) -> list[ContactPair]:
    """All-pairs reference for :func: `detect_contacts`."""
    index = SpatialIndex.build(codons, geometry)
    first, second = np.triu_indices(len(index), k=1)
    return _touching(index, codons, geometry, first.astype(np.int64), second.astype(np.int64))


def _tips_touch(a: CodonState, slot_a: FieldSlot, b: CodonState, slot_b: FieldSlot, geometry: Geometry) -> bool:
    d = tip_position(a, slot_a, geometry).minus(tip_position(b, slot_b, geometry)).norm()
    return d <= field_radius(a, slot_a, geometry) + field_radius(b, slot_b, geometry)


def alignment_error(a: CodonState, slot_a: FieldSlot, b: CodonState, slot_b: FieldSlot) -> float:
    """Return how far the two arms are from pointing straight at each other."""
    return abs(wrap_angle(arm_angle(a.angle, slot_a) - arm_angle(b.angle, slot_b) - math.pi))


def try_form_red_blue(
    a: CodonState,
    b: CodonState,
    tolerance: float = math.pi / 256,
    geometry: Geometry = DEFAULT_GEOMETRY,
) -> tuple[CodonState, CodonState] | None:
    """
    Try to bond the red field of `a` to the blue field of `b`.

    Returns the updated pair when a bond forms, None otherwise.
    """
    if a.codon_id == b.codon_id:
        return None
    if a.bonded(FieldSlot.RED) or b.bonded(FieldSlot.BLUE):
        return None
    if a.size(FieldSlot.RED) is not FieldSize.SMALL or b.size(FieldSlot.BLUE) is not FieldSize.SMALL:
        return None
    if not _tips_touch(a, FieldSlot.RED, b, FieldSlot.BLUE, geometry):
        return None
    if alignment_error(a, FieldSlot.RED, b, FieldSlot.BLUE) > tolerance + ANGLE_EPSILON:
        return None
    return (
        a.with_bond(FieldSlot.RED, b.codon_id).with_size(FieldSlot.RED, FieldSize.LARGE),
        b.with_bond(FieldSlot.BLUE, a.codon_id).with_size(FieldSlot.BLUE, FieldSize.LARGE),
    )


def try_form_green_purple(
    a: CodonState,
    b: CodonState,
    tolerance: float = math.pi / 3,
    geometry: Geometry = DEFAULT_GEOMETRY,
) -> tuple[CodonState, CodonState] | None:
    """
    Try to bond the vertical fields of `a` and `b`.

    Only purple bonds to green, and two large fields never start a bond.
    """
    if a.codon_id == b.codon_id or a.codon_type is b.codon_type:
        return None
    if a.bonded(FieldSlot.VERTICAL) or b.bonded(FieldSlot.VERTICAL):
        return None
    if a.size(FieldSlot.VERTICAL) is FieldSize.LARGE and b.size(FieldSlot.VERTICAL) is FieldSize.LARGE:
        return None
    if not _tips_touch(a, FieldSlot.VERTICAL, b, FieldSlot.VERTICAL, geometry):
        return None
    if alignment_error(a, FieldSlot.VERTICAL, b, FieldSlot.VERTICAL) > tolerance + ANGLE_EPSILON:
        return None
    return (
        a.with_bond(FieldSlot.VERTICAL, b.codon_id),
        b.with_bond(FieldSlot.VERTICAL, a.codon_id),
    )


def designated_pairs(codons: Sequence[CodonState]) -> list[BondedPair]:
    """Return every designated bond once, ordered by (lower id, higher id, slot)."""
    keyed = []
    for c in codons:
        red = c.bond[FieldSlot.RED]
        if red is not None:
            keyed.append(
                ((min(c.codon_id, red), max(c.codon_id, red), 0), (c.codon_id, FieldSlot.RED, red, FieldSlot.BLUE))
            )
        vertical = c.bond[FieldSlot.VERTICAL]
        if vertical is not None and c.codon_id < vertical:
            keyed.append(
                ((c.codon_id, vertical, 1), (c.codon_id, FieldSlot.VERTICAL, vertical, FieldSlot.VERTICAL))
            )
    keyed.sort(key=lambda kv: kv[0])
    return [pair for _, pair in keyed]


def break_separated_bonds(
    codons: Sequence[CodonState], step: int, geometry: Geometry = DEFAULT_GEOMETRY
) -> tuple[list[CodonState], list[EventRecord]]:
    """Dissolve every bond whose two field circles no longer intersect."""
    out = list(codons)
    events = []
    for i, slot_i, j, slot_j in designated_pairs(codons):
        a, b = out[i], out[j]
        if _tips_touch(a, slot_i, b, slot_j, geometry):
            continue
        a = a.with_bond(slot_i, None)
        b = b.with_bond(slot_j, None)
        if slot_i is FieldSlot.RED:
            a = a.with_size(FieldSlot.RED, FieldSize.SMALL)
            b = b.with_size(FieldSlot.BLUE, FieldSize.SMALL)
        out[i], out[j] = a, b
        events.append(EventRecord.bond(EventKind.BOND_BROKEN, step, i, slot_i, j, slot_j))
    return out, events


def form_bonds(
    codons: Sequence[CodonState],
    contacts: Iterable[ContactPair],
    step: int,
    red_blue_tolerance: float = math.pi / 256,
    vertical_tolerance: float = math.pi / 3,
    geometry: Geometry = DEFAULT_GEOMETRY,
) -> tuple[list[CodonState], list[EventRecord]]:
    """
    Form new bonds from `contacts`, visited in canonical order.

    A slot claimed by an earlier contact ignores later ones.
    """
    out = list(codons)
    events = []
    for contact in contacts:
        slots = (contact.slot_a, contact.slot_b)
        match slots:
            case (FieldSlot.RED, FieldSlot.BLUE):
                red, blue = contact.a, contact.b
            case (FieldSlot.BLUE, FieldSlot.RED):
                red, blue = contact.b, contact.a
            case (FieldSlot.VERTICAL, FieldSlot.VERTICAL):
                formed = try_form_green_purple(out[contact.a], out[contact.b], vertical_tolerance, geometry)
                if formed:
                    out[contact.a], out[contact.b] = formed
                    events.append(
                        EventRecord.bond(
                            EventKind.BOND_FORMED, step, contact.a, FieldSlot.VERTICAL, contact.b, FieldSlot.VERTICAL
                        )
                    )
                continue
            case _:
                continue
        formed = try_form_red_blue(out[red], out[blue], red_blue_tolerance, geometry)
        if formed:
            out[red], out[blue] = formed
            events.append(EventRecord.bond(EventKind.BOND_FORMED, step, red, FieldSlot.RED, blue, FieldSlot.BLUE))
    return out, events


def update_field_sizes(c: CodonState, iterations_after_split: int) -> CodonState:
    """Apply the field-size rules: vertical follows the red/blue bonds, yellow expires after its timer."""
    vertical = FieldSize.LARGE if c.red_blue_bond_count else FieldSize.SMALL
    c = c.with_size(FieldSlot.VERTICAL, vertical)
    if c.size(FieldSlot.YELLOW) is FieldSize.LARGE and c.yellow_steps_large >= iterations_after_split:
        c = c.with_size(FieldSlot.YELLOW, FieldSize.SMALL)
    return c


def large_yellow_pairs(
    codons: Sequence[CodonState], index: SpatialIndex, geometry: Geometry = DEFAULT_GEOMETRY
) -> list[tuple[int, int]]:
    """Return the intersecting pairs of large yellow fields."""
    if not any(c.field_size[FieldSlot.YELLOW] is FieldSize.LARGE for c in codons):
        return []
    return [
        (contact.a, contact.b)
        for contact in index.contacts(codons, geometry, slots=(FieldSlot.YELLOW,))
        if codons[contact.a].field_size[FieldSlot.YELLOW] is FieldSize.LARGE
        and codons[contact.b].field_size[FieldSlot.YELLOW] is FieldSize.LARGE
    ]
