"""
Strand extraction, the mirror algebra on bit strings, and strand events.

Strands exist only here: the simulation itself keeps nothing but per-codon bonds.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Iterable, Sequence

from .model import CodonState, CodonType, FieldSlot

_FLIP = str.maketrans("01", "10")


def _check_bits(x: str) -> None:
    if x.strip("01"):
        raise ValueError(f"not a bit string: {x!r}")


def negate(x: str) -> str:
    """
    Swap every 0 and 1.

    >>> negate("00011001")
    '11100110'
    >>> negate("")
    ''
    """
    _check_bits(x)
    return x.translate(_FLIP)


def reverse(x: str) -> str:
    """
    Reverse the order of the bits.

    >>> reverse(negate("00011001"))
    '01100111'
    """
    _check_bits(x)
    return x[::-1]


def concat(x: str, y: str) -> str:
    """Append `y` to `x`."""
    _check_bits(x)
    _check_bits(y)
    return x + y


def replicate(x: str) -> str:
    """
    Return the pattern a strand `x` templates: its negative mirror image.

    >>> replicate("00011001")
    '01100111'
    """
    return reverse(negate(x))


def symmetrize(x: str) -> str:
    """
    Return `x` followed by its negative mirror image, a pattern replication does not change.

    >>> symmetrize("00011001")
    '0001100101100111'
    >>> replicate(symmetrize("0")) == symmetrize("0")
    True
    """
    return concat(x, replicate(x))


def decode(codons: Iterable[CodonState]) -> str:
    """Read the bits of an ordered run of codons."""
    return "".join(c.codon_type.bit for c in codons)


class EventKind(StrEnum):
    BOND_FORMED = "BondFormed"
    BOND_BROKEN = "BondBroken"
    SPLIT_TRIGGERED = "SplitTriggered"
    STRAND_COMPLETED = "StrandCompleted"
    SPONTANEOUS_DIMER = "SpontaneousDimer"
    MUTATION = "Mutation"


@dataclass(frozen=True)
class EventRecord:
    step: int
    kind: EventKind
    payload: dict[str, Any] = field(default_factory=dict)

    @staticmethod
    def bond(kind: EventKind, step: int, a: int, slot_a: FieldSlot, b: int, slot_b: FieldSlot) -> "EventRecord":
        return EventRecord(
            step=step,
            kind=kind,
            payload={"codons": [a, b], "slots": [slot_a.name.lower(), slot_b.name.lower()]},
        )

    @property
    def bits(self) -> str | None:
        return self.payload.get("bits")


@dataclass(frozen=True)
class StrandRecord:
    """A chain of red-blue neighbours, read from the end with no blue neighbour."""

    strand_id: int
    codon_ids: tuple[int, ...]
    bits: str
    complete: bool
    partner: int | None = None

    @property
    def key(self) -> frozenset[int]:
        return frozenset(self.codon_ids)

    def __len__(self) -> int:  # noqa
        return len(self.codon_ids)


def _chain(codons: Sequence[CodonState], start: int) -> list[int]:
    # walk to the blue-free end, then read red-ward
    first = start
    seen = {first}
    while (blue := codons[first].bond[FieldSlot.BLUE]) is not None and blue not in seen:
        first = blue
        seen.add(first)
    if codons[first].bond[FieldSlot.BLUE] is not None:
        # a ring has no blue-free end; read it from its lowest id
        first = min(seen)
    order = [first]
    visited = {first}
    while (red := codons[order[-1]].bond[FieldSlot.RED]) is not None and red not in visited:
        order.append(red)
        visited.add(red)
    return order


def extract_strands(codons: Sequence[CodonState]) -> list[StrandRecord]:
    """
    Partition the codons into strands along their red-blue bonds.

    Strands are numbered by their lowest codon id; singletons are included.
    """
    owner: dict[int, int] = {}
    chains: list[list[int]] = []
    for c in codons:
        if c.codon_id in owner:
            continue
        chain = _chain(codons, c.codon_id)
        for i in chain:
            owner[i] = len(chains)
        chains.append(chain)
    records = []
    for strand_id, chain in enumerate(chains):
        partners = Counter(
            owner[p] for i in chain if (p := codons[i].bond[FieldSlot.VERTICAL]) is not None and owner[p] != strand_id
        )
        partner = min(partners, key=lambda s: (-partners[s], s)) if partners else None
        records.append(
            StrandRecord(
                strand_id=strand_id,
                codon_ids=tuple(chain),
                bits=decode(codons[i] for i in chain),
                complete=len(chain) >= 2,
                partner=partner,
            )
        )
    return records


def population(strands: Iterable[StrandRecord]) -> Counter[str]:
    """Count complete strands by bit pattern."""
    return Counter(s.bits for s in strands if s.complete)


@dataclass
class EventDetector:
    """
    Turns successive strand extractions into strand events.

    A strand completes when a codon chain of length two or more is first seen
    without a partner strand, i.e. after it split off its template.
    A dimer is spontaneous when it first appears without a complete template.
    """

    seed_bits: str | None = None
    primed: bool = False
    reported: set[frozenset[int]] = field(default_factory=set)
    appeared: set[frozenset[int]] = field(default_factory=set)

    @property
    def lineage(self) -> frozenset[str]:
        if not self.seed_bits:
            return frozenset()
        return frozenset({self.seed_bits, replicate(self.seed_bits)})

    def prime(self, strands: Iterable[StrandRecord]) -> None:
        """Treat `strands` as already known."""
        for s in strands:
            if s.complete:
                self.appeared.add(s.key)
                self.reported.add(s.key)
        self.primed = True

    def detect(self, prev: Sequence[StrandRecord], new: Sequence[StrandRecord], step: int) -> list[EventRecord]:
        if not self.primed:
            self.prime(prev)
        lineage = self.lineage
        events = []
        for s in new:
            if not s.complete:
                continue
            payload = {"strand": list(s.codon_ids), "bits": s.bits}
            if s.key not in self.appeared:
                self.appeared.add(s.key)
                templated = s.partner is not None and new[s.partner].complete
                if len(s) == 2 and not templated:
                    events.append(EventRecord(step, EventKind.SPONTANEOUS_DIMER, dict(payload)))
            if s.partner is None and s.key not in self.reported:
                self.reported.add(s.key)
                events.append(EventRecord(step, EventKind.STRAND_COMPLETED, dict(payload)))
                if lineage and s.bits not in lineage:
                    events.append(EventRecord(step, EventKind.MUTATION, dict(payload)))
        return events


def detect_events(
    prev: Sequence[StrandRecord],
    new: Sequence[StrandRecord],
    step: int,
    detector: EventDetector | None = None,
) -> list[EventRecord]:
    """Return the strand events between two analysis points."""
    if detector is None:
        detector = EventDetector()
    return detector.detect(prev, new, step)


def count_types(codons: Iterable[CodonState]) -> dict[CodonType, int]:
    """Count codons by type, listing every type."""
    counts = Counter(c.codon_type for c in codons)
    return {t: counts.get(t, 0) for t in CodonType}
