"""
The two per-codon state machines that decide when a double strand splits.

strand_location_state: 0 not at an end, 1 maybe at the end of a double strand,
2 my vertical neighbour agrees. splitting_state: x, then y spreading from the end
with no red neighbour, then z spreading back; entering z splits.
Both machines update synchronously from a snapshot of the previous values.
"""

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

from .analytics import EventKind, EventRecord
from .model import CodonState, FieldSize, FieldSlot, SplittingState

logger = logging.getLogger(__name__)


class Neighbor(NamedTuple):
    codon_id: int
    strand_location_state: int
    splitting_state: SplittingState


@dataclass(frozen=True, slots=True)
class NeighborView:
    red: Neighbor | None = None
    blue: Neighbor | None = None
    vertical: Neighbor | None = None

    @staticmethod
    def of(c: CodonState, snapshot: Sequence[CodonState]) -> "NeighborView":
        """Look up the bonded neighbours of `c` in `snapshot`."""

        def at(slot: FieldSlot) -> Neighbor | None:
            i = c.bond[slot]
            if i is None:
                return None
            n = snapshot[i]
            return Neighbor(i, n.strand_location_state, n.splitting_state)

        return NeighborView(red=at(FieldSlot.RED), blue=at(FieldSlot.BLUE), vertical=at(FieldSlot.VERTICAL))

    @property
    def red_blue_count(self) -> int:
        return int(self.red is not None) + int(self.blue is not None)


def update_strand_location(c: CodonState, nv: NeighborView) -> int:
    """Return the next strand_location_state of `c`."""
    at_end = nv.red_blue_count == 1 and nv.vertical is not None
    match c.strand_location_state:
        case 0:
            return 1 if at_end else 0
        case 1:
            if not at_end:
                return 0
            assert nv.vertical is not None
            return 2 if nv.vertical.strand_location_state in (1, 2) else 1
        case _:
            if not at_end:
                return 0
            assert nv.vertical is not None
            return 0 if nv.vertical.strand_location_state == 0 else 2


def update_splitting(c: CodonState, nv: NeighborView, iterations_after_split: int) -> SplittingState:
    """
    Apply the splitting rules to `c`.

    `c` carries this step's strand_location_state; `nv` the neighbours' values.
    A missing vertical neighbour counts as "not in state 1".
    """
    own = c.strand_location_state
    vertical = nv.vertical.strand_location_state if nv.vertical is not None else None
    both_ends = own == 2 and vertical == 2
    unblocked = own != 1 and vertical != 1
    match c.splitting_state:
        case SplittingState.X:
            if (both_ends and nv.red is None) or (
                unblocked and nv.red is not None and nv.red.splitting_state is SplittingState.Y
            ):
                return SplittingState.Y
        case SplittingState.Y:
            if (both_ends and nv.blue is None) or (
                unblocked and nv.blue is not None and nv.blue.splitting_state is SplittingState.Z
            ):
                return SplittingState.Z
        case SplittingState.Z:
            if (nv.red is None and c.z_steps >= iterations_after_split) or (
                nv.red is not None and nv.red.splitting_state is SplittingState.X
            ):
                return SplittingState.X
    return c.splitting_state


def execute_split(
    c: CodonState, partner: CodonState | None, step: int
) -> tuple[CodonState, CodonState | None, EventRecord]:
    """Switch the yellow field of `c` on and release its vertical bond on both sides."""
    released = c.bond[FieldSlot.VERTICAL]
    c = replace(c.with_bond(FieldSlot.VERTICAL, None), yellow_steps_large=0).with_size(
        FieldSlot.YELLOW, FieldSize.LARGE
    )
    if partner is not None and partner.bond[FieldSlot.VERTICAL] == c.codon_id:
        partner = partner.with_bond(FieldSlot.VERTICAL, None)
    return c, partner, EventRecord(step, EventKind.SPLIT_TRIGGERED, {"codon": c.codon_id, "released": released})


def run_state_machines(codons: Sequence[CodonState], iterations_after_split: int) -> tuple[list[CodonState], list[int]]:
    """
    Run both machines over all codons.

    Returns the new codons and the ids that entered z.
    """
    located = []
    for c in codons:
        s = update_strand_location(c, NeighborView.of(c, codons))
        located.append(c if s == c.strand_location_state else replace(c, strand_location_state=s))
    out = []
    entered = []
    for c in located:
        state = update_splitting(c, NeighborView.of(c, located), iterations_after_split)
        if state is not c.splitting_state:
            if state is SplittingState.Z:
                entered.append(c.codon_id)
            c = replace(c, splitting_state=state)
        out.append(c)
    return out, entered


def apply_splits(
    codons: Sequence[CodonState], entered: Sequence[int], step: int
) -> tuple[list[CodonState], list[EventRecord]]:
    """Execute the split of every codon in `entered`, in id order."""
    out = list(codons)
    events = []
    for i in sorted(entered):
        c = out[i]
        j = c.bond[FieldSlot.VERTICAL]
        c, partner, event = execute_split(c, out[j] if j is not None else None, step)
        out[i] = c
        if j is not None and partner is not None:
            out[j] = partner
        logger.debug("step %d: codon %d split, released %s", step, i, j)
        events.append(event)
    return out, events


def tick_timers(c: CodonState) -> CodonState:
    """Advance the yellow and z timers after a committed step."""
    yellow = c.yellow_steps_large + 1 if c.field_size[FieldSlot.YELLOW] is FieldSize.LARGE else 0
    z = c.z_steps + 1 if c.splitting_state is SplittingState.Z else 0
    if yellow == c.yellow_steps_large and z == c.z_steps:
        return c
    return replace(c, yellow_steps_large=yellow, z_steps=z)
