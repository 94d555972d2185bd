"""
Checks on the state a step produces, used by `verify` and the tests.

A check returns the violations it finds; an empty list means the state is sound.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .bonding import detect_contacts, detect_contacts_brute_force
from .config import SimulationConfig
from .engine import Phase, Simulation, SimulationState
from .model import BOND_SLOTS, Bounds, CodonState, FieldSize, FieldSlot, Geometry, field_radius, tip_position

logger = logging.getLogger(__name__)

_OPPOSITE = {FieldSlot.RED: FieldSlot.BLUE, FieldSlot.BLUE: FieldSlot.RED, FieldSlot.VERTICAL: FieldSlot.VERTICAL}


@dataclass(frozen=True)
class Violation:
    step: int
    check: str
    codon_id: int | None
    message: str

    def __str__(self) -> str:  # noqa
        who = "" if self.codon_id is None else f" codon {self.codon_id}"
        return f"step {self.step}{who}: {self.check}: {self.message}"


def check_bonds(codons: Sequence[CodonState], step: int) -> list[Violation]:
    """Bonds are reciprocal, never to self, and vertical bonds join opposite types."""
    found = []
    for c in codons:
        for slot in BOND_SLOTS:
            j = c.bond[slot]
            if j is None:
                continue
            if j == c.codon_id:
                found.append(Violation(step, "self_bond", c.codon_id, f"{slot.name.lower()} bonded to itself"))
                continue
            if not 0 <= j < len(codons):
                found.append(Violation(step, "reciprocity", c.codon_id, f"bond to unknown codon {j}"))
                continue
            if codons[j].bond[_OPPOSITE[slot]] != c.codon_id:
                found.append(
                    Violation(step, "reciprocity", c.codon_id, f"{slot.name.lower()} bond to {j} is not returned")
                )
            if slot is FieldSlot.VERTICAL and codons[j].codon_type is c.codon_type:
                found.append(Violation(step, "vertical_types", c.codon_id, f"vertical bond to {j} of the same type"))
    return found


def check_bonded_circles(codons: Sequence[CodonState], step: int, geometry: Geometry) -> list[Violation]:
    """Every bond joins two intersecting field circles."""
    found = []
    for c in codons:
        for slot in (FieldSlot.RED, FieldSlot.VERTICAL):
            j = c.bond[slot]
            if j is None or (slot is FieldSlot.VERTICAL and j < c.codon_id) or not 0 <= j < len(codons):
                continue
            other = codons[j]
            d = tip_position(c, slot, geometry).minus(tip_position(other, _OPPOSITE[slot], geometry)).norm()
            reach = field_radius(c, slot, geometry) + field_radius(other, _OPPOSITE[slot], geometry)
            if d > reach:
                message = f"{slot.name.lower()} bond to {j} spans {d} > {reach}"
                found.append(Violation(step, "bonded_circles", c.codon_id, message))
    return found


def check_field_sizes(codons: Sequence[CodonState], step: int, iterations: int) -> list[Violation]:
    """Field sizes agree with the bonds and the yellow timer."""
    found = []
    for c in codons:
        for slot in (FieldSlot.RED, FieldSlot.BLUE):
            want = FieldSize.LARGE if c.bonded(slot) else FieldSize.SMALL
            if c.size(slot) is not want:
                found.append(Violation(step, "field_size", c.codon_id, f"{slot.name.lower()} is {c.size(slot).name}"))
        want = FieldSize.LARGE if c.red_blue_bond_count else FieldSize.SMALL
        if c.size(FieldSlot.VERTICAL) is not want:
            found.append(Violation(step, "vertical_size", c.codon_id, f"vertical is {c.size(FieldSlot.VERTICAL).name}"))
        if c.size(FieldSlot.YELLOW) is FieldSize.LARGE:
            ok = 1 <= c.yellow_steps_large <= iterations
        else:
            ok = c.yellow_steps_large == 0
        if not ok:
            found.append(
                Violation(
                    step,
                    "yellow_timer",
                    c.codon_id,
                    f"yellow {c.size(FieldSlot.YELLOW).name} after {c.yellow_steps_large} steps",
                )
            )
    return found


def check_strand_ends(codons: Sequence[CodonState], step: int) -> list[Violation]:
    """A codon sure to be at a double strand end has exactly one red or blue neighbour."""
    return [
        Violation(step, "strand_end", c.codon_id, f"state 2 with {c.red_blue_bond_count} red/blue neighbours")
        for c in codons
        if c.strand_location_state == 2 and c.red_blue_bond_count != 1
    ]


def check_container(codons: Sequence[CodonState], step: int, bounds: Bounds) -> list[Violation]:
    """Codon middles stay inside the container and every value is finite."""
    return [
        Violation(step, "container", c.codon_id, f"middle at {tuple(c.position)} outside the container")
        for c in codons
        if not bounds.contains(c.position)
        or not all(math.isfinite(v) for v in (*c.position, *c.velocity, c.angle, c.angular_velocity))
    ]


def check_contacts(codons: Sequence[CodonState], step: int, geometry: Geometry) -> list[Violation]:
    """The spatial index finds exactly the contacts an all-pairs scan finds."""
    fast = detect_contacts(codons, geometry)
    slow = detect_contacts_brute_force(codons, geometry)
    if fast == slow:
        return []
    missing = sorted(set(slow) - set(fast))
    extra = sorted(set(fast) - set(slow))
    return [Violation(step, "contacts", None, f"index missed {missing[:3]}, invented {extra[:3]}")]


@dataclass
class InvariantChecker:
    """A step hook running every check at the phase it applies to."""

    config: SimulationConfig
    contacts_every: int = 50
    violations: list[Violation] = field(default_factory=list)
    strand_ends_seen: int = 0

    def __call__(self, phase: Phase, step: int, codons: Sequence[CodonState]) -> None:  # noqa
        cfg = self.config
        match phase:
            case Phase.BONDING:
                self.violations.extend(check_bonded_circles(codons, step, cfg.geometry))
            case Phase.COMMITTED:
                self.violations.extend(check_bonds(codons, step))
                self.violations.extend(check_field_sizes(codons, step, cfg.iterations))
                self.violations.extend(check_strand_ends(codons, step))
                self.violations.extend(check_container(codons, step, cfg.bounds))
                if self.contacts_every and step % self.contacts_every == 0:
                    self.violations.extend(check_contacts(codons, step, cfg.geometry))
                self.strand_ends_seen += sum(1 for c in codons if c.strand_location_state == 2)


@dataclass
class VerifyReport:
    steps: int
    violations: list[Violation]
    strand_ends_seen: int
    final_state: SimulationState

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_run(
    cfg: SimulationConfig,
    steps: int,
    state: SimulationState | None = None,
    contacts_every: int = 50,
) -> VerifyReport:
    """Run `steps` steps checking every invariant along the way."""
    checker = InvariantChecker(config=cfg, contacts_every=contacts_every)
    sim = Simulation(cfg, state=state, hook=checker)
    result = sim.run(steps)
    if checker.violations:
        logger.warning("%d invariant violations, first: %s", len(checker.violations), checker.violations[0])
    return VerifyReport(
        steps=result.state.step,
        violations=checker.violations,
        strand_ends_seen=checker.strand_ends_seen,
        final_state=result.state,
    )
