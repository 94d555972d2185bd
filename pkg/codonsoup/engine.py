"""
Scenario construction and the simulation loop.

A step runs its phases in a fixed order on the committed state of the previous
step and commits once at the end:

1. spatial index and field contacts
2. breaking of separated bonds
3. bond formation, contacts in canonical order
4. field sizes
5. both state machines, each from a snapshot
6. splits
7. physics
8. timers
"""

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Callable, Iterable, NamedTuple, Sequence

from .analytics import EventDetector, EventKind, EventRecord, StrandRecord, extract_strands, symmetrize
from .bonding import (
    SpatialIndex,
    break_separated_bonds,
    designated_pairs,
    form_bonds,
    large_yellow_pairs,
    update_field_sizes,
)
from .config import SimulationConfig
from .exceptions import SeedStrandException
from .fsm import apply_splits, run_state_machines, tick_timers
from .model import (
    DEFAULT_GEOMETRY,
    CodonState,
    CodonType,
    FieldSize,
    FieldSlot,
    Geometry,
    Vec2,
    arm_angle,
    unit_heading,
    wrap_angle,
)
from .physics import advance
from .rng import brownian_kicks, soup_draws

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationState:
    """
    The committed state after `step` steps.

    Codon i sits at index i. The random streams are keyed by (rng_seed, step),
    so the pair is the whole generator cursor.
    """

    step: int
    codons: tuple[CodonState, ...]
    rng_seed: int

    def __len__(self) -> int:  # noqa
        return len(self.codons)


def encode_seed_strand(
    bits: str,
    start: Vec2,
    angle: float,
    first_id: int = 0,
    geometry: Geometry = DEFAULT_GEOMETRY,
) -> list[CodonState]:
    """
    Build an assembled single strand encoding `bits`.

    Codon k of the strand has id `first_id + k`, sits at `start` moved k spacings
    along its red arm, and is red-blue bonded to codon k + 1; the bonded red and
    blue tips coincide. The codon with the free blue field carries the first bit.
    """
    if not bits:
        raise SeedStrandException("empty seed strand")
    try:
        types = [CodonType.from_bit(b) for b in bits]
    except ValueError:
        raise SeedStrandException(f"invalid seed strand {bits!r}, want a string of 0 and 1") from None
    heading = wrap_angle(angle)
    spacing = geometry.arm_length.red + geometry.arm_length.blue
    along = unit_heading(arm_angle(heading, FieldSlot.RED)).times(spacing)
    n = len(types)
    codons = []
    for k, codon_type in enumerate(types):
        red = first_id + k + 1 if k + 1 < n else None
        blue = first_id + k - 1 if k > 0 else None
        sizes = (
            FieldSize.LARGE if red is not None else FieldSize.SMALL,
            FieldSize.LARGE if blue is not None else FieldSize.SMALL,
            FieldSize.LARGE if n >= 2 else FieldSize.SMALL,
            FieldSize.SMALL,
        )
        codons.append(
            CodonState(
                codon_id=first_id + k,
                codon_type=codon_type,
                position=start.plus(along.times(k)),
                angle=heading,
                field_size=sizes,
                bond=(red, blue, None),
            )
        )
    return codons


def seed_bits(cfg: SimulationConfig) -> str | None:
    """Return the pattern actually seeded: the seed strand, or its symmetric form."""
    if cfg.seed_strand is None:
        return None
    return symmetrize(cfg.seed_strand) if cfg.seed_symmetric else cfg.seed_strand


def _place_seed(cfg: SimulationConfig, bits: str) -> list[CodonState]:
    bounds = cfg.bounds
    cx = cfg.seed_x if cfg.seed_x is not None else bounds.min_x + bounds.width / 2
    cy = cfg.seed_y if cfg.seed_y is not None else bounds.min_y + bounds.height / 2
    geometry = cfg.geometry
    spacing = geometry.arm_length.red + geometry.arm_length.blue
    along = unit_heading(arm_angle(wrap_angle(cfg.seed_angle), FieldSlot.RED))
    start = Vec2(cx, cy).minus(along.times(spacing * (len(bits) - 1) / 2))
    strand = encode_seed_strand(bits, start, cfg.seed_angle, geometry=geometry)
    for c in strand:
        if not bounds.contains(c.position):
            raise SeedStrandException(
                f"seed strand of {len(bits)} codons does not fit in a {cfg.container_width} x "
                f"{cfg.container_height} container at ({cx}, {cy})"
            )
    return strand


def init_soup(cfg: SimulationConfig) -> SimulationState:
    """
    Build the initial state: the seed strand first, then the free codons.

    Free codons of type 0 come before those of type 1, at uniform random
    positions and headings drawn from the soup stream of `cfg.rng_seed`.
    """
    codons: list[CodonState] = []
    bits = seed_bits(cfg)
    if bits:
        codons.extend(_place_seed(cfg, bits))
    types = [CodonType.TYPE0] * cfg.free_type0 + [CodonType.TYPE1] * cfg.free_type1
    bounds = cfg.bounds
    for codon_type, (fx, fy, fa) in zip(types, soup_draws(cfg.rng_seed, len(types))):
        codons.append(
            CodonState(
                codon_id=len(codons),
                codon_type=codon_type,
                position=Vec2(bounds.min_x + fx * bounds.width, bounds.min_y + fy * bounds.height),
                angle=wrap_angle(-math.pi + fa * 2.0 * math.pi),
            )
        )
    logger.debug("initial soup: %d codons, seed %s", len(codons), bits)
    return SimulationState(step=0, codons=tuple(codons), rng_seed=cfg.rng_seed)


class Phase(StrEnum):
    BONDING = "bonding"
    STATE_MACHINES = "state_machines"
    COMMITTED = "committed"


StepHook = Callable[[Phase, int, Sequence[CodonState]], None]
"""Called with the phase, the step being computed and the codons after that phase."""


def step(
    state: SimulationState, cfg: SimulationConfig, hook: StepHook | None = None
) -> tuple[SimulationState, list[EventRecord]]:
    """Compute one step. Events carry the number of the step they happened in."""
    now = state.step + 1
    geometry = cfg.geometry
    iterations = cfg.iterations
    codons = list(state.codons)

    index = SpatialIndex.build(codons, geometry)
    contacts = index.contacts(codons, geometry)

    codons, broken = break_separated_bonds(codons, now, geometry)
    codons, formed = form_bonds(codons, contacts, now, cfg.red_blue_tolerance, cfg.vertical_tolerance, geometry)
    if hook:
        hook(Phase.BONDING, now, codons)

    codons = [update_field_sizes(c, iterations) for c in codons]

    codons, entered = run_state_machines(codons, iterations)
    if hook:
        hook(Phase.STATE_MACHINES, now, codons)
    codons, splits = apply_splits(codons, entered, now)

    # tips have not moved since the index was built
    kicks = brownian_kicks(cfg.rng_seed, now, len(codons)) if cfg.has_brownian else None
    codons = advance(
        codons,
        kicks,
        designated_pairs(codons),
        large_yellow_pairs(codons, index, geometry),
        cfg.physics,
        cfg.bounds,
    )

    codons = [tick_timers(c) for c in codons]
    if hook:
        hook(Phase.COMMITTED, now, codons)
    return SimulationState(step=now, codons=tuple(codons), rng_seed=state.rng_seed), broken + formed + splits


def free_codon_count(codons: Iterable[CodonState]) -> int:
    """Count codons without any bond."""
    return sum(1 for c in codons if c.is_free)


class MetricsRow(NamedTuple):
    step: int
    normalized_time: float
    free_codons: int
    strands: int
    complete_strands: int
    events_cum: int


class RunObserver:
    """Receives the artifacts of a run as they are produced. Every method is a no-op by default."""

    def on_snapshot(self, state: SimulationState, cfg: SimulationConfig) -> None:
        pass

    def on_events(self, events: Sequence[EventRecord]) -> None:
        pass

    def on_metrics(self, row: MetricsRow) -> None:
        pass

    def on_finish(self, result: "RunResult") -> None:
        pass


@dataclass
class RunResult:
    config: SimulationConfig
    state: SimulationState
    events: list[EventRecord] = field(default_factory=list)
    metrics: list[MetricsRow] = field(default_factory=list)
    strands: list[StrandRecord] = field(default_factory=list)
    stop_event: EventRecord | None = None

    @property
    def stopped_early(self) -> bool:
        return self.stop_event is not None

    @property
    def normalized_time(self) -> float:
        return self.config.normalized_time(self.state.step)

    def first(self, kind: EventKind, bits: str | None = None) -> EventRecord | None:
        """Return the first event of `kind`, optionally with the given bit pattern."""
        for e in self.events:
            if e.kind is kind and (bits is None or e.bits == bits):
                return e
        return None


class Simulation:
    """
    Drives steps, strand analysis and the observers.

    Strands are analysed every `metrics_every` steps, so strand events carry the
    step of the analysis that found them.
    """

    def __init__(  # noqa
        self,
        config: SimulationConfig,
        state: SimulationState | None = None,
        observers: Iterable[RunObserver] = (),
        hook: StepHook | None = None,
    ):
        self.config = config
        self.state = state if state is not None else init_soup(config)
        self.observers = list(observers)
        self.hook = hook
        self.detector = EventDetector(seed_bits=seed_bits(config))
        self.strands = extract_strands(self.state.codons)
        self.detector.prime(self.strands)
        self.events_cum = 0

    def _stops(self, e: EventRecord) -> bool:
        cfg = self.config
        if cfg.stop_on is None or e.kind is not cfg.stop_on:
            return False
        return cfg.stop_on_bits is None or e.bits == cfg.stop_on_bits

    def _metrics(self) -> MetricsRow:
        return MetricsRow(
            step=self.state.step,
            normalized_time=self.config.normalized_time(self.state.step),
            free_codons=free_codon_count(self.state.codons),
            strands=len(self.strands),
            complete_strands=sum(1 for s in self.strands if s.complete),
            events_cum=self.events_cum,
        )

    def _emit_snapshot(self) -> None:
        for o in self.observers:
            o.on_snapshot(self.state, self.config)

    def _emit_metrics(self, result: RunResult) -> None:
        row = self._metrics()
        result.metrics.append(row)
        for o in self.observers:
            o.on_metrics(row)

    def analyze(self) -> list[EventRecord]:
        """Extract the strands of the current state and return the new strand events."""
        strands = extract_strands(self.state.codons)
        events = self.detector.detect(self.strands, strands, self.state.step)
        self.strands = strands
        return events

    def advance(self) -> list[EventRecord]:
        """Run one step, plus the strand analysis when it falls on this step."""
        self.state, events = step(self.state, self.config, self.hook)
        if self.state.step % self.config.metrics_every == 0:
            events.extend(self.analyze())
        return events

    def run(self, steps: int | None = None) -> RunResult:
        """
        Run `steps` steps (the configured `max_steps` when None) or until a stop event.

        Snapshots are emitted for the starting state, every `snapshot_every` steps
        and for the final state.
        """
        cfg = self.config
        budget = cfg.max_steps if steps is None else steps
        end = self.state.step + budget
        result = RunResult(config=cfg, state=self.state)
        logger.info(
            "run: %d codons from step %d for %d steps, dt %s, seed %d",
            len(self.state),
            self.state.step,
            budget,
            cfg.timestep_duration,
            cfg.rng_seed,
        )
        self._emit_snapshot()
        self._emit_metrics(result)
        last_snapshot = self.state.step
        while self.state.step < end:
            events = self.advance()
            now = self.state.step
            if events:
                self.events_cum += len(events)
                result.events.extend(events)
                for o in self.observers:
                    o.on_events(events)
                for e in events:
                    if e.kind not in (EventKind.BOND_FORMED, EventKind.BOND_BROKEN):
                        logger.info("step %d: %s %s", now, e.kind, e.payload)
                result.stop_event = next((e for e in events if self._stops(e)), None)
            if now % cfg.metrics_every == 0:
                self._emit_metrics(result)
            if cfg.snapshot_every and now % cfg.snapshot_every == 0:
                self._emit_snapshot()
                last_snapshot = now
            if now % cfg.progress_every == 0:
                logger.debug("step %d, normalized time %s, %d events", now, cfg.normalized_time(now), self.events_cum)
            if result.stop_event is not None:
                logger.info("stopping on %s at step %d", result.stop_event.kind, now)
                break
        if self.state.step % cfg.metrics_every != 0:
            result.events.extend(self._flush_analysis())
            self._emit_metrics(result)
        if last_snapshot != self.state.step:
            self._emit_snapshot()
        result.state = self.state
        result.strands = list(self.strands)
        logger.info(
            "run finished at step %d, normalized time %s, %d events",
            self.state.step,
            result.normalized_time,
            self.events_cum,
        )
        for o in self.observers:
            o.on_finish(result)
        return result

    def _flush_analysis(self) -> list[EventRecord]:
        events = self.analyze()
        if events:
            self.events_cum += len(events)
            for o in self.observers:
                o.on_events(events)
        return events


def run(
    cfg: SimulationConfig,
    state: SimulationState | None = None,
    observers: Iterable[RunObserver] = (),
    steps: int | None = None,
) -> RunResult:
    """Run a simulation from `state`, or from a fresh soup."""
    return Simulation(cfg, state=state, observers=observers).run(steps)
