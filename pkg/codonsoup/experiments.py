"""
Parameter sweeps and the calibration of brownian amplitudes.

Both drive many independent runs that stop on a target event and record the
step of its first occurrence. A run that never reaches the target counts as
`max_steps + 1` in medians.
"""

import csv
import itertools
import logging
from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Sequence

import numpy as np

from .analytics import EventKind, replicate
from .config import SimulationConfig, set_path
from .engine import RunResult, run, seed_bits
from .exceptions import ConfigException

logger = logging.getLogger(__name__)

Runner = Callable[[SimulationConfig], RunResult]


@dataclass(frozen=True)
class SweepAxis:
    """One dimension of a sweep: linked keys set together to each of `values`."""

    keys: tuple[str, ...]
    values: tuple[str, ...]

    @staticmethod
    def parse(text: str) -> "SweepAxis":
        """
        Parse `key[+key...]=value,value...`.

        >>> SweepAxis.parse("angle_tolerance.red+angle_tolerance.blue=pi/16,pi/64")
        SweepAxis(keys=('angle_tolerance.red', 'angle_tolerance.blue'), values=('pi/16', 'pi/64'))
        """
        keys, sep, values = text.partition("=")
        if not sep or not keys or not values:
            raise ConfigException(f"sweep axis {text!r}, want key[+key...]=value,value...")
        return SweepAxis(
            keys=tuple(k.strip() for k in keys.split("+")),
            values=tuple(v.strip() for v in values.split(",")),
        )

    @property
    def name(self) -> str:
        return "+".join(self.keys)

    def apply(self, cfg: SimulationConfig, value: str) -> SimulationConfig:
        for key in self.keys:
            cfg = set_path(cfg, key, value)
        return cfg


@dataclass
class SweepCell:
    assignment: tuple[str, ...]
    seeds: tuple[int, ...]
    first_steps: list[int | None] = field(default_factory=list)
    max_steps: int = 0

    @property
    def hits(self) -> int:
        return sum(1 for s in self.first_steps if s is not None)

    @property
    def median(self) -> float:
        """Median first-event step, misses censored at `max_steps + 1`."""
        if not self.first_steps:
            return float("nan")
        return float(np.median([self.max_steps + 1 if s is None else s for s in self.first_steps]))


def first_event_step(
    cfg: SimulationConfig, kind: EventKind, bits: str | None = None, runner: Runner = run
) -> int | None:
    """Run `cfg` until the first `kind` event and return its step, None when it never happens."""
    result = runner(cfg.with_overrides(stop_on=kind, stop_on_bits=bits, snapshot_every=0))
    e = result.first(kind, bits)
    return None if e is None else e.step


def sweep(
    base: SimulationConfig,
    axes: Sequence[SweepAxis],
    seeds: Sequence[int],
    stop_on: EventKind,
    stop_on_bits: str | None = None,
    max_steps: int | None = None,
    runner: Runner = run,
) -> list[SweepCell]:
    """Run every cell of the cartesian grid over `axes` once per seed."""
    budget = base.max_steps if max_steps is None else max_steps
    cells = []
    for assignment in itertools.product(*(axis.values for axis in axes)):
        cfg = base.with_overrides(max_steps=budget)
        for axis, value in zip(axes, assignment):
            cfg = axis.apply(cfg, value)
        cell = SweepCell(assignment=tuple(assignment), seeds=tuple(seeds), max_steps=budget)
        for seed in seeds:
            cell.first_steps.append(first_event_step(cfg.with_overrides(rng_seed=seed), stop_on, stop_on_bits, runner))
        logger.info("sweep %s: %d/%d hits, median %s", assignment, cell.hits, len(seeds), cell.median)
        cells.append(cell)
    return cells


def write_sweep(axes: Sequence[SweepAxis], cells: Iterable[SweepCell], out: IO[str]) -> None:
    """Write one row per cell; misses show as `-` in `first_steps`."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow([*(axis.name for axis in axes), "seeds", "hits", "median_first_step", "first_steps"])
    for cell in cells:
        steps = " ".join("-" if s is None else str(s) for s in cell.first_steps)
        w.writerow([*cell.assignment, len(cell.seeds), cell.hits, cell.median, steps])


@dataclass
class CalibrationTrial:
    linear_amplitude: float
    angular_amplitude: float
    success: float


@dataclass
class CalibrationResult:
    linear_amplitude: float
    angular_amplitude: float
    success: float
    passed: bool
    trials: list[CalibrationTrial] = field(default_factory=list)


def calibrate_brownian(
    base: SimulationConfig,
    seeds: Sequence[int],
    budget: int,
    threshold: float = 0.8,
    low: float = 0.01,
    high: float = 2.0,
    factor: float = 2.0,
    rounds: int = 5,
    target: EventKind = EventKind.STRAND_COMPLETED,
    bits: str | None = None,
    runner: Runner = run,
) -> CalibrationResult:
    """
    Search the brownian linear amplitude at which seeded replication succeeds.

    A geometric scan from `low` finds the first amplitude whose success fraction
    over `seeds` reaches `threshold` within `budget` steps; bisection against the
    last failing amplitude then narrows it. The angular amplitude keeps its ratio
    to the linear one. `bits` defaults to the daughter of the seeded pattern, symmetric when so configured.
    """
    seeded = seed_bits(base)
    if bits is None and seeded:
        bits = replicate(seeded)
    if base.brownian_linear_amplitude > 0:
        ratio = base.brownian_angular_amplitude / base.brownian_linear_amplitude
    else:
        ratio = 0.5
    trials: list[CalibrationTrial] = []

    def success(a: float) -> float:
        cfg = base.with_overrides(
            brownian_linear_amplitude=a, brownian_angular_amplitude=a * ratio, max_steps=budget
        )
        hits = sum(
            first_event_step(cfg.with_overrides(rng_seed=s), target, bits, runner) is not None for s in seeds
        )
        trial = CalibrationTrial(a, a * ratio, hits / len(seeds))
        trials.append(trial)
        logger.info("calibrate: amplitude %s succeeds on %d/%d seeds", a, hits, len(seeds))
        return trial.success

    failing = None
    passing = None
    a = low
    while a <= high:
        if success(a) >= threshold:
            passing = a
            break
        failing = a
        a *= factor
    if passing is None:
        best = max(trials, key=lambda t: (t.success, -t.linear_amplitude))
        return CalibrationResult(best.linear_amplitude, best.angular_amplitude, best.success, False, trials)
    if failing is not None:
        for _ in range(rounds):
            mid = (failing + passing) / 2
            if success(mid) >= threshold:
                passing = mid
            else:
                failing = mid
    chosen = next(t for t in reversed(trials) if t.linear_amplitude == passing)
    return CalibrationResult(passing, passing * ratio, chosen.success, True, trials)
