import io
import math

import pytest

from codonsoup.analytics import EventKind, EventRecord, symmetrize
from codonsoup.config import PRESETS, SimulationConfig
from codonsoup.engine import RunResult, SimulationState
from codonsoup.exceptions import ConfigException
from codonsoup.experiments import (
    SweepAxis,
    SweepCell,
    calibrate_brownian,
    first_event_step,
    sweep,
    write_sweep,
)

BASE = SimulationConfig(free_type0=44, free_type1=44, seed_strand=None, max_steps=1000)


def result(cfg, events):
    return RunResult(config=cfg, state=SimulationState(step=0, codons=(), rng_seed=cfg.rng_seed), events=events)


def tolerance_runner(cfg):
    """Wider tolerances make dimers sooner; seed 3 never makes one."""
    if cfg.rng_seed == 3:
        return result(cfg, [])
    at = int(round(100 / cfg.red_blue_tolerance)) + cfg.rng_seed
    if at > cfg.max_steps:
        return result(cfg, [])
    return result(cfg, [EventRecord(at, EventKind.SPONTANEOUS_DIMER, {"strand": [0, 1], "bits": "01"})])


@pytest.mark.parametrize(
    "title,text,want",
    [
        ("one key", "rng_seed=1,2", SweepAxis(("rng_seed",), ("1", "2"))),
        ("linked keys", "a.red + a.blue = x", SweepAxis(("a.red", "a.blue"), ("x",))),
    ],
)
def test_sweep_axis_parse(title, text, want):
    assert SweepAxis.parse(text) == want, title


@pytest.mark.parametrize("text", ["rng_seed", "=1", "rng_seed="])
def test_sweep_axis_parse_rejects(text):
    with pytest.raises(ConfigException):
        SweepAxis.parse(text)


def test_sweep_axis_apply():
    axis = SweepAxis.parse("angle_tolerance.red+angle_tolerance.blue=pi/16")
    cfg = axis.apply(BASE, "pi/16")
    assert (cfg.angle_tolerance.red, cfg.angle_tolerance.blue) == (math.pi / 16, math.pi / 16)
    assert axis.name == "angle_tolerance.red+angle_tolerance.blue"


def test_first_event_step():
    assert first_event_step(BASE, EventKind.SPONTANEOUS_DIMER, runner=tolerance_runner) is None
    cfg = BASE.with_overrides(max_steps=100_000)
    assert first_event_step(cfg, EventKind.SPONTANEOUS_DIMER, runner=tolerance_runner) == round(25600 / math.pi) + 1
    assert first_event_step(cfg, EventKind.SPONTANEOUS_DIMER, bits="10", runner=tolerance_runner) is None
    unlucky = cfg.with_overrides(rng_seed=3)
    assert first_event_step(unlucky, EventKind.SPONTANEOUS_DIMER, runner=tolerance_runner) is None


def test_first_event_step_sets_the_stop():
    seen = []

    def runner(cfg):
        seen.append(cfg)
        return result(cfg, [])

    first_event_step(BASE, EventKind.STRAND_COMPLETED, "0110", runner=runner)
    assert (seen[0].stop_on, seen[0].stop_on_bits, seen[0].snapshot_every) == (EventKind.STRAND_COMPLETED, "0110", 0)


def test_sweep_tightness_trend():
    axis = SweepAxis.parse("angle_tolerance.red+angle_tolerance.blue=pi/16,pi/64,pi/256")
    cells = sweep(BASE, [axis], [1, 2, 3], EventKind.SPONTANEOUS_DIMER, max_steps=10_000, runner=tolerance_runner)
    assert [c.assignment for c in cells] == [("pi/16",), ("pi/64",), ("pi/256",)]
    assert [c.hits for c in cells] == [2, 2, 2]
    medians = [c.median for c in cells]
    assert medians == sorted(medians)
    assert cells[0].first_steps == [round(1600 / math.pi) + 1, round(1600 / math.pi) + 2, None]
    # seed 3 never hits and counts as max_steps + 1
    assert cells[0].median == round(1600 / math.pi) + 2


@pytest.mark.slow
def test_spontaneous_dimer_time_rises_with_tightness():
    axis = SweepAxis.parse("angle_tolerance.red+angle_tolerance.blue=pi/16,pi/64,pi/256")
    cells = sweep(PRESETS["spontaneous"], [axis], range(1, 11), EventKind.SPONTANEOUS_DIMER, max_steps=100_000)
    medians = [c.median for c in cells]
    assert medians == sorted(medians)
    assert medians[0] < medians[-1]
    assert cells[0].hits >= 8


def test_sweep_censors_misses():
    cell = SweepCell(assignment=("x",), seeds=(1, 2, 3), first_steps=[None, None, 10], max_steps=50)
    assert cell.hits == 1
    assert cell.median == 51.0
    assert math.isnan(SweepCell(assignment=(), seeds=()).median)


def test_write_sweep():
    axis = SweepAxis.parse("rng_seed=1")
    out = io.StringIO()
    write_sweep([axis], [SweepCell(("1",), (1, 2), [5, None], 9)], out)
    assert out.getvalue() == "rng_seed,seeds,hits,median_first_step,first_steps\n1,2,1,7.5,5 -\n"


def amplitude_runner(cfg):
    """Replication succeeds on every seed once the amplitude reaches 0.3."""
    if cfg.brownian_linear_amplitude < 0.3:
        return result(cfg, [])
    return result(cfg, [EventRecord(500, EventKind.STRAND_COMPLETED, {"strand": [0, 1], "bits": "01100111"})])


def test_calibrate_brownian():
    base = SimulationConfig(brownian_linear_amplitude=0.1, brownian_angular_amplitude=0.05)
    got = calibrate_brownian(base, [1, 2], budget=1000, low=0.05, high=1.0, rounds=4, runner=amplitude_runner)
    assert got.passed
    assert 0.3 <= got.linear_amplitude <= 0.4
    assert got.angular_amplitude == pytest.approx(got.linear_amplitude / 2)
    assert got.success == 1.0
    # scan 0.05, 0.1, 0.2, 0.4, then 4 bisection rounds
    assert [t.linear_amplitude for t in got.trials[:4]] == [0.05, 0.1, 0.2, 0.4]
    assert len(got.trials) == 8


def test_calibrate_brownian_gives_up():
    got = calibrate_brownian(SimulationConfig(), [1], budget=1000, low=0.01, high=0.1, runner=amplitude_runner)
    assert not got.passed
    assert got.success == 0.0
    assert [t.linear_amplitude for t in got.trials] == [0.01, 0.02, 0.04, 0.08]


def test_calibrate_brownian_targets_the_seeded_pattern():
    seen = []

    def runner(cfg):
        seen.append(cfg.stop_on_bits)
        return result(cfg, [])

    base = SimulationConfig(seed_strand="00011001", seed_symmetric=True)
    calibrate_brownian(base, [1], budget=10, low=0.5, high=0.5, runner=runner)
    assert seen == [symmetrize("00011001")]

    calibrate_brownian(base.with_overrides(seed_symmetric=False), [1], budget=10, low=0.5, high=0.5, runner=runner)
    assert seen[-1] == "01100111"
