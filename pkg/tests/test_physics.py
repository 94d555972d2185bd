import math
from dataclasses import replace

import numpy as np
import pytest

from codonsoup.engine import encode_seed_strand
from codonsoup.model import Bounds, CodonState, CodonType, FieldSize, FieldSlot, Vec2
from codonsoup.physics import (
    Bodies,
    ForceAccumulator,
    PairTable,
    PhysicsParams,
    advance,
    apply_brownian,
    apply_forces,
    apply_spring_damping,
    apply_viscosity,
    attractive_spring,
    enforce_container,
    integrate,
    per_step_fraction,
    repulsive_yellow,
    straightening_torque,
    wrap_angles,
)

QUIET = PhysicsParams(brownian_linear_amplitude=0.0, brownian_angular_amplitude=0.0)
FAR = Bounds.box(1e6, 1e6)
LARGE_YELLOW = (FieldSize.SMALL,) * 3 + (FieldSize.LARGE,)


def codon(codon_id=0, x=0.0, y=0.0, angle=0.0, codon_type=CodonType.TYPE0, **kwargs):
    return CodonState(codon_id=codon_id, codon_type=codon_type, position=Vec2(x, y), angle=angle, **kwargs)


def red_blue(codons, p=QUIET):
    return PairTable.of([(0, FieldSlot.RED, 1, FieldSlot.BLUE)], codons, p)


@pytest.mark.parametrize(
    "title,rate,dt,want",
    [
        ("linear viscosity", 0.10, 0.15, 1 - 0.9**0.15),
        ("angular viscosity", 0.05, 0.15, 1 - 0.95**0.15),
        ("linear spring damping", 0.90, 0.15, 1 - 0.1**0.15),
        ("angular spring damping", 0.99, 0.15, 1 - 0.01**0.15),
        ("unit step keeps the rate", 0.10, 1.0, 0.10),
        ("zero rate", 0.0, 0.15, 0.0),
    ],
)
def test_per_step_fraction(title, rate, dt, want):
    assert per_step_fraction(rate, dt) == pytest.approx(want, abs=1e-15), title


def test_from_rates_recomputes_fractions():
    p = PhysicsParams.from_rates(0.075, 0.10, 0.05, 0.90, 0.99)
    assert p.linear_viscosity == pytest.approx(1 - 0.9**0.075)
    assert p.angular_spring_damping == pytest.approx(1 - 0.01**0.075)


@pytest.mark.parametrize(
    "title,angle,want",
    [
        ("inside", 1.0, 1.0),
        ("pi stays", math.pi, math.pi),
        ("minus pi flips", -math.pi, math.pi),
        ("past pi", math.pi + 0.5, -math.pi + 0.5),
        ("two turns", 4 * math.pi + 0.25, 0.25),
    ],
)
def test_wrap_angles(title, angle, want):
    assert wrap_angles(np.array([angle]))[0] == pytest.approx(want, abs=1e-12), title


def test_bodies_commit_round_trips_state():
    codons = [codon(0, x=1.0, y=2.0, angle=0.5, velocity=Vec2(0.25, -1.0), angular_velocity=2.0), codon(1, x=3.0)]
    assert Bodies.of(codons).commit(codons) == codons


def test_apply_viscosity():
    b = Bodies.of([codon(velocity=Vec2(2.0, -1.0), angular_velocity=0.5)])
    apply_viscosity(b, PhysicsParams())
    assert b.velocity[0, 0] == pytest.approx(2.0 * 0.9**0.15)
    assert b.velocity[0, 1] == pytest.approx(-(0.9**0.15))
    assert b.angular_velocity[0] == pytest.approx(0.5 * 0.95**0.15)


def test_viscosity_decay_matches_closed_form():
    c = codon(x=5e5, y=5e5, velocity=Vec2(1.0, 0.0), angular_velocity=1.0)
    for t in range(1, 10_001):
        (c,) = advance([c], None, [], [], QUIET, FAR)
        assert c.velocity.x == pytest.approx(0.9 ** (0.15 * t), abs=1e-12)
        assert c.angular_velocity == pytest.approx(0.95 ** (0.15 * t), abs=1e-12)
    assert c.velocity.y == 0.0


def test_bonded_pair_conserves_momentum():
    p = replace(QUIET, linear_viscosity=0.0, angular_viscosity=0.0)
    a, b = encode_seed_strand("01", Vec2(5e5, 5e5), math.pi / 2)
    a = replace(a, velocity=Vec2(1.0, 0.5), angle=a.angle + 0.2)
    b = replace(b, velocity=Vec2(-0.3, 0.25))
    codons = [a, b]
    bonded = [(0, FieldSlot.RED, 1, FieldSlot.BLUE)]
    want = codons[0].velocity.plus(codons[1].velocity)
    for _ in range(10_000):
        codons = advance(codons, None, bonded, [], p, FAR)
        got = codons[0].velocity.plus(codons[1].velocity)
        assert got.x == pytest.approx(want.x, rel=1e-9)
        assert got.y == pytest.approx(want.y, rel=1e-9)


def test_attractive_spring_is_equal_and_opposite():
    codons = [codon(0, x=0.0, y=0.0, angle=0.0), codon(1, x=0.0, y=15.0, angle=0.0, codon_type=CodonType.TYPE1)]
    b = Bodies.of(codons)
    acc = ForceAccumulator.zeros(2)
    gaps = attractive_spring(b, red_blue(codons), acc)
    # red tip (0, 7), blue tip (0, 8): gap 1, k 1.8
    assert gaps.tolist() == pytest.approx([1.0])
    assert acc.force.tolist() == pytest.approx([[0.0, 1.8], [0.0, -1.8]])
    assert acc.torque[0] == pytest.approx(0.0, abs=1e-12)


def test_attractive_spring_sums_pairs_sharing_a_codon():
    codons = encode_seed_strand("010", Vec2(50.0, 50.0), math.pi / 2)
    codons[1] = replace(codons[1], position=codons[1].position.plus(Vec2(0.0, 1.0)))
    bonded = [(0, FieldSlot.RED, 1, FieldSlot.BLUE), (1, FieldSlot.RED, 2, FieldSlot.BLUE)]
    acc = ForceAccumulator.zeros(3)
    attractive_spring(Bodies.of(codons), PairTable.of(bonded, codons, QUIET), acc)
    # the middle codon is pulled back by both neighbours
    assert acc.force[1].tolist() == pytest.approx([0.0, -3.6])
    assert acc.force.sum(axis=0).tolist() == pytest.approx([0.0, 0.0], abs=1e-12)


def test_straightening_torque_turns_toward_partner():
    codons = [codon(0, angle=0.1), codon(1, x=0.0, y=14.0, codon_type=CodonType.TYPE1)]
    acc = ForceAccumulator.zeros(2)
    straightening_torque(Bodies.of(codons), red_blue(codons), acc)
    assert acc.torque[0] == pytest.approx(-0.1)
    # the blue arm of codon 1 already points at codon 0
    assert acc.torque[1] == pytest.approx(0.0, abs=1e-12)


def test_straightening_torque_degenerate_is_zero():
    codons = [codon(0), codon(1, codon_type=CodonType.TYPE1)]
    acc = ForceAccumulator.zeros(2)
    straightening_torque(Bodies.of(codons), red_blue(codons), acc)
    assert acc.torque.tolist() == [0.0, 0.0]


@pytest.mark.parametrize(
    "title,distance,want",
    [
        ("overlapping", 10.0, 2.0),
        ("touching", 12.0, 0.0),
        ("apart", 13.0, 0.0),
    ],
)
def test_repulsive_yellow(title, distance, want):
    codons = [
        codon(0, x=0.0, angle=math.pi, field_size=LARGE_YELLOW),
        codon(1, x=distance - 2.0, angle=0.0, field_size=LARGE_YELLOW),
    ]
    acc = ForceAccumulator.zeros(2)
    repulsive_yellow(Bodies.of(codons), np.array([[0, 1]]), acc)
    assert acc.force[0, 0] == pytest.approx(-want), title
    assert acc.force[1, 0] == pytest.approx(want), title


def test_repulsive_yellow_degenerate_pushes_along_x():
    codons = [codon(0, field_size=LARGE_YELLOW), codon(1, field_size=LARGE_YELLOW)]
    acc = ForceAccumulator.zeros(2)
    repulsive_yellow(Bodies.of(codons), np.array([[0, 1]]), acc)
    assert acc.force.tolist() == [[12.0, 0.0], [-12.0, 0.0]]


def test_spring_damping_pulls_velocities_together():
    p = PhysicsParams(linear_spring_damping=0.5, angular_spring_damping=0.5)
    codons = [codon(0, velocity=Vec2(2.0, 0.0), angular_velocity=1.0), codon(1, codon_type=CodonType.TYPE1)]
    b = Bodies.of(codons)
    apply_spring_damping(b, red_blue(codons, p), p)
    assert b.velocity.tolist() == [[1.5, 0.0], [0.5, 0.0]]
    assert b.angular_velocity.tolist() == [0.5, 0.0]


def test_forces_reach_velocities_before_positions():
    acc = ForceAccumulator.zeros(1)
    acc.force[0] = (1.0, 0.0)
    acc.torque[0] = 2.0
    p = PhysicsParams(timestep_duration=0.5)
    b = Bodies.of([codon(velocity=Vec2(1.0, 0.0))])
    apply_forces(b, acc, p)
    integrate(b, p)
    assert b.velocity.tolist() == [[1.5, 0.0]]
    assert b.position.tolist() == [[0.75, 0.0]]
    assert b.angular_velocity.tolist() == [1.0]
    assert b.angle.tolist() == [0.5]


@pytest.mark.parametrize(
    "title,position,velocity,want_position,want_velocity",
    [
        ("inside", (1.0, 1.0), (1.0, 1.0), (1.0, 1.0), (1.0, 1.0)),
        ("left wall", (-1.0, 5.0), (-2.0, 1.0), (0.0, 5.0), (2.0, 1.0)),
        ("corner", (11.0, 12.0), (1.0, 3.0), (10.0, 10.0), (-1.0, -3.0)),
    ],
)
def test_enforce_container(title, position, velocity, want_position, want_velocity):
    b = Bodies.of([codon(x=position[0], y=position[1], velocity=Vec2(*velocity))])
    enforce_container(b, Bounds.box(10.0, 10.0))
    assert b.position.tolist() == [list(want_position)], title
    assert b.velocity.tolist() == [list(want_velocity)], title


def test_brownian_scales_with_sqrt_dt():
    p = PhysicsParams(timestep_duration=0.25, brownian_linear_amplitude=2.0, brownian_angular_amplitude=1.0)
    b = Bodies.of([codon()])
    apply_brownian(b, np.array([[1.0, -0.5, 0.5]]), p)
    assert b.velocity.tolist() == [[1.0, -0.5]]
    assert b.angular_velocity.tolist() == [0.25]
    quiet = Bodies.of([codon()])
    apply_brownian(quiet, np.array([[1.0, 1.0, 1.0]]), QUIET)
    assert quiet.commit([codon()]) == [codon()]


@pytest.mark.parametrize("offset", [0.01, 0.1, 0.3])
def test_misaligned_pair_stays_bonded(offset):
    # a stiff pair must settle instead of ringing apart
    a = codon(0, x=50.0, y=50.0, angle=math.pi / 2)
    b = codon(
        1,
        x=43.0 - 7.0 * math.cos(offset),
        y=50.0 - 7.0 * math.sin(offset),
        angle=math.pi / 2 + offset,
        codon_type=CodonType.TYPE1,
    )
    codons = [a, b]
    bonded = [(0, FieldSlot.RED, 1, FieldSlot.BLUE)]
    for _ in range(1000):
        codons = advance(codons, None, bonded, [], QUIET, FAR)
        gap = attractive_spring(Bodies.of(codons), red_blue(codons), ForceAccumulator.zeros(2))
        assert gap[0] < 1.0
