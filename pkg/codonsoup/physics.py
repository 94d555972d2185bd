"""
Forces and the time integrator.

One physics phase applies, in this order: brownian kicks, pair forces
(attraction, yellow repulsion, straightening) taken into the velocities, spring
damping, viscosity, the position update from the damped velocities and the
container walls. Spring damping has to see the velocities that already carry this
step's forces, or a stiff bonded pair rings apart at the default step size.

Every codon has unit mass and unit moment of inertia about its middle. The phase
works on :class: `Bodies`, one array per quantity with row i holding codon i, and
pair forces are summed in the canonical order of the pair list.
"""

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .model import (
    DEFAULT_GEOMETRY,
    TWO_PI,
    ArmTable,
    Bounds,
    CodonState,
    FieldSlot,
    Geometry,
    Vec2,
    arm_angle,
)

BondedPair = tuple[int, FieldSlot, int, FieldSlot]

_ARM_OFFSET = {slot: arm_angle(0.0, slot) for slot in FieldSlot}


def per_step_fraction(rate: float, timestep_duration: float) -> float:
    """
    Convert a per-unit-time rate into the fraction applied on one step.

    >>> round(per_step_fraction(0.10, 0.15), 6)
    0.015679
    """
    return 1.0 - (1.0 - rate) ** timestep_duration


def wrap_angles(angles: np.ndarray) -> np.ndarray:
    """Wrap every angle into (-pi, pi], leaving those already inside untouched."""
    outside = (angles > math.pi) | (angles <= -math.pi)
    if not outside.any():
        return angles
    wrapped = np.remainder(angles + math.pi, TWO_PI) - math.pi
    wrapped = np.where(wrapped <= -math.pi, wrapped + TWO_PI, wrapped)
    return np.where(outside, wrapped, angles)


@dataclass(frozen=True, slots=True)
class PhysicsParams:
    timestep_duration: float = 0.15
    linear_viscosity: float = per_step_fraction(0.10, 0.15)
    angular_viscosity: float = per_step_fraction(0.05, 0.15)
    linear_spring_damping: float = per_step_fraction(0.90, 0.15)
    angular_spring_damping: float = per_step_fraction(0.99, 0.15)
    arm_force: ArmTable = ArmTable(red=1.8, blue=1.8, green=1.0, purple=1.0, yellow=1.0)
    straightening_force: ArmTable = ArmTable(red=1.0, blue=1.0, green=0.5, purple=0.5, yellow=0.0)
    brownian_linear_amplitude: float = 0.1
    brownian_angular_amplitude: float = 0.05
    geometry: Geometry = DEFAULT_GEOMETRY

    @staticmethod
    def from_rates(
        timestep_duration: float,
        linear_viscosity: float,
        angular_viscosity: float,
        linear_spring_damping: float,
        angular_spring_damping: float,
        **kwargs,
    ) -> "PhysicsParams":
        """Return params whose fractions are derived from per-unit-time base rates."""
        return PhysicsParams(
            timestep_duration=timestep_duration,
            linear_viscosity=per_step_fraction(linear_viscosity, timestep_duration),
            angular_viscosity=per_step_fraction(angular_viscosity, timestep_duration),
            linear_spring_damping=per_step_fraction(linear_spring_damping, timestep_duration),
            angular_spring_damping=per_step_fraction(angular_spring_damping, timestep_duration),
            **kwargs,
        )


@dataclass
class Bodies:
    """Rigid-body state of all codons, row i holding codon i."""

    position: np.ndarray
    velocity: np.ndarray
    angle: np.ndarray
    angular_velocity: np.ndarray

    @staticmethod
    def of(codons: Sequence[CodonState]) -> "Bodies":
        n = len(codons)
        return Bodies(
            position=np.array([c.position for c in codons], dtype=float).reshape(n, 2),
            velocity=np.array([c.velocity for c in codons], dtype=float).reshape(n, 2),
            angle=np.array([c.angle for c in codons], dtype=float),
            angular_velocity=np.array([c.angular_velocity for c in codons], dtype=float),
        )

    def __len__(self) -> int:  # noqa
        return len(self.angle)

    def commit(self, codons: Sequence[CodonState]) -> list[CodonState]:
        """Return `codons` carrying the bodies' state."""
        position = self.position.tolist()
        velocity = self.velocity.tolist()
        angle = self.angle.tolist()
        angular_velocity = self.angular_velocity.tolist()
        return [
            replace(
                c,
                position=Vec2(*position[i]),
                velocity=Vec2(*velocity[i]),
                angle=angle[i],
                angular_velocity=angular_velocity[i],
            )
            for i, c in enumerate(codons)
        ]

    def tips(self, ids: np.ndarray, offset: np.ndarray, length: np.ndarray) -> np.ndarray:
        """Return the ends of the arms at `offset` from the headings of codons `ids`."""
        heading = self.angle[ids] + offset
        return self.position[ids] + length[:, None] * np.column_stack((np.cos(heading), np.sin(heading)))


@dataclass(frozen=True)
class PairTable:
    """Bonded arm pairs as parallel arrays, in canonical order."""

    a: np.ndarray
    b: np.ndarray
    offset_a: np.ndarray
    offset_b: np.ndarray
    length_a: np.ndarray
    length_b: np.ndarray
    stiffness: np.ndarray
    straightening_a: np.ndarray
    straightening_b: np.ndarray

    @staticmethod
    def of(pairs: Iterable[BondedPair], codons: Sequence[CodonState], p: PhysicsParams) -> "PairTable":
        rows = []
        g = p.geometry
        for i, slot_i, j, slot_j in pairs:
            ti, tj = codons[i].codon_type, codons[j].codon_type
            rows.append(
                (
                    i,
                    j,
                    _ARM_OFFSET[slot_i],
                    _ARM_OFFSET[slot_j],
                    g.arm_length.for_slot(slot_i, ti),
                    g.arm_length.for_slot(slot_j, tj),
                    p.arm_force.for_slot(slot_i, ti),
                    p.straightening_force.for_slot(slot_i, ti),
                    p.straightening_force.for_slot(slot_j, tj),
                )
            )
        table = np.array(rows, dtype=float).reshape(len(rows), 9)
        ids = table[:, :2].astype(np.int64)
        return PairTable(ids[:, 0], ids[:, 1], *table[:, 2:].T)

    def __len__(self) -> int:  # noqa
        return len(self.a)


@dataclass
class ForceAccumulator:
    """Per-codon force and torque, row i holding codon i."""

    force: np.ndarray
    torque: np.ndarray

    @staticmethod
    def zeros(n: int) -> "ForceAccumulator":
        return ForceAccumulator(force=np.zeros((n, 2)), torque=np.zeros(n))

    def add_at(self, ids: np.ndarray, middles: np.ndarray, points: np.ndarray, forces: np.ndarray) -> None:
        """Apply `forces` at `points`, adding the torques about the `middles` of codons `ids`, in row order."""
        lever = points - middles
        np.add.at(self.force, ids, forces)
        np.add.at(self.torque, ids, lever[:, 0] * forces[:, 1] - lever[:, 1] * forces[:, 0])


def apply_brownian(b: Bodies, draws: np.ndarray, p: PhysicsParams) -> None:
    """
    Kick the velocities of every codon by a uniform random amount.

    :param draws: one row of three uniform samples in [-1, 1) per codon, for x, y and angular velocity
    """
    scale = math.sqrt(p.timestep_duration)
    linear = p.brownian_linear_amplitude * scale
    angular = p.brownian_angular_amplitude * scale
    if linear == 0.0 and angular == 0.0:
        return
    b.velocity = b.velocity + draws[:, :2] * linear
    b.angular_velocity = b.angular_velocity + draws[:, 2] * angular


def attractive_spring(b: Bodies, pairs: PairTable, acc: ForceAccumulator) -> np.ndarray:
    """
    Pull the tips of every bonded pair of arms together.

    Returns the tip gaps.
    """
    tip_a = b.tips(pairs.a, pairs.offset_a, pairs.length_a)
    tip_b = b.tips(pairs.b, pairs.offset_b, pairs.length_b)
    gap = tip_b - tip_a
    force = gap * pairs.stiffness[:, None]
    acc.add_at(pairs.a, b.position[pairs.a], tip_a, force)
    acc.add_at(pairs.b, b.position[pairs.b], tip_b, -force)
    return np.hypot(gap[:, 0], gap[:, 1])


def repulsive_yellow(b: Bodies, pairs: np.ndarray, acc: ForceAccumulator, p: PhysicsParams = PhysicsParams()) -> None:
    """
    Push intersecting large yellow fields apart.

    :param pairs: rows of two codon ids whose yellow fields are both large
    """
    if not len(pairs):
        return
    first, second = pairs[:, 0], pairs[:, 1]
    length = np.full(len(pairs), p.geometry.arm_length.yellow)
    offset = np.zeros(len(pairs))
    center_a = b.tips(first, offset, length)
    center_b = b.tips(second, offset, length)
    away = center_a - center_b
    d = np.hypot(away[:, 0], away[:, 1])
    overlap = 2.0 * p.geometry.large_field_radius.yellow - d
    pushing = overlap > 0.0
    safe = np.where(d > 0.0, d, 1.0)
    direction = np.where((d > 0.0)[:, None], away / safe[:, None], np.array([1.0, 0.0]))
    force = direction * (p.arm_force.yellow * np.where(pushing, overlap, 0.0))[:, None]
    acc.add_at(first, b.position[first], center_a, force)
    acc.add_at(second, b.position[second], center_b, -force)


def straightening_torque(b: Bodies, pairs: PairTable, acc: ForceAccumulator) -> None:
    """Twist both codons of every pair so that each bonded arm points at the other codon's middle."""
    _straighten(b, pairs.a, pairs.b, pairs.offset_a, pairs.straightening_a, acc)
    _straighten(b, pairs.b, pairs.a, pairs.offset_b, pairs.straightening_b, acc)


def _straighten(
    b: Bodies, ids: np.ndarray, others: np.ndarray, offset: np.ndarray, k: np.ndarray, acc: ForceAccumulator
) -> None:
    towards = b.position[others] - b.position[ids]
    apart = (towards[:, 0] != 0.0) | (towards[:, 1] != 0.0)
    phi = wrap_angles(b.angle[ids] + offset - np.arctan2(towards[:, 1], towards[:, 0]))
    np.add.at(acc.torque, ids, np.where(apart, -k * phi, 0.0))


def apply_forces(b: Bodies, acc: ForceAccumulator, p: PhysicsParams) -> None:
    """Take one step of the accumulated forces and torques into the velocities."""
    dt = p.timestep_duration
    b.velocity = b.velocity + acc.force * dt
    b.angular_velocity = b.angular_velocity + acc.torque * dt


def apply_spring_damping(b: Bodies, pairs: PairTable, p: PhysicsParams) -> None:
    """Damp each bonded pair in turn: linear velocities towards the pair mean, spins towards zero."""
    f = p.linear_spring_damping
    v = b.velocity.tolist()
    for i, j in zip(pairs.a.tolist(), pairs.b.tolist()):
        (ax, ay), (bx, by) = v[i], v[j]
        mx, my = (ax + bx) * 0.5, (ay + by) * 0.5
        v[i] = [ax + (mx - ax) * f, ay + (my - ay) * f]
        v[j] = [bx + (mx - bx) * f, by + (my - by) * f]
    b.velocity = np.array(v, dtype=float).reshape(len(b), 2)
    bonds = np.bincount(np.concatenate((pairs.a, pairs.b)), minlength=len(b))
    b.angular_velocity = b.angular_velocity * (1.0 - p.angular_spring_damping) ** bonds


def apply_viscosity(b: Bodies, p: PhysicsParams) -> None:
    """Slow both velocities of every codon by the per-step viscosity fractions."""
    b.velocity = b.velocity * (1.0 - p.linear_viscosity)
    b.angular_velocity = b.angular_velocity * (1.0 - p.angular_viscosity)


def integrate(b: Bodies, p: PhysicsParams) -> None:
    """Move every codon by its velocities, which already carry this step's forces."""
    dt = p.timestep_duration
    b.position = b.position + b.velocity * dt
    b.angle = wrap_angles(b.angle + b.angular_velocity * dt)


def enforce_container(b: Bodies, bounds: Bounds) -> None:
    """Clamp every middle into `bounds`, reflecting the velocity on each crossed axis."""
    low = np.array([bounds.min_x, bounds.min_y])
    high = np.array([bounds.max_x, bounds.max_y])
    crossed = (b.position < low) | (b.position > high)
    if not crossed.any():
        return
    b.position = np.clip(b.position, low, high)
    b.velocity = np.where(crossed, -b.velocity, b.velocity)


def advance(
    codons: Sequence[CodonState],
    kicks: np.ndarray | None,
    bonded: Iterable[BondedPair],
    yellow_pairs: Iterable[tuple[int, int]],
    p: PhysicsParams,
    bounds: Bounds,
) -> list[CodonState]:
    """
    Run one physics phase over all codons.

    :param kicks: per codon id brownian draws, None disables brownian motion
    :param bonded: designated bonded pairs in canonical order
    :param yellow_pairs: intersecting large yellow pairs in canonical order
    """
    if not codons:
        return []
    b = Bodies.of(codons)
    if kicks is not None:
        apply_brownian(b, np.asarray(kicks, dtype=float), p)
    pairs = PairTable.of(bonded, codons, p)
    acc = ForceAccumulator.zeros(len(b))
    attractive_spring(b, pairs, acc)
    repulsive_yellow(b, np.array(list(yellow_pairs), dtype=np.int64).reshape(-1, 2), acc, p)
    straightening_torque(b, pairs, acc)
    apply_forces(b, acc, p)
    apply_spring_damping(b, pairs, p)
    apply_viscosity(b, p)
    integrate(b, p)
    enforce_container(b, bounds)
    return b.commit(codons)
