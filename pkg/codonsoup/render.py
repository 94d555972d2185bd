"""
SVG frames of a simulation state.

Arms are black lines, fields are circles drawn to scale in their colour. A
bonded red or blue field is drawn as the half circle facing its own codon, so a
red-blue bond shows as one circle, half red and half blue.
"""

from dataclasses import dataclass, field
from typing import Sequence

from .model import (
    DEFAULT_GEOMETRY,
    BOND_SLOTS,
    Bounds,
    CodonState,
    FieldSlot,
    Geometry,
    Vec2,
    field_radius,
    tip_position,
)

COLORS = {
    "red": "#CC0000",
    "blue": "#0000CC",
    "green": "#00AA00",
    "purple": "#8800CC",
    "yellow": "#DDBB00",
    "container": "#888888",
    "arm": "#000000",
}


def fmt(v: float) -> str:
    """
    Format a canvas coordinate with at most three decimals.

    >>> fmt(150.0)
    '150'
    >>> fmt(-0.0001)
    '0'
    >>> fmt(0.02)
    '0.02'
    """
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


@dataclass(frozen=True)
class RenderSpec:
    """Canvas size in pixels; the world is scaled to fit the canvas width."""

    canvas_width: int = 300
    colors: dict[str, str] = field(default_factory=lambda: dict(COLORS))

    def scale(self, bounds: Bounds) -> float:
        return self.canvas_width / bounds.width

    def canvas_height(self, bounds: Bounds) -> int:
        return round(bounds.height * self.scale(bounds))


class _Canvas:
    def __init__(self, bounds: Bounds, spec: RenderSpec):  # noqa
        self.bounds = bounds
        self.scale = spec.scale(bounds)
        self.height = spec.canvas_height(bounds)

    def point(self, p: Vec2) -> tuple[str, str]:
        x = (p.x - self.bounds.min_x) * self.scale
        y = self.height - (p.y - self.bounds.min_y) * self.scale
        return fmt(x), fmt(y)

    def length(self, r: float) -> str:
        return fmt(r * self.scale)


def _slot_color(c: CodonState, slot: FieldSlot, colors: dict[str, str]) -> str:
    match slot:
        case FieldSlot.RED:
            return colors["red"]
        case FieldSlot.BLUE:
            return colors["blue"]
        case FieldSlot.YELLOW:
            return colors["yellow"]
    return colors[c.codon_type.color]


def _half_circle(canvas: _Canvas, c: CodonState, slot: FieldSlot, geometry: Geometry, color: str) -> str:
    center = tip_position(c, slot, geometry)
    r = field_radius(c, slot, geometry)
    # the diameter across the arm; the arc bulges back toward the middle
    across = center.minus(c.position)
    n = across.norm()
    u = Vec2(-across.y / n, across.x / n) if n > 0 else Vec2(0.0, 1.0)
    x1, y1 = canvas.point(center.plus(u.times(r)))
    x2, y2 = canvas.point(center.minus(u.times(r)))
    rr = canvas.length(r)
    return (
        f'<path d="M {x1} {y1} A {rr} {rr} 0 0 0 {x2} {y2}" '
        f'fill="none" stroke="{color}" stroke-width="1"/>'
    )


def _codon(canvas: _Canvas, c: CodonState, geometry: Geometry, colors: dict[str, str]) -> list[str]:
    mx, my = canvas.point(c.position)
    out = [f'<g id="codon-{c.codon_id}">']
    for slot in BOND_SLOTS:
        tx, ty = canvas.point(tip_position(c, slot, geometry))
        out.append(f'<line x1="{mx}" y1="{my}" x2="{tx}" y2="{ty}" stroke="{colors["arm"]}" stroke-width="1"/>')
    for slot in FieldSlot:
        color = _slot_color(c, slot, colors)
        if slot in (FieldSlot.RED, FieldSlot.BLUE) and c.bonded(slot):
            out.append(_half_circle(canvas, c, slot, geometry, color))
            continue
        cx, cy = canvas.point(tip_position(c, slot, geometry))
        r = canvas.length(field_radius(c, slot, geometry))
        out.append(f'<circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="{color}" stroke-width="1"/>')
    out.append("</g>")
    return out


def render_svg(
    codons: Sequence[CodonState],
    bounds: Bounds,
    spec: RenderSpec = RenderSpec(),
    geometry: Geometry = DEFAULT_GEOMETRY,
) -> str:
    """Draw the container and every codon, in codon id order."""
    canvas = _Canvas(bounds, spec)
    w, h = spec.canvas_width, canvas.height
    frame = spec.colors["container"]
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="none" stroke="{frame}" stroke-width="2"/>',
    ]
    for c in sorted(codons, key=lambda c: c.codon_id):
        lines.extend(_codon(canvas, c, geometry, spec.colors))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
