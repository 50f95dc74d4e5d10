"""Ray/dot diagrams attached to each coset of <J> in G."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from .geometry import (GroupElement, SymmetryGroup, WeightSystem, coset_decomposition, lambda_phases,
                       twisted_element)


@dataclass(frozen=True)
class Dot:
    angle: Fraction     # ray phase f, the ray points at exp(2 pi i f)
    radius: int         # 1..N for coordinates, N+1 for the extra non-Gorenstein dot
    kind: str           # "regular" | "non-gorenstein"
    role: str           # "internal" | "extremal"


@dataclass(frozen=True)
class Ray:
    angle: Fraction
    gorenstein: bool    # angle in (1/d)Z
    empty: bool


@dataclass
class Diagram:
    weights: Tuple[int, ...]
    degree: int
    coset: GroupElement
    rays: List[Ray]
    dots: List[Dot]

    @property
    def n_dots(self):
        return len(self.dots)

    @property
    def n_rays(self):
        return len(self.rays)

    @property
    def n_internal(self):
        return sum(d.role == "internal" for d in self.dots)

    @property
    def n_extremal(self):
        return sum(d.role == "extremal" for d in self.dots)

    @property
    def n_empty(self):
        return sum(r.empty for r in self.rays)

    def to_json(self):
        return {"coset": self.coset.key(), "rays": [
            {"angle": str(r.angle), "gorenstein": r.gorenstein, "empty": r.empty} for r in self.rays],
            "dots": [{"angle": str(d.angle), "radius": d.radius, "kind": d.kind, "role": d.role}
                     for d in self.dots],
            "counts": {"D": self.n_dots, "R": self.n_rays, "internal": self.n_internal,
                       "extremal": self.n_extremal, "empty": self.n_empty}}


def build_diagram(ws: WeightSystem, G: SymmetryGroup, coset_rep: GroupElement) -> Diagram:
    d = ws.degree
    angles = set(Fraction(k, d) for k in range(d)) | set(lambda_phases(ws, coset_rep))
    rays, dots = [], []
    N = ws.N
    for f in sorted(angles):
        gor = (f * d).denominator == 1
        fixed = twisted_element(ws, coset_rep, f).fixed()
        radii = [(j + 1, "regular") for j in fixed]
        if not gor:
            radii.append((N + 1, "non-gorenstein"))
        rays.append(Ray(f, gor, not radii))
        for i, (rad, kind) in enumerate(radii):
            dots.append(Dot(f, rad, kind, "extremal" if i == len(radii) - 1 else "internal"))
    return Diagram(ws.weights, d, coset_rep, rays, dots)


def all_diagrams(ws: WeightSystem, G: SymmetryGroup) -> List[Diagram]:
    return [build_diagram(ws, G, g) for g in coset_decomposition(ws, G)]


def render(diagram: Diagram, format: str = "text") -> bytes:
    if format == "text":
        return _render_text(diagram).encode()
    if format == "svg":
        return _render_svg(diagram).encode()
    raise ValueError(f"unknown format {format}")


def _render_text(dg: Diagram) -> str:
    N = len(dg.weights)
    lines = [f"diagram W{dg.weights};{dg.degree} coset ({dg.coset.key()})",
             f"D={dg.n_dots} R={dg.n_rays} internal={dg.n_internal} empty={dg.n_empty} "
             f"D-R={dg.n_dots - dg.n_rays}"]
    for r in dg.rays:
        row = ["."] * (N + 1)
        for dot in dg.dots:
            if dot.angle == r.angle:
                row[dot.radius - 1] = "E" if dot.role == "extremal" else "o"
        flag = "" if r.gorenstein else "  [non-gorenstein]"
        lines.append(f"{str(r.angle):>6} |{''.join(row)}{flag}")
    return "\n".join(lines) + "\n"


def _render_svg(dg: Diagram) -> str:
    size, unit = 400, 160 / (len(dg.weights) + 1)
    c = size / 2
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="{size}" height="{size}">',
           f'<circle cx="{c}" cy="{c}" r="2" fill="black"/>']
    for r in dg.rays:
        th = 2 * math.pi * float(r.angle)
        L = unit * (len(dg.weights) + 1.5)
        color = "black" if r.gorenstein else "red"
        cls = "" if r.gorenstein else ' class="non-gorenstein"'
        out.append(f'<line{cls} x1="{c}" y1="{c}" x2="{c + L * math.cos(th):.3f}" '
                   f'y2="{c - L * math.sin(th):.3f}" stroke="{color}" stroke-width="1"/>')
    for dot in dg.dots:
        th = 2 * math.pi * float(dot.angle)
        x, y = c + unit * dot.radius * math.cos(th), c - unit * dot.radius * math.sin(th)
        fill = "red" if dot.kind == "non-gorenstein" else ("blue" if dot.role == "extremal" else "black")
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="4" fill="{fill}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
