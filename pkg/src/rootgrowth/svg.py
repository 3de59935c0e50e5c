"""Static SVG pictures of planar runs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .logio import SimulationLog

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#17becf")
DASHES = ("none", "6,3", "2,2", "8,3,2,3")


@dataclass(frozen=True)
class SvgOptions:
    width: int = 480
    margin: float = 0.15       # world units around the content
    stroke: float = 2.0        # pixels
    show_start: bool = True
    show_target: bool = True


def _num(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".") if abs(x) >= 5e-4 else "0"


def _planar_config(config: dict) -> tuple[list, dict]:
    obstacles = []
    for ob in config.get("obstacles", []):
        c = list(ob["center"]) + [0.0] * (3 - len(ob["center"]))
        if c[2] != 0.0:
            raise ValueError("cannot draw a non-planar scene (obstacle off the plane)")
        obstacles.append((c[0], c[1], float(ob["radius"])))
    return obstacles, config.get("target", {"kind": "plane", "normal": [0.0, 1.0], "offset": 0.0})


def emit_svg(log: SimulationLog, options: SvgOptions | None = None) -> str:
    """Obstacles, target, start point and each attempt's final curve.

    Raises ``ValueError`` if any stored node or obstacle is off the z = 0 plane.
    """
    opts = options or SvgOptions()
    obstacles, target = _planar_config(log.config)
    curves = log.final_curves()
    for c in curves:
        if np.any(c[:, 2] != 0.0):
            raise ValueError("cannot draw a non-planar run (nodes off the plane)")

    pts = [c[:, :2] for c in curves]
    pts += [np.array([[x - r, y - r], [x + r, y + r]]) for x, y, r in obstacles]
    if target.get("kind") == "point" and "point" in target:
        pts.append(np.array([target["point"][:2]]))
    if pts:
        allp = np.vstack(pts)
        lo, hi = allp.min(axis=0) - opts.margin, allp.max(axis=0) + opts.margin
    else:
        lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    # target plane lines should show up even when nothing else is nearby
    if target.get("kind", "plane") == "plane":
        n = np.array((list(target.get("normal", [0.0, 1.0])) + [0.0])[:2], dtype=float)
        n /= np.linalg.norm(n)
        off = float(target.get("offset", 0.0))
        if abs(n[1]) >= abs(n[0]):
            y = off / n[1]
            lo[1], hi[1] = min(lo[1], y - opts.margin), max(hi[1], y + opts.margin)
        else:
            x = off / n[0]
            lo[0], hi[0] = min(lo[0], x - opts.margin), max(hi[0], x + opts.margin)

    span = hi - lo
    scale = opts.width / span[0]
    height = int(round(span[1] * scale))

    def tx(p):
        return (p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{opts.width}" height="{height}" '
           f'viewBox="0 0 {opts.width} {height}">',
           f'<rect width="{opts.width}" height="{height}" fill="white"/>']
    for x, y, r in obstacles:
        cx, cy = tx((x, y))
        out.append(f'<circle class="obstacle" cx="{_num(cx)}" cy="{_num(cy)}" r="{_num(r * scale)}" '
                   'fill="#bbbbbb" stroke="#555555"/>')
    if opts.show_target:
        if target.get("kind", "plane") == "plane":
            if abs(n[1]) >= abs(n[0]):
                a = (lo[0], (off - n[0] * lo[0]) / n[1])
                b = (hi[0], (off - n[0] * hi[0]) / n[1])
            else:
                a = ((off - n[1] * lo[1]) / n[0], lo[1])
                b = ((off - n[1] * hi[1]) / n[0], hi[1])
            (x1, y1), (x2, y2) = tx(a), tx(b)
            out.append(f'<line class="target" x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" '
                       f'y2="{_num(y2)}" stroke="#444444" stroke-dasharray="4,4"/>')
        elif "point" in target:
            px, py = tx(target["point"][:2])
            out.append(f'<circle class="target" cx="{_num(px)}" cy="{_num(py)}" r="5" '
                       'fill="white" stroke="#444444"/>')
    for i, c in enumerate(curves):
        coords = " ".join(f"{_num(a)},{_num(b)}" for a, b in (tx(p) for p in c[:, :2]))
        dash = DASHES[i % len(DASHES)]
        dash_attr = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        out.append(f'<polyline class="attempt" data-attempt="{i}" points="{coords}" fill="none" '
                   f'stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="{opts.stroke}"{dash_attr}/>')
    if opts.show_start and curves:
        sx, sy = tx(curves[0][0, :2])
        out.append(f'<circle class="start" cx="{_num(sx)}" cy="{_num(sy)}" r="4" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
