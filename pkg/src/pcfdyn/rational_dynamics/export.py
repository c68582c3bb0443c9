"""CSV and SVG output for curves on the sphere."""

from __future__ import annotations

import csv
import io
from typing import Sequence

import numpy as np

from .curves import CurvePolyline
from .maps import MarkedSphere
from .sphere import Chart, far_pole, to_sphere

SVG_SIZE = 800
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _g(x: float) -> str:
    return f"{x:.9g}"


def curves_csv(curves: Sequence[CurvePolyline], chart: Chart | None = None) -> str:
    """One row per node: curve index, node index, sphere coordinates, chart coordinates."""
    pts = [c.points for c in curves]
    chart = chart or Chart(far_pole(*pts))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["curve", "index", "x", "y", "z", "u", "v"])
    for k, c in enumerate(curves):
        uv = chart(c.points)
        for i, (p, q) in enumerate(zip(c.points, uv)):
            w.writerow([k, i, _g(p[0]), _g(p[1]), _g(p[2]), _g(q.real), _g(q.imag)])
    return buf.getvalue()


def default_pole(marked: MarkedSphere | None, curves=()) -> np.ndarray:
    """``2i`` when it keeps clear of the data, else the farthest lattice point."""
    sets = [c.points for c in curves]
    if marked is not None and len(marked):
        sets.append(marked.sphere())
    if not sets:
        return to_sphere(2j)
    p = to_sphere(2j)
    allpts = np.concatenate(sets)
    if np.linalg.norm(allpts - p, axis=1).min() > 0.2:
        return p
    return far_pole(*sets)


def _path(z: np.ndarray, closed: bool, fit) -> str:
    xy = [fit(w) for w in z]
    parts = [f"M{_g(xy[0][0])},{_g(xy[0][1])}"] + [f"L{_g(x)},{_g(y)}" for x, y in xy[1:]]
    if closed:
        parts.append("Z")
    return " ".join(parts)


def render_svg(curves: Sequence[CurvePolyline], marked: MarkedSphere | None = None,
               slits: Sequence[np.ndarray] = (), pole=None, title: str = "") -> str:
    """Stereographic picture of ``curves`` with marked points and thick slits.

    Projection is from ``pole`` (default: near ``2i``).  Numbers carry nine
    significant digits so output is stable across runs.
    """
    pole = default_pole(marked, curves) if pole is None else np.asarray(pole, dtype=float)
    chart = Chart(pole)
    zs = [chart(c.points) for c in curves]
    sl = [chart(np.asarray(s, dtype=float)) for s in slits]
    mk = chart(marked.sphere()) if marked is not None and len(marked) else np.empty(0, complex)
    allz = np.concatenate([*zs, *sl, mk]) if (zs or sl or len(mk)) else np.array([0j])
    lo = complex(allz.real.min(), allz.imag.min())
    hi = complex(allz.real.max(), allz.imag.max())
    span = max(hi.real - lo.real, hi.imag - lo.imag, 1e-9)
    pad = 0.05 * SVG_SIZE
    scale = (SVG_SIZE - 2 * pad) / span

    def fit(w):
        return pad + (w.real - lo.real) * scale, SVG_SIZE - pad - (w.imag - lo.imag) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{title}</title>')
    for s in sl:
        out.append(f'<path d="{_path(s, False, fit)}" fill="none" stroke="black" stroke-width="5"/>')
    for k, z in enumerate(zs):
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<path d="{_path(z, curves[k].closed, fit)}" fill="none" stroke="{color}" stroke-width="1"/>')
    for w in mk:
        x, y = fit(w)
        out.append(f'<circle cx="{_g(x)}" cy="{_g(y)}" r="5" fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
