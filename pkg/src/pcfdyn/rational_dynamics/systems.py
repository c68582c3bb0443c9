"""Concrete annular systems: one branch map per subannulus plus curve data.

A :class:`BranchSystem` ties an :class:`AnnularSystemSpec` to geometry: the
map realising each subannulus (the same rational map for every branch of a
rational system), a core curve per component and samples of both boundary
pieces of every component.  Lifted curves are assigned to subannuli by
their nesting order between the two boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..annulus_engine import AnnularSystemSpec, parse_spec
from ..errors import AmbiguousTag, ValidationError
from .curves import CurvePolyline, chart_for, circle, ellipse, winding_numbers
from .homotopy import separates
from .lifting import DEFAULT_DELTA, LiftComponent, Lifter, lift_curve_components
from .maps import MarkedSphere, RationalMap, ReferenceArc, real_arc
from .sphere import INF, to_sphere


@dataclass(frozen=True, eq=False)
class BranchSystem:
    name: str
    spec: AnnularSystemSpec
    maps: tuple[RationalMap, ...]
    cores: tuple[CurvePolyline, ...]
    boundaries: tuple[tuple[np.ndarray, np.ndarray], ...] = field(repr=False)
    marked: MarkedSphere | None = None
    delta: float = DEFAULT_DELTA
    _lifters: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.maps) != self.spec.n_subannuli:
            raise ValidationError("one branch map per subannulus is required")
        if len(self.cores) != self.spec.n_components or len(self.boundaries) != self.spec.n_components:
            raise ValidationError("one core curve and one boundary pair per component are required")

    def lifter(self, i: int) -> Lifter:
        f = self.maps[i]
        key = id(f)
        if key not in self._lifters:
            self._lifters[key] = Lifter(f, self.delta)
        return self._lifters[key]

    def siblings(self, i: int) -> list[int]:
        """Subannuli in the same parent realised by the same map, in boundary order."""
        s = self.spec.subannuli[i]
        return [k for k in self.spec.children(s.parent) if self.maps[k] is self.maps[i]]

    def ref_point(self, j: int, side: int) -> np.ndarray:
        b = self.boundaries[j][side]
        return b[len(b) // 2]

    def essential_in(self, j: int, curve: CurvePolyline) -> bool:
        b0, b1 = self.boundaries[j]
        return separates(curve, b0, b1)

    def rank_from_boundary0(self, j: int, curves: list[CurvePolyline]) -> list[int]:
        """Nesting rank of each curve counted from boundary 0 of component ``j``.

        The rank of ``c`` is the number of other curves separating ``c`` from
        boundary 0.
        """
        ref = self.ref_point(j, 0)
        ranks = []
        for a, c in enumerate(curves):
            r = 0
            for b, other in enumerate(curves):
                if a == b:
                    continue
                chart = chart_for(other, extra=[c.points[:1], ref[None]])
                w = winding_numbers(chart(other.points), chart(np.vstack([c.points[:1], ref[None]])))
                if (w[0] % 2) != (w[1] % 2):
                    r += 1
            ranks.append(r)
        return ranks

    def select(self, i: int, comps: list[LiftComponent]) -> LiftComponent:
        """The lifted component lying in subannulus ``i``."""
        j = self.spec.subannuli[i].parent
        cands = [c for c in comps if self.essential_in(j, c.curve)]
        sib = self.siblings(i)
        if len(cands) != len(sib):
            raise AmbiguousTag(
                f"subannulus {i}: expected {len(sib)} essential lifts in component {j}, found {len(cands)}",
                {"subannulus": i, "found": len(cands), "expected": len(sib)},
            )
        ranks = self.rank_from_boundary0(j, [c.curve for c in cands])
        if sorted(ranks) != list(range(len(cands))):
            raise AmbiguousTag(f"subannulus {i}: lifts are not linearly nested", {"ranks": ranks})
        chosen = cands[ranks.index(sib.index(i))]
        if chosen.degree != self.spec.subannuli[i].degree:
            raise AmbiguousTag(
                f"subannulus {i}: selected lift has degree {chosen.degree}, spec says {self.spec.subannuli[i].degree}",
                {"subannulus": i},
            )
        return chosen

    def lift_branch(self, i: int, curve: CurvePolyline) -> LiftComponent:
        comps = lift_curve_components(self.maps[i], curve, lifter=self.lifter(i))
        return self.select(i, comps)


# ---------------------------------------------------------------------------
# built-in systems
# ---------------------------------------------------------------------------


def lattes_map() -> RationalMap:
    """``(z^2 + 1)^2 / (4 z (z^2 - 1))``."""
    return RationalMap([1, 0, 2, 0, 1], [4, 0, -4, 0], "lattes")


LATTES_SPEC = {
    "components": [{"name": "sphere minus both slits"}],
    "subannuli": [
        {"parent": 0, "target": 0, "degree": 2, "orientation": 1, "shares": [0]},
        {"parent": 0, "target": 0, "degree": 2, "orientation": -1, "shares": [1]},
    ],
}


def lattes_marked() -> MarkedSphere:
    pts = MarkedSphere((INF, -1, 0, 1))
    arcs = (
        ReferenceArc((pts.index(-1), pts.index(0)), real_arc(-1, 0)),
        ReferenceArc((pts.index(1), pts.index(INF)), real_arc(1, INF)),
    )
    return pts.with_arcs(arcs)


def lattes_boundaries(n: int = 65):
    """Boundary 0 is the ``[1, inf]`` slit, boundary 1 the ``[-1, 0]`` slit."""
    return ((real_arc(1, INF, n), real_arc(-1, 0, n)),)


def _real_angle(z) -> float:
    p = to_sphere(z)
    return math.atan2(p[0], -p[2])


def real_segment_distance(pts, a, b) -> np.ndarray:
    """Exact chordal distance from sphere points to the real segment ``[a, b]``.

    The real line is the great circle ``y = 0``; a point is projected onto
    it and the angle clamped to the segment, taken the short way round as
    in :func:`real_arc`.
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    ta, tb = _real_angle(a), _real_angle(b)
    if abs(tb - ta) > math.pi:
        tb += -2 * math.pi if tb > ta else 2 * math.pi
    lo, hi = min(ta, tb), max(ta, tb)
    t = np.arctan2(pts[:, 0], -pts[:, 2])
    # move t into the window's 2pi period before clamping
    mid = 0.5 * (lo + hi)
    t = mid + (t - mid + math.pi) % (2 * math.pi) - math.pi
    t = np.clip(t, lo, hi)
    q = np.stack([np.sin(t), np.zeros_like(t), -np.cos(t)], axis=-1)
    return np.linalg.norm(pts - q, axis=1)


def lattes_slit_distance(pts) -> np.ndarray:
    """Distance to ``[1, inf] U [-1, 0]``."""
    return np.minimum(real_segment_distance(pts, 1, INF), real_segment_distance(pts, -1, 0))


def lattes_core(n: int = 2048) -> CurvePolyline:
    """An ellipse around ``[-1, 0]`` that keeps clear of ``1`` and the critical values."""
    return ellipse(-0.5, 0.8, 1.152, n)


def lattes_system(nodes: int = 2048, delta: float = DEFAULT_DELTA) -> BranchSystem:
    f = lattes_map()
    return BranchSystem("lattes", parse_spec(LATTES_SPEC), (f, f), (lattes_core(nodes),), lattes_boundaries(),
                        lattes_marked(), delta)


CUBIC_SPEC = {
    "components": [{"name": "1 < |z| < e", "modulus": 1.0}],
    "subannuli": [
        {"parent": 0, "target": 0, "degree": 3, "orientation": 1, "shares": [0]},
        {"parent": 0, "target": 0, "degree": 3, "orientation": -1, "shares": [1]},
    ],
}


def cubic_model_system(nodes: int = 2048, delta: float = DEFAULT_DELTA) -> BranchSystem:
    """Branches ``z^3`` on ``1 < |z| < e^{1/3}`` and ``e^3 / z^3`` on ``e^{2/3} < |z| < e``."""
    e3 = math.exp(3)
    g0 = RationalMap([1, 0, 0, 0], [1], "z^3")
    g1 = RationalMap([e3], [1, 0, 0, 0], "e^3/z^3")
    bnd = ((circle(0, 1.0, 64).points, circle(0, math.e, 64).points),)
    core = circle(0, math.exp(0.5), nodes)
    marked = MarkedSphere((0, INF))
    return BranchSystem("cubic-annulus-model", parse_spec(CUBIC_SPEC), (g0, g1), (core,), bnd, marked, delta)


BUILTIN_SYSTEMS = {"lattes": lattes_system, "cubic-annulus-model": cubic_model_system}


def builtin_system(name: str, nodes: int = 2048, delta: float = DEFAULT_DELTA) -> BranchSystem:
    try:
        return BUILTIN_SYSTEMS[name](nodes, delta)
    except KeyError:
        raise ValidationError(f"unknown built-in system {name!r}; choose from {sorted(BUILTIN_SYSTEMS)}") from None
