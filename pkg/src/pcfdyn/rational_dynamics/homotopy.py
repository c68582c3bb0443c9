"""Homotopy tags of Jordan curves on a marked sphere.

A tag records which marked points lie on each side of the curve and, when
reference arcs are available, the reduced number of crossings with each
arc.  With four marked points these data determine the homotopy class of a
non-peripheral curve among the curves we meet (the slit-avoiding ones).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AmbiguousTag, PreconditionError
from .curves import CurvePolyline, chart_for, segment_crossings, winding_numbers
from .maps import MarkedSphere

MARKED_CLEARANCE = 1e-6


@dataclass(frozen=True)
class HomotopyTag:
    side0: tuple[int, ...]  # indices into the marked set; side0 holds marked point 0
    side1: tuple[int, ...]
    crossings: tuple[int, ...] | None
    kind: str  # inessential | peripheral | non-peripheral

    @property
    def peripheral(self) -> bool:
        return self.kind != "non-peripheral"

    def same_class(self, other: "HomotopyTag") -> bool:
        return (self.side0, self.side1, self.crossings) == (other.side0, other.side1, other.crossings)

    def to_dict(self):
        return {
            "side0": list(self.side0),
            "side1": list(self.side1),
            "crossings": None if self.crossings is None else list(self.crossings),
            "kind": self.kind,
        }


def sides(curve: CurvePolyline, points: np.ndarray, chart=None) -> np.ndarray:
    """Winding number of ``curve`` around each sphere point (0 on the pole's side)."""
    chart = chart or chart_for(curve, extra=[points])
    return winding_numbers(chart(curve.points), chart(np.asarray(points).reshape(-1, 3)))


def separates(curve: CurvePolyline, set0: np.ndarray, set1: np.ndarray) -> bool:
    """True if all of ``set0`` lies on one side of ``curve`` and all of ``set1`` on the other."""
    chart = chart_for(curve, extra=[set0, set1])
    w0 = sides(curve, set0, chart)
    w1 = sides(curve, set1, chart)
    a0, a1 = set(np.abs(w0) % 2), set(np.abs(w1) % 2)
    return len(a0) == 1 and len(a1) == 1 and a0 != a1


def _crossing_word(chart, curve: CurvePolyline, arcs):
    """Crossings in the order met along the curve: ``(curve_param, arc, arc_param, sign)``."""
    z = chart(curve.loop())
    word = []
    for a, arc in enumerate(arcs):
        q = chart(arc.points)
        ii, jj, s, t = segment_crossings(z, q)
        dA = z[ii + 1] - z[ii]
        dB = q[jj + 1] - q[jj]
        sign = np.sign(dA.real * dB.imag - dA.imag * dB.real).astype(int)
        for i, j, si, ti, sg in zip(ii, jj, s, t, sign):
            word.append((i + si, a, j + ti, int(sg)))
    word.sort()
    return word, z


def _point_on(poly, param):
    i = int(np.floor(param))
    i = min(i, len(poly) - 2)
    f = param - i
    return poly[i] * (1 - f) + poly[i + 1] * f


def _bigon(z, arcq, c1, c2):
    """Closed planar polygon: curve from crossing ``c1`` to ``c2``, then back along the arc."""
    n = len(z) - 1
    s1, s2 = c1[0], c2[0]
    if s2 < s1:
        s2 += n
    idx = np.arange(int(np.floor(s1)) + 1, int(np.floor(s2)) + 1)
    path = [_point_on(z, s1)] + [z[k % n] for k in idx] + [_point_on(z, s2 % n if s2 >= n else s2)]
    t1, t2 = c1[2], c2[2]
    lo, hi = sorted((t1, t2))
    inner = list(arcq[int(np.floor(lo)) + 1 : int(np.floor(hi)) + 1])
    back = inner[::-1] if t2 > t1 else inner
    return np.array(path + back, dtype=complex)


def reduce_crossings(word, z, arcs_q, marked_q, tol: float = 1e-9):
    """Remove back-and-forth crossing pairs that bound an unmarked bigon.

    Repeats until no removable adjacent pair is left (cyclically).  A pair
    whose bigon passes within ``tol`` of a marked point cannot be decided
    and raises :class:`AmbiguousTag`.
    """
    word = list(word)
    changed = True
    while changed and len(word) >= 2:
        changed = False
        L = len(word)
        for k in range(L):
            c1, c2 = word[k], word[(k + 1) % L]
            if L == 2 and k == 1:
                break
            if c1[1] != c2[1] or c1[3] == c2[3]:
                continue
            poly = _bigon(z, arcs_q[c1[1]], c1, c2)
            dist = np.min(np.abs(poly[:, None] - marked_q[None, :]))
            if dist < tol:
                raise AmbiguousTag("bigon passes through a marked point", {"pair": [k, (k + 1) % L]})
            if np.all(winding_numbers(poly, marked_q) == 0):
                for idx in sorted({k, (k + 1) % L}, reverse=True):
                    word.pop(idx)
                changed = True
                break
    return word


def classify_curve(marked: MarkedSphere, curve: CurvePolyline, arcs=None) -> HomotopyTag:
    """Partition of the marked points by ``curve``, plus reduced arc crossings.

    ``arcs`` defaults to the reference arcs stored on ``marked``; crossing
    counts are only computed when exactly four points are marked.
    """
    if not curve.closed:
        raise PreconditionError("homotopy tags are defined for closed curves")
    mp = marked.sphere()
    dmin = curve.nearest_distance(mp).min() if len(mp) else np.inf
    if dmin < MARKED_CLEARANCE:
        raise PreconditionError(f"curve passes within {dmin:.2e} of a marked point")
    arcs = marked.arcs if arcs is None else tuple(arcs)
    extra = [mp] + [a.points for a in arcs]
    chart = chart_for(curve, extra=extra)
    w = winding_numbers(chart(curve.points), chart(mp)) if len(mp) else np.array([], int)
    inside = np.abs(w) % 2 == 1
    ref = inside[0] if len(mp) else False
    side0 = tuple(int(i) for i in np.nonzero(inside == ref)[0])
    side1 = tuple(int(i) for i in np.nonzero(inside != ref)[0])
    small = min(len(side0), len(side1))
    kind = "inessential" if small == 0 else ("peripheral" if small == 1 else "non-peripheral")
    crossings = None
    if len(mp) == 4 and arcs:
        word, z = _crossing_word(chart, curve, arcs)
        arcs_q = [chart(a.points) for a in arcs]
        word = reduce_crossings(word, z, arcs_q, chart(mp))
        crossings = tuple(sum(1 for c in word if c[1] == a) for a in range(len(arcs)))
    return HomotopyTag(side0, side1, crossings, kind)
