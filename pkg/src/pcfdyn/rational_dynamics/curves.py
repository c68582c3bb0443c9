"""Polylines on the Riemann sphere: resampling, distances, simplicity."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from ..errors import ValidationError
from .sphere import Chart, far_pole, from_sphere, normalize, to_sphere

DEFAULT_NODES = 2048


@dataclass(frozen=True, eq=False)
class CurvePolyline:
    """Ordered sphere points (unit vectors, shape ``(N, 3)``).

    For a closed curve the last point is joined back to the first; it is
    not repeated.
    """

    points: np.ndarray = field(repr=False)
    closed: bool = True
    orientation: int = 1

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3 or len(p) < 2:
            raise ValidationError("a curve needs at least two sphere points of shape (N, 3)")
        if not np.all(np.isfinite(p)):
            raise ValidationError("curve points must be finite")
        object.__setattr__(self, "points", normalize(p))

    @classmethod
    def from_complex(cls, zs, closed: bool = True) -> "CurvePolyline":
        return cls(to_sphere(np.asarray(zs, dtype=complex)), closed)

    def __len__(self):
        return len(self.points)

    def complex(self) -> np.ndarray:
        return from_sphere(self.points)

    def loop(self) -> np.ndarray:
        """Points with the first repeated at the end when closed."""
        return np.vstack([self.points, self.points[:1]]) if self.closed else self.points

    def steps(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.loop(), axis=0), axis=1)

    def max_step(self) -> float:
        return float(self.steps().max())

    def length(self) -> float:
        return float(self.steps().sum())

    def reversed(self) -> "CurvePolyline":
        return CurvePolyline(self.points[::-1].copy(), self.closed, -self.orientation)

    def spline(self):
        """Cubic spline through the nodes, parametrised by chord length."""
        pts = self.loop()
        s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
        keep = np.concatenate([[True], np.diff(s) > 0])
        if self.closed:
            keep[-1] = True
        s, pts = s[keep], pts[keep]
        if self.closed:
            pts = pts.copy()
            pts[-1] = pts[0]
            return s, CubicSpline(s, pts, bc_type="periodic")
        return s, CubicSpline(s, pts)

    def upsample(self, factor: int = 8) -> np.ndarray:
        s, cs = self.spline()
        t = np.linspace(0, s[-1], factor * (len(s) - 1) + 1)
        if self.closed:
            t = t[:-1]
        return normalize(cs(t))

    def resample(self, n: int = DEFAULT_NODES, curvature_weight: float = 1.0) -> "CurvePolyline":
        """Redistribute ``n`` nodes by arc length, denser where the curve bends.

        Node density is proportional to ``1 + w * sqrt(kappa * L)`` with
        ``kappa`` the curvature and ``L`` the total length.
        """
        if n < 4:
            raise ValidationError("node budget must be at least 4")
        s, cs = self.spline()
        L = s[-1]
        fine = np.linspace(0, L, 16 * n + 1)
        d1 = cs(fine, 1)
        d2 = cs(fine, 2)
        sp = np.linalg.norm(d1, axis=1)
        kappa = np.linalg.norm(np.cross(d1, d2), axis=1) / np.maximum(sp, 1e-300) ** 3
        dens = sp * (1 + curvature_weight * np.sqrt(np.maximum(kappa, 0) * L))
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))])
        levels = np.linspace(0, cum[-1], n, endpoint=not self.closed)
        t = np.interp(levels, cum, fine)
        return CurvePolyline(normalize(cs(t)), self.closed, self.orientation)

    def nearest_distance(self, pts, factor: int = 8) -> np.ndarray:
        """Distance from each query point to the (spline-refined) curve."""
        dense = self.upsample(factor)
        pts = np.asarray(pts, dtype=float).reshape(-1, 3)
        _, idx = cKDTree(dense).query(pts)
        n = len(dense)
        best = np.linalg.norm(dense[idx] - pts, axis=1)
        for off in (-1, 0):
            a = idx + off
            b = a + 1
            if self.closed:
                a, b = a % n, b % n
            else:
                ok = (a >= 0) & (b < n)
                a, b = np.clip(a, 0, n - 1), np.clip(b, 0, n - 1)
            A, B = dense[a], dense[b]
            AB = B - A
            t = np.clip(np.einsum("ij,ij->i", pts - A, AB) / np.maximum(np.einsum("ij,ij->i", AB, AB), 1e-300), 0, 1)
            d = np.linalg.norm(A + t[:, None] * AB - pts, axis=1)
            if not self.closed:
                d = np.where(ok, d, np.inf)
            best = np.minimum(best, d)
        return best

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "x", "y", "z", "re", "im"])
        for i, (p, z) in enumerate(zip(self.points, self.complex())):
            re, im = ("inf", "") if np.isinf(z) else (f"{z.real:.12g}", f"{z.imag:.12g}")
            w.writerow([i, f"{p[0]:.12g}", f"{p[1]:.12g}", f"{p[2]:.12g}", re, im])
        return buf.getvalue()


def hausdorff(a: CurvePolyline, b: CurvePolyline, factor: int = 8) -> float:
    """Symmetric Hausdorff distance in the chordal metric."""
    da = a.nearest_distance(b.upsample(factor), factor).max()
    db = b.nearest_distance(a.upsample(factor), factor).max()
    return float(max(da, db))


def one_sided(a: CurvePolyline, b: CurvePolyline, factor: int = 8) -> float:
    """``sup_{p in a} d(p, b)``."""
    return float(b.nearest_distance(a.upsample(factor), factor).max())


# ---------------------------------------------------------------------------
# planar helpers
# ---------------------------------------------------------------------------


def chart_for(*curves, extra=()) -> Chart:
    sets = [c.points if isinstance(c, CurvePolyline) else np.asarray(c) for c in curves]
    sets += [np.asarray(e) for e in extra]
    return Chart(far_pole(*sets))


def winding_numbers(loop: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Winding numbers of the closed planar polygon ``loop`` around ``pts``."""
    loop = np.asarray(loop, dtype=complex)
    pts = np.atleast_1d(np.asarray(pts, dtype=complex))
    out = np.empty(len(pts))
    closed = np.concatenate([loop, loop[:1]])
    for k, p in enumerate(pts):
        v = closed - p
        out[k] = np.sum(np.angle(v[1:] / v[:-1])) / (2 * np.pi)
    return np.rint(out).astype(int)


def segment_crossings(P: np.ndarray, Q: np.ndarray, chunk: int = 512):
    """All proper crossings between planar polylines ``P`` and ``Q``.

    Returns arrays ``(i, j, s, t)``: segment ``P[i]P[i+1]`` meets
    ``Q[j]Q[j+1]`` at parameters ``s``, ``t`` in ``[0, 1)``.
    """
    a0, a1 = P[:-1], P[1:]
    b0, b1 = Q[:-1], Q[1:]
    out = [[], [], [], []]
    for lo in range(0, len(a0), chunk):
        A0 = a0[lo : lo + chunk, None]
        dA = a1[lo : lo + chunk, None] - A0
        dB = (b1 - b0)[None, :]
        w = b0[None, :] - A0
        den = (dA.real * dB.imag - dA.imag * dB.real)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (w.real * dB.imag - w.imag * dB.real) / den
            t = (w.real * dA.imag - w.imag * dA.real) / den
        hit = (den != 0) & (s >= 0) & (s < 1) & (t >= 0) & (t < 1)
        ii, jj = np.nonzero(hit)
        out[0].append(ii + lo)
        out[1].append(jj)
        out[2].append(s[ii, jj])
        out[3].append(t[ii, jj])
    return tuple(np.concatenate(x) if x else np.array([]) for x in out)


def self_intersections(curve: CurvePolyline, limit: int = 16) -> list[tuple[int, int]]:
    """Pairs of non-adjacent segments that cross (empty for a simple curve)."""
    chart = chart_for(curve)
    z = chart(curve.loop())
    n = len(z) - 1
    re = z.real
    lo_x = np.minimum(re[:-1], re[1:])
    hi_x = np.maximum(re[:-1], re[1:])
    order = np.argsort(lo_x)
    found = []
    # sweep along x: only segments with overlapping x-extents are compared
    active: list[int] = []
    for k in order:
        active = [a for a in active if hi_x[a] >= lo_x[k]]
        if active:
            cand = np.array(active)
            adj = (np.abs(cand - k) <= 1) | (curve.closed & (np.abs(cand - k) == n - 1))
            cand = cand[~adj]
            if len(cand):
                P = z[[k, k + 1]]
                ii, jj, _, _ = _pairwise(P, z, cand)
                for j in jj:
                    found.append((min(k, j), max(k, j)))
                    if len(found) >= limit:
                        return found
        active.append(int(k))
    return found


def _pairwise(P, z, cand):
    A0, dA = P[0], P[1] - P[0]
    B0, dB = z[cand], z[cand + 1] - z[cand]
    w = B0 - A0
    den = dA.real * dB.imag - dA.imag * dB.real
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (w.real * dB.imag - w.imag * dB.real) / den
        t = (w.real * dA.imag - w.imag * dA.real) / den
    hit = (den != 0) & (s >= 0) & (s <= 1) & (t >= 0) & (t <= 1)
    return None, cand[hit], s[hit], t[hit]


def is_simple(curve: CurvePolyline) -> bool:
    return not self_intersections(curve, limit=1)


def circle(center: complex, radius: float, n: int = 512) -> CurvePolyline:
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return CurvePolyline.from_complex(center + radius * np.exp(1j * t))


def ellipse(center: complex, a: float, b: float, n: int = 512) -> CurvePolyline:
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return CurvePolyline.from_complex(center + a * np.cos(t) + 1j * b * np.sin(t))
