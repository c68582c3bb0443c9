"""Rational maps, their critical points and post-critical sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import PcfDynError, ValidationError
from .sphere import INF, chordal, from_sphere, homogeneous_to_sphere, is_inf, to_sphere


class IllConditioned(PcfDynError):
    """A root cluster could not be polished to the requested residual."""

    def __init__(self, message, condition):
        super().__init__(f"{message} (condition estimate {condition:.3g})")
        self.condition = condition


def _coeffs(seq) -> np.ndarray:
    out = []
    for c in seq:
        if isinstance(c, (list, tuple)):
            if len(c) != 2:
                raise ValidationError(f"coefficient {c!r} is not a (re, im) pair")
            out.append(complex(float(c[0]), float(c[1])))
        elif isinstance(c, str):
            out.append(complex(c.replace(" ", "")))
        else:
            out.append(complex(c))
    arr = np.array(out, dtype=complex)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError("coefficients must be finite")
    return arr


def _strip(p: np.ndarray, rel: float = 0.0) -> np.ndarray:
    scale = np.max(np.abs(p)) if p.size else 0.0
    k = 0
    while k < len(p) - 1 and abs(p[k]) <= rel * scale:
        k += 1
    return p[k:]


@dataclass(frozen=True, eq=False)
class RationalMap:
    """``f = P / Q`` with coefficient arrays listed from the highest degree down.

    ``degree`` is ``max(deg P, deg Q)``; ``P`` and ``Q`` must be coprime and
    the degree at least 2.
    """

    num: np.ndarray
    den: np.ndarray
    name: str = ""
    degree: int = field(init=False)
    pz: tuple = field(init=False, repr=False)
    qz: tuple = field(init=False, repr=False)

    def __post_init__(self):
        num = _strip(_coeffs(self.num))
        den = _strip(_coeffs(self.den))
        if not np.any(den):
            raise ValidationError("denominator is identically zero")
        if not np.any(num):
            raise ValidationError("numerator is identically zero")
        d = max(len(num), len(den)) - 1
        if d < 2:
            raise ValidationError(f"degree {d} < 2")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "degree", d)
        pz = np.concatenate([np.zeros(d + 1 - len(num), complex), num])
        qz = np.concatenate([np.zeros(d + 1 - len(den), complex), den])
        object.__setattr__(self, "pz", tuple(complex(c) for c in pz))
        object.__setattr__(self, "qz", tuple(complex(c) for c in qz))
        self._check_coprime()

    def _check_coprime(self):
        p, q = self.num, self.den
        small, big = (p, q) if len(p) <= len(q) else (q, p)
        if len(small) == 1:
            return
        scale = np.sum(np.abs(big))
        for r in np.roots(small):
            val = abs(np.polyval(big, r)) / (scale * max(1.0, abs(r)) ** (len(big) - 1))
            if val < 1e-10:
                raise ValidationError(f"numerator and denominator share the root {r:.6g}")

    # -- evaluation --------------------------------------------------------

    def __call__(self, z):
        """Evaluate at a complex scalar; ``inf`` in and out is allowed."""
        p = self.sphere(to_sphere(z))
        w = complex(from_sphere(p))
        return w

    def homogeneous(self, z):
        """``(P, Q)`` at ``z`` in the chart that keeps the arguments bounded."""
        if is_inf(z):
            return self.pz[0], self.qz[0]
        if abs(z) <= 1:
            return _horner(self.pz, z), _horner(self.qz, z)
        u = 1 / z
        return _horner(self.pz[::-1], u), _horner(self.qz[::-1], u)

    def sphere(self, pts) -> np.ndarray:
        """Vectorised evaluation on unit vectors, shape ``(..., 3)``."""
        pts = np.asarray(pts, dtype=float)
        south = pts[..., 2] <= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (pts[..., 0] + 1j * pts[..., 1]) / (1 - pts[..., 2])
            u = (pts[..., 0] - 1j * pts[..., 1]) / (1 + pts[..., 2])
        z = np.where(south, z, 0)
        u = np.where(south, 0, u)
        pz, qz = np.array(self.pz), np.array(self.qz)
        a = np.where(south, np.polyval(pz, z), np.polyval(pz[::-1], u))
        b = np.where(south, np.polyval(qz, z), np.polyval(qz[::-1], u))
        return homogeneous_to_sphere(a, b)

    def derivative_numerator(self) -> np.ndarray:
        p, q = np.array(self.pz), np.array(self.qz)
        return np.polysub(np.polymul(np.polyder(p), q), np.polymul(p, np.polyder(q)))

    # -- io ----------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "numerator": [[float(c.real), float(c.imag)] for c in self.num],
            "denominator": [[float(c.real), float(c.imag)] for c in self.den],
        }

    @classmethod
    def from_dict(cls, raw) -> "RationalMap":
        try:
            return cls(raw["numerator"], raw["denominator"], str(raw.get("name", "")))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed map description: {exc}") from None


def _horner(coeffs, z):
    acc = 0j
    for c in coeffs:
        acc = acc * z + c
    return acc


# ---------------------------------------------------------------------------
# critical points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalPoint:
    point: complex
    multiplicity: int
    residual: float

    def to_dict(self):
        return {"point": _jsonable(self.point), "multiplicity": self.multiplicity}


def _jsonable(z):
    return "inf" if is_inf(z) else [float(np.real(z)), float(np.imag(z))]


def critical_points(f: RationalMap, cluster: float = 1e-4, residual_tol: float = 1e-10) -> list[CriticalPoint]:
    """Zeros of ``P'Q - PQ'`` plus ``inf`` with the missing multiplicity.

    Roots closer than ``cluster`` are merged into one of higher
    multiplicity, then polished by Newton on the derivative of order
    ``m - 1``.
    """
    d = f.degree
    W = _strip(f.derivative_numerator(), 1e-14)
    total = 2 * d - 2
    out: list[CriticalPoint] = []
    finite = len(W) - 1
    if finite < total:
        out.append(CriticalPoint(INF, total - finite, 0.0))
    if finite <= 0:
        return out
    roots = list(np.roots(W))
    groups: list[list[complex]] = []
    for r in sorted(roots, key=lambda r: (r.real, r.imag)):
        for g in groups:
            if abs(g[0] - r) <= cluster * max(1.0, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    scale_poly = np.abs(W)
    for g in groups:
        m = len(g)
        z = complex(np.mean(g))
        dm = W
        for _ in range(m - 1):
            dm = np.polyder(dm)
        ddm = np.polyder(dm)
        for _ in range(50):
            den = np.polyval(ddm, z)
            if den == 0:
                break
            step = np.polyval(dm, z) / den
            z -= step
            if abs(step) <= 1e-16 * max(1.0, abs(z)):
                break
        scale = float(np.polyval(scale_poly, max(1.0, abs(z))))
        res = abs(np.polyval(W, z)) / scale
        spread = max(abs(r - z) for r in g)
        if m > 1 and res > residual_tol:
            raise IllConditioned(f"critical cluster near {z:.6g} of size {m}", spread / max(1e-300, res))
        if res > residual_tol:
            raise IllConditioned(f"critical point near {z:.6g} did not polish", res / 1e-16)
        out.append(CriticalPoint(z, m, res))
    if sum(c.multiplicity for c in out) != total:
        raise PcfDynError("critical multiplicities do not add up to 2d - 2")
    return out


def critical_values(f: RationalMap) -> list[complex]:
    vals = []
    for c in critical_points(f):
        v = f(c.point)
        if all(chordal(v, u) > 1e-9 for u in vals):
            vals.append(v)
    return vals


# ---------------------------------------------------------------------------
# post-critical set
# ---------------------------------------------------------------------------


def canonical_key(z):
    """``inf`` first, then by real and imaginary part."""
    return (0, 0.0, 0.0) if is_inf(z) else (1, float(np.real(z)), float(np.imag(z)))


@dataclass(frozen=True)
class ReferenceArc:
    """An arc joining two marked points, given by dense sphere samples."""

    ends: tuple[int, int]
    points: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class MarkedSphere:
    points: tuple[complex, ...]
    arcs: tuple[ReferenceArc, ...] = ()

    def __post_init__(self):
        pts = tuple(sorted((complex(p) for p in self.points), key=canonical_key))
        for i in range(len(pts)):
            for j in range(i):
                if chordal(pts[i], pts[j]) < 1e-9:
                    raise ValidationError("marked points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def sphere(self) -> np.ndarray:
        return to_sphere(np.array(self.points, dtype=complex))

    def index(self, z, tol: float = 1e-6) -> int:
        for i, p in enumerate(self.points):
            if chordal(p, z) <= tol:
                return i
        raise KeyError(z)

    def with_arcs(self, arcs) -> "MarkedSphere":
        return MarkedSphere(self.points, tuple(arcs))

    def to_dict(self):
        return {"points": [_jsonable(p) for p in self.points]}


def real_arc(a, b, n: int = 257) -> np.ndarray:
    """Sphere samples of the real segment from ``a`` to ``b`` (either may be ``inf``)."""
    pa, pb = to_sphere(a), to_sphere(b)
    # the real line is the great circle y = 0; walk the shorter way through the real axis
    ang = lambda p: math.atan2(p[0], -p[2])
    ta, tb = ang(pa), ang(pb)
    if abs(tb - ta) > math.pi:
        tb += -2 * math.pi if tb > ta else 2 * math.pi
    t = np.linspace(ta, tb, n)
    return np.stack([np.sin(t), np.zeros_like(t), -np.cos(t)], axis=-1)


@dataclass(frozen=True)
class OrbitRecord:
    critical_point: complex
    orbit: tuple[complex, ...]
    preperiod: int | None
    period: int | None
    closing_distance: float | None
    near_misses: int

    def to_dict(self):
        return {
            "critical_point": _jsonable(self.critical_point),
            "orbit": [_jsonable(z) for z in self.orbit],
            "preperiod": self.preperiod,
            "period": self.period,
            "closing_distance": self.closing_distance,
            "near_misses": self.near_misses,
        }


@dataclass(frozen=True)
class NotPCF:
    critical_point: complex
    orbit_length: int
    reason: str
    orbits: tuple[OrbitRecord, ...] = ()
    kind: str = "not_pcf"

    def to_dict(self):
        return {"kind": self.kind, "critical_point": _jsonable(self.critical_point),
                "orbit_length": self.orbit_length, "reason": self.reason}


@dataclass(frozen=True)
class PostCritical:
    marked: MarkedSphere
    orbits: tuple[OrbitRecord, ...]
    kind: str = "pcf"

    def to_dict(self):
        return {"kind": self.kind, "points": self.marked.to_dict()["points"],
                "orbits": [o.to_dict() for o in self.orbits]}


ARRIVAL = 1e-3


def _orbit(f, c, max_orbit, tol):
    """Iterate until ``x_k`` returns within ``tol`` of an earlier ``x_j``.

    A return only counts if the orbit arrived there by a genuine jump: the
    predecessors ``x_{j-1}`` and ``x_{k-1}`` must be at least ``ARRIVAL``
    apart.  Convergence to an attracting cycle fails this test (the
    predecessors are themselves nearly equal), so it is never mistaken for
    closing.
    """
    xs = [to_sphere(c)]
    near = 0
    for k in range(1, max_orbit + 1):
        x = f.sphere(xs[-1])
        dists = np.linalg.norm(np.array(xs) - x, axis=1)
        hits = np.nonzero(dists <= tol)[0]
        closed = None
        for j in hits[::-1]:
            j = int(j)
            if j == 0 or np.linalg.norm(xs[j - 1] - xs[-1]) >= ARRIVAL:
                closed = (j, k - j, float(dists[j]))
                break
        if closed is None and len(hits):
            near += 1
        if closed is not None:
            return xs, closed, near
        xs.append(x)
    return xs, None, near


def post_critical(f: RationalMap, max_orbit: int = 64, tol: float = 1e-9, merge: float = 1e-6):
    """Follow every critical orbit; return :class:`PostCritical` or :class:`NotPCF`."""
    if max_orbit < 1 or not tol > 0:
        raise ValidationError("max_orbit must be >= 1 and tol positive")
    records = []
    pts: list[np.ndarray] = []
    for cp in critical_points(f):
        xs, closed, near = _orbit(f, cp.point, max_orbit, tol)
        if closed is None:
            return NotPCF(cp.point, len(xs) - 1, "orbit did not close", tuple(records))
        j, p, dist = closed
        # x_k returns to x_j, so the post-critical points are x_1..x_{k-1} plus x_j
        tail = xs[1:] if j > 0 else xs
        orbit = tuple(complex(from_sphere(x)) for x in tail)
        records.append(OrbitRecord(cp.point, orbit, j, p, dist, near))
        for x in tail:
            if all(np.linalg.norm(x - q) > merge for q in pts):
                pts.append(x)
    marked = MarkedSphere(tuple(complex(from_sphere(x)) for x in pts))
    return PostCritical(marked, tuple(records))
