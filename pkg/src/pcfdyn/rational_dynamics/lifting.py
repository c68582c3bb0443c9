"""Path lifting through a rational map by predictor-corrector continuation.

We solve ``b(t) P(z) - a(t) Q(z) = 0`` where ``[a : b]`` runs along the
target path.  Both the unknown and the target live in whichever of the two
standard charts (``z`` or ``1/z``) keeps them bounded, so paths through
``inf`` need no special treatment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConsistencyError, CriticalValueCollision, PreconditionError, StepFailure
from .curves import CurvePolyline
from .maps import RationalMap, critical_values
from .sphere import INF, from_sphere, homogeneous_to_sphere, is_inf, to_sphere

DEFAULT_DELTA = 1e-4
RESIDUAL_TOL = 1e-9
MAX_NEWTON = 8
CHART_SWITCH = 1.5
MAX_CHART_STEP = 0.25


def _der(c):
    d = len(c) - 1
    return [c[k] * (d - k) for k in range(d)]


def _horner2(c, dc, x):
    v = 0j
    for a in c:
        v = v * x + a
    dv = 0j
    for a in dc:
        dv = dv * x + a
    return v, dv


def _target(p):
    """Chart and coordinate of a sphere point used as a path node."""
    x, y, h = p
    if h <= 0:
        return 0, complex(x, y) / (1 - h)
    return 1, complex(x, -y) / (1 + h)


class Lifter:
    """Continuation engine for one map; reusable across paths."""

    def __init__(self, f: RationalMap, delta: float = DEFAULT_DELTA):
        if not delta > 0:
            raise PreconditionError("critical-value clearance must be positive")
        self.f = f
        self.delta = delta
        pz, qz = list(f.pz), list(f.qz)
        pu, qu = pz[::-1], qz[::-1]
        self.polys = ((pz, _der(pz), qz, _der(qz)), (pu, _der(pu), qu, _der(qu)))
        self.crit_values = [v for v in critical_values(f)]
        self.crit_sphere = to_sphere(np.array(self.crit_values, dtype=complex)).reshape(-1, 3)

    # -- clearance ---------------------------------------------------------

    def check_clearance(self, pts: np.ndarray, closed: bool) -> None:
        """Raise :class:`CriticalValueCollision` if a path segment passes within ``delta`` of a critical value."""
        loop = np.vstack([pts, pts[:1]]) if closed else pts
        A, B = loop[:-1], loop[1:]
        AB = B - A
        nseg = len(A)
        for c, v in zip(self.crit_sphere, self.crit_values):
            t = np.clip(((c - A) * AB).sum(1) / np.maximum((AB * AB).sum(1), 1e-300), 0, 1)
            d = np.linalg.norm(A + t[:, None] * AB - c, axis=1)
            k = int(np.argmin(d))
            if d[k] < self.delta:
                raise CriticalValueCollision((k + t[k]) / nseg, v)

    # -- roots -------------------------------------------------------------

    def preimages(self, w) -> list[complex]:
        """All ``deg f`` solutions of ``f(z) = w`` (``inf`` included)."""
        p = to_sphere(w)
        ch, om = _target(p)
        pz, _, qz, _ = self.polys[0]
        if ch == 0:
            c = np.array(pz) - om * np.array(qz)
        else:
            c = om * np.array(pz) - np.array(qz)
        scale = np.max(np.abs(c))
        k = 0
        while k < len(c) - 1 and abs(c[k]) <= 1e-13 * scale:
            k += 1
        roots = [complex(r) for r in np.roots(c[k:])] + [INF] * k
        roots = [self._polish_point(r, ch, om) for r in roots]
        if len(roots) != self.f.degree:
            raise ConsistencyError(f"found {len(roots)} preimages, expected {self.f.degree}")
        return roots

    def _polish_point(self, z, ch, om):
        if is_inf(z):
            zc, zeta = 1, 0j
        elif abs(z) <= 1:
            zc, zeta = 0, z
        else:
            zc, zeta = 1, 1 / z
        zeta, _ = self._newton(zc, zeta, ch, om, 20)
        if zc == 0:
            return zeta
        return INF if zeta == 0 else 1 / zeta

    # -- core --------------------------------------------------------------

    def _eval(self, zc, zeta, ch, om):
        P, dP, Q, dQ = self.polys[zc]
        p, dp = _horner2(P, dP, zeta)
        q, dq = _horner2(Q, dQ, zeta)
        if ch == 0:
            return p - om * q, dp - om * dq, p, q
        return om * p - q, om * dp - dq, p, q

    def _newton(self, zc, zeta, ch, om, iters=MAX_NEWTON):
        last = np.inf
        for _ in range(iters):
            F, Fz, _, _ = self._eval(zc, zeta, ch, om)
            if Fz == 0:
                return zeta, np.inf
            step = F / Fz
            zeta -= step
            last = abs(step)
            if last <= 1e-15 * (1 + abs(zeta)):
                break
        return zeta, last

    def lift_nodes(self, pts: np.ndarray, seed, closed: bool = False, check: bool = True):
        """Lift consecutive path nodes from ``seed``.

        Returns the lifted nodes as sphere points, one per input node, plus
        (for a closed path) the endpoint reached after the closing segment.
        """
        pts = np.asarray(pts, dtype=float)
        if check:
            self.check_clearance(pts, closed)
        loop = np.vstack([pts, pts[:1]]) if closed else pts
        ch0, om0 = _target(loop[0])
        if is_inf(seed):
            zc, zeta = 1, 0j
        elif abs(seed) <= 1:
            zc, zeta = 0, complex(seed)
        else:
            zc, zeta = 1, 1 / complex(seed)
        if np.linalg.norm(self.f.sphere(to_sphere(seed)) - loop[0]) > 1e-6:
            raise PreconditionError("seed does not map to the start of the path")
        zeta, _ = self._newton(zc, zeta, ch0, om0, 20)
        charts = [zc]
        vals = [zeta]
        nseg = len(loop) - 1
        h = 1.0
        for i in range(nseg):
            pa, pb = loop[i], loop[i + 1]
            ch = 0 if pa[2] + pb[2] <= 0 else 1
            oa = _target_in(pa, ch)
            ob = _target_in(pb, ch)
            dom = ob - oa
            t = 0.0
            while t < 1.0:
                h = min(h, 1.0 - t)
                om = oa + t * dom
                F, Fz, p, q = self._eval(zc, zeta, ch, om)
                Ft = -dom * q if ch == 0 else dom * p
                if Fz == 0:
                    raise StepFailure((i + t) / nseg, "singular Jacobian")
                dz = -Ft / Fz
                pred = zeta + h * dz
                tn = t + h
                new, last = self._newton(zc, pred, ch, oa + tn * dom)
                move = abs(pred - zeta)
                corr = abs(new - pred)
                if last <= 1e-11 and corr <= 0.1 * move + 1e-12 and abs(new - zeta) <= MAX_CHART_STEP:
                    zeta, t = new, tn
                    if abs(zeta) > CHART_SWITCH:
                        zc, zeta = 1 - zc, 1 / zeta
                    h = min(1.0, 2 * h)
                else:
                    h *= 0.5
                    if h < 1e-12:
                        raise StepFailure((i + t) / nseg)
            # exact node polish
            zeta, _ = self._newton(zc, zeta, ch, ob, 4)
            charts.append(zc)
            vals.append(zeta)
        charts = np.array(charts)
        vals = np.array(vals)
        a = np.where(charts == 0, vals, 1)
        b = np.where(charts == 0, 1, vals)
        out = homogeneous_to_sphere(a, b)
        res = np.linalg.norm(self.f.sphere(out) - loop, axis=1)
        k = int(np.argmax(res))
        if res[k] > RESIDUAL_TOL:
            raise StepFailure(k / max(nseg, 1), f"residual {res[k]:.2e} above {RESIDUAL_TOL:g}")
        return out


def _target_in(p, ch):
    x, y, h = p
    if ch == 0:
        return complex(x, y) / (1 - h)
    return complex(x, -y) / (1 + h)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def lift_path(f: RationalMap, path: CurvePolyline, seed, delta: float = DEFAULT_DELTA,
              lifter: Lifter | None = None) -> CurvePolyline:
    """The lift of ``path`` starting at ``seed`` (``f(seed)`` must be the path's start)."""
    lf = lifter or Lifter(f, delta)
    nodes = lf.lift_nodes(path.points, seed, closed=False)
    return CurvePolyline(nodes, closed=False)


def lift_path_all(f: RationalMap, path: CurvePolyline, delta: float = DEFAULT_DELTA,
                  lifter: Lifter | None = None) -> list[CurvePolyline]:
    """The ``deg f`` lifts of an open path, one from each preimage of its start."""
    lf = lifter or Lifter(f, delta)
    lf.check_clearance(path.points, False)
    seeds = lf.preimages(complex(from_sphere(path.points[0])))
    return [CurvePolyline(lf.lift_nodes(path.points, s, closed=False, check=False), closed=False) for s in seeds]


@dataclass(frozen=True, eq=False)
class LiftComponent:
    curve: CurvePolyline
    degree: int
    seeds: tuple[int, ...] = field(default=())


def lift_curve_components(f: RationalMap, curve: CurvePolyline, delta: float = DEFAULT_DELTA,
                          lifter: Lifter | None = None) -> list[LiftComponent]:
    """Every component of ``f^{-1}(curve)`` with its covering degree.

    One lift is started from each solution of ``f(z) = w_0``.  Going once
    around the curve moves a seed to another seed; a component closes after
    ``degree`` circuits.
    """
    if not curve.closed:
        raise PreconditionError("lift_curve_components needs a closed curve")
    lf = lifter or Lifter(f, delta)
    pts = curve.points
    lf.check_clearance(pts, True)
    seeds = lf.preimages(complex(from_sphere(pts[0])))
    seed_pts = to_sphere(np.array(seeds, dtype=complex)).reshape(-1, 3)
    visited = [False] * len(seeds)
    comps = []
    for s0 in range(len(seeds)):
        if visited[s0]:
            continue
        visited[s0] = True
        cur = seeds[s0]
        chunks = []
        used = [s0]
        while True:
            nodes = lf.lift_nodes(pts, cur, closed=True, check=False)
            chunks.append(nodes[:-1])
            end = nodes[-1]
            d = np.linalg.norm(seed_pts - end, axis=1)
            k = int(np.argmin(d))
            if d[k] > 1e-6:
                raise ConsistencyError("a circuit ended away from every preimage of the base point")
            if k == s0:
                break
            if visited[k]:
                raise ConsistencyError("two lifts merged: step control jumped between sheets")
            visited[k] = True
            used.append(k)
            cur = seeds[k]
            if len(chunks) > f.degree:
                raise ConsistencyError("lift did not close within deg f circuits")
        comps.append(LiftComponent(CurvePolyline(np.vstack(chunks), closed=True), len(chunks), tuple(used)))
    if sum(c.degree for c in comps) != f.degree:
        raise ConsistencyError("component degrees do not add up to deg f")
    return comps
