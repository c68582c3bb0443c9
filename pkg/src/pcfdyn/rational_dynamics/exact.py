"""Numerical verification that core curves carry an exact annular system."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..annulus_engine import AnnularSystemSpec, Component, Subannulus, check_syntax, validate
from ..curve_complex import from_matrix, is_cantor, kappa_table, predicates
from ..errors import PreconditionError, ValidationError
from .curves import CurvePolyline, chart_for, winding_numbers
from .homotopy import HomotopyTag, classify_curve
from .lifting import DEFAULT_DELTA, Lifter, lift_curve_components
from .maps import MarkedSphere, NotPCF, RationalMap, post_critical
from .sphere import normalize
from .systems import BranchSystem


@dataclass(frozen=True, eq=False)
class VerifiedSystem:
    spec: AnnularSystemSpec
    graph: object
    system: BranchSystem
    report: dict = field(repr=False)


def _side(curve: CurvePolyline, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    chart = chart_for(curve, extra=[pts])
    return np.abs(winding_numbers(chart(curve.points), chart(pts))) % 2


def _offset_point(curve: CurvePolyline, toward: np.ndarray, eps: float = 1e-4) -> np.ndarray:
    """A point ``eps`` off ``curve`` on the side that contains ``toward``."""
    p, q = curve.points[0], curve.points[1]
    tangent = normalize(q - p)
    normal = normalize(np.cross(p, tangent))
    cands = normalize(np.stack([p + eps * normal, p - eps * normal]))
    s = _side(curve, np.vstack([cands, toward[None]]))
    return cands[0] if s[0] == s[2] else cands[1]


def _on_boundary(f: RationalMap, samples: np.ndarray, target_bnd, tol: float) -> int | None:
    """Which boundary piece of the target the image of ``samples`` lies on, if any."""
    img = f.sphere(samples)
    for b, pts in enumerate(target_bnd):
        curve = CurvePolyline(pts, closed=_is_loop(pts))
        if curve.nearest_distance(img, factor=4).max() <= tol:
            return b
    return None


def _is_loop(pts) -> bool:
    return np.linalg.norm(pts[0] - pts[-1]) < 2 * np.linalg.norm(pts[1] - pts[0])


def verify_exact_system(f: RationalMap, core_curves, band_width: float = 1e-3, boundaries=None,
                        marked: MarkedSphere | None = None, delta: float = DEFAULT_DELTA,
                        boundary_tol: float = 1e-5, kappa_depth: int = 10) -> VerifiedSystem:
    """Lift every core curve, tag the pieces and assemble the annular spec.

    ``boundaries[j]`` (optional) gives sample points of the two boundary
    pieces of annulus ``j``; with them, boundary sharing is decided by
    checking that ``f`` maps a boundary piece onto a boundary piece of the
    target.  ``band_width`` is the clearance every core curve and matched
    lift must keep from the marked points.
    """
    cores = [c if isinstance(c, CurvePolyline) else CurvePolyline(c) for c in core_curves]
    if not cores:
        raise ValidationError("at least one core curve is required")
    if marked is None:
        pc = post_critical(f)
        if isinstance(pc, NotPCF):
            raise PreconditionError("map is not post-critically finite")
        marked = pc.marked
    if len(marked) < 4:
        raise PreconditionError(f"#P = {len(marked)} < 4: every Jordan curve is peripheral")
    mp = marked.sphere()
    tags: list[HomotopyTag] = []
    for k, c in enumerate(cores):
        t = classify_curve(marked, c)
        if t.peripheral:
            raise ValidationError(f"core curve {k} is {t.kind}", )
        for k2, t2 in enumerate(tags):
            if t.same_class(t2):
                raise ValidationError(f"core curves {k2} and {k} are homotopic")
        tags.append(t)
    if boundaries is not None:
        for k, (c, (b0, b1)) in enumerate(zip(cores, boundaries)):
            s = _side(c, np.vstack([b0, b1]))
            s0, s1 = s[: len(b0)], s[len(b0) :]
            if len(set(s0)) != 1 or len(set(s1)) != 1 or s0[0] == s1[0]:
                raise ValidationError(
                    f"core curve {k} does not separate its boundary pieces (tag {tags[k].to_dict()}): non-matching class"
                )
    n = len(cores)
    lifter = Lifter(f, delta)
    M = [[0] * n for _ in range(n)]
    extra = [0] * n
    children: list[list[tuple[int, object]]] = [[] for _ in range(n)]
    lift_log = []
    for b, core in enumerate(cores):
        for comp in lift_curve_components(f, core, lifter=lifter):
            t = classify_curve(marked, comp.curve)
            match = next((g for g, tg in enumerate(tags) if t.same_class(tg)), None)
            lift_log.append({"core": b, "degree": comp.degree, "tag": t.to_dict(), "class": match})
            if match is not None:
                M[match][b] += 1
                children[match].append((b, comp))
            elif not t.peripheral:
                extra[b] += 1
    graph = from_matrix(M, degree=f.degree, extra_preimages=extra)
    clearance = min(
        [float(c.nearest_distance(mp).min()) for c in cores]
        + [float(comp.curve.nearest_distance(mp).min()) for ch in children for _, comp in ch]
    )
    subs = []
    maps = []
    orient_checks = []
    for j in range(n):
        kids = children[j]
        ref0 = mp[tags[j].side0[0]]
        # order by nesting from side 0
        ranks = []
        for a, (_, ca) in enumerate(kids):
            r = 0
            for b2, (_, cb) in enumerate(kids):
                if a != b2:
                    s = _side(cb.curve, np.vstack([ca.curve.points[:1], ref0[None]]))
                    r += int(s[0] != s[1])
            ranks.append(r)
        order = [kids[k] for k in np.argsort(ranks, kind="stable")]
        for r, (target, comp) in enumerate(order):
            shares = set()
            # orientation: does the side-0 neighbourhood map to side 0 of the target core?
            p = _offset_point(comp.curve, ref0)
            img = f.sphere(p)
            tref0 = mp[tags[target].side0[0]]
            s = _side(cores[target], np.vstack([img[None], tref0[None]]))
            orientation = 1 if s[0] == s[1] else -1
            if boundaries is not None:
                for side, idx in ((0, 0), (1, len(order) - 1)):
                    if r != idx:
                        continue
                    hit = _on_boundary(f, boundaries[j][side], boundaries[target], boundary_tol)
                    if hit is not None:
                        shares.add(side)
                        expect = 1 if hit == side else -1
                        orient_checks.append({"subannulus": len(subs), "side": side, "image_side": hit,
                                              "agrees": expect == orientation})
            subs.append(Subannulus(j, target, comp.degree, orientation, frozenset(shares)))
            maps.append(f)
    spec = AnnularSystemSpec(tuple(Component(f"A{j}") for j in range(n)), tuple(subs))
    check_syntax(spec)
    val = validate(spec)
    preds = predicates(graph)
    report = {
        "marked": marked.to_dict()["points"],
        "core_tags": [t.to_dict() for t in tags],
        "lifts": lift_log,
        "matrix": M,
        "extra_preimages": extra,
        "predicates": preds.to_dict(),
        "spec": spec.to_dict(),
        "validation": val.to_dict(),
        "orientation_checks": orient_checks,
        "clearance": clearance,
        "clearance_ok": clearance >= band_width,
    }
    if preds.pre_stable:
        verdict = is_cantor(graph)
        report["cantor"] = verdict.verdict
        report["kappa"] = [list(v) for v in kappa_table(graph, kappa_depth)]
    if any(not c["agrees"] for c in orient_checks):
        report["orientation_consistent"] = False
    else:
        report["orientation_consistent"] = True
    bnd = tuple(boundaries) if boundaries is not None else tuple((np.empty((0, 3)), np.empty((0, 3))) for _ in cores)
    system = BranchSystem("verified", spec, tuple(maps), tuple(cores), bnd, marked, delta) if boundaries is not None else None
    return VerifiedSystem(spec, graph, system, report)
