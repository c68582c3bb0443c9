"""Isotopy-lifting iteration for the Jordan curve of a nested code.

For a code ``K = (i_0, i_1, ...)`` the curve ``alpha_n`` is the core curve
pulled back through ``i_{n-1}``, then ``i_{n-2}``, ..., then ``i_0``, so that
``alpha_n`` lies in the depth-``n`` annulus ``A^n(K)``.  Each step applies
one more branch inverse on the inside, which is why the pullbacks are
memoised on the code word: ``alpha(w) = lift_{w[0]}(alpha(w[1:]))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..annulus_engine import boundary_code, is_admissible
from ..codes import Code
from ..errors import ValidationError
from .curves import DEFAULT_NODES, CurvePolyline, hausdorff, self_intersections
from .systems import BranchSystem


class CurveCache:
    """Memo of pulled-back curves keyed by code word."""

    def __init__(self, system: BranchSystem, nodes: int = DEFAULT_NODES):
        self.system = system
        self.nodes = nodes
        self.curves: dict[tuple[int, ...], CurvePolyline] = {}
        self.lifts = 0

    def core(self, word: tuple[int, ...], component: int) -> CurvePolyline:
        c = self.system.cores[component]
        return c if len(c) == self.nodes else c.resample(self.nodes)

    def get(self, word: tuple[int, ...]) -> CurvePolyline:
        """``alpha(word)``; iterative so long words do not recurse."""
        spec = self.system.spec
        todo = []
        w = tuple(word)
        while w and w not in self.curves:
            todo.append(w)
            w = w[1:]
        for w in reversed(todo):
            tail = w[1:]
            base = self.curves[tail] if tail else self.core((), spec.subannuli[w[0]].target)
            comp = self.system.lift_branch(w[0], base)
            self.lifts += 1
            self.curves[w] = comp.curve.resample(self.nodes)
        return self.curves[tuple(word)]

    def parent(self, word: tuple[int, ...]) -> CurvePolyline:
        """The curve that ``alpha(word)`` was lifted from."""
        spec = self.system.spec
        return self.get(word[1:]) if len(word) > 1 else self.core((), spec.subannuli[word[0]].target)


@dataclass(frozen=True, eq=False)
class WanderingResult:
    code: tuple[int, ...]
    curves: list[CurvePolyline] = field(repr=False)
    distances: list[float]
    converged: bool
    functoriality: float
    simple: bool
    self_intersections: int
    lifts: int

    @property
    def final(self) -> CurvePolyline:
        return self.curves[-1]

    def ratios(self) -> list[float]:
        d = self.distances
        return [d[k + 1] / d[k] for k in range(len(d) - 1) if d[k] > 0]

    def telescoping(self, lag: int = 5, burn_in: int = 5) -> bool:
        """``d_{n+lag} < d_n`` for every ``n >= burn_in`` that has data."""
        d = self.distances
        return all(d[n + lag] < d[n] for n in range(burn_in, len(d) - lag))

    def to_dict(self) -> dict:
        return {
            "code": list(self.code),
            "distances": [float(f"{x:.9g}") for x in self.distances],
            "converged": self.converged,
            "functoriality": float(f"{self.functoriality:.3g}"),
            "simple": self.simple,
            "self_intersections": self.self_intersections,
            "nodes": len(self.final),
            "iterations": len(self.curves) - 1,
        }


def _word(system: BranchSystem, code, n: int) -> tuple[int, ...]:
    if isinstance(code, (list, tuple)):
        code = Code.word(code) if len(code) >= n else Code.periodic(code)
    word = tuple(code.take(n))
    if not is_admissible(system.spec, word):
        raise ValidationError(f"code {list(word)} requests a branch the system does not have")
    return word


def wandering_curve(system: BranchSystem, code, iterations: int = 20, tol: float = 1e-12,
                    nodes: int = DEFAULT_NODES, cache: CurveCache | None = None) -> WanderingResult:
    """Run the iteration for ``iterations`` steps (or until ``d_n < tol``).

    ``d_n`` is the chordal Hausdorff distance between ``alpha_n`` and
    ``alpha_{n+1}``.  The last curve is checked for self-intersections and
    for functoriality: the branch map must send it onto the curve it was
    lifted from.
    """
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    word = _word(system, code, iterations)
    cache = cache or CurveCache(system, nodes)
    j0 = system.spec.subannuli[word[0]].parent
    curves = [cache.core((), j0)]
    dists: list[float] = []
    converged = False
    for n in range(1, iterations + 1):
        curves.append(cache.get(word[:n]))
        dists.append(hausdorff(curves[-2], curves[-1]))
        if dists[-1] < tol:
            converged = True
            break
    final_word = word[: len(curves) - 1]
    final = curves[-1]
    g = system.maps[final_word[0]]
    image = g.sphere(final.points)
    func = float(cache.parent(final_word).nearest_distance(image, factor=16).max())
    crossings = self_intersections(final)
    return WanderingResult(final_word, curves, dists, converged, func, not crossings, len(crossings), cache.lifts)


@dataclass(frozen=True)
class BoundaryDiagnostic:
    depth: int
    extension: int
    distances: tuple[float, float]

    def to_dict(self):
        return {"depth": self.depth, "extension": self.extension, "distances": [float(f"{d:.6g}") for d in self.distances]}


def boundary_diagnostic(system: BranchSystem, code, depth: int, extension: int = 3,
                        nodes: int = DEFAULT_NODES, cache: CurveCache | None = None) -> BoundaryDiagnostic:
    """Distance from ``alpha_depth`` to curves hugging both boundaries of ``A^depth(K)``.

    The boundary on side ``b`` is approximated by extending the word with
    ``extension`` symbols that keep boundary ``b`` of the target component.
    """
    word = _word(system, code, depth)
    cache = cache or CurveCache(system, nodes)
    K = cache.get(word)
    target = system.spec.subannuli[word[-1]].target
    out = []
    for side in (0, 1):
        ext = boundary_code(system.spec, target, side, extension)
        out.append(hausdorff(K, cache.get(word + ext)))
    return BoundaryDiagnostic(depth, extension, tuple(out))


def fate_check(system: BranchSystem, code, depth: int, nodes: int = DEFAULT_NODES) -> dict:
    """Symbolic fate plus the numerical drift towards a boundary for a finite prefix."""
    from ..annulus_engine import nested_fate

    fate = nested_fate(system.spec, code)
    res = wandering_curve(system, code, iterations=depth, nodes=nodes)
    j = system.spec.subannuli[res.code[0]].parent
    b0, b1 = system.boundaries[j]
    d0 = float(res.final.nearest_distance(b0).min())
    d1 = float(res.final.nearest_distance(b1).min())
    return {"fate": fate.to_dict(), "distance_to_boundary0": d0, "distance_to_boundary1": d1,
            "distances": res.to_dict()["distances"]}
