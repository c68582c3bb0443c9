"""Combinatorial renormalization search from an exact annular system.

The complement of the annuli splits into pieces.  Each piece ``B_i`` has a
distinguished preimage piece whose image is some ``B_{tau(i)}``; a periodic
index of ``tau`` with period ``p`` gives a candidate renormalization
``f^p`` whose degree is read off the subannuli that keep sharing the
boundary circle the piece is glued along.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .annulus_engine import AnnularSystemSpec, parse_spec, validate
from .errors import ConsistencyError, PreconditionError, ValidationError

DEFAULT_HORIZON = 32


@dataclass(frozen=True)
class ComplementPiece:
    id: int
    marked: int
    adjacency: tuple[tuple[int, int], ...]  # (component, side) boundary circles touching the piece

    def to_dict(self):
        return {"id": self.id, "marked": self.marked, "adjacency": [list(a) for a in self.adjacency]}


def complement_pieces(spec: AnnularSystemSpec, pieces: Sequence[Mapping], n_marked: int,
                      stable: bool | None = True) -> list[ComplementPiece]:
    """Validate piece data against ``spec``.

    Every boundary circle ``(component, side)`` touches exactly one piece,
    the pieces and annuli form a tree, and marked counts add up to
    ``n_marked`` (annuli carry no marked points).
    """
    if stable is False:
        raise PreconditionError("the multicurve must be stable")
    val = validate(spec)
    if not val.is_exact:
        raise PreconditionError("complement pieces need an exact annular system")
    out = []
    for k, raw in enumerate(pieces):
        try:
            marked = int(raw["marked"])
            adj = tuple(sorted((int(a), int(b)) for a, b in raw["adjacency"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"piece {k}: needs 'marked' and 'adjacency' ({exc})") from None
        if marked < 0:
            raise ValidationError(f"piece {k}: negative marked count")
        out.append(ComplementPiece(int(raw.get("id", k)), marked, adj))
    if [p.id for p in out] != list(range(len(out))):
        raise ValidationError("piece ids must be 0..m in order")
    total = sum(p.marked for p in out)
    if total != n_marked:
        raise ValidationError(f"marked counts sum to {total}, expected {n_marked}")
    m = spec.n_components
    circles = sorted(a for p in out for a in p.adjacency)
    expected = [(j, s) for j in range(m) for s in (0, 1)]
    if circles != expected:
        raise ValidationError(f"each boundary circle must touch exactly one piece; got {circles}")
    if len(out) != m + 1:
        raise ValidationError(f"{m} annuli cut the sphere into {m + 1} pieces, not {len(out)}")
    g = nx.Graph()
    g.add_nodes_from(("B", p.id) for p in out)
    g.add_nodes_from(("A", j) for j in range(m))
    for p in out:
        for j, _ in p.adjacency:
            g.add_edge(("B", p.id), ("A", j))
    if not nx.is_tree(g):
        raise ValidationError("pieces and annuli do not form a tree")
    return out


@dataclass(frozen=True)
class TauMap:
    tau: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...]
    preperiod: tuple[int, ...]  # steps for each index to enter a cycle

    @property
    def periodic(self) -> frozenset:
        return frozenset(i for c in self.cycles for i in c)

    def period(self, i: int) -> int:
        for c in self.cycles:
            if i in c:
                return len(c)
        raise ValidationError(f"index {i} is not periodic")

    def to_dict(self):
        return {"tau": list(self.tau), "cycles": [list(c) for c in self.cycles], "preperiod": list(self.preperiod)}


def tau_map(tau, n_pieces: int | None = None) -> TauMap:
    """Cycles of the index map ``tau`` (a list, or a dict keyed by index)."""
    if isinstance(tau, Mapping):
        try:
            keys = sorted(int(k) for k in tau)
        except (TypeError, ValueError):
            raise ValidationError("tau keys must be integers") from None
        if keys != list(range(len(keys))):
            raise ValidationError("tau must be defined on every index 0..m")
        tau = [tau[k] if k in tau else tau[str(k)] for k in keys]
    try:
        t = tuple(int(v) for v in tau)
    except (TypeError, ValueError):
        raise ValidationError("tau values must be integers") from None
    n = len(t) if n_pieces is None else n_pieces
    if len(t) != n or n == 0:
        raise ValidationError(f"tau needs one value per piece ({n})")
    if any(not 0 <= v < n for v in t):
        raise ValidationError("tau maps outside the index set")
    g = nx.DiGraph([(i, t[i]) for i in range(n)])
    cycles = []
    for c in nx.simple_cycles(g):
        k = c.index(min(c))
        cycles.append(tuple(c[k:] + c[:k]))
    cycles.sort()
    on_cycle = {i for c in cycles for i in c}
    pre = []
    for i in range(n):
        k, j = 0, i
        while j not in on_cycle:
            j, k = t[j], k + 1
        pre.append(k)
    return TauMap(t, tuple(cycles), tuple(pre))


def _sharing_child(spec: AnnularSystemSpec, j: int, side: int) -> int | None:
    kids = spec.children(j)
    if not kids:
        return None
    k = kids[0] if side == 0 else kids[-1]
    return k if side in spec.subannuli[k].shares else None


def boundary_chain(spec: AnnularSystemSpec, start: tuple[int, int], steps: int):
    """Follow the subannuli sharing a boundary circle for ``steps`` iterations.

    Returns the list of subannulus indices used (shorter if the chain stops
    because no child shares the current circle) and the final circle.
    """
    j, side = start
    used = []
    for _ in range(steps):
        k = _sharing_child(spec, j, side)
        if k is None:
            break
        s = spec.subannuli[k]
        used.append(k)
        j, side = s.target, s.image_side(side)
    return used, (j, side)


@dataclass(frozen=True)
class RenormReport:
    index: int
    period: int
    iterate: int  # k * p, the power of f used
    N: int | None
    N_symbolic_only: bool
    candidate_degree: int
    map_degree: int
    iterate_degree: int
    degree_ge_2: bool
    degree_lt_iterate: bool
    verdict: bool
    chain: tuple[int, ...]
    chain_consistent: bool
    cycles: tuple[tuple[int, ...], ...]
    note: str = ""

    def to_dict(self):
        return {
            "index": self.index,
            "period": self.period,
            "iterate": self.iterate,
            "N": self.N,
            "N_symbolic_only": self.N_symbolic_only,
            "candidate_degree": self.candidate_degree,
            "map_degree": self.map_degree,
            "iterate_degree": self.iterate_degree,
            "degree_ge_2": self.degree_ge_2,
            "degree_lt_iterate": self.degree_lt_iterate,
            "verdict": self.verdict,
            "chain": list(self.chain),
            "chain_consistent": self.chain_consistent,
            "cycles": [list(c) for c in self.cycles],
            "note": self.note,
        }

    def text(self) -> str:
        lines = [
            f"periodic piece {self.index}, period p = {self.period}, iterate f^{self.iterate}",
            f"candidate degree {self.candidate_degree}; deg f^{self.iterate} = {self.iterate_degree}",
            f"deg g >= 2: {self.degree_ge_2}; deg g < deg f^{self.iterate}: {self.degree_lt_iterate}",
            f"renormalization: {self.verdict}",
            f"N = {self.N} (symbolic marked-count bookkeeping only)",
        ]
        if self.note:
            lines.append(self.note)
        return "\n".join(lines) + "\n"


def stabilization_depth(pieces: Sequence[ComplementPiece], tm: TauMap, start: int) -> int | None:
    """First ``n`` after which the marked counts along the ``tau`` orbit of ``start`` stay constant.

    ``None`` when the counts keep changing around the cycle.
    """
    orbit = [start]
    for _ in range(2 * len(tm.tau)):
        orbit.append(tm.tau[orbit[-1]])
    counts = [pieces[i].marked for i in orbit]
    p = tm.period(orbit[-1])
    if len(set(counts[-p:])) > 1:
        return None
    n = len(counts) - 1
    while n > 0 and counts[n - 1] == counts[-1]:
        n -= 1
    return n


def _piece_degree(spec, piece: ComplementPiece, steps: int):
    """Product of sharing-subannulus degrees along each circle of the piece; the largest is kept."""
    best = None
    for circ in piece.adjacency:
        used, end = boundary_chain(spec, circ, steps)
        deg = 1
        for k in used:
            deg *= spec.subannuli[k].degree
        cand = (len(used) == steps, deg, used, end)
        if best is None or cand[:2] > best[:2]:
            best = cand
    return best


def renorm_report(spec: AnnularSystemSpec, pieces: Sequence[ComplementPiece], tau, map_degree: int,
                  index: int | None = None, horizon: int = DEFAULT_HORIZON) -> RenormReport:
    """Pick a periodic piece and check ``2 <= deg g < deg f^{kp}``.

    ``k`` is the smallest multiple for which the candidate degree reaches 2
    (the degree-growth route), searched up to ``horizon`` iterates.
    """
    if map_degree is None or int(map_degree) < 2:
        raise ValidationError("map degree (>= 2) is required")
    map_degree = int(map_degree)
    if not pieces:
        raise ValidationError("degree data incomplete: no pieces")
    tm = tau if isinstance(tau, TauMap) else tau_map(tau, len(pieces))
    if len(tm.tau) != len(pieces):
        raise ValidationError("tau and pieces disagree in size")
    if not tm.cycles:
        raise ConsistencyError("a map on a finite set must have a cycle")
    if index is None:
        index = min(tm.periodic)
    if index not in tm.periodic:
        raise ValidationError(f"index {index} is not periodic under tau")
    p = tm.period(index)
    piece = pieces[index]
    if not piece.adjacency:
        raise ValidationError(f"piece {index} has no boundary circle")
    k, steps = 1, p
    while True:
        complete, deg, used, end = _piece_degree(spec, piece, steps)
        if deg >= 2 or not complete or steps + p > horizon:
            break
        k += 1
        steps = k * p
    note = ""
    if not complete:
        note = "sharing chain stopped early: the piece's boundary is not carried by a subannulus"
    elif deg < 2:
        note = f"degree stayed 1 up to f^{steps} (horizon {horizon})"
    end_piece = next((q.id for q in pieces if end in q.adjacency), None)
    consistent = complete and end_piece == index
    iterate_degree = map_degree ** steps
    ge2 = deg >= 2
    lt = deg < iterate_degree
    return RenormReport(
        index=index,
        period=p,
        iterate=steps,
        N=stabilization_depth(pieces, tm, index),
        N_symbolic_only=True,
        candidate_degree=deg,
        map_degree=map_degree,
        iterate_degree=iterate_degree,
        degree_ge_2=ge2,
        degree_lt_iterate=lt,
        verdict=ge2 and lt and complete,
        chain=tuple(used),
        chain_consistent=consistent,
        cycles=tm.cycles,
        note=note,
    )


def numeric_tau(f, samples: Sequence, cores: Sequence) -> list[int]:
    """Evaluate ``f`` at one sample point per piece and locate each image.

    Pieces are told apart by which side of every core curve they lie on;
    the image of sample ``i`` lands in the piece whose sample has the same
    side pattern.
    """
    from .rational_dynamics.curves import chart_for, winding_numbers
    from .rational_dynamics.sphere import to_sphere

    pts = to_sphere(np.asarray([complex(s) for s in samples], dtype=complex)).reshape(-1, 3)
    imgs = f.sphere(pts)
    allp = np.vstack([pts, imgs])
    sides = []
    for c in cores:
        chart = chart_for(c, extra=[allp])
        sides.append(np.abs(winding_numbers(chart(c.points), chart(allp))) % 2)
    sig = np.stack(sides, axis=1)
    n = len(pts)
    ref = {tuple(sig[i]): i for i in range(n)}
    if len(ref) != n:
        raise ConsistencyError("two piece samples lie in the same piece")
    out = []
    for i in range(n):
        key = tuple(sig[n + i])
        if key not in ref:
            raise ConsistencyError(f"image of piece {i} sample lies in no piece")
        out.append(ref[key])
    return out


def load_bundle(raw: Mapping) -> dict:
    """Parse a renormalization bundle: spec, pieces, marked count, degree, tau."""
    if not isinstance(raw, Mapping):
        raise ValidationError("bundle must be a JSON object")
    for key in ("spec", "pieces", "n_marked", "map_degree"):
        if key not in raw:
            raise ValidationError(f"bundle is missing {key!r}")
    spec = parse_spec(raw["spec"])
    pieces = complement_pieces(spec, raw["pieces"], int(raw["n_marked"]), raw.get("stable", True))
    return {"spec": spec, "pieces": pieces, "map_degree": raw["map_degree"], "tau": raw.get("tau"),
            "samples": [p.get("sample") for p in raw["pieces"]], "map": raw.get("map"),
            "system": raw.get("system")}
