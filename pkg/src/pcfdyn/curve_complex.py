"""Multicurve pullback combinatorics.

A multicurve is recorded only through its unweighted transition matrix:
``M[g][b]`` is the number of components of the preimage of curve ``b`` that
are homotopic (rel the post-critical set) to curve ``g``.  Homotopy classes
are opaque ids; deciding homotopy is the caller's job (see
:mod:`pcfdyn.rational_dynamics.homotopy`).

The iterated preimage counts satisfy ``kappa_{n+1} = M @ kappa_n`` with
``kappa_0 = 1``.  That recurrence is checked against an explicit enumeration
of labelled preimage trees in :func:`kappa_tree_oracle`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import ConsistencyError, PreconditionError, ValidationError

MAX_ORACLE_NODES = 50_000_000


@dataclass(frozen=True)
class CurveClass:
    id: str
    label: str | None = None


@dataclass(frozen=True)
class PullbackGraph:
    classes: tuple[CurveClass, ...]
    matrix: tuple[tuple[int, ...], ...]
    degree: int
    # None means the caller did not provide the data; stability is then unknown.
    extra_preimages: tuple[int, ...] | None = None

    @property
    def size(self) -> int:
        return len(self.classes)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.classes)

    def index(self, class_id: str) -> int:
        return self.ids.index(class_id)

    def row_sums(self) -> list[int]:
        return [sum(row) for row in self.matrix]

    def column_sums(self) -> list[int]:
        k = self.size
        return [sum(self.matrix[g][b] for g in range(k)) for b in range(k)]

    @property
    def is_pre_stable(self) -> bool:
        return all(s >= 1 for s in self.row_sums())

    def digraph(self) -> nx.MultiDiGraph:
        """Edge ``g -> b`` repeated ``M[g][b]`` times."""
        G = nx.MultiDiGraph()
        G.add_nodes_from(range(self.size))
        for g, row in enumerate(self.matrix):
            for b, m in enumerate(row):
                for _ in range(m):
                    G.add_edge(g, b)
        return G

    def to_dict(self) -> dict:
        out = {
            "classes": [c.id if c.label is None else {"id": c.id, "label": c.label} for c in self.classes],
            "degree": self.degree,
            "edges": [
                {"from": self.classes[g].id, "to": self.classes[b].id, "mult": m}
                for g, row in enumerate(self.matrix)
                for b, m in enumerate(row)
                if m
            ],
        }
        if self.extra_preimages is not None:
            out["extra_preimages"] = {
                c.id: k for c, k in zip(self.classes, self.extra_preimages) if k
            }
        return out


def build_graph(spec: Mapping) -> PullbackGraph:
    """Validate a JSON-style description and return a :class:`PullbackGraph`.

    ``spec`` has keys ``classes`` (ids or ``{"id", "label"}`` objects),
    ``degree``, ``edges`` (``{"from", "to", "mult"}``) and optionally
    ``extra_preimages`` (``{class_id: count}``).
    """
    try:
        raw_classes = list(spec["classes"])
        degree = spec["degree"]
        edges = list(spec.get("edges", []))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed multicurve spec: {exc}") from None

    if not raw_classes:
        raise ValidationError("empty class set")
    classes = []
    for c in raw_classes:
        if isinstance(c, Mapping):
            if "id" not in c:
                raise ValidationError(f"class entry without id: {c!r}")
            classes.append(CurveClass(str(c["id"]), c.get("label")))
        else:
            classes.append(CurveClass(str(c)))
    ids = [c.id for c in classes]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate class ids: {dup}")
    if not isinstance(degree, int) or isinstance(degree, bool) or degree < 2:
        raise ValidationError(f"map degree must be an integer >= 2, got {degree!r}")

    pos = {cid: i for i, cid in enumerate(ids)}
    k = len(ids)
    M = [[0] * k for _ in range(k)]
    for e in edges:
        try:
            g, b, m = pos[str(e["from"])], pos[str(e["to"])], e.get("mult", 1)
        except KeyError as exc:
            raise ValidationError(f"edge refers to unknown class {exc}") from None
        if not isinstance(m, int) or m < 0:
            raise ValidationError(f"edge multiplicity must be a non-negative integer: {e!r}")
        M[g][b] += m

    extra = None
    if "extra_preimages" in spec and spec["extra_preimages"] is not None:
        raw = spec["extra_preimages"]
        extra = [0] * k
        for cid, cnt in raw.items():
            if str(cid) not in pos:
                raise ValidationError(f"extra_preimages refers to unknown class {cid!r}")
            if not isinstance(cnt, int) or cnt < 0:
                raise ValidationError(f"extra_preimages count must be a non-negative integer: {cid!r}")
            extra[pos[str(cid)]] = cnt
    return _checked(tuple(classes), M, degree, extra)


def from_matrix(
    matrix: Sequence[Sequence[int]],
    degree: int | None = None,
    extra_preimages: Sequence[int] | None = None,
    ids: Sequence[str] | None = None,
) -> PullbackGraph:
    """Convenience constructor; ``degree`` defaults to the smallest admissible value."""
    k = len(matrix)
    if k == 0:
        raise ValidationError("empty class set")
    ids = [f"c{i}" for i in range(k)] if ids is None else [str(i) for i in ids]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate class ids")
    M = [[int(x) for x in row] for row in matrix]
    if any(len(row) != k for row in M):
        raise ValidationError("transition matrix must be square")
    if any(x < 0 for row in M for x in row):
        raise ValidationError("transition matrix entries must be non-negative")
    if degree is None:
        col = [sum(M[g][b] for g in range(k)) + (extra_preimages[b] if extra_preimages else 0) for b in range(k)]
        degree = max(2, max(col))
    return _checked(tuple(CurveClass(i) for i in ids), M, degree, extra_preimages)


def _checked(classes, M, degree, extra) -> PullbackGraph:
    k = len(classes)
    for b in range(k):
        total = sum(M[g][b] for g in range(k)) + (extra[b] if extra else 0)
        if total > degree:
            raise ValidationError(
                f"class {classes[b].id!r} has {total} preimage components, more than deg F = {degree}"
            )
    return PullbackGraph(
        classes=classes,
        matrix=tuple(tuple(row) for row in M),
        degree=degree,
        extra_preimages=None if extra is None else tuple(int(x) for x in extra),
    )


# ---------------------------------------------------------------------------
# kappa counts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KappaVector:
    depth: int
    values: tuple[int, ...]

    def __getitem__(self, i):
        return self.values[i]

    def total(self) -> int:
        return sum(self.values)


def kappa(graph: PullbackGraph, n: int) -> KappaVector:
    """``kappa_n(g)`` for every class, by the matrix recurrence (exact integers)."""
    if n < 0:
        raise ValidationError(f"depth must be non-negative, got {n}")
    if not graph.is_pre_stable:
        raise PreconditionError("kappa counts are only defined for pre-stable multicurves")
    return kappa_table(graph, n)[-1]


def kappa_table(graph: PullbackGraph, n: int) -> list[KappaVector]:
    """``[kappa_0, ..., kappa_n]``."""
    if n < 0:
        raise ValidationError(f"depth must be non-negative, got {n}")
    M = graph.matrix
    k = graph.size
    cur = [1] * k
    out = [KappaVector(0, tuple(cur))]
    for d in range(1, n + 1):
        cur = [sum(M[g][b] * cur[b] for b in range(k)) for g in range(k)]
        out.append(KappaVector(d, tuple(cur)))
    return out


def kappa_tree_oracle(graph: PullbackGraph, n: int) -> tuple[int, ...]:
    """Count level-``n`` nodes of the labelled preimage forest, class by class.

    The forest has one root per class.  A node of class ``b`` has, for each
    class ``g``, ``M[g][b]`` children of class ``g`` (the preimage components
    of that curve homotopic to ``g``).  Every node is visited individually, so
    the count does not go through the matrix recurrence.  Each level is
    materialised as an array of node labels.
    """
    if n < 0:
        raise ValidationError(f"depth must be non-negative, got {n}")
    k = graph.size
    M = graph.matrix
    children = [[g for g in range(k) for _copy in range(M[g][b])] for b in range(k)]
    flat = np.array([g for ch in children for g in ch], dtype=np.int64)
    length = np.array([len(ch) for ch in children], dtype=np.int64)
    start = np.concatenate([[0], np.cumsum(length)[:-1]]).astype(np.int64)
    level = np.arange(k, dtype=np.int64)  # one root per class
    for _ in range(n):
        # list every child of every node on the current level
        reps = length[level]
        total = int(reps.sum())
        if total > MAX_ORACLE_NODES:
            raise ValidationError(f"tree oracle would enumerate {total} nodes (limit {MAX_ORACLE_NODES})")
        first = np.repeat(start[level], reps)
        offset = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(reps) - reps, reps)
        level = flat[first + offset]
    counts = np.bincount(level, minlength=k)
    return tuple(int(c) for c in counts)


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Predicates:
    pre_stable: bool
    stable: bool | None  # None: extra_preimages were not supplied
    irreducible: bool

    def to_dict(self) -> dict:
        return {
            "pre_stable": self.pre_stable,
            "stable": "unknown" if self.stable is None else self.stable,
            "irreducible": self.irreducible,
        }


def is_irreducible(graph: PullbackGraph) -> bool:
    G = nx.DiGraph()
    G.add_nodes_from(range(graph.size))
    G.add_edges_from(
        (g, b) for g, row in enumerate(graph.matrix) for b, m in enumerate(row) if m >= 1
    )
    return graph.is_pre_stable and nx.is_strongly_connected(G)


def predicates(graph: PullbackGraph) -> Predicates:
    stable = None if graph.extra_preimages is None else not any(graph.extra_preimages)
    return Predicates(graph.is_pre_stable, stable, is_irreducible(graph))


# ---------------------------------------------------------------------------
# Cantor detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CantorVerdict:
    verdict: bool
    certificate: dict
    diverging: tuple[bool, ...]  # per class: kappa_n -> infinity

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "certificate": self.certificate,
                "diverging": list(self.diverging)}


def _scc_structure(graph: PullbackGraph):
    """Condensation of the class digraph with per-component growth types.

    Returns ``(cond, kind)`` where ``kind[c]`` is ``"acyclic"`` (single class,
    no self-loop), ``"cycle"`` (edge multiplicity equals class count) or
    ``"exponential"`` (strictly more edges than classes).
    """
    G = nx.DiGraph()
    G.add_nodes_from(range(graph.size))
    M = graph.matrix
    G.add_edges_from((g, b) for g, row in enumerate(M) for b, m in enumerate(row) if m)
    cond = nx.condensation(G)
    kind = {}
    for c, data in cond.nodes(data=True):
        members = data["members"]
        internal = sum(M[g][b] for g in members for b in members)
        if internal == 0:
            kind[c] = "acyclic"
        elif internal == len(members):
            kind[c] = "cycle"
        else:
            kind[c] = "exponential"
    return cond, kind


def structural_divergence(graph: PullbackGraph) -> tuple[tuple[bool, ...], dict]:
    """Per-class ``kappa_n -> inf`` from the component structure alone.

    The number of length-``n`` paths out of a class is unbounded iff the
    class reaches a component carrying more than one cycle, or some path from
    it passes through two distinct cyclic components.  Returns the flags and,
    per class, a witnessing component (list of class ids) or ``None``.
    """
    cond, kind = _scc_structure(graph)
    order = list(reversed(list(nx.topological_sort(cond))))
    reach_cyclic = {}
    diverges = {}
    witness = {}
    for c in order:
        succ = list(cond.successors(c))
        cyclic = kind[c] != "acyclic"
        reach_cyclic[c] = cyclic or any(reach_cyclic[d] for d in succ)
        if kind[c] == "exponential":
            diverges[c], witness[c] = True, c
            continue
        diverges[c], witness[c] = False, None
        for d in succ:
            if diverges[d]:
                diverges[c], witness[c] = True, witness[d]
                break
        if not diverges[c] and cyclic and any(reach_cyclic[d] for d in succ):
            diverges[c], witness[c] = True, c
    mapping = cond.graph["mapping"]
    flags = tuple(diverges[mapping[g]] for g in range(graph.size))
    wit = {}
    for g in range(graph.size):
        w = witness[mapping[g]]
        wit[graph.classes[g].id] = (
            None if w is None else sorted(graph.classes[x].id for x in cond.nodes[w]["members"])
        )
    return flags, wit


def empirical_horizon(graph: PullbackGraph) -> int:
    return 4 * graph.size + 4


def empirical_divergence(graph: PullbackGraph) -> tuple[bool, ...]:
    """Per-class growth seen in the kappa table up to the empirical horizon.

    ``kappa_n`` is non-decreasing for pre-stable graphs; a bounded class is
    constant from depth ``#classes`` on, so growth over the last
    ``#classes + 1`` steps of the horizon separates the two cases.
    """
    H = empirical_horizon(graph)
    table = kappa_table(graph, H)
    back = table[H - graph.size - 1].values
    return tuple(a > b for a, b in zip(table[H].values, back))


def is_cantor(graph: PullbackGraph) -> CantorVerdict:
    """Decide whether ``kappa_n(g) -> inf`` for every class.

    Structural and empirical answers are computed independently and must
    agree; a disagreement raises :class:`ConsistencyError`.
    """
    if not graph.is_pre_stable:
        raise PreconditionError("Cantor detection requires a pre-stable multicurve")
    structural, wit = structural_divergence(graph)
    empirical = empirical_divergence(graph)
    if structural != empirical:
        raise ConsistencyError(
            f"structural {structural} and empirical {empirical} growth verdicts disagree"
        )
    verdict = all(structural)
    if verdict:
        cert = {"kind": "growth", "witness_components": wit}
    else:
        stagnant = [graph.classes[g].id for g, d in enumerate(structural) if not d]
        H = empirical_horizon(graph)
        kH = kappa_table(graph, H)[H]
        cert = {
            "kind": "stagnant",
            "classes": stagnant,
            "kappa_at_horizon": {cid: kH[graph.index(cid)] for cid in stagnant},
            "horizon": H,
        }
    return CantorVerdict(verdict, cert, structural)


# ---------------------------------------------------------------------------
# Lemma: five equivalent conditions for irreducible multicurves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaReport:
    more_curves_after_pullback: bool  # #Gamma(1, Gamma) > #Gamma
    some_kappa1_at_least_2: bool
    some_kappa_diverges: bool
    all_kappa_diverge: bool
    some_curve_with_two_preimages: bool  # some column sum >= 2

    @property
    def values(self) -> tuple[bool, ...]:
        return (
            self.more_curves_after_pullback,
            self.some_kappa1_at_least_2,
            self.some_kappa_diverges,
            self.all_kappa_diverge,
            self.some_curve_with_two_preimages,
        )

    @property
    def consistent(self) -> bool:
        return len(set(self.values)) == 1

    def to_dict(self) -> dict:
        return {"conditions": list(self.values), "consistent": self.consistent}


def lemma_cm_report(graph: PullbackGraph) -> LemmaReport:
    if not graph.is_pre_stable or not is_irreducible(graph):
        raise PreconditionError("the five-condition equivalence needs an irreducible pre-stable multicurve")
    k1 = kappa(graph, 1).values
    flags = is_cantor(graph).diverging
    report = LemmaReport(
        more_curves_after_pullback=sum(k1) > graph.size,
        some_kappa1_at_least_2=any(x >= 2 for x in k1),
        some_kappa_diverges=any(flags),
        all_kappa_diverge=all(flags),
        some_curve_with_two_preimages=any(s >= 2 for s in graph.column_sums()),
    )
    if not report.consistent:
        raise ConsistencyError(f"equivalent conditions disagree: {report.values}")
    return report


# ---------------------------------------------------------------------------
# Stabilisation: Gamma_0 -> Gamma_N
# ---------------------------------------------------------------------------

PullbackOracle = Callable[[str], Mapping[str, int]]


def induce_stable(
    graph: PullbackGraph, oracle: PullbackOracle, marked_count: int
) -> tuple[PullbackGraph, int]:
    """Grow a Cantor multicurve into the stable one it generates.

    ``oracle(cid)`` returns the non-peripheral preimage classes of ``cid`` as a
    mapping ``{class_id: multiplicity}``; ids it has not seen before denote
    new homotopy classes.  Class sets grow monotonically and are capped by
    ``marked_count - 3``.  Returns the stable graph and the step ``N`` at which
    the class count stopped growing.
    """
    if not is_cantor(graph).verdict:
        raise PreconditionError("stabilisation starts from a Cantor multicurve")
    cap = marked_count - 3
    if graph.size > cap:
        raise ValidationError(f"{graph.size} classes exceed the bound #P - 3 = {cap}")

    ids = list(graph.ids)
    # the oracle must reproduce the given transition data on the starting classes
    for b, bid in enumerate(ids):
        pre = {str(k): int(v) for k, v in oracle(bid).items() if v}
        for g, gid in enumerate(ids):
            if pre.get(gid, 0) != graph.matrix[g][b]:
                raise ConsistencyError(
                    f"oracle gives {pre.get(gid, 0)} preimages of {bid!r} in class {gid!r}, "
                    f"graph says {graph.matrix[g][b]}"
                )

    cache: dict[str, dict[str, int]] = {}

    def pull(cid):
        if cid not in cache:
            cache[cid] = {str(k): int(v) for k, v in oracle(cid).items() if v}
        return cache[cid]

    current = list(ids)
    step = 0
    while True:
        nxt = list(current)
        for cid in current:
            for g in pull(cid):
                if g not in nxt:
                    nxt.append(g)
        if len(nxt) > cap:
            raise ValidationError(
                f"oracle produced {len(nxt)} classes, more than #P - 3 = {cap}: inconsistent oracle"
            )
        if len(nxt) == len(current):
            break
        current = nxt
        step += 1

    k = len(current)
    pos = {cid: i for i, cid in enumerate(current)}
    M = [[0] * k for _ in range(k)]
    extra = [0] * k
    for b, bid in enumerate(current):
        for gid, m in pull(bid).items():
            if gid in pos:
                M[pos[gid]][b] += m
            else:
                extra[b] += m
    labels = {c.id: c.label for c in graph.classes}
    classes = tuple(CurveClass(cid, labels.get(cid)) for cid in current)
    return _checked(classes, M, graph.degree, extra), step
