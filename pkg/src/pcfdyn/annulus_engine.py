"""Combinatorial multi-annulus coverings.

An :class:`AnnularSystemSpec` lists components ``A_j`` (each with boundary
circles labelled 0 and 1) and subannuli ``A^1_i``.  Within a parent the
subannuli are listed in order from boundary 0 to boundary 1.  A subannulus
records its covering degree onto the target component and an orientation:
``+1`` if its boundary-0 side maps towards the target's boundary 0.

Depth-``n`` components of ``g^{-n}(A)`` correspond one-to-one to admissible
codes ``(i_0, ..., i_{n-1})`` (target of ``i_k`` is the parent of
``i_{k+1}``), because the preimage of an essential subannulus under an annulus
covering is connected.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .codes import Code, Periodic, Preperiodic, classify_code
from .errors import ConsistencyError, PreconditionError, ValidationError

DEFAULT_HORIZON = 64


@dataclass(frozen=True)
class Component:
    name: str
    modulus: float | None = None


@dataclass(frozen=True)
class Subannulus:
    parent: int
    target: int
    degree: int
    orientation: int = 1
    shares: frozenset = frozenset()
    essential: bool = True

    def image_side(self, side: int) -> int:
        return side if self.orientation > 0 else 1 - side


@dataclass(frozen=True)
class AnnularSystemSpec:
    components: tuple[Component, ...]
    subannuli: tuple[Subannulus, ...]

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def n_subannuli(self) -> int:
        return len(self.subannuli)

    def children(self, j: int) -> list[int]:
        return [i for i, s in enumerate(self.subannuli) if s.parent == j]

    def to_dict(self) -> dict:
        comps = []
        for c in self.components:
            d = {"name": c.name}
            if c.modulus is not None:
                d["modulus"] = c.modulus
            comps.append(d)
        return {
            "components": comps,
            "subannuli": [
                {
                    "parent": s.parent,
                    "target": s.target,
                    "degree": s.degree,
                    "orientation": s.orientation,
                    "shares": sorted(s.shares),
                }
                for s in self.subannuli
            ],
        }


def parse_spec(raw: Mapping) -> AnnularSystemSpec:
    """Build and syntactically validate a spec from its JSON form."""
    try:
        comps_raw = raw["components"]
        subs_raw = raw["subannuli"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed annular spec: missing {exc}") from None
    if isinstance(comps_raw, int):
        comps_raw = [{"name": f"A{j}"} for j in range(comps_raw)]
    comps = []
    for j, c in enumerate(comps_raw):
        if isinstance(c, str):
            comps.append(Component(c))
        else:
            mod = c.get("modulus")
            if mod is not None and not mod > 0:
                raise ValidationError(f"component {j}: modulus must be positive")
            comps.append(Component(str(c.get("name", f"A{j}")), None if mod is None else float(mod)))
    subs = []
    for i, s in enumerate(subs_raw):
        try:
            deg = s["degree"]
            sub = Subannulus(
                parent=int(s["parent"]),
                target=int(s["target"]),
                degree=deg,
                orientation=int(s.get("orientation", 1)),
                shares=frozenset(int(b) for b in s.get("shares", ())),
                essential=bool(s.get("essential", True)),
            )
        except KeyError as exc:
            raise ValidationError(f"subannulus {i}: missing {exc}") from None
        subs.append(sub)
    spec = AnnularSystemSpec(tuple(comps), tuple(subs))
    check_syntax(spec)
    return spec


def check_syntax(spec: AnnularSystemSpec) -> None:
    n = spec.n_components
    if n == 0:
        raise ValidationError("annular system needs at least one component")
    for i, s in enumerate(spec.subannuli):
        if not (0 <= s.parent < n):
            raise ValidationError(f"subannulus {i}: dangling parent {s.parent}")
        if not (0 <= s.target < n):
            raise ValidationError(f"subannulus {i}: dangling target {s.target}")
        if not s.essential:
            raise ValidationError(f"subannulus {i} is not essential in its parent")
        if not isinstance(s.degree, int) or isinstance(s.degree, bool) or s.degree < 1:
            raise ValidationError(f"subannulus {i}: degree must be a positive integer")
        if s.orientation not in (1, -1):
            raise ValidationError(f"subannulus {i}: orientation must be +1 or -1")
        if not s.shares <= {0, 1}:
            raise ValidationError(f"subannulus {i}: shared boundaries must be among 0 and 1")
    for j in range(n):
        kids = spec.children(j)
        for r, i in enumerate(kids):
            sh = spec.subannuli[i].shares
            if 0 in sh and r != 0:
                raise ValidationError(f"subannulus {i} shares boundary 0 but is not first in component {j}")
            if 1 in sh and r != len(kids) - 1:
                raise ValidationError(f"subannulus {i} shares boundary 1 but is not last in component {j}")


# ---------------------------------------------------------------------------
# codes and boundary sharing
# ---------------------------------------------------------------------------


def is_admissible(spec: AnnularSystemSpec, word: Sequence[int]) -> bool:
    subs = spec.subannuli
    if any(not (0 <= i < len(subs)) for i in word):
        return False
    return all(subs[a].target == subs[b].parent for a, b in zip(word, word[1:]))


def codes(spec: AnnularSystemSpec, n: int, component: int | None = None) -> Iterator[tuple[int, ...]]:
    """All admissible codes of length ``n`` (optionally rooted in one component)."""
    if n == 0:
        yield ()
        return
    roots = range(spec.n_subannuli) if component is None else spec.children(component)
    kids = [spec.children(j) for j in range(spec.n_components)]
    subs = spec.subannuli

    def rec(prefix):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for k in kids[subs[prefix[-1]].target]:
            prefix.append(k)
            yield from rec(prefix)
            prefix.pop()

    for i in roots:
        yield from rec([i])


def shared_sides(spec: AnnularSystemSpec, word: Sequence[int]) -> frozenset:
    """Boundary circles of the root component shared by the depth-``len(word)`` component."""
    sides = frozenset({0, 1})
    for i in reversed(word):
        s = spec.subannuli[i]
        sides = frozenset(b for b in s.shares if s.image_side(b) in sides)
    return sides


def component_counts(spec: AnnularSystemSpec, n: int) -> list[int]:
    """Number of depth-``n`` components inside each ``A_j``."""
    cnt = [1] * spec.n_components
    for _ in range(n):
        cnt = [sum(cnt[spec.subannuli[i].target] for i in spec.children(j)) for j in range(spec.n_components)]
    return cnt


def feasible_moduli(spec: AnnularSystemSpec) -> np.ndarray | None:
    """Positive moduli ``m`` with ``sum_{children} m_target / d <= m_parent``, or ``None``.

    Disjoint essential subannuli have total modulus at most the parent's, and
    a degree-``d`` covering divides the modulus by ``d``.  Given moduli are
    checked as they are; missing ones are solved for.
    """
    n = spec.n_components
    given = [c.modulus for c in spec.components]
    B = np.zeros((n, n))
    for s in spec.subannuli:
        B[s.parent, s.target] += 1.0 / s.degree
    if all(m is not None for m in given):
        m = np.array(given, dtype=float)
        return m if np.all(B @ m <= m * (1 + 1e-12)) else None
    A_ub = B - np.eye(n)
    bounds = [(1.0, None) if g is None else (g, g) for g in given]
    res = linprog(np.ones(n), A_ub=A_ub, b_ub=np.zeros(n), bounds=bounds, method="highs")
    if res.status != 0:
        return None
    return np.asarray(res.x, dtype=float)


@dataclass(frozen=True)
class ValidationReport:
    is_annular_system: bool
    is_exact: bool
    is_proper: bool
    witness_n: int | None
    per_component_n: tuple[int | None, ...]
    moduli_feasible: bool

    def to_dict(self) -> dict:
        return {
            "is_annular_system": self.is_annular_system,
            "is_exact": self.is_exact,
            "is_proper": self.is_proper,
            "witness_n": self.witness_n,
            "per_component_n": list(self.per_component_n),
            "moduli_feasible": self.moduli_feasible,
        }


def validate(spec: AnnularSystemSpec, horizon: int = DEFAULT_HORIZON) -> ValidationReport:
    """Annular-system, exactness and properness flags.

    ``witness_n`` is the least depth at which every component contains at
    least two depth-``n`` components; ``per_component_n`` gives the same for
    each component separately.  The annular-system flag also requires the
    modulus inequalities to be satisfiable.
    """
    check_syntax(spec)
    n = spec.n_components
    exact = all(
        any(b in spec.subannuli[i].shares for i in spec.children(j)) for j in range(n) for b in (0, 1)
    )
    proper = all(not s.shares for s in spec.subannuli)
    per: list[int | None] = [None] * n
    witness = None
    cnt = [1] * n
    for depth in range(1, horizon + 1):
        cnt = [sum(cnt[spec.subannuli[i].target] for i in spec.children(j)) for j in range(n)]
        for j in range(n):
            if per[j] is None and cnt[j] >= 2:
                per[j] = depth
        if witness is None and all(c >= 2 for c in cnt):
            witness = depth
        if witness is not None and all(p is not None for p in per):
            break
    feasible = feasible_moduli(spec) is not None
    return ValidationReport(
        is_annular_system=witness is not None and feasible,
        is_exact=exact,
        is_proper=proper,
        witness_n=witness,
        per_component_n=tuple(per),
        moduli_feasible=feasible,
    )


def require_annular(spec: AnnularSystemSpec, horizon: int = DEFAULT_HORIZON) -> ValidationReport:
    rep = validate(spec, horizon)
    if not rep.is_annular_system:
        raise PreconditionError("spec is not an annular system (some component never disconnects)")
    return rep


# ---------------------------------------------------------------------------
# degree growth
# ---------------------------------------------------------------------------


def degree_growth_N(spec: AnnularSystemSpec, cap: int | None = None) -> int:
    """Least ``N`` such that every depth-``N`` component maps with degree >= 2.

    The pigeonhole bound ``N <= m + 2`` (``m`` = number of subannuli) is
    asserted.
    """
    require_annular(spec)
    m = spec.n_subannuli
    cap = m + 2 if cap is None else cap
    subs = spec.subannuli
    kids = [spec.children(j) for j in range(spec.n_components)]
    # best[i] = least cumulative degree over codes of the current length starting with i
    best: list[float] = [s.degree for s in subs]
    depth = 1
    while True:
        alive = [b for b in best if b != float("inf")]
        if alive and min(alive) >= 2:
            break
        if depth >= max(cap, m + 2):
            raise ConsistencyError(f"no degree growth by depth {depth}, exceeding the bound m + 2 = {m + 2}")
        best = [
            s.degree * min((best[k] for k in kids[s.target]), default=float("inf")) for s in subs
        ]
        depth += 1
    if depth > m + 2:
        raise ConsistencyError(f"degree growth depth {depth} exceeds m + 2 = {m + 2}")
    return depth


# ---------------------------------------------------------------------------
# nested sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SharesBoundaryForever:
    from_depth: int
    sides: tuple[int, ...]
    horizon: int
    kind: str = "shares_boundary_forever"

    def to_dict(self):
        return {"kind": self.kind, "from_depth": self.from_depth, "sides": list(self.sides),
                "horizon": self.horizon, "predicted_intersection": "empty"}


@dataclass(frozen=True)
class CompactlyNestedAt:
    depths: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]  # (n, least m > n with A^m compactly inside A^n)
    kind: str = "compactly_nested"

    def to_dict(self):
        return {"kind": self.kind, "depths": list(self.depths), "pairs": [list(p) for p in self.pairs]}


@dataclass(frozen=True)
class Inconclusive:
    unresolved_from: int
    horizon: int
    kind: str = "inconclusive"

    def to_dict(self):
        return {"kind": self.kind, "unresolved_from": self.unresolved_from, "horizon": self.horizon}


def _check_code(spec, word):
    if not is_admissible(spec, word):
        raise ValidationError(f"code {list(word)} is not admissible for this system")


def nested_fate(spec: AnnularSystemSpec, code, horizon: int = DEFAULT_HORIZON):
    """Follow boundary sharing along the nested chain ``A^0 > A^1 > ...``.

    ``A^m`` is compactly inside ``A^n`` exactly when the depth-``(m-n)``
    component coded by ``code[n:m]`` shares no boundary of its root.
    If some ``A^N`` keeps a common boundary with every deeper level up to the
    horizon the chain is reported as :class:`SharesBoundaryForever` (its
    intersection is then predicted empty); otherwise the first compact
    containment below each level is listed.
    """
    word = code.take(2 * horizon) if not isinstance(code, (tuple, list)) else tuple(code)
    _check_code(spec, word)
    L = len(word)
    if isinstance(code, Code) and not code.is_finite:
        # exact answer for eventually periodic codes: beyond the prefix, one full
        # cycle of starting points covers every case
        starts = range(len(code.prefix) + len(code.cycle))
    else:
        starts = range(min(horizon, L))
    pairs = []
    for n in starts:
        m = None
        for k in range(1, min(horizon, L - n) + 1):
            if not shared_sides(spec, word[n : n + k]):
                m = n + k
                break
        if m is None:
            if L - n >= horizon:
                sides = tuple(sorted(shared_sides(spec, word[n : n + horizon])))
                return SharesBoundaryForever(n, sides, horizon)
            return Inconclusive(n, horizon)
        pairs.append((n, m))
    if isinstance(code, Code) and not code.is_finite:
        # extend periodically to the horizon
        pre, per = len(code.prefix), len(code.cycle)
        base = {n: m for n, m in pairs}
        pairs = []
        for n in range(horizon):
            r = n if n < pre else pre + (n - pre) % per
            pairs.append((n, base[r] + (n - r)))
    depths = tuple(sorted({m for _, m in pairs if m <= horizon}))
    return CompactlyNestedAt(depths, tuple(pairs))


@dataclass(frozen=True)
class ComponentClass:
    kind: str  # periodic | preperiodic | wandering
    period: int | None = None
    preperiod: int | None = None
    quasicircle_expected: bool | None = None
    horizon: int | None = None

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


def component_class(spec: AnnularSystemSpec, code, horizon: int = DEFAULT_HORIZON) -> ComponentClass:
    """Classify the Julia-set component coded by ``code``.

    For a periodic code of period ``p`` the compact containment
    ``A^{2p+1} << A^1`` is checked symbolically; it is the precondition for
    the component being a quasicircle.
    """
    fate = nested_fate(spec, code, horizon)
    if isinstance(fate, SharesBoundaryForever):
        raise PreconditionError(
            f"nested chain keeps a common boundary from depth {fate.from_depth}: no component has this code"
        )
    cls = classify_code(code, horizon=max(horizon, 64))
    if isinstance(cls, Periodic):
        p = cls.period
        word = code.take(2 * p + 1)
        qc = not shared_sides(spec, word[1 : 2 * p + 1])
        return ComponentClass("periodic", period=p, quasicircle_expected=qc)
    if isinstance(cls, Preperiodic):
        return ComponentClass("preperiodic", period=cls.period, preperiod=cls.preperiod)
    return ComponentClass("wandering", horizon=cls.horizon)


def boundary_code(spec: AnnularSystemSpec, component: int, side: int, length: int) -> tuple[int, ...]:
    """The code of length ``length`` whose components all keep the given boundary circle."""
    word = []
    j, b = component, side
    for _ in range(length):
        kids = [i for i in spec.children(j) if b in spec.subannuli[i].shares]
        if not kids:
            raise PreconditionError(f"boundary {b} of component {j} is not shared (system not exact)")
        i = kids[0]
        word.append(i)
        s = spec.subannuli[i]
        j, b = s.target, s.image_side(b)
    return tuple(word)


# ---------------------------------------------------------------------------
# log-coordinate realisation and A(n, E) hulls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogBranch:
    parent: int
    target: int
    left: Fraction
    right: Fraction
    slope: Fraction  # signed; |slope| = degree
    degree: int

    def apply(self, t, widths):
        base = 0 if self.slope > 0 else widths[self.target]
        return base + self.slope * (t - self.left)

    def inverse(self, y, widths):
        base = 0 if self.slope > 0 else widths[self.target]
        return self.left + (y - base) / self.slope


@dataclass(frozen=True)
class LogRealization:
    """Each component ``A_j`` as ``[0, w_j]`` in log-radius; branches ``t -> +-d t + c``.

    This is the realisation of ``z -> c z^(+-d)`` on round annuli: the
    subannulus of a degree-``d`` branch onto ``A_k`` has width ``w_k / d``.
    """

    spec: AnnularSystemSpec
    widths: tuple[Fraction, ...]
    branches: tuple[LogBranch, ...]

    def interval_shadow(self):
        """Rescale every component to unit length; returns an :class:`IntervalSystem`."""
        from .interval_model import IntervalSystem, SubInterval

        subs = []
        for b in self.branches:
            w = self.widths[b.parent]
            subs.append(
                SubInterval(
                    parent=b.parent,
                    target=b.target,
                    left=2 * b.parent + b.left / w,
                    right=2 * b.parent + b.right / w,
                    sign=1 if b.slope > 0 else -1,
                )
            )
        return IntervalSystem(self.spec.n_components, tuple(subs))

    def to_dict(self) -> dict:
        return {
            "widths": [str(w) for w in self.widths],
            "branches": [
                {"parent": b.parent, "target": b.target, "left": str(b.left), "right": str(b.right),
                 "slope": str(b.slope)}
                for b in self.branches
            ],
        }


def realize_log(spec: AnnularSystemSpec) -> LogRealization:
    """Concrete piecewise model in log-radius coordinates.

    Widths come from the component moduli (solved for when absent).
    Subannuli are laid out in boundary order; one sharing boundary 0 (1) is
    pinned to the left (right) end and leftover room is split evenly into
    the gaps that are not pinned shut.
    """
    check_syntax(spec)
    m = feasible_moduli(spec)
    if m is None:
        raise PreconditionError("no moduli satisfy the subannulus packing inequalities")
    widths = tuple(Fraction(float(x)).limit_denominator(10**6) for x in m)
    if all(c.modulus is None for c in spec.components) and all(
        sum(Fraction(1, spec.subannuli[i].degree) for i in spec.children(j)) <= 1
        for j in range(spec.n_components)
    ):
        widths = tuple(Fraction(1) for _ in spec.components)
    branches: list[LogBranch | None] = [None] * spec.n_subannuli
    for j in range(spec.n_components):
        kids = spec.children(j)
        if not kids:
            continue
        lens = [widths[spec.subannuli[i].target] / spec.subannuli[i].degree for i in kids]
        room = widths[j] - sum(lens)
        if room < 0:
            raise PreconditionError(f"subannuli of component {j} do not fit")
        first_pinned = 0 in spec.subannuli[kids[0]].shares
        last_pinned = 1 in spec.subannuli[kids[-1]].shares
        gaps = len(kids) + 1 - first_pinned - last_pinned
        gap = room / gaps if gaps else Fraction(0)
        if gaps == 0 and room != 0:
            # pinned at both ends: stretch the inner gaps
            inner = len(kids) - 1
            gap = room / inner if inner else Fraction(0)
        t = Fraction(0) if first_pinned else gap
        for r, i in enumerate(kids):
            s = spec.subannuli[i]
            left, right = t, t + lens[r]
            slope = Fraction(s.degree * s.orientation)
            branches[i] = LogBranch(j, s.target, left, right, slope, s.degree)
            t = right + gap
    return LogRealization(spec, widths, tuple(branches))


@dataclass(frozen=True)
class Hull:
    component: int
    kind: str  # empty | curve | annulus
    curves: tuple[Fraction, ...]
    low: Fraction | None = None
    high: Fraction | None = None

    def contains(self, lo, hi) -> bool:
        if self.kind == "empty":
            return False
        return self.low <= lo and hi <= self.high

    def to_dict(self):
        return {"component": self.component, "kind": self.kind,
                "low": None if self.low is None else str(self.low),
                "high": None if self.high is None else str(self.high),
                "n_curves": len(self.curves)}


def hull_annulus(real: LogRealization, E: Sequence, n: int) -> list[Hull]:
    """``A(n, E)`` for every component.

    ``E[j]`` is the log-coordinate of the chosen core circle of ``A_j``.  The
    preimage ``g^{-n}(E) n A_j`` is a finite set of circles; the hull is
    empty, that single circle, or the closed annulus between the extreme two.
    """
    if real is None:
        raise PreconditionError("hull computation needs a log-coordinate realisation")
    spec = real.spec
    E = [Fraction(e) for e in E]
    for j, e in enumerate(E):
        if not (0 < e < real.widths[j]):
            raise ValidationError(f"core coordinate {e} is not inside component {j}")
    out = []
    for j in range(spec.n_components):
        pts = []
        for word in codes(spec, n, component=j):
            if n == 0:
                pts.append(E[j])
                continue
            y = E[spec.subannuli[word[-1]].target]
            for i in reversed(word):
                y = real.branches[i].inverse(y, real.widths)
            pts.append(y)
        pts.sort()
        if not pts:
            out.append(Hull(j, "empty", ()))
        elif len(pts) == 1:
            out.append(Hull(j, "curve", tuple(pts), pts[0], pts[0]))
        else:
            out.append(Hull(j, "annulus", tuple(pts), pts[0], pts[-1]))
    return out
