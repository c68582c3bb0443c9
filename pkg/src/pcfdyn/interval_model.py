"""Piecewise-affine interval model of an exact annular system.

Component ``j`` is the unit interval ``I_j = [2j, 2j + 1]``.  Each
subinterval maps affinely onto its target interval; a ``+1`` sign sends the
left end to the target's left end.  Endpoints are kept as exact
:class:`~fractions.Fraction` values whenever the inputs are rational.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from .codes import Code, classify_code
from .errors import Escaped, NotExpandingWithinHorizon, PreconditionError, ValidationError

FLOAT_TOL = 1e-12


def _num(x):
    if isinstance(x, (Fraction, int)) or isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class SubInterval:
    parent: int
    target: int
    left: Fraction | float
    right: Fraction | float
    sign: int

    @property
    def length(self):
        return self.right - self.left

    @property
    def slope(self):
        return self.sign / self.length if isinstance(self.length, float) else Fraction(self.sign) / self.length


def interval_of(j: int):
    return Fraction(2 * j), Fraction(2 * j + 1)


@dataclass(frozen=True)
class IntervalSystem:
    n_intervals: int
    subintervals: tuple[SubInterval, ...]
    degenerate: bool = False

    def __post_init__(self):
        _check_invariants(self)

    def interval(self, j: int):
        return interval_of(j)

    def children(self, j: int) -> list[int]:
        return [i for i, s in enumerate(self.subintervals) if s.parent == j]

    def branch(self, i: int, x):
        """Apply the affine branch of subinterval ``i``."""
        s = self.subintervals[i]
        lo, hi = interval_of(s.target)
        if s.sign > 0:
            return lo + (x - s.left) * s.slope
        return hi + (x - s.left) * s.slope

    def inverse_branch(self, i: int, y):
        s = self.subintervals[i]
        lo, hi = interval_of(s.target)
        base = lo if s.sign > 0 else hi
        return s.left + (y - base) / s.slope

    def to_dict(self) -> dict:
        return {
            "intervals": self.n_intervals,
            "subintervals": [
                {"parent": s.parent, "target": s.target, "left": str(s.left), "right": str(s.right), "sign": s.sign}
                for s in self.subintervals
            ],
        }

    @classmethod
    def from_dict(cls, raw) -> "IntervalSystem":
        try:
            n = int(raw["intervals"])
            subs = tuple(
                SubInterval(int(s["parent"]), int(s["target"]), _num(s["left"]), _num(s["right"]), int(s.get("sign", 1)))
                for s in raw["subintervals"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed interval system: {exc}") from None
        return cls(n, subs)


def _check_invariants(sys: IntervalSystem) -> None:
    if sys.n_intervals < 1:
        raise ValidationError("interval system needs at least one interval")
    for i, s in enumerate(sys.subintervals):
        if not (0 <= s.parent < sys.n_intervals and 0 <= s.target < sys.n_intervals):
            raise ValidationError(f"subinterval {i}: index out of range")
        if s.sign not in (1, -1):
            raise ValidationError(f"subinterval {i}: sign must be +1 or -1")
        lo, hi = interval_of(s.parent)
        if not (lo <= s.left < s.right <= hi):
            raise ValidationError(f"subinterval {i} is not a non-degenerate subinterval of I_{s.parent}")
    for j in range(sys.n_intervals):
        kids = sorted((sys.subintervals[i] for i in sys.children(j)), key=lambda s: s.left)
        for a, b in zip(kids, kids[1:]):
            # neighbours may touch at a point (closures of adjacent subannuli), never overlap
            if b.left < a.right - (FLOAT_TOL if isinstance(a.right, float) else 0):
                raise ValidationError(f"subintervals of I_{j} overlap")
        lo, hi = interval_of(j)
        if kids and not (_close(kids[0].left, lo) and _close(kids[-1].right, hi)):
            raise ValidationError(f"endpoints of I_{j} are not endpoints of subintervals (boundary condition)")
        if not kids:
            raise ValidationError(f"I_{j} has no subintervals")


def _close(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= FLOAT_TOL
    return a == b


def from_annular_spec(spec) -> IntervalSystem:
    """Interval shadow of an exact annular spec.

    A parent with ``k`` subannuli is cut into ``2k - 1`` equal slots and the
    subintervals occupy the even slots, in boundary order.  Exactness puts the
    first and last subintervals on the parent's ends.
    """
    from .annulus_engine import check_syntax, validate

    check_syntax(spec)
    rep = validate(spec)
    if not rep.is_exact:
        raise PreconditionError("spec is not exact: the boundary condition cannot be realised")
    subs: list[SubInterval | None] = [None] * spec.n_subannuli
    for j in range(spec.n_components):
        kids = spec.children(j)
        k = len(kids)
        width = Fraction(1, 2 * k - 1)
        lo, _ = interval_of(j)
        for r, i in enumerate(kids):
            s = spec.subannuli[i]
            left = lo + 2 * r * width
            subs[i] = SubInterval(j, s.target, left, left + width, s.orientation)
    return IntervalSystem(spec.n_components, tuple(subs), degenerate=not rep.is_annular_system)


# ---------------------------------------------------------------------------
# depth-n intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DepthInterval:
    code: tuple[int, ...]
    left: Fraction | float
    right: Fraction | float
    component: int

    @property
    def length(self):
        return self.right - self.left


def valid_codes(sys: IntervalSystem, n: int) -> Iterable[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    kids = [sys.children(j) for j in range(sys.n_intervals)]
    stack = [(i,) for i in reversed(range(len(sys.subintervals)))]
    while stack:
        w = stack.pop()
        if len(w) == n:
            yield w
            continue
        for k in reversed(kids[sys.subintervals[w[-1]].target]):
            stack.append(w + (k,))


def code_interval(sys: IntervalSystem, code: Sequence[int]) -> DepthInterval:
    """The depth-``len(code)`` interval with the given itinerary."""
    code = tuple(code)
    if not is_valid_code(sys, code):
        raise ValidationError(f"code {list(code)} is not valid")
    if not code:
        raise ValidationError("empty code names no single interval; use interval_of")
    lo, hi = interval_of(sys.subintervals[code[-1]].target)
    for i in reversed(code):
        a, b = sys.inverse_branch(i, lo), sys.inverse_branch(i, hi)
        lo, hi = min(a, b), max(a, b)
    return DepthInterval(code, lo, hi, sys.subintervals[code[0]].parent)


def is_valid_code(sys: IntervalSystem, code: Sequence[int]) -> bool:
    subs = sys.subintervals
    if any(not (0 <= i < len(subs)) for i in code):
        return False
    return all(subs[a].target == subs[b].parent for a, b in zip(code, code[1:]))


def preimage_depth(sys: IntervalSystem, n: int) -> list[DepthInterval]:
    """All depth-``n`` intervals ``sigma^{-n}(I)`` sorted by position."""
    if n < 0:
        raise ValidationError("depth must be non-negative")
    if n == 0:
        return [DepthInterval((), *interval_of(j), j) for j in range(sys.n_intervals)]
    # breadth-first refinement: child interval = inverse branch applied to parent interval
    level = []
    for i, s in enumerate(sys.subintervals):
        level.append(DepthInterval((i,), s.left, s.right, s.parent))
    for _ in range(n - 1):
        nxt = []
        by_first: dict[int, list[DepthInterval]] = {}
        for d in level:
            by_first.setdefault(d.component, []).append(d)
        for i, s in enumerate(sys.subintervals):
            for d in by_first.get(s.target, ()):
                a, b = sys.inverse_branch(i, d.left), sys.inverse_branch(i, d.right)
                nxt.append(DepthInterval((i,) + d.code, min(a, b), max(a, b), s.parent))
        level = nxt
    level.sort(key=lambda d: (d.left, d.right))
    return level


def intervals_csv(intervals: Sequence[DepthInterval]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["code", "left", "right"])
    for d in intervals:
        w.writerow([" ".join(map(str, d.code)), str(d.left), str(d.right)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expansion:
    N: int
    lam: float
    C: float
    min_derivative: Fraction | float

    def to_dict(self):
        return {"N": self.N, "lambda": self.lam, "C": self.C, "min_derivative": str(self.min_derivative)}


def min_derivative(sys: IntervalSystem, n: int):
    """``min |(sigma^n)'|`` over all depth-``n`` intervals (a min-product over codes)."""
    kids = [sys.children(j) for j in range(sys.n_intervals)]
    slopes = [abs(s.slope) for s in sys.subintervals]
    best = list(slopes)
    for _ in range(n - 1):
        best = [
            slopes[i] * min(best[k] for k in kids[sys.subintervals[i].target])
            for i in range(len(slopes))
        ]
    return min(best)


def expansion(sys: IntervalSystem, cap: int = 64) -> Expansion:
    """Least ``N`` with ``min |(sigma^N)'| > 1``; ``lambda`` is its ``N``-th root and ``C = lambda^-N``."""
    if sys.degenerate or not _disconnects(sys, cap):
        raise PreconditionError("interval system never disconnects a component (not an annular system)")
    for N in range(1, cap + 1):
        m = min_derivative(sys, N)
        if m > 1:
            lam = float(m) ** (1.0 / N)
            return Expansion(N, lam, 1.0 / float(m), m)
    raise NotExpandingWithinHorizon(cap)


def _disconnects(sys: IntervalSystem, horizon: int) -> bool:
    cnt = [1] * sys.n_intervals
    for _ in range(horizon):
        cnt = [sum(cnt[sys.subintervals[i].target] for i in sys.children(j)) for j in range(sys.n_intervals)]
        if all(c >= 2 for c in cnt):
            return True
    return False


# ---------------------------------------------------------------------------
# itineraries
# ---------------------------------------------------------------------------


def _locate(sys: IntervalSystem, x) -> int | None:
    for i, s in enumerate(sys.subintervals):
        tol = FLOAT_TOL if isinstance(x, float) else 0
        if s.left - tol <= x <= s.right + tol:
            return i
    return None


def itinerary(sys: IntervalSystem, x, n: int) -> tuple[int, ...]:
    """The first ``n`` symbols of ``x``; raises :class:`Escaped` with a 1-based step.

    A point shared by two touching subintervals takes the lower index.
    """
    x = _num(x)
    out = []
    for step in range(1, n + 1):
        i = _locate(sys, x)
        if i is None:
            raise Escaped(step)
        out.append(i)
        x = sys.branch(i, x)
    return tuple(out)


def orbit_code(sys: IntervalSystem, x, max_steps: int = 10_000):
    """Exact itinerary of a rational point as a closed-form :class:`Code`.

    Rational points with bounded denominators have eventually periodic
    orbits; the orbit is followed until a point repeats.
    """
    x = Fraction(x)
    seen: dict[Fraction, int] = {}
    word = []
    for step in range(1, max_steps + 1):
        if x in seen:
            k = seen[x]
            return Code.periodic(word[k:], word[:k]).normalized()
        seen[x] = len(word)
        i = _locate(sys, x)
        if i is None:
            raise Escaped(step)
        word.append(i)
        x = sys.branch(i, x)
    raise NotExpandingWithinHorizon(max_steps)


def classify_point(sys: IntervalSystem, x):
    return classify_code(orbit_code(sys, x))


def point_of_code(sys: IntervalSystem, code, depth: int) -> DepthInterval:
    word = code.take(depth) if hasattr(code, "take") else tuple(code)[:depth]
    return code_interval(sys, word)


# ---------------------------------------------------------------------------
# semiconjugacy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SemiconjugacyResult:
    ok: bool
    checked: int
    witness: tuple[int, ...] | None = None
    reason: str | None = None

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "checked": self.checked,
                "witness": None if self.witness is None else list(self.witness), "reason": self.reason}


def semiconjugacy_check(sys: IntervalSystem, spec, n: int) -> SemiconjugacyResult:
    """Code-level check of ``sigma o pi = pi o g`` over every code of length ``1..n``.

    For each annular code the matching interval ``J = I^k(code)`` must exist,
    ``sigma`` must map it onto the interval of the shifted code, and ``J``
    touches an end of its root interval exactly when the annular component
    shares that boundary circle.
    """
    from .annulus_engine import codes as annular_codes, shared_sides

    if sys.n_intervals != spec.n_components or len(sys.subintervals) != spec.n_subannuli:
        return SemiconjugacyResult(False, 0, None, "size mismatch")
    checked = 0
    for k in range(1, n + 1):
        ann = set(annular_codes(spec, k))
        itv = set(valid_codes(sys, k))
        if ann != itv:
            w = min(ann ^ itv)
            return SemiconjugacyResult(False, checked, w, "code sets differ")
        for w in sorted(ann):
            checked += 1
            J = code_interval(sys, w)
            s0 = sys.subintervals[w[0]]
            if s0.parent != spec.subannuli[w[0]].parent:
                return SemiconjugacyResult(False, checked, w, "parent mismatch")
            if len(w) > 1:
                a, b = sys.branch(w[0], J.left), sys.branch(w[0], J.right)
                K = code_interval(sys, w[1:])
                if (min(a, b), max(a, b)) != (K.left, K.right) and not (
                    _close(min(a, b), K.left) and _close(max(a, b), K.right)
                ):
                    return SemiconjugacyResult(False, checked, w, "shift does not commute")
            else:
                lo, hi = interval_of(spec.subannuli[w[0]].target)
                a, b = sys.branch(w[0], J.left), sys.branch(w[0], J.right)
                if not (_close(min(a, b), lo) and _close(max(a, b), hi)) or s0.target != spec.subannuli[w[0]].target:
                    return SemiconjugacyResult(False, checked, w, "target mismatch")
            lo, hi = interval_of(J.component)
            touches = {b for b, e, v in ((0, lo, J.left), (1, hi, J.right)) if _close(e, v)}
            if touches != set(shared_sides(spec, w)):
                return SemiconjugacyResult(False, checked, w, "boundary sharing mismatch")
    return SemiconjugacyResult(True, checked)
