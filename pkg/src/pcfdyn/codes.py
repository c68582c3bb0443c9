"""Symbol sequences (itineraries) and their periodicity classification."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count, product
from typing import Callable, Iterator, Sequence


@dataclass(frozen=True)
class Code:
    """An eventually periodic sequence ``prefix + cycle + cycle + ...``.

    With an empty ``cycle`` the code is the finite word ``prefix``.
    """

    prefix: tuple[int, ...] = ()
    cycle: tuple[int, ...] = ()

    @classmethod
    def word(cls, symbols: Sequence[int]) -> "Code":
        return cls(tuple(int(s) for s in symbols), ())

    @classmethod
    def periodic(cls, cycle: Sequence[int], prefix: Sequence[int] = ()) -> "Code":
        if not cycle:
            raise ValueError("periodic code needs a non-empty cycle")
        return cls(tuple(int(s) for s in prefix), tuple(int(s) for s in cycle))

    @property
    def is_finite(self) -> bool:
        return not self.cycle

    def __len__(self):
        if self.cycle:
            raise TypeError("infinite code has no length")
        return len(self.prefix)

    def __getitem__(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        if not self.cycle:
            raise IndexError(i)
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def take(self, n: int) -> tuple[int, ...]:
        if self.is_finite and n > len(self.prefix):
            raise IndexError(f"finite code of length {len(self.prefix)} has no {n}-prefix")
        return tuple(self[i] for i in range(n))

    def shift(self, k: int = 1) -> "Code":
        if k <= len(self.prefix):
            return Code(self.prefix[k:], self.cycle)
        if not self.cycle:
            raise IndexError("shift past the end of a finite code")
        r = (k - len(self.prefix)) % len(self.cycle)
        return Code((), self.cycle[r:] + self.cycle[:r])

    def normalized(self) -> "Code":
        """Minimal period, then minimal preperiod."""
        if not self.cycle:
            return self
        cyc = self.cycle
        p = _minimal_period(cyc)
        cyc = cyc[:p]
        pre = self.prefix
        while pre and pre[-1] == cyc[-1]:
            pre = pre[:-1]
            cyc = cyc[-1:] + cyc[:-1]
        return Code(pre, cyc)

    def to_dict(self) -> dict:
        return {"prefix": list(self.prefix), "cycle": list(self.cycle)}

    @classmethod
    def from_obj(cls, obj) -> "Code":
        """Parse ``[0,1,1]``, ``{"prefix": [...], "cycle": [...]}`` or ``"0(1)"`` strings."""
        if isinstance(obj, Code):
            return obj
        if isinstance(obj, str):
            s = obj.replace(",", "").replace(" ", "")
            if "(" in s:
                head, _, rest = s.partition("(")
                return cls.periodic([int(c) for c in rest.rstrip(")")], [int(c) for c in head])
            return cls.word([int(c) for c in s])
        if isinstance(obj, dict):
            return cls(tuple(obj.get("prefix", ())), tuple(obj.get("cycle", ())))
        return cls.word(obj)

    def __str__(self):
        head = "".join(map(str, self.prefix))
        return head + (f"({''.join(map(str, self.cycle))})" if self.cycle else "")


@dataclass(frozen=True)
class StreamCode:
    """A code given by a symbol function; its periodicity is only testable up to a horizon."""

    symbol: Callable[[int], int]
    name: str = "stream"

    @property
    def is_finite(self) -> bool:
        return False

    def __getitem__(self, i: int) -> int:
        return self.symbol(i)

    def take(self, n: int) -> tuple[int, ...]:
        return tuple(self.symbol(i) for i in range(n))

    def shift(self, k: int = 1) -> "StreamCode":
        f = self.symbol
        return StreamCode(lambda i: f(i + k), f"{self.name}>>{k}")


def _minimal_period(word: Sequence) -> int:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and all(word[i] == word[i % p] for i in range(n)):
            return p
    return n


def champernowne_binary(alphabet: Sequence[int] = (0, 1)) -> StreamCode:
    """Concatenation of every word over ``alphabet``, shortest first: 0 1 00 01 10 11 000 ...

    Never eventually periodic, so it codes a wandering component.
    """
    alphabet = tuple(alphabet)

    def symbols() -> Iterator[int]:
        for length in count(1):
            for w in product(alphabet, repeat=length):
                yield from w

    cache: list[int] = []
    gen = symbols()

    def symbol(i: int) -> int:
        while len(cache) <= i:
            cache.append(next(gen))
        return cache[i]

    return StreamCode(symbol, "champernowne")


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Periodic:
    period: int
    kind: str = "periodic"

    def to_dict(self):
        return {"kind": self.kind, "period": self.period}


@dataclass(frozen=True)
class Preperiodic:
    preperiod: int
    period: int
    kind: str = "preperiodic"

    def to_dict(self):
        return {"kind": self.kind, "preperiod": self.preperiod, "period": self.period}


@dataclass(frozen=True)
class WanderingUpToHorizon:
    horizon: int
    kind: str = "wandering"

    def to_dict(self):
        return {"kind": self.kind, "horizon": self.horizon}


def classify_code(code, horizon: int = 256):
    """Periodic / preperiodic / wandering-up-to-horizon.

    Closed-form codes are classified exactly.  Streamed codes are read up to
    ``horizon`` symbols and called eventually periodic only if the second half
    of that window is periodic with period at most a quarter of the window.
    """
    if isinstance(code, Code):
        if code.is_finite:
            raise ValueError("a finite word has no periodicity class")
        c = code.normalized()
        if not c.prefix:
            return Periodic(len(c.cycle))
        return Preperiodic(len(c.prefix), len(c.cycle))
    word = code.take(horizon)
    best = None
    for k in range(0, horizon // 2 + 1):
        tail = word[k:]
        for p in range(1, horizon // 4 + 1):
            if all(tail[i] == tail[i + p] for i in range(len(tail) - p)):
                best = (k, p)
                break
        if best:
            break
    if best is None:
        return WanderingUpToHorizon(horizon)
    k, p = best
    c = Code.periodic(word[k : k + p], word[:k]).normalized()
    return Periodic(len(c.cycle)) if not c.prefix else Preperiodic(len(c.prefix), len(c.cycle))
