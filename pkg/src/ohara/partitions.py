"""Integer partitions, exact rational vectors and half-open boxes."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from ohara.errors import DomainError

DEFAULT_ENUMERATION_CAP = 60


class _Infinity:
    """The bound sentinel ``∞``: never reached by any multiplicity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("ohara.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

Bound = Union[int, _Infinity]
Number = Union[int, Fraction]


def parse_bound(value) -> Bound:
    """Read a bound from JSON-ish input: positive int, or "inf"/"∞"/None."""
    if value is None or value is INF:
        return INF
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "infinity", "∞"):
            return INF
        value = int(v)
    if isinstance(value, bool) or not isinstance(value, int):
        raise DomainError(f"bound must be a positive integer or 'inf', got {value!r}")
    if value < 1:
        raise DomainError(f"bound must be positive, got {value}")
    return value


def bound_to_json(value: Bound):
    return "inf" if value is INF else value


# --------------------------------------------------------------------------
# exact rationals


def exact(x) -> Number:
    """Coerce to an exact number; integral values come back as ``int``."""
    if isinstance(x, bool):
        raise DomainError("booleans are not numbers here")
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        raise DomainError(f"floating point value {x!r} rejected; use an exact 'p/q' string")
    try:
        q = Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not an exact rational: {x!r}") from exc
    return q.numerator if q.denominator == 1 else q


def rvec(values: Iterable) -> tuple:
    """An exact rational vector (a plain tuple of ints/Fractions)."""
    return tuple(exact(v) for v in values)


def fraction_str(x: Number) -> str:
    q = Fraction(x)
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(text: str) -> Number:
    return exact(text)


@dataclass(frozen=True)
class Box:
    """Half-open box ``anchor + [0, s_1) x ... x [0, s_m)``."""

    sides: tuple
    anchor: tuple = field(default=None)

    def __post_init__(self):
        sides = rvec(self.sides)
        if not sides:
            raise DomainError("a box needs at least one side")
        if any(s <= 0 for s in sides):
            raise DomainError(f"box sides must be positive, got {list(map(str, sides))}")
        anchor = (0,) * len(sides) if self.anchor is None else rvec(self.anchor)
        if len(anchor) != len(sides):
            raise DomainError("anchor and sides differ in dimension")
        object.__setattr__(self, "sides", sides)
        object.__setattr__(self, "anchor", anchor)

    @property
    def dim(self) -> int:
        return len(self.sides)

    @property
    def upper(self) -> tuple:
        return tuple(x + s for x, s in zip(self.anchor, self.sides))

    @property
    def volume(self) -> Number:
        v = Fraction(1)
        for s in self.sides:
            v *= s
        return exact(v)

    def contains(self, point: Sequence) -> bool:
        return all(lo <= p < lo + s for p, lo, s in zip(point, self.anchor, self.sides))

    def integer_points(self) -> Iterator[tuple]:
        """Integer points of an anchored-at-origin box, last coordinate fastest."""
        ranges = [range(math.ceil(lo), math.ceil(lo + s)) for lo, s in zip(self.anchor, self.sides)]
        return itertools.product(*ranges)


# --------------------------------------------------------------------------
# partitions

_TOKEN = re.compile(r"^(\d+)(?:\^(\d+))?$")


class Partition:
    """A finite multiset of positive parts, ``1^{m_1} 2^{m_2} ...``.

    Immutable; stores only the nonzero multiplicities, sorted by part.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, multiplicities: Union[Mapping[int, int], Iterable[tuple]] = ()):
        items = multiplicities.items() if isinstance(multiplicities, Mapping) else multiplicities
        merged: dict[int, int] = {}
        for part, mult in items:
            part, mult = int(part), int(mult)
            if part < 1:
                raise DomainError(f"parts must be positive, got {part}")
            if mult < 0:
                raise DomainError(f"negative multiplicity {mult} for part {part}")
            if mult:
                merged[part] = merged.get(part, 0) + mult
        self._items = tuple(sorted(merged.items()))
        self._hash = hash(self._items)

    @classmethod
    def from_parts(cls, parts: Iterable[int]) -> "Partition":
        counts: dict[int, int] = {}
        for p in parts:
            counts[p] = counts.get(p, 0) + 1
        return cls(counts)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse ``"3^3 4^4 5^2"``; ``"()"`` or the empty string is the empty partition."""
        text = text.strip()
        if text in ("", "()", "0"):
            return cls()
        counts: dict[int, int] = {}
        for token in text.split():
            match = _TOKEN.match(token)
            if not match:
                raise DomainError(f"malformed partition token {token!r} in {text!r}")
            part = int(match.group(1))
            mult = int(match.group(2)) if match.group(2) is not None else 1
            if part < 1:
                raise DomainError(f"parts must be positive, got {part}")
            counts[part] = counts.get(part, 0) + mult
        return cls(counts)

    @classmethod
    def from_json(cls, obj: Mapping[str, str]) -> "Partition":
        try:
            return cls({int(k): int(v) for k, v in obj.items()})
        except (TypeError, ValueError, AttributeError) as exc:
            raise DomainError(f"bad partition JSON: {obj!r}") from exc

    def to_json(self) -> dict:
        return {str(p): str(m) for p, m in self._items}

    def __str__(self):
        if not self._items:
            return "()"
        return " ".join(str(p) if m == 1 else f"{p}^{m}" for p, m in self._items)

    def __repr__(self):
        return f"Partition({str(self)!r})"

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self._items == other._items

    def __hash__(self):
        return self._hash

    def __getitem__(self, part: int) -> int:
        for p, m in self._items:
            if p == part:
                return m
        return 0

    def __len__(self):
        """Number of parts, counted with multiplicity."""
        return sum(m for _, m in self._items)

    def __bool__(self):
        return bool(self._items)

    def __iter__(self):
        """Parts in non-increasing order, as in ``λ_1 >= λ_2 >= ...``."""
        for p, m in reversed(self._items):
            for _ in range(m):
                yield p

    def __add__(self, other: "Partition") -> "Partition":
        return Partition(self._items + other._items)

    def items(self) -> tuple:
        return self._items

    def as_dict(self) -> dict:
        return dict(self._items)

    @property
    def support(self) -> tuple:
        return tuple(p for p, _ in self._items)

    @property
    def size(self) -> int:
        return sum(p * m for p, m in self._items)

    def restrict(self, parts: Iterable[int]) -> "Partition":
        keep = set(parts)
        return Partition(tuple((p, m) for p, m in self._items if p in keep))

    def vector(self, parts: Sequence[int]) -> tuple:
        d = dict(self._items)
        return tuple(d.get(p, 0) for p in parts)

    def sort_key(self) -> tuple:
        return self._items


def size(lam: Partition) -> int:
    return lam.size


# --------------------------------------------------------------------------
# enumeration

BoundFn = Callable[[int], Bound]


def _no_bound(_part: int) -> Bound:
    return INF


def enumerate_partitions(
    n: int,
    bound: BoundFn | None = None,
    *,
    parts: Iterable[int] | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> list:
    """All partitions of ``n`` with ``m_i < bound(i)``, optionally restricted to ``parts``.

    Sorted by the ascending (part, multiplicity) list.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if n > cap:
        raise DomainError(f"enumeration of partitions of {n} refused: exceeds cap {cap}")
    bound = bound or _no_bound
    allowed = sorted({p for p in parts if 1 <= p <= n}) if parts is not None else list(range(1, n + 1))
    limits = [bound(p) for p in allowed]
    out: list[Partition] = []

    def rec(idx: int, remaining: int, acc: list):
        if remaining == 0:
            out.append(Partition(acc))
            return
        if idx < 0:
            return
        part = allowed[idx]
        most = remaining // part
        lim = limits[idx]
        if lim is not INF:
            most = min(most, lim - 1)
        for mult in range(most, -1, -1):
            if mult:
                acc.append((part, mult))
            rec(idx - 1, remaining - mult * part, acc)
            if mult:
                acc.pop()

    rec(len(allowed) - 1, n, [])
    out.sort(key=Partition.sort_key)
    return out


def count_partitions(n: int, bound: BoundFn | None = None) -> int:
    """Independent count of partitions of ``n`` with ``m_i < bound(i)`` (recursive DP)."""
    bound = bound or _no_bound
    limit = {i: bound(i) for i in range(1, n + 1)}

    @lru_cache(maxsize=None)
    def p(rest: int, largest: int) -> int:
        if rest == 0:
            return 1
        if largest == 0:
            return 0
        total = 0
        lim = limit[largest]
        top = rest // largest if lim is INF else min(rest // largest, lim - 1)
        for mult in range(top + 1):
            total += p(rest - mult * largest, largest - 1)
        return total

    return p(n, n)
