"""Continuous rewriting on a single cycle and its exact step-count formula.

A cycle system lists parts ``i = (i_1, ..., i_m)`` with ``φ(i_j) = i_{j+1}``
(indices mod ``m``) and sides ``a``, ``b`` with ``i_j a_j = i_{j+1} b_{j+1}``.
Coordinate ``j`` fires while ``s_j >= b_j``: ``s_j -= b_j`` and
``s_{j-1} += a_{j-1}``.  After ``k_j`` firings at each coordinate
``s = t + A k``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Sequence

from ohara.equivalence import CYCLE, GraphComponent, SequenceSpec
from ohara.errors import DomainError, InvariantError, StepBudgetExceeded
from ohara.partitions import Box, Partition, exact, rvec

ORDERS = ("sweep", "min", "max", "random")


def _prod(values) -> int:
    return reduce(lambda x, y: x * y, values, 1)


def _lcm(values) -> int:
    return reduce(math.lcm, values, 1)


def _denominator(values) -> int:
    return _lcm(Fraction(v).denominator for v in values)


@dataclass(frozen=True)
class StepMatrix:
    """``A`` with ``A[j][j] = -b_j``, ``A[j][j+1] = a_j`` and its kernel data."""

    A: tuple
    c: tuple
    kernel_vector: tuple
    lcm_c: int | None

    @property
    def generator(self) -> tuple:
        """Smallest positive integer kernel vector ``lcm_c / c_j``."""
        if self.lcm_c is None:
            raise DomainError("integer kernel generator needs integer sides")
        return tuple(self.lcm_c // cj for cj in self.c)

    def apply(self, k: Sequence) -> tuple:
        return tuple(sum(row[j] * k[j] for j in range(len(k)) if row[j]) for row in self.A)

    def left_apply(self, v: Sequence) -> tuple:
        m = len(v)
        return tuple(sum(v[r] * self.A[r][j] for r in range(m)) for j in range(m))


class CycleSystem:
    """Exact data ``(i, a, b)`` of one cycle, in ``φ`` order."""

    __slots__ = ("i", "a", "b", "__dict__")

    def __init__(self, i: Sequence, a: Sequence, b: Sequence):
        i, a, b = rvec(i), rvec(a), rvec(b)
        m = len(i)
        if m == 0 or len(a) != m or len(b) != m:
            raise DomainError("i, a, b must be nonempty and of equal length")
        if any(x <= 0 for x in i + a + b):
            raise DomainError("cycle data must be positive")
        for j in range(m):
            nxt = (j + 1) % m
            if i[j] * a[j] != i[nxt] * b[nxt]:
                raise DomainError(
                    f"cycle relation fails at j={j + 1}: i_j*a_j = {i[j] * a[j]} but i_(j+1)*b_(j+1) = {i[nxt] * b[nxt]}"
                )
        self.i, self.a, self.b = i, a, b

    @classmethod
    def from_sides(cls, a: Sequence, b: Sequence) -> "CycleSystem":
        """Derive ``i_j ∝ a_1⋯a_{j-1} b_{j+1}⋯b_m`` for sides of equal volume."""
        a, b = rvec(a), rvec(b)
        m = len(a)
        if len(b) != m:
            raise DomainError("a and b differ in length")
        if _prod(a) != _prod(b):
            raise DomainError(f"sides have different volumes {_prod(a)} and {_prod(b)}")
        i = [_prod(a[:j]) * _prod(b[j + 1 :]) for j in range(m)]
        scale = _denominator(i)
        i = [x * scale for x in i]
        g = reduce(math.gcd, (int(x) for x in i))
        return cls([int(x) // g for x in i], a, b)

    @property
    def m(self) -> int:
        return len(self.i)

    @property
    def is_integer(self) -> bool:
        return all(isinstance(x, int) for x in self.a + self.b)

    @cached_property
    def source(self) -> Box:
        return Box(self.a)

    @cached_property
    def target(self) -> Box:
        return Box(self.b)

    @cached_property
    def matrix(self) -> StepMatrix:
        m, a, b = self.m, self.a, self.b
        A = [[0] * m for _ in range(m)]
        for j in range(m):
            A[j][j] = -b[j]
            A[j][(j + 1) % m] += a[j]
        c = tuple(exact(_prod(a[:j]) * _prod(b[j : m - 1])) for j in range(m))
        kernel = tuple(exact(Fraction(1) / Fraction(cj)) for cj in c)
        lcm_c = _lcm(c) if all(isinstance(cj, int) for cj in c) else None
        return StepMatrix(tuple(tuple(row) for row in A), c, kernel, lcm_c)

    def scaled(self) -> tuple:
        """``(λ, system)`` with sides multiplied by their common denominator ``λ``."""
        lam = _denominator(self.a + self.b)
        if lam == 1:
            return 1, self
        return lam, CycleSystem(self.i, [x * lam for x in self.a], [x * lam for x in self.b])

    def reversed(self) -> "CycleSystem":
        """The system of the inverse map: reverse ``i``, swap and reverse the sides."""
        return CycleSystem(self.i[::-1], self.b[::-1], self.a[::-1])

    def functional(self, v: Sequence):
        return exact(sum(ij * vj for ij, vj in zip(self.i, v)))

    def in_source(self, t: Sequence) -> bool:
        return len(t) == self.m and all(0 <= tj < aj for tj, aj in zip(t, self.a))

    def in_target(self, s: Sequence) -> bool:
        return len(s) == self.m and all(0 <= sj < bj for sj, bj in zip(s, self.b))

    def vector_of(self, lam: Partition) -> tuple:
        return lam.vector(self.i)

    def partition_of(self, v: Sequence) -> Partition:
        return Partition(zip(self.i, v))

    def __eq__(self, other):
        return isinstance(other, CycleSystem) and (self.i, self.a, self.b) == (other.i, other.a, other.b)

    def __hash__(self):
        return hash((self.i, self.a, self.b))

    def __repr__(self):
        return f"CycleSystem(i={list(self.i)}, a={list(map(str, self.a))}, b={list(map(str, self.b))})"


def cycle_system_from_component(spec: SequenceSpec, comp: GraphComponent) -> CycleSystem:
    if comp.kind != CYCLE:
        raise DomainError(f"component is a {comp.kind}, not a cycle")
    order = comp.phi_order()
    return CycleSystem(order, [spec.a(p) for p in order], [spec.b(p) for p in order])


# --------------------------------------------------------------------------
# formula


def max_steps_formula(sys: CycleSystem) -> int:
    """``lcm(c)·Σ 1/c_j − m``, the largest step count over the box."""
    if not sys.is_integer:
        raise DomainError("the step-count formula needs integer sides")
    M = sys.matrix
    return sum(M.lcm_c // cj for cj in M.c) - sys.m


def step_budget(sys: CycleSystem) -> int:
    _, scaled = sys.scaled()
    return 2 * max_steps_formula(scaled) + 16


# --------------------------------------------------------------------------
# stepping


@dataclass(frozen=True)
class CycleResult:
    s: tuple
    k: tuple
    L: int


def psi_continuous(
    sys: CycleSystem,
    t: Sequence,
    *,
    order: str = "sweep",
    seed: int = 0,
    batch: bool = True,
    budget: int | None = None,
) -> CycleResult:
    """Run the continuous algorithm from ``t ∈ P``; returns ``(s, k, L)``.

    ``order`` picks which eligible coordinate fires next; ``batch`` fires all
    ``⌊s_j/b_j⌋`` copies at once.  ``k`` does not depend on either choice.
    """
    if order not in ORDERS:
        raise DomainError(f"unknown firing order {order!r}")
    t = rvec(t)
    if not sys.in_source(t):
        raise DomainError(f"t = {[str(x) for x in t]} is not in the source box R({', '.join(map(str, sys.a))})")
    m, a, b = sys.m, sys.a, sys.b
    if budget is None:
        budget = step_budget(sys)
    s = list(t)
    k = [0] * m
    total = 0
    rng = random.Random(seed) if order == "random" else None

    def fire(j, reps):
        nonlocal total
        total += reps
        if total > budget:
            raise StepBudgetExceeded(f"continuous run exceeded {budget} steps")
        s[j] -= reps * b[j]
        s[j - 1] += reps * a[j - 1]
        k[j] += reps

    if order == "sweep":
        moved = True
        while moved:
            moved = False
            for j in range(m):
                if s[j] >= b[j]:
                    fire(j, int(s[j] // b[j]) if batch else 1)
                    moved = True
    else:
        while True:
            ready = [j for j in range(m) if s[j] >= b[j]]
            if not ready:
                break
            if order == "min":
                j = ready[0]
            elif order == "max":
                j = ready[-1]
            else:
                j = rng.choice(ready)
            fire(j, int(s[j] // b[j]) if batch else 1)

    s = rvec(s)
    if not sys.in_target(s):
        raise InvariantError("continuous run ended outside the target box")
    return CycleResult(s, tuple(k), total)


def psi_inverse(sys: CycleSystem, s: Sequence) -> tuple:
    """Inverse map: reverse coordinates, run the reversed system, reverse back."""
    s = rvec(s)
    if not sys.in_target(s):
        raise DomainError(f"s = {[str(x) for x in s]} is not in the target box R({', '.join(map(str, sys.b))})")
    return psi_continuous(sys.reversed(), s[::-1]).s[::-1]


def translation(t: Sequence, result: CycleResult) -> tuple:
    return tuple(exact(sj - tj) for sj, tj in zip(result.s, t))


def local_constancy_cell(sys: CycleSystem, t: Sequence) -> Box:
    """Box at ``t`` with sides ``b_j − ψ(t)_j`` on which ``ψ(t') − t'`` is constant."""
    res = psi_continuous(sys, t)
    return Box([bj - sj for bj, sj in zip(sys.b, res.s)], rvec(t))


def brute_force_max(sys: CycleSystem) -> tuple:
    """``(max L, argmax list)`` over every integer point of the source box."""
    if not sys.is_integer:
        raise DomainError("brute force needs integer sides")
    best, where = -1, []
    for t in sys.source.integer_points():
        L = psi_continuous(sys, t).L
        if L > best:
            best, where = L, [t]
        elif L == best:
            where.append(t)
    return best, where
