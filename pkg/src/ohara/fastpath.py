"""Computing the bijection without stepping.

On a cycle the firing counts ``k`` are the least nonnegative solution of
``k_j = ⌊(t_j + a_j k_{j+1}) / b_j⌋`` (indices mod ``m``).  Fixing ``k_1 = x``
and propagating once around the cycle gives a nondecreasing map ``F``; the
answer is its least fixed point, reached by iterating ``x <- F(x)`` from 0.

The ascent can need about ``k_1`` rounds.  For short cycles there is a second
solver: ``A k`` ranges over a rank ``m − 1`` lattice; an LLL-reduced basis
lists its few points in the box ``[−t, b − 1 − t]``, and each one gives a
chain of solutions along the kernel generator.  The answer is the least
nonnegative member over all chains.  On a path the recurrence has no wrap-around and is
solved in one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ohara.cycles import CycleResult, CycleSystem, cycle_system_from_component
from ohara.equivalence import CYCLE, GraphComponent, SequenceSpec, decompose_support
from ohara.errors import DomainError, InvariantError
from ohara.partitions import INF, Partition

DEFAULT_M_MAX = 16
# the ascent gains at least one per round; past this many rounds give up rather than hang
DEFAULT_MAX_ROUNDS = 10**7
# "auto" hands over to the lattice solver after this many rounds, on cycles this short
ASCENT_ROUNDS_BEFORE_LATTICE = 20_000
LATTICE_M_MAX = 6
METHODS = ("auto", "ascent", "lattice")


@dataclass(frozen=True)
class IlpInstance:
    """Minimize ``Σ k_j`` over integer ``k >= 0`` with ``0 <= t + A k < b``."""

    sys: CycleSystem
    t: tuple

    def residual(self, k: Sequence) -> tuple:
        Ak = self.sys.matrix.apply(k)
        return tuple(tj + v for tj, v in zip(self.t, Ak))

    def feasible(self, k: Sequence) -> bool:
        if len(k) != self.sys.m or any(int(x) != x or x < 0 for x in k):
            return False
        return self.sys.in_target(self.residual(k))

    @staticmethod
    def objective(k: Sequence) -> int:
        return sum(k)


def _check_integer_point(sys: CycleSystem, t: Sequence) -> tuple:
    if not sys.is_integer:
        raise DomainError("the fast cycle solver needs integer sides; scale the system first")
    t = tuple(t)
    if any(not isinstance(x, int) for x in t):
        raise DomainError("the fast cycle solver needs an integer point")
    if not sys.in_source(t):
        raise DomainError(f"t = {list(t)} is not in the source box R({', '.join(map(str, sys.a))})")
    return t


def propagate(sys: CycleSystem, t: Sequence, x: int) -> list:
    """Set ``k_1 = x``, fill ``k_m, ..., k_2`` by the recurrence, then put ``F(x)`` in ``k[0]``."""
    a, b, m = sys.a, sys.b, sys.m
    k = [0] * m
    nxt = x
    for j in range(m - 1, 0, -1):
        nxt = (t[j] + a[j] * nxt) // b[j]
        k[j] = nxt
    k[0] = (t[0] + a[0] * nxt) // b[0]
    return k


def _ascend(sys: CycleSystem, t: tuple, max_rounds: int):
    """Least fixed point of ``F`` from 0, or ``None`` after ``max_rounds`` rounds."""
    ceiling = sys.matrix.generator[0]
    x, rounds = 0, 0
    while True:
        k = propagate(sys, t, x)
        fx = k[0]
        if fx == x:
            return k
        if fx < x:
            raise InvariantError(f"fixed-point ascent went down ({x} -> {fx}); F is not monotone here")
        x = fx
        rounds += 1
        if rounds >= max_rounds:
            return None
        if x >= ceiling:
            raise InvariantError(f"fixed-point ascent passed the kernel period {ceiling}")


def solve_cycle_fast(
    sys: CycleSystem,
    t: Sequence,
    *,
    method: str = "auto",
    check: bool = True,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> CycleResult:
    """Firing counts, final point and step count of one cycle without stepping.

    ``method`` is ``"ascent"``, ``"lattice"`` (cycles of length at most
    ``LATTICE_M_MAX``) or ``"auto"``, which starts with the ascent and
    switches to the lattice if that is slow and the cycle is short.
    """
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    t = _check_integer_point(sys, t)
    if method == "lattice":
        k = solve_cycle_lattice(sys, t)
    elif method == "auto" and sys.m <= LATTICE_M_MAX:
        k = _ascend(sys, t, min(max_rounds, ASCENT_ROUNDS_BEFORE_LATTICE)) or solve_cycle_lattice(sys, t)
    else:
        k = _ascend(sys, t, max_rounds)
        if k is None:
            raise DomainError(f"fixed-point ascent still climbing after {max_rounds} rounds")
    k = list(k)
    s = tuple(tj - bj * kj + aj * kn for tj, aj, bj, kj, kn in zip(t, sys.a, sys.b, k, k[1:] + k[:1]))
    if check and not sys.in_target(s):
        raise InvariantError("fast cycle solution left the target box")
    return CycleResult(s, tuple(k), sum(k))


# --------------------------------------------------------------------------
# lattice solver


def _unimodular_completion(g: Sequence) -> list:
    """Columns ``C`` such that ``(g, C)`` is a unimodular basis of ``Z^m`` (``g`` primitive)."""
    m = len(g)
    y = list(g)
    B = [[int(r == c) for c in range(m)] for r in range(m)]
    # column operations keep y = B^{-1} g, until y is a unit vector
    while True:
        nz = [i for i in range(m) if y[i]]
        if len(nz) == 1:
            break
        p = min(nz, key=lambda i: abs(y[i]))
        for i in nz:
            if i != p:
                q = y[i] // y[p]
                y[i] -= q * y[p]
                for r in range(m):
                    B[r][p] += q * B[r][i]
    p = nz[0]
    if abs(y[p]) != 1:
        raise InvariantError(f"kernel generator {list(g)} is not primitive")
    return [[B[r][c] for r in range(m)] for c in range(m) if c != p]


def _lll(rows: list) -> tuple:
    """LLL-reduced rows ``R`` and the unimodular ``U`` with ``R = U · rows``."""
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    M = DomainMatrix([[ZZ(x) for x in row] for row in rows], (len(rows), len(rows[0])), ZZ)
    R, U = M.lll_transform()
    return (
        [[int(x) for x in row] for row in R.to_Matrix().tolist()],
        [[int(x) for x in row] for row in U.to_Matrix().tolist()],
    )


def solve_cycle_lattice(sys: CycleSystem, t: Sequence) -> tuple:
    """Least nonnegative ``k`` with ``t + A k`` in the target box, by lattice enumeration."""
    t = _check_integer_point(sys, t)
    m = sys.m
    if m > LATTICE_M_MAX:
        raise DomainError(f"lattice solver handles cycles up to length {LATTICE_M_MAX}, got {m}")
    g = sys.matrix.generator
    if m == 1:
        return (0,)
    A = sys.matrix.A
    n = m - 1
    C = _unimodular_completion(g)
    basis = [[sum(A[r][j] * c[j] for j in range(m)) for r in range(m)] for c in C]
    lo = [-x for x in t]
    hi = [bj - 1 - tj for bj, tj in zip(sys.b, t)]
    # scale coordinates so the box becomes a cube; the ball around it then stays tight
    widths = [max(h - l, 1) for l, h in zip(lo, hi)]
    S = math.lcm(*widths)
    w = [S // x for x in widths]
    R, U = _lll([[w[r] * v[r] for r in range(m)] for v in basis])
    red_basis = [[sum(U[l][q] * basis[q][r] for q in range(n)) for r in range(m)] for l in range(n)]
    red_pre = [[sum(U[l][q] * C[q][r] for q in range(n)) for r in range(m)] for l in range(n)]

    # work at twice scale so the box centre is integral
    R2 = [[2 * x for x in row] for row in R]
    centre = [w[r] * (lo[r] + hi[r]) for r in range(m)]
    radius2 = sum((w[r] * (hi[r] - lo[r])) ** 2 for r in range(m))
    star, norms = [], []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for l in range(n):
        v = [Fraction(x) for x in R2[l]]
        for q in range(l):
            mu[l][q] = sum(R2[l][r] * star[q][r] for r in range(m)) / norms[q]
            v = [v[r] - mu[l][q] * star[q][r] for r in range(m)]
        star.append(v)
        norms.append(sum(x * x for x in v))
    coords = [sum(centre[r] * star[l][r] for r in range(m)) / norms[l] for l in range(n)]
    off_plane = [centre[r] - sum(coords[l] * star[l][r] for l in range(n)) for r in range(m)]

    found = []
    c = [0] * n

    def enumerate_level(l: int, budget):
        if l < 0:
            v = [sum(c[q] * red_basis[q][r] for q in range(n)) for r in range(m)]
            if all(lo[r] <= v[r] <= hi[r] for r in range(m)):
                found.append([sum(c[q] * red_pre[q][r] for q in range(n)) for r in range(m)])
            return
        mid = coords[l] - sum(mu[q][l] * c[q] for q in range(l + 1, n))
        span = math.isqrt(int(budget / norms[l])) + 1
        base = math.floor(mid)
        for ci in range(base - span, base + span + 2):
            d = norms[l] * (ci - mid) ** 2
            if d <= budget:
                c[l] = ci
                enumerate_level(l - 1, budget - d)
        c[l] = 0

    budget = radius2 - sum(x * x for x in off_plane)
    if budget >= 0:
        enumerate_level(n - 1, budget)
    if not found:
        raise InvariantError("lattice enumeration found no point in the target box")
    # each point gives a chain k + λg of solutions; keep the least nonnegative member of each
    candidates = []
    for k in found:
        shift = max(-(kj // gj) for kj, gj in zip(k, g))
        candidates.append(tuple(kj + shift * gj for kj, gj in zip(k, g)))
    best = min(candidates)
    if any(any(x > y for x, y in zip(best, other)) for other in candidates):
        raise InvariantError("lattice candidates have no componentwise least member")
    return best



def ascent_rounds(sys: CycleSystem, t: Sequence) -> int:
    """How many ``x <- F(x)`` rounds the solver takes (for benchmarking)."""
    t = _check_integer_point(sys, t)
    x, rounds = 0, 0
    while True:
        fx = propagate(sys, t, x)[0]
        if fx == x:
            return rounds
        x, rounds = fx, rounds + 1


# --------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class PathSystem:
    """Parts along a path ``i_1 -> i_2 -> ...``: firing ``i_j`` adds copies of ``i_{j+1}``."""

    parts: tuple
    a: tuple
    b: tuple
    open_end: bool = False

    def __post_init__(self):
        if len(set(self.parts)) != len(self.parts):
            raise DomainError("path parts must be distinct")
        if not (len(self.parts) == len(self.a) == len(self.b)):
            raise DomainError("parts, a and b differ in length")
        for j in range(len(self.parts) - 1):
            lhs, rhs = self.b[j], self.a[j + 1]
            if lhs is not INF and rhs is not INF and self.parts[j] * lhs != self.parts[j + 1] * rhs:
                raise DomainError(f"path relation fails between parts {self.parts[j]} and {self.parts[j + 1]}")

    @classmethod
    def from_component(cls, spec: SequenceSpec, comp: GraphComponent) -> "PathSystem":
        if comp.kind == CYCLE:
            raise DomainError("component is a cycle, not a path")
        parts = comp.vertices
        open_end = comp.truncated and spec.phi_inv_raw(parts[-1]) is not None
        return cls(parts, tuple(spec.a(p) for p in parts), tuple(spec.b(p) for p in parts), open_end)


def solve_path_closed_form(path: PathSystem, t: Sequence) -> CycleResult:
    """``k_1 = ⌊t_1/b_1⌋``, ``k_j = ⌊(t_j + a_j k_{j-1})/b_j⌋``; ``k_j = 0`` where ``b_j = ∞``."""
    t = tuple(t)
    if len(t) != len(path.parts):
        raise DomainError("t and path differ in length")
    for tj, aj, p in zip(t, path.a, path.parts):
        if aj is not INF and tj >= aj:
            raise DomainError(f"m_{p} = {tj} is not below a_{p} = {aj}")
    k, s = [], []
    carry = 0
    for tj, aj, bj in zip(t, path.a, path.b):
        have = tj + (aj * carry if carry else 0)
        kj = 0 if bj is INF else have // bj
        k.append(kj)
        s.append(have - (0 if bj is INF else bj * kj))
        carry = kj
    if path.open_end and carry:
        raise DomainError(
            f"part {path.parts[-1]} fires past the spec horizon; raise the horizon to at least the partition size"
        )
    return CycleResult(tuple(s), tuple(k), sum(k))


# --------------------------------------------------------------------------
# partitions


def fast_run(spec: SequenceSpec, lam: Partition, *, m_max: int = DEFAULT_M_MAX) -> tuple:
    """``(ψ(λ), step count)`` computed component by component."""
    pieces = []
    total = 0
    for comp, sub in decompose_support(spec, lam):
        if comp is None:
            pieces.append(sub)
            continue
        if comp.kind == CYCLE:
            if len(comp) > m_max:
                raise DomainError(
                    f"cycle of length {len(comp)} exceeds m_max = {m_max}; the fast map needs bounded cycle lengths"
                )
            sys = cycle_system_from_component(spec, comp)
            res = solve_cycle_fast(sys, sys.vector_of(sub))
            pieces.append(sys.partition_of(res.s))
        else:
            path = PathSystem.from_component(spec, comp)
            res = solve_path_closed_form(path, sub.vector(path.parts))
            pieces.append(Partition(zip(path.parts, res.s)))
        total += res.L
    out = Partition()
    for p in pieces:
        out = out + p
    return out, total


def psi_fast(spec: SequenceSpec, lam: Partition, *, m_max: int = DEFAULT_M_MAX) -> Partition:
    return fast_run(spec, lam, m_max=m_max)[0]
