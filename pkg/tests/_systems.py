"""Cycle-system generators shared by the test modules."""

import itertools
import math
import random
from collections import defaultdict
from fractions import Fraction

from hypothesis import strategies as st

from ohara.cycles import CycleSystem


def small_family(side_max=6, m_max=4, volume_cap=500):
    """Every integer system with sides in 1..side_max, m <= m_max and volume <= volume_cap."""
    for m in range(1, m_max + 1):
        by_volume = defaultdict(list)
        for v in itertools.product(range(1, side_max + 1), repeat=m):
            p = math.prod(v)
            if p <= volume_cap:
                by_volume[p].append(v)
        for vol in sorted(by_volume):
            for a in by_volume[vol]:
                for b in by_volume[vol]:
                    yield CycleSystem.from_sides(a, b)


def factor_system(rng: random.Random, m: int, cap: int = 10**4, factor_max: int = 22) -> CycleSystem:
    """Sides from an m x m matrix of factors: a = row products, b = column products."""
    while True:
        M = [[rng.randint(1, factor_max) for _ in range(m)] for _ in range(m)]
        a, b = [1] * m, [1] * m
        for j in range(m):
            for k in range(m):
                a[j] *= M[j][k]
                b[k] *= M[j][k]
        if max(a + b) <= cap:
            return CycleSystem.from_sides(a, b)


@st.composite
def integer_systems(draw, m_max=4, factor_max=6, volume_max=None):
    m = draw(st.integers(1, m_max))
    M = [[draw(st.integers(1, factor_max)) for _ in range(m)] for _ in range(m)]
    if volume_max is not None:
        # shrink factors until the box is small enough to sweep
        while math.prod(map(math.prod, M)) > volume_max:
            r, c = max(((r, c) for r in range(m) for c in range(m)), key=lambda rc: M[rc[0]][rc[1]])
            M[r][c] -= 1
    a = [math.prod(row) for row in M]
    b = [math.prod(M[j][k] for j in range(m)) for k in range(m)]
    return CycleSystem.from_sides(a, b)


@st.composite
def systems_with_point(draw, m_max=4, factor_max=6, rational=False):
    sys = draw(integer_systems(m_max, factor_max))
    if rational:
        q = draw(st.integers(1, 5))
        sys = CycleSystem(sys.i, [Fraction(x, q) for x in sys.a], [Fraction(x, q) for x in sys.b])
        t = tuple(Fraction(draw(st.integers(0, int(aj * 7) - 1)), 7) for aj in sys.a)
        t = tuple(min(x, aj - Fraction(1, 7)) if x >= aj else x for x, aj in zip(t, sys.a))
    else:
        t = tuple(draw(st.integers(0, aj - 1)) for aj in sys.a)
    return sys, t
