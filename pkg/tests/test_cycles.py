from fractions import Fraction

import pytest
from _systems import integer_systems, systems_with_point
from hypothesis import given
from hypothesis import strategies as st

from ohara import DomainError, InvariantError
from ohara.cycles import (
    CycleSystem,
    brute_force_max,
    local_constancy_cell,
    max_steps_formula,
    psi_continuous,
    psi_inverse,
)

CYCLE_345 = CycleSystem((3, 4, 5), (4, 5, 3), (5, 3, 4))


def test_cycle_relation_checked():
    with pytest.raises(DomainError, match="relation"):
        CycleSystem((3, 4, 5), (4, 5, 3), (5, 3, 3))


def test_step_matrix_layout():
    M = CYCLE_345.matrix
    assert M.A[0][0] == -5 and M.A[0][1] == 4
    assert M.A[2][0] == 3 and M.A[2][2] == -4
    assert M.c == (15, 12, 20)
    assert M.lcm_c == 60
    assert M.apply(M.generator) == (0, 0, 0)


def test_formula_on_small_cycle():
    assert max_steps_formula(CYCLE_345) == 9
    assert brute_force_max(CYCLE_345)[0] == 9
    assert (3, 4, 2) in brute_force_max(CYCLE_345)[1]


@pytest.mark.parametrize("ps, value", [((3, 4, 5), 9), ((3, 5, 7), 12), ((7,), 0), ((2, 3), 0)])
def test_prime_style_cycles(ps, value):
    m = len(ps)
    sys = CycleSystem(ps, [ps[(j + 1) % m] for j in range(m)], [ps[j - 1] for j in range(m)])
    assert max_steps_formula(sys) == value


def test_from_sides_reduces_weights():
    sys = CycleSystem.from_sides((12, 8), (32, 3))
    assert sys.i == (1, 4)
    with pytest.raises(DomainError, match="volumes"):
        CycleSystem.from_sides((2, 3), (5, 1))


def test_cycle345_run():
    res = psi_continuous(CYCLE_345, (3, 4, 2))
    assert res.s == (4, 2, 3) and res.k == (3, 4, 2) and res.L == 9


@given(systems_with_point(rational=True))
def test_conservation_and_target(item):
    sys, t = item
    res = psi_continuous(sys, t)
    assert sys.in_target(res.s)
    assert sys.functional(res.s) == sys.functional(t)
    assert res.L == sum(res.k)


@given(systems_with_point(), st.sampled_from(["min", "max", "random"]), st.booleans())
def test_firing_order_irrelevant(item, order, batch):
    sys, t = item
    ref = psi_continuous(sys, t)
    res = psi_continuous(sys, t, order=order, batch=batch, seed=3)
    assert (res.s, res.k) == (ref.s, ref.k)


@given(systems_with_point(rational=True))
def test_inverse_round_trip(item):
    sys, t = item
    s = psi_continuous(sys, t).s
    assert psi_inverse(sys, s) == tuple(t)


@given(systems_with_point(rational=True))
def test_locally_constant_on_cell(item):
    sys, t = item
    ref = psi_continuous(sys, t)
    shift = tuple(sj - tj for sj, tj in zip(ref.s, t))
    cell = local_constancy_cell(sys, t)
    # far corner just inside the cell, and its midpoint
    for frac in (Fraction(1, 2), Fraction(99, 100)):
        p = tuple(lo + frac * side for lo, side in zip(cell.anchor, cell.sides))
        if not sys.in_source(p):
            continue
        res = psi_continuous(sys, p)
        assert tuple(sj - pj for sj, pj in zip(res.s, p)) == shift
        assert res.k == ref.k


@given(integer_systems(m_max=3, factor_max=4, volume_max=3000))
def test_formula_is_brute_force_max(sys):
    best, where = brute_force_max(sys)
    assert best == max_steps_formula(sys)
    assert tuple(x - 1 for x in sys.a) in where


@given(integer_systems(m_max=4))
def test_formula_invariant_under_rotation(sys):
    f = max_steps_formula(sys)
    for r in range(1, sys.m):
        rot = CycleSystem(sys.i[r:] + sys.i[:r], sys.a[r:] + sys.a[:r], sys.b[r:] + sys.b[:r])
        assert max_steps_formula(rot) == f


def test_point_outside_box_refused():
    with pytest.raises(DomainError):
        psi_continuous(CYCLE_345, (4, 0, 0))
    with pytest.raises(DomainError):
        psi_inverse(CYCLE_345, (5, 0, 0))


def test_rational_sides_scale_to_integers():
    sys = CycleSystem.from_sides((Fraction(7, 3), Fraction(5, 2)), (Fraction(5, 2), Fraction(7, 3)))
    lam, scaled = sys.scaled()
    assert lam == 6 and scaled.a == (14, 15)
    with pytest.raises(DomainError):
        max_steps_formula(sys)


def test_budget_guard():
    with pytest.raises(DomainError):
        psi_continuous(CYCLE_345, (3, 4, 2), budget=3)
    assert not issubclass(DomainError, InvariantError)
