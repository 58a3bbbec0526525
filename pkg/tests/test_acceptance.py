"""End-to-end acceptance checks, one test per criterion.

Each test records a ``criterion N: PASS/FAIL ...`` line that the conftest hook
prints in a summary section at the end of the run.
"""

import math
import random
import time
from collections import Counter
from fractions import Fraction

import pytest
from _systems import factor_system, small_family
from conftest import ACCEPTANCE_LINES

from ohara.cycles import (
    ORDERS,
    CycleSystem,
    local_constancy_cell,
    max_steps_formula,
    psi_continuous,
    psi_inverse,
    translation,
)
from ohara.decomposer import check_against_map, check_decomposition, decompose, euclid_decompose
from ohara.engine import STRATEGIES, Strategy, glaisher_oracle, psi_naive, psi_speedy, ternary_oracle
from ohara.equivalence import BUILTINS, VERIFIED_BUILTINS, distinct_odd, example_cycle_345, load_spec, mod3_rule
from ohara.fastpath import fast_run, solve_cycle_fast
from ohara.kernels import box_check
from ohara.partitions import Partition, enumerate_partitions
from ohara.verify import verify_spec
from ohara.worstcase import gen_distinct_odd_power, gen_path_loglog, gen_prime_cycle, gen_speedy_path, primes_up_to


def record(number: int, ok: bool, detail: str, elapsed: float, limit: float):
    within = elapsed < limit
    verdict = "PASS" if ok and within else "FAIL"
    line = f"criterion {number:>2}: {verdict}  {detail} ({elapsed:.2f}s, limit {limit:g}s)"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line
    assert within, line


# --------------------------------------------------------------------------
# 1-3: golden runs


def test_criterion_01_golden_cycle():
    start = time.perf_counter()
    spec = example_cycle_345()
    out, trace = psi_naive(spec, Partition.parse("3^3 4^4 5^2"))
    A35 = enumerate_partitions(35, spec.a, parts=(3, 4, 5))
    worst = max(psi_naive(spec, lam, record=False)[1].step_count for lam in A35)
    # every smaller size too: the whole box of 60 points
    below = [lam for n in range(35) for lam in enumerate_partitions(n, spec.a, parts=(3, 4, 5))]
    worst_below = max(psi_naive(spec, lam, record=False)[1].step_count for lam in below)
    ok = str(out) == "3^4 4^2 5^3" and trace.step_count == 9 and worst == 9 and worst_below <= 9
    record(1, ok, f"output {out}, {trace.step_count} steps, max L over A_35 = {worst}, "
           f"over the {len(below) + len(A35)} points of sizes <= 35 = {max(worst, worst_below)}",
           time.perf_counter() - start, 1)


def test_criterion_02_golden_mod3():
    start = time.perf_counter()
    spec = mod3_rule()
    lam = Partition.parse("1 2 8 10 14 20")
    out, trace = psi_naive(spec, lam)
    ok = str(out) == "1^2 7^2 9 15^2" and trace.step_count == 19 and ternary_oracle(lam) == out
    record(2, ok, f"output {out}, {trace.step_count} steps, ternary oracle agrees={ternary_oracle(lam) == out}",
           time.perf_counter() - start, 1)


def test_criterion_03_glaisher():
    start = time.perf_counter()
    spec = distinct_odd()
    bad, checked = [], 0
    for n in range(26):
        for lam in enumerate_partitions(n, spec.a):
            checked += 1
            if psi_naive(spec, lam, record=False)[0] != glaisher_oracle(lam):
                bad.append(str(lam))
    steps = {}
    for k in range(13):
        inst = gen_distinct_odd_power(k)
        steps[k] = psi_naive(inst.spec, inst.lam, record=False)[1].step_count
    powers_ok = all(steps[k] == 2**k - 1 for k in steps)
    record(3, not bad and powers_ok,
           f"{checked} distinct partitions match the binary form, L(2^k) = 2^k - 1 for k <= 12: {powers_ok}",
           time.perf_counter() - start, 30)


# --------------------------------------------------------------------------
# 4-6: the exhaustive small family, swept once


@pytest.fixture(scope="module")
def family_sweep():
    facts = {"systems": 0, "points": 0, "formula": [], "corner": [], "bijective": [], "conserved": [], "fast": []}
    box_time = fast_time = 0.0
    for sys in small_family():
        t0 = time.perf_counter()
        f = box_check(sys)
        formula = max_steps_formula(sys)
        t1 = time.perf_counter()
        facts["systems"] += 1
        facts["points"] += f["points"]
        if f["max_L"] != formula:
            facts["formula"].append(sys)
        if f["corner_L"] != formula:
            facts["corner"].append(sys)
        if not (f["inside"] and f["bijective"]):
            facts["bijective"].append(sys)
        if not f["conserved"]:
            facts["conserved"].append(sys)
        points = sys.source.integer_points()
        for t, s, k in zip(points, f["S"].tolist(), f["K"].tolist()):
            res = solve_cycle_fast(sys, t, check=False)
            if list(res.s) != s or list(res.k) != k:
                facts["fast"].append((sys, t))
                break
        box_time += t1 - t0
        fast_time += time.perf_counter() - t1
    facts["box_time"], facts["fast_time"] = box_time, fast_time
    return facts


def test_criterion_04_formula_exactness(family_sweep):
    f = family_sweep
    ok = not f["formula"] and not f["corner"]
    record(4, ok,
           f"{f['systems']} systems, {f['points']} points: max L = formula in all but {len(f['formula'])}, "
           f"attained at the far corner in all but {len(f['corner'])}",
           f["box_time"], 300)


def test_criterion_05_bijection_and_conservation(family_sweep):
    f = family_sweep
    ok = not f["bijective"] and not f["conserved"]
    record(5, ok,
           f"{f['systems']} systems: non-bijective {len(f['bijective'])}, functional not conserved {len(f['conserved'])}",
           f["box_time"], 300)


def _random_point(rng, sys):
    return tuple(rng.randrange(aj) for aj in sys.a)


def test_criterion_06_fast_path(family_sweep):
    start = time.perf_counter()
    failures = [f"family {sys} at {t}" for sys, t in family_sweep["fast"]]

    rng = random.Random(6)
    for _ in range(500):
        sys = factor_system(rng, rng.choice((2, 3)))
        for t in (tuple(aj - 1 for aj in sys.a), _random_point(rng, sys), _random_point(rng, sys)):
            want = psi_continuous(sys, t)
            got = solve_cycle_fast(sys, t)
            if (got.s, got.k, got.L) != (want.s, want.k, want.L):
                failures.append(f"random {sys} at {t}")

    checked = 0
    for name in sorted(BUILTINS):
        spec = BUILTINS[name](horizon=25)
        for n in range(26):
            for lam in enumerate_partitions(n, spec.a):
                out, trace = psi_naive(spec, lam, record=False)
                checked += 1
                if fast_run(spec, lam) != (out, trace.step_count):
                    failures.append(f"{name}: {lam}")

    ps = primes_up_to(200)
    slowest, count = 0.0, 0
    for triple in zip(ps, ps[1:], ps[2:]):
        inst = gen_prime_cycle(triple)
        best = math.inf
        for _ in range(3):
            t0 = time.perf_counter()
            got = fast_run(inst.spec, inst.lam)
            best = min(best, time.perf_counter() - t0)
        slowest = max(slowest, best)
        count += 1
        naive = psi_naive(inst.spec, inst.lam, record=False)[1].step_count
        if naive != inst.predicted or got[1] != naive:
            failures.append(f"prime cycle {triple}: naive {naive}, fast {got[1]}, formula {inst.predicted}")
    fast_ok = slowest < 0.010
    elapsed = family_sweep["fast_time"] + time.perf_counter() - start
    record(6, not failures and fast_ok,
           f"{len(failures)} mismatches over family, 500 random systems and {checked} partitions; "
           f"{count} prime cycles, slowest fast run {slowest * 1000:.2f} ms",
           elapsed, 300)


# --------------------------------------------------------------------------
# 7-8: decompositions


def test_criterion_07_cycle345_decomposition():
    start = time.perf_counter()
    sys = CycleSystem((3, 4, 5), (4, 5, 3), (5, 3, 4))
    d = decompose(sys)
    check_decomposition(d)
    check_against_map(d, sys)
    in_plane = all(3 * x + 4 * y + 5 * z == 0 for x, y, z in (p.translation for p in d.pieces))
    record(7, in_plane, f"{len(d)} pieces tile both boxes and match the map on all 60 points",
           time.perf_counter() - start, 1)


def _quotient_sum(x: Fraction) -> int:
    p, q, total = x.numerator, x.denominator, 0
    while q:
        total += p // q
        p, q = q, p % q
    return total


def test_criterion_08_euclid():
    start = time.perf_counter()
    check_decomposition(euclid_decompose(12, 8))
    sys = CycleSystem((1, 4), (12, 8), (32, 3))
    d = decompose(sys)
    check_decomposition(d)
    check_against_map(d, sys)
    rng = random.Random(8)
    bad = []
    for _ in range(20):
        a = Fraction(rng.randint(1, 60), rng.randint(1, 12))
        b = Fraction(rng.randint(1, 60), rng.randint(1, 12))
        e = euclid_decompose(a, b)
        check_decomposition(e)
        if len(e) != _quotient_sum(b / a):
            bad.append((a, b, len(e)))
    record(8, not bad, f"R(12,8) and R(12,8) -> R(32,3) valid; 20 random pairs, {len(bad)} piece-count mismatches",
           time.perf_counter() - start, 1)


# --------------------------------------------------------------------------
# 9-10: families and exhaustive verification


def _loglog_oracle(k: int) -> tuple:
    """One batch at a time along 1 -> 2 -> 3 -> 6 -> 5 -> 10 -> ... starting from 1^N."""

    def succ(p):
        if p == 1:
            return 2
        if p % 4 == 2:
            return p // 2 + 2
        return 2 * p

    def b(p):
        return p // 2 + 2 if p % 4 == 2 else 2

    def a(p):
        return 1 if p % 4 == 2 else 2 * p - 4

    N = 2**k * math.prod(range(1, 2 * k, 2))
    mult = Counter({1: N})
    steps = 0
    while True:
        ready = [p for p in mult if mult[p] >= b(p)]
        if not ready:
            return N, steps
        p = ready[0]
        mult[p] -= b(p)
        mult[succ(p)] += a(succ(p))
        steps += 1


def test_criterion_09_worst_case_families():
    start = time.perf_counter()
    notes = []
    for k in range(1, 5):
        N, steps = _loglog_oracle(k)
        inst = gen_path_loglog(k)
        got = psi_naive(inst.spec, inst.lam, record=False)[1].step_count
        if inst.lam.size != N or got != steps or inst.predicted != steps:
            notes.append(f"path k={k}: oracle {steps}, engine {got}, predicted {inst.predicted}")
    sys = CycleSystem((3, 5, 7), (5, 7, 3), (7, 3, 5))
    prime = box_check(sys)["max_L"]
    if prime != max_steps_formula(sys) or prime != 12:
        notes.append(f"prime cycle max {prime}")
    speedy = gen_speedy_path(5)
    firings = psi_speedy(speedy.spec, speedy.lam, record=False)[1].firings
    if firings != 8:
        notes.append(f"speedy firings {firings}")
    record(9, not notes,
           f"path counts {[_loglog_oracle(k)[1] for k in range(1, 5)]}, prime (3,5,7) max {prime}, speedy firings {firings}"
           + ("; " + "; ".join(notes) if notes else ""),
           time.perf_counter() - start, 120)


def test_criterion_10_exhaustive_verification():
    start = time.perf_counter()
    failing = []
    names = sorted(BUILTINS)
    for name in names:
        for rep in verify_spec(load_spec(f"builtin:{name}"), 20):
            if not rep.ok:
                failing.append(f"{name} {rep.line()}")
    record(10, not failing, f"{len(names)} builtin specs, n <= 20: {len(failing)} failing sizes",
           time.perf_counter() - start, 120)


# --------------------------------------------------------------------------
# 11: sampled properties of the cycle map


def _small_system(rng):
    return factor_system(rng, rng.randint(1, 4), cap=40, factor_max=4)


def _rational_below(rng, bound, den):
    """Uniform point of ``[0, bound)`` on the grid ``1/den``."""
    top = math.ceil(bound * den)
    while True:
        x = Fraction(rng.randrange(top), den)
        if x < bound:
            return x


def test_criterion_11_properties():
    start = time.perf_counter()
    rng = random.Random(11)
    fails = Counter()

    # firing order and batching do not change the output or the counts
    for _ in range(1000):
        sys = _small_system(rng)
        den = rng.choice((1, 2, 3, 7))
        t = tuple(_rational_below(rng, aj, den) for aj in sys.a)
        base = psi_continuous(sys, t)
        for order in ORDERS:
            for batch in (True, False):
                r = psi_continuous(sys, t, order=order, batch=batch, seed=rng.randrange(1000))
                if (r.s, r.k) != (base.s, base.k):
                    fails["order"] += 1
    for name in VERIFIED_BUILTINS:
        spec = BUILTINS[name](horizon=30)
        parts = enumerate_partitions(rng.randint(5, 20), spec.a)
        for lam in rng.sample(parts, min(20, len(parts))):
            out, trace = psi_naive(spec, lam, record=False)
            for kind in STRATEGIES:
                o, tr = psi_naive(spec, lam, Strategy(kind, rng.randrange(1000)), record=False)
                if o != out or tr.step_count != trace.step_count:
                    fails["strategy"] += 1

    # L(t + t') >= L(t) + L(t') whenever all three points lie in the source box
    for _ in range(10_000):
        sys = _small_system(rng)
        den = rng.choice((1, 2, 5))
        total = tuple(_rational_below(rng, aj, den) for aj in sys.a)
        t = tuple(Fraction(rng.randint(0, int(x * den)), den) for x in total)
        rest = tuple(x - y for x, y in zip(total, t))
        L = psi_continuous(sys, total).L
        if L < psi_continuous(sys, t).L + psi_continuous(sys, rest).L:
            fails["superadditive"] += 1

    # translation and step count are constant on [t, t + ε) inside the source box
    for _ in range(1000):
        sys = _small_system(rng)
        t = tuple(_rational_below(rng, aj, rng.choice((1, 3))) for aj in sys.a)
        base = psi_continuous(sys, t)
        cell = local_constancy_cell(sys, t)
        for _ in range(5):
            u = tuple(Fraction(rng.randrange(16), 16) for _ in sys.a)
            t2 = tuple(x + uj * e for x, uj, e in zip(t, u, cell.sides))
            if not sys.in_source(t2):
                continue
            r = psi_continuous(sys, t2)
            if translation(t2, r) != translation(t, base) or r.L != base.L:
                fails["local"] += 1

    # the inverse map undoes the forward map
    for _ in range(1000):
        sys = _small_system(rng)
        t = tuple(_rational_below(rng, aj, rng.choice((1, 4))) for aj in sys.a)
        if psi_inverse(sys, psi_continuous(sys, t).s) != t:
            fails["inverse"] += 1
        s = tuple(_rational_below(rng, bj, 2) for bj in sys.b)
        if psi_continuous(sys, psi_inverse(sys, s)).s != s:
            fails["inverse"] += 1

    detail = ", ".join(f"{key} failures {fails[key]}" for key in ("order", "strategy", "superadditive", "local", "inverse"))
    record(11, not fails, detail, time.perf_counter() - start, 600)

