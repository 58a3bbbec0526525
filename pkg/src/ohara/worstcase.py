"""Lower-bound instance families and the step-count measurement harness."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Iterable, Optional

import numpy as np

from ohara.cycles import CycleSystem, max_steps_formula
from ohara.engine import psi_naive, psi_speedy
from ohara.equivalence import SequenceSpec, TableEntry, distinct_odd, validate
from ohara.errors import DomainError, OharaError
from ohara.fastpath import fast_run
from ohara.partitions import INF, Partition

FAMILIES = ("distinct_odd_power", "path_loglog", "prime_cycle", "nested_cycles", "speedy_path", "speedy_cycle")
DEFAULT_SIZE_CAP = 10**7
DEFAULT_BENCH_BUDGET = 10**7


@dataclass
class FamilyInstance:
    family: str
    k: int
    spec: SequenceSpec
    lam: Partition
    predicted: Optional[int] = None
    predicted_kind: str = "steps"
    lower_bound: Optional[Fraction] = None
    cycle_length: Optional[int] = None
    params: tuple = ()

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def label(self) -> str:
        return f"{self.family}({','.join(map(str, self.params)) if self.params else self.k})"


def primes_up_to(limit: int) -> list:
    """Sieve of Eratosthenes."""
    if limit < 2:
        return []
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


def first_primes(count: int) -> list:
    limit = 16
    while True:
        ps = primes_up_to(limit)
        if len(ps) >= count:
            return ps[:count]
        limit *= 2


def _check_size(n: int, cap: int):
    if n > cap:
        raise DomainError(f"instance size {n} exceeds the size cap {cap}")


def _cycle_entries(parts: list, a: list, b: list) -> list:
    m = len(parts)
    return [TableEntry(parts[j], a[j], b[j], parts[(j + 1) % m]) for j in range(m)]


# --------------------------------------------------------------------------
# families


def gen_distinct_odd_power(k: int) -> FamilyInstance:
    """``λ = (2^k)^1`` under the distinct/odd spec; it takes exactly ``2^k − 1`` steps."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    n = 2**k
    return FamilyInstance("distinct_odd_power", k, distinct_odd(max(n, 2)), Partition({n: 1}), n - 1)


def path_loglog_run(k: int) -> tuple:
    """Stage-by-stage count along ``1 -> 2 -> 3 -> 6 -> 5 -> 10 -> ...`` from ``1^N``.

    Returns ``(N, steps)``; all mass moves down the path one vertex at a time.
    """
    N = 2**k * math.prod(range(1, 2 * k, 2))
    steps, mult, j = 0, N, 1
    while True:
        # odd vertex 2j-1: two copies become one copy of 4j-2
        fires = mult // 2
        steps += fires
        if not fires:
            return N, steps
        # vertex 4j-2: 2j+1 copies become 4j-2 copies of 2j+1
        fires = fires // (2 * j + 1)
        steps += fires
        if not fires:
            return N, steps
        mult = fires * (4 * j - 2)
        j += 1


def gen_path_loglog(k: int, *, cap: int = DEFAULT_SIZE_CAP) -> FamilyInstance:
    if k < 1:
        raise DomainError("path_loglog needs k >= 1")
    N, steps = path_loglog_run(k)
    _check_size(N, cap)
    entries = []
    top = 2 * N + 8
    for o in range(1, top + 1, 2):
        j = (o + 1) // 2
        if j == 1:
            entries.append(TableEntry(1, INF, 2, None))
        else:
            entries.append(TableEntry(o, 4 * j - 6, 2, 4 * j - 6))
    for e in range(2, top + 1, 4):
        j = (e + 2) // 4
        entries.append(TableEntry(e, 1, 2 * j + 1, 2 * j - 1))
    spec = SequenceSpec("finite_table", entries, max(N, 2), fill=INF, name=f"path_loglog{k}")
    bound = N * sum(Fraction(1, 2 * (2 * j - 1)) for j in range(1, k + 1))
    return FamilyInstance("path_loglog", k, spec, Partition({1: N}), steps, lower_bound=bound)


def gen_prime_cycle(primes: Iterable[int], *, cap: int = DEFAULT_SIZE_CAP) -> FamilyInstance:
    """Cycle ``φ(p_j) = p_{j+1}`` with ``a_j = p_{j+1}``, ``b_j = p_{j−1}``, at its extremal partition."""
    ps = [int(p) for p in primes]
    if not ps or any(p < 1 for p in ps):
        raise DomainError("prime_cycle needs positive entries")
    if len(set(ps)) != len(ps):
        raise DomainError(f"prime_cycle entries must be distinct, got {ps}")
    m = len(ps)
    a = [ps[(j + 1) % m] for j in range(m)]
    b = [ps[j - 1] for j in range(m)]
    lam = Partition({p: aj - 1 for p, aj in zip(ps, a)})
    _check_size(lam.size, cap)
    spec = SequenceSpec("finite_table", _cycle_entries(ps, a, b), max(lam.size, max(ps)), fill=INF, name="prime_cycle")
    predicted = max_steps_formula(CycleSystem(ps, a, b))
    return FamilyInstance("prime_cycle", m, spec, lam, predicted, cycle_length=m, params=tuple(ps))


def nested_block(k: int) -> list:
    """Primes ``p_{(k−1)^{k−1}+1}, ..., p_{k^k}`` forming the ``k``-th cycle."""
    lo, hi = (k - 1) ** (k - 1), k**k
    return first_primes(hi)[lo:hi]


def gen_nested_cycles(k: int, *, cap: int = DEFAULT_SIZE_CAP) -> FamilyInstance:
    """Prime-indexed spec with cycles of lengths ``1`` and ``j^j − (j−1)^{j−1}`` for ``j <= k``."""
    if k < 2:
        raise DomainError("nested_cycles needs k >= 2 (k = 1 gives a degenerate block)")
    ps = first_primes(k**k)
    entries = [TableEntry(ps[0], ps[0], ps[0], ps[0])]
    for kk in range(2, k + 1):
        block = nested_block(kk)
        m = len(block)
        entries += _cycle_entries(block, [block[(j + 1) % m] for j in range(m)], [block[j - 1] for j in range(m)])
    block = nested_block(k)
    m = len(block)
    a = [block[(j + 1) % m] for j in range(m)]
    lam = Partition({p: aj - 1 for p, aj in zip(block, a)})
    _check_size(lam.size, cap)
    spec = SequenceSpec("finite_table", entries, max(lam.size, ps[-1]), fill=INF, name=f"nested{k}")
    predicted = max_steps_formula(CycleSystem(block, a, [block[j - 1] for j in range(m)]))
    return FamilyInstance("nested_cycles", k, spec, lam, predicted, cycle_length=m)


def gen_speedy_path(k: int, *, cap: int = DEFAULT_SIZE_CAP) -> FamilyInstance:
    """Path ``... -> 7 -> 14 -> 5 -> 10 -> 3 -> 6 -> 1`` at ``λ = (2k−1)^{4k−2}``.

    The speedy loop takes ``2k − 2`` firings here.
    """
    if k < 5:
        raise DomainError("the speedy path example needs k >= 5")
    n = 2 * (2 * k - 1) ** 2
    _check_size(n, cap)
    top = 2 * n + 8
    entries = []
    for o in range(1, top + 1, 2):
        j = (o + 1) // 2
        entries.append(TableEntry(o, 4 * j + 2, INF if j == 1 else 2, 4 * j + 2))
    for e in range(6, top + 1, 4):
        j = (e - 2) // 4
        entries.append(TableEntry(e, 1, 2 * j - 1, 2 * j + 1))
    spec = SequenceSpec("finite_table", entries, n, fill=INF, name=f"speedy_path{k}")
    lam = Partition({2 * k - 1: 4 * k - 2})
    return FamilyInstance("speedy_path", k, spec, lam, 2 * k - 2, predicted_kind="speedy_firings")


def gen_speedy_cycle(k: int, m: int = 3, *, cap: int = DEFAULT_SIZE_CAP) -> FamilyInstance:
    """Cycle on ``i_j = km + j`` with primes from ``(2^k, 2^{k+1}]``; extremal partition."""
    if m < 2:
        raise DomainError("speedy_cycle needs m >= 2")
    D = 2**k
    ps = [p for p in primes_up_to(2 * D) if p > D][:m]
    if len(ps) < m:
        raise DomainError(f"fewer than {m} primes in ({D}, {2 * D}]; increase k")
    parts = [k * m + j for j in range(1, m + 1)]
    a = [parts[(j + 1) % m] * ps[j] for j in range(m)]
    b = [parts[j - 1] * ps[j - 1] for j in range(m)]
    lam = Partition({p: aj - 1 for p, aj in zip(parts, a)})
    _check_size(lam.size, cap)
    spec = SequenceSpec("finite_table", _cycle_entries(parts, a, b), max(lam.size, parts[-1]), fill=INF, name=f"speedy_cycle{k}")
    predicted = max_steps_formula(CycleSystem(parts, a, b))
    return FamilyInstance("speedy_cycle", k, spec, lam, predicted, cycle_length=m, params=(k, m))


def generate(family: str, params: list) -> list:
    """Instances of ``family``; ``params`` are k values, or primes for ``prime_cycle``."""
    if family == "prime_cycle":
        return [gen_prime_cycle(params)]
    makers = {
        "distinct_odd_power": gen_distinct_odd_power,
        "path_loglog": gen_path_loglog,
        "nested_cycles": gen_nested_cycles,
        "speedy_path": gen_speedy_path,
        "speedy_cycle": gen_speedy_cycle,
    }
    if family not in makers:
        raise DomainError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    return [makers[family](int(k)) for k in params]


# --------------------------------------------------------------------------
# bench

ENGINES = ("naive", "speedy", "fast")


def _ratio(x, y):
    return None if x is None or not y else float(x) / float(y)


def bench_instance(inst: FamilyInstance, engines: Iterable[str], *, budget: int = DEFAULT_BENCH_BUDGET, m_max: int = 64) -> dict:
    engines = list(engines)
    for e in engines:
        if e not in ENGINES:
            raise DomainError(f"unknown engine {e!r}; expected some of {', '.join(ENGINES)}")
    row: dict = {
        "family": inst.family,
        "k": inst.k,
        "label": inst.label,
        "n": inst.n,
        "predicted": inst.predicted,
        "predicted_kind": inst.predicted_kind,
        "lower_bound": None if inst.lower_bound is None else str(inst.lower_bound),
        "valid_spec": validate(inst.spec).ok,
        "errors": {},
    }
    outputs = {}
    if "naive" in engines:
        try:
            t0 = time.perf_counter()
            out, tr = psi_naive(inst.spec, inst.lam, budget=budget, record=False)
            row["naive_ms"] = 1e3 * (time.perf_counter() - t0)
            row["L_naive"] = tr.step_count
            outputs["naive"] = out
        except OharaError as exc:
            row["errors"]["naive"] = str(exc)
    if "speedy" in engines:
        try:
            t0 = time.perf_counter()
            out, tr = psi_speedy(inst.spec, inst.lam, budget=max(budget, 10 * budget), record=False)
            row["speedy_ms"] = 1e3 * (time.perf_counter() - t0)
            row["speedy_firings"] = tr.firings
            row["L_speedy"] = tr.step_count
            outputs["speedy"] = out
        except OharaError as exc:
            row["errors"]["speedy"] = str(exc)
    if "fast" in engines:
        try:
            t0 = time.perf_counter()
            out, L = fast_run(inst.spec, inst.lam, m_max=m_max)
            row["fast_ms"] = 1e3 * (time.perf_counter() - t0)
            row["L_fast"] = L
            outputs["fast"] = out
        except OharaError as exc:
            row["errors"]["fast"] = str(exc)
    finals = {str(v) for v in outputs.values()}
    row["outputs_agree"] = len(finals) <= 1
    L = row.get("L_naive", row.get("L_fast"))
    n = inst.n
    row["L"] = L
    row["L_over_n"] = _ratio(L, n)
    row["L_over_nlogn"] = _ratio(L, n * math.log(n)) if n > 1 else None
    m = inst.cycle_length
    row["L_over_n_pow_m1"] = _ratio(L, n ** (m - 1)) if m and m > 1 else None
    if inst.predicted is not None:
        got = row.get("speedy_firings") if inst.predicted_kind == "speedy_firings" else L
        row["matches_prediction"] = None if got is None else got == inst.predicted
    return row


def _trend(rows: list) -> dict:
    """Least-squares slope of ``log L`` against ``log n`` per family."""
    out = {}
    fams: dict = {}
    for r in rows:
        if r.get("L") and r["n"] > 1:
            fams.setdefault(r["family"], []).append((math.log(r["n"]), math.log(r["L"])))
    for fam, pts in fams.items():
        if len(pts) >= 2 and len({x for x, _ in pts}) >= 2:
            xs, ys = zip(*pts)
            slope, intercept = np.polyfit(xs, ys, 1)
            out[fam] = {"loglog_slope": float(slope), "points": len(pts)}
    return out


def bench(instances: Iterable[FamilyInstance], engines: Iterable[str] = ENGINES, *, jobs: int = 1, **kw) -> dict:
    """Run every instance; ``jobs > 1`` uses a process pool, rows come back in a fixed order."""
    engines = list(engines)
    instances = list(instances)
    if jobs > 1 and len(instances) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(partial(bench_instance, engines=engines, **kw), instances))
    else:
        rows = [bench_instance(inst, engines, **kw) for inst in instances]
    rows.sort(key=lambda r: (r["family"], r["k"], r["label"]))
    return {"engines": engines, "rows": rows, "trends": _trend(rows)}


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, int) and abs(v) >= 10**12:
        return f"{v:.3e}"
    return str(v)


TEXT_COLUMNS = (
    ("instance", "label"),
    ("n", "n"),
    ("L_naive", "L_naive"),
    ("speedy", "speedy_firings"),
    ("L_fast", "L_fast"),
    ("fast_ms", "fast_ms"),
    ("predicted", "predicted"),
    ("L/n", "L_over_n"),
    ("L/nlogn", "L_over_nlogn"),
    ("L/n^(m-1)", "L_over_n_pow_m1"),
    ("ok", "matches_prediction"),
)


def report_text(report: dict, *, timings: bool = True) -> str:
    cols = [c for c in TEXT_COLUMNS if timings or not c[1].endswith("_ms")]
    table = [[h for h, _ in cols]]
    for r in report["rows"]:
        table.append([_fmt(r.get(key)) for _, key in cols])
    widths = [max(len(row[c]) for row in table) for c in range(len(cols))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in table]
    for r in report["rows"]:
        for engine, msg in sorted(r["errors"].items()):
            lines.append(f"{r['label']}: {engine} failed: {msg}")
    for fam, t in sorted(report["trends"].items()):
        lines.append(f"trend {fam}: log L ~ {t['loglog_slope']:.3f} log n over {t['points']} points")
    return "\n".join(lines) + "\n"


def report_json(report: dict, *, timings: bool = True) -> str:
    def clean(row):
        out = {k: v for k, v in row.items() if timings or not k.endswith("_ms")}
        for k, v in out.items():
            if isinstance(v, int) and not isinstance(v, bool) and abs(v) >= 2**53:
                out[k] = str(v)
        return out

    return json.dumps({**report, "rows": [clean(r) for r in report["rows"]]}, indent=2, sort_keys=True) + "\n"
