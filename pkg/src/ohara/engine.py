"""Step-by-step partition rewriting: the naive and the speedy firing loops.

One firing at part ``j`` removes ``b_j`` copies of ``j`` and adds ``a_i``
copies of ``i = φ^{-1}(j)``.  A part fires while ``m_j >= b_j``; parts with
``b_j = ∞`` never fire.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from ohara.equivalence import CYCLE, SequenceSpec, check_in_A, decompose_support
from ohara.errors import DomainError, InvariantError, StepBudgetExceeded
from ohara.partitions import INF, Partition

STRATEGIES = ("min_part", "max_part", "fifo", "random")
BUDGET_SLACK = 16


@dataclass(frozen=True)
class Strategy:
    """Which eligible part fires next."""

    kind: str = "min_part"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise DomainError(f"unknown strategy {self.kind!r}; expected one of {', '.join(STRATEGIES)}")

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        """``min_part``, ``max_part``, ``fifo``, ``random`` or ``random:<seed>``."""
        name, _, seed = text.partition(":")
        if seed and name != "random":
            raise DomainError(f"only the random strategy takes a seed, got {text!r}")
        try:
            return cls(name, int(seed) if seed else 0)
        except ValueError as exc:
            raise DomainError(f"bad strategy seed in {text!r}") from exc

    def __str__(self):
        return f"random:{self.seed}" if self.kind == "random" else self.kind


@dataclass
class Trace:
    """Record of one run; ``step_count`` is always exact even when steps are not kept."""

    initial: Partition
    final: Optional[Partition] = None
    steps: list = field(default_factory=list)
    step_count: int = 0
    firings: int = 0
    recorded: bool = True

    def replay(self, spec: SequenceSpec) -> Partition:
        if not self.recorded:
            raise DomainError("trace was streamed; no steps to replay")
        mult = self.initial.as_dict()
        for part, reps in self.steps:
            b = spec.b(part)
            if b is INF or mult.get(part, 0) < reps * b:
                raise InvariantError(f"replay: part {part} cannot fire {reps} times")
            mult[part] -= reps * b
            i = spec.phi_inv(part)
            mult[i] = mult.get(i, 0) + reps * spec.a(i)
        return Partition(mult)

    def to_json(self) -> dict:
        out = {
            "initial": self.initial.to_json(),
            "final": None if self.final is None else self.final.to_json(),
            "steps": [{"part": p, "reps": r} for p, r in self.steps],
            "step_count": str(self.step_count),
            "firings": str(self.firings),
        }
        if not self.recorded:
            out["recorded"] = False
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Trace":
        try:
            return cls(
                Partition.from_json(obj["initial"]),
                None if obj.get("final") is None else Partition.from_json(obj["final"]),
                [(int(s["part"]), int(s["reps"])) for s in obj.get("steps", [])],
                int(obj["step_count"]),
                int(obj.get("firings", obj["step_count"])),
                bool(obj.get("recorded", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad trace JSON: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# schedulers


class _Heap:
    def __init__(self, sign: int):
        self.sign = sign
        self.heap: list = []
        self.queued: set = set()

    def push(self, part):
        if part not in self.queued:
            self.queued.add(part)
            heapq.heappush(self.heap, self.sign * part)

    def pop(self):
        if not self.heap:
            return None
        part = self.sign * heapq.heappop(self.heap)
        self.queued.discard(part)
        return part


class _Fifo:
    def __init__(self):
        self.queue: deque = deque()
        self.queued: set = set()

    def push(self, part):
        if part not in self.queued:
            self.queued.add(part)
            self.queue.append(part)

    def pop(self):
        if not self.queue:
            return None
        part = self.queue.popleft()
        self.queued.discard(part)
        return part


class _Random:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.pool: set = set()

    def push(self, part):
        self.pool.add(part)

    def pop(self):
        if not self.pool:
            return None
        part = self.rng.choice(sorted(self.pool))
        self.pool.discard(part)
        return part


def _scheduler(strategy: Strategy):
    if strategy.kind == "min_part":
        return _Heap(1)
    if strategy.kind == "max_part":
        return _Heap(-1)
    if strategy.kind == "fifo":
        return _Fifo()
    return _Random(strategy.seed)


# --------------------------------------------------------------------------
# budgets


def default_budget(spec: SequenceSpec, lam: Partition) -> int:
    """Twice the exact cycle maximum on cycles, ``n(ln n + 1)`` on path pieces."""
    from ohara.cycles import cycle_system_from_component, max_steps_formula

    total = BUDGET_SLACK
    for comp, piece in decompose_support(spec, lam):
        if comp is None:
            continue
        if comp.kind == CYCLE:
            total += 2 * max_steps_formula(cycle_system_from_component(spec, comp)) + BUDGET_SLACK
        else:
            n = piece.size
            total += n * (math.ceil(math.log(max(n, 1))) + 1) + BUDGET_SLACK
    return total


# --------------------------------------------------------------------------
# the firing loop


def _run(spec, lam, strategy, speedy, budget, record, on_step):
    check_in_A(spec, lam)
    strategy = strategy or Strategy()
    if budget is None:
        budget = default_budget(spec, lam)
    mult = lam.as_dict()
    b_of: dict = {}
    dest: dict = {}

    def b(part):
        v = b_of.get(part)
        if v is None:
            v = b_of[part] = spec.b(part)
        return v

    def target(part):
        v = dest.get(part)
        if v is None:
            i = spec.phi_inv(part)
            if i is None:
                raise InvariantError(f"part {part} is in supp(b) but has no preimage under phi")
            v = dest[part] = (i, spec.a(i))
        return v

    sched = _scheduler(strategy)
    for p, m in lam.items():
        bp = b(p)
        if bp is not INF and m >= bp:
            sched.push(p)

    trace = Trace(lam, recorded=record)
    steps = trace.steps
    count = firings = 0
    while True:
        j = sched.pop()
        if j is None:
            break
        bj = b(j)
        have = mult.get(j, 0)
        if have < bj:
            continue
        reps = have // bj if speedy else 1
        if count + reps > budget:
            trace.step_count, trace.firings = count, firings
            trace.final = Partition(mult)
            raise StepBudgetExceeded(
                f"step budget {budget} exhausted after {count} steps; raise --budget if this run is expected to be long",
                trace,
            )
        i, ai = target(j)
        mult[j] = have - reps * bj
        mult[i] = mult.get(i, 0) + reps * ai
        count += reps
        firings += 1
        if record:
            steps.append((j, reps))
        if on_step is not None:
            on_step(j, reps)
        if mult[j] >= bj:
            sched.push(j)
        bi = b(i)
        if bi is not INF and mult[i] >= bi:
            sched.push(i)

    final = Partition(mult)
    if final.size != lam.size:
        raise InvariantError("size not conserved")
    trace.final, trace.step_count, trace.firings = final, count, firings
    return final, trace


def psi_naive(
    spec: SequenceSpec,
    lam: Partition,
    strategy: Strategy | None = None,
    *,
    budget: int | None = None,
    record: bool = True,
    on_step: Callable | None = None,
):
    """Fire one batch of ``b_j`` copies at a time until the partition lies in ``B``."""
    return _run(spec, lam, strategy, False, budget, record, on_step)


def psi_speedy(
    spec: SequenceSpec,
    lam: Partition,
    strategy: Strategy | None = None,
    *,
    budget: int | None = None,
    record: bool = True,
    on_step: Callable | None = None,
):
    """Fire ``r = ⌊m_j / b_j⌋`` batches at once; ``trace.firings`` counts these events."""
    return _run(spec, lam, strategy, True, budget, record, on_step)


def psi(spec, lam, strategy=None, **kw) -> Partition:
    return psi_naive(spec, lam, strategy, **kw)[0]


# --------------------------------------------------------------------------
# closed-form oracles


def _odd_part(p: int):
    j = 0
    while p % 2 == 0:
        p //= 2
        j += 1
    return p, j


def glaisher_oracle(lam: Partition, direction: str = "distinct_to_odd") -> Partition:
    """Binary-expansion form of the distinct/odd bijection."""
    if direction in ("distinct_to_odd", "distinct->odd"):
        out: dict = {}
        for p, m in lam.items():
            if m > 1:
                raise DomainError(f"not a partition into distinct parts: {p} repeated {m} times")
            r, j = _odd_part(p)
            out[r] = out.get(r, 0) + (1 << j)
        return Partition(out)
    if direction in ("odd_to_distinct", "odd->distinct"):
        parts: dict = {}
        for p, m in lam.items():
            if p % 2 == 0:
                raise DomainError(f"not a partition into odd parts: contains {p}")
            j = 0
            while m:
                if m & 1:
                    parts[p << j] = 1
                m >>= 1
                j += 1
        return Partition(parts)
    raise DomainError(f"unknown direction {direction!r}")


def ternary_oracle(lam: Partition) -> Partition:
    """Closed form of the mod-3 example via ternary digits.

    For ``r`` odd and prime to 3, ``l = Σ_i 2^i m_{r 2^i}`` and part ``3^k r``
    appears as many times as the ``k``-th ternary digit of ``l``.
    """
    for p, m in lam.items():
        if p % 3 == 0 or m > 1:
            raise DomainError(f"not in the source set: part {p} with multiplicity {m}")
    totals: dict = {}
    for p, m in lam.items():
        r, i = _odd_part(p)
        totals[r] = totals.get(r, 0) + (m << i)
    out: dict = {}
    for r, l in totals.items():
        part = r
        while l:
            l, digit = divmod(l, 3)
            if digit:
                out[part] = digit
            part *= 3
    return Partition(out)
