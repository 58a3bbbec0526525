"""Exhaustive self-checks of a spec: bijectivity, strategy independence, fast path."""

from __future__ import annotations

from dataclasses import dataclass, field

from ohara.engine import STRATEGIES, Strategy, psi_naive
from ohara.equivalence import SequenceSpec, in_B
from ohara.errors import DomainError
from ohara.fastpath import fast_run
from ohara.partitions import count_partitions, enumerate_partitions


@dataclass
class SizeReport:
    n: int
    size_A: int
    size_B: int
    counted_A: int
    counted_B: int
    bijective: bool = True
    strategies_agree: bool = True
    fast_agrees: bool = True
    max_steps: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.size_A == self.size_B == self.counted_A == self.counted_B
            and self.bijective
            and self.strategies_agree
            and self.fast_agrees
        )

    def line(self) -> str:
        verdict = "pass" if self.ok else "FAIL"
        return (
            f"n={self.n}: |A|={self.size_A} |B|={self.size_B} bijection={'yes' if self.bijective else 'no'} "
            f"strategies={'agree' if self.strategies_agree else 'differ'} "
            f"fast={'agrees' if self.fast_agrees else 'differs'} max_L={self.max_steps} {verdict}"
        )


def verify_size(
    spec: SequenceSpec, n: int, *, strategies: bool = True, fast: bool = True, seed: int = 0, cap: int = 60
) -> SizeReport:
    if n > spec.horizon:
        spec = spec.with_horizon(n)
    A = enumerate_partitions(n, spec.a, cap=cap)
    B = enumerate_partitions(n, spec.b, cap=cap)
    rep = SizeReport(n, len(A), len(B), count_partitions(n, spec.a), count_partitions(n, spec.b))
    others = [Strategy(k, seed) for k in STRATEGIES if k != "min_part"] if strategies else []
    images = set()
    for lam in A:
        out, trace = psi_naive(spec, lam, record=False)
        rep.max_steps = max(rep.max_steps, trace.step_count)
        if not in_B(spec, out) or out.size != n:
            rep.bijective = False
            rep.failures.append(f"{lam} -> {out} is not in B_{n}")
        images.add(out)
        for strat in others:
            other, tr = psi_naive(spec, lam, strat, record=False)
            if other != out or tr.step_count != trace.step_count:
                rep.strategies_agree = False
                rep.failures.append(f"{lam}: {strat} gives {other} in {tr.step_count} steps")
        if fast:
            try:
                got, L = fast_run(spec, lam)
            except DomainError as exc:
                rep.fast_agrees = False
                rep.failures.append(f"{lam}: fast path refused: {exc}")
                continue
            if got != out or L != trace.step_count:
                rep.fast_agrees = False
                rep.failures.append(f"{lam}: fast path gives {got} with L={L}")
    if len(images) != len(A) or images != set(B):
        rep.bijective = False
        rep.failures.append(f"images of A_{n} do not match B_{n}")
    return rep


def verify_spec(spec: SequenceSpec, n_max: int, **kw) -> list:
    """One :class:`SizeReport` per ``n`` in ``0..n_max``."""
    return [verify_size(spec, n, **kw) for n in range(n_max + 1)]
