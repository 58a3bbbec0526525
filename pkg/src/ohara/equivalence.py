"""Equivalent bound sequences ``(a, b, φ)`` and the components of their graph.

A :class:`SequenceSpec` is a built-in rule plus an optional finite table that
overrides the rule on listed parts.  Every query is answered only up to the
spec's ``horizon``; asking beyond it raises instead of truncating silently.

Graph convention: there is an edge ``i -> j`` iff ``φ(j) = i``.  Firing part
``v`` removes ``b_v`` copies of ``v`` and adds copies of its out-neighbour
``φ^{-1}(v)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from ohara.errors import DomainError
from ohara.partitions import INF, Bound, Partition, bound_to_json, parse_bound

RULES = ("identity", "multiply", "distinct_odd", "odd_distinct", "mod3_rule", "finite_table")
DEFAULT_HORIZON = 10_000

CYCLE = "cycle"
PATH = "path"
FORWARD_INFINITE = "forward_infinite"
BACKWARD_INFINITE = "backward_infinite"
BIINFINITE = "biinfinite"
KINDS = (CYCLE, PATH, FORWARD_INFINITE, BACKWARD_INFINITE, BIINFINITE)


@dataclass(frozen=True)
class TableEntry:
    i: int
    a: Bound
    b: Bound
    phi: Optional[int]

    def to_json(self) -> dict:
        return {"i": self.i, "a": bound_to_json(self.a), "b": bound_to_json(self.b), "phi": self.phi}

    @classmethod
    def from_json(cls, obj) -> "TableEntry":
        try:
            i = int(obj["i"])
            phi = obj.get("phi")
            return cls(i, parse_bound(obj.get("a")), parse_bound(obj.get("b")), None if phi is None else int(phi))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad table entry {obj!r}") from exc


class SequenceSpec:
    """Computable description of ``ā ∼_φ b̄`` answered on ``[1, horizon]``."""

    def __init__(
        self,
        rule: str = "finite_table",
        table: Iterable[TableEntry] = (),
        horizon: int = DEFAULT_HORIZON,
        *,
        d: int | None = None,
        fill: Bound = 1,
        name: str | None = None,
    ):
        if rule not in RULES:
            raise DomainError(f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")
        if horizon < 1:
            raise DomainError("horizon must be a positive integer")
        if rule == "distinct_odd":
            rule, d = "multiply", 2
        if rule == "multiply" and (d is None or d < 2):
            raise DomainError("multiply rule needs an integer factor d >= 2")
        self.rule = rule
        self.d = d
        self.fill = parse_bound(fill)
        self.horizon = int(horizon)
        self.name = name
        self.table = tuple(sorted(table, key=lambda e: e.i))
        self._tab = {e.i: e for e in self.table}
        if len(self._tab) != len(self.table):
            raise DomainError("duplicate part in spec table")
        self._tab_inv = {e.phi: e.i for e in self.table if e.phi is not None}

    # -- rule layer (no horizon check) -------------------------------------

    def _rule_a(self, i: int) -> Bound:
        if self.rule == "multiply":
            return self.d
        if self.rule == "odd_distinct":
            return 1 if i % 2 == 0 else INF
        if self.rule == "mod3_rule":
            return 1 if i % 3 == 0 else 2
        return self.fill

    def _rule_b(self, j: int) -> Bound:
        if self.rule == "multiply":
            return 1 if j % self.d == 0 else INF
        if self.rule == "odd_distinct":
            return 2
        if self.rule == "mod3_rule":
            return 3 if j % 2 else 1
        return self.fill

    def _rule_phi(self, i: int) -> Optional[int]:
        if self.rule == "multiply":
            return self.d * i
        if self.rule == "odd_distinct":
            return i // 2 if i % 2 == 0 else None
        if self.rule == "mod3_rule":
            if i % 6 == 0:
                return i
            if i % 3 == 0:
                return i // 3
            return 2 * i
        return i if self.fill is not INF else None

    def _rule_phi_inv(self, j: int) -> Optional[int]:
        if self.rule == "multiply":
            return j // self.d if j % self.d == 0 else None
        if self.rule == "odd_distinct":
            return 2 * j
        if self.rule == "mod3_rule":
            if j % 6 == 0:
                return j
            if j % 2 == 0:
                return j // 2 if (j // 2) % 3 else None
            return 3 * j
        return j if self.fill is not INF else None

    # -- resolved, unchecked ----------------------------------------------

    def a_raw(self, i: int) -> Bound:
        e = self._tab.get(i)
        return e.a if e is not None else self._rule_a(i)

    def b_raw(self, j: int) -> Bound:
        e = self._tab.get(j)
        return e.b if e is not None else self._rule_b(j)

    def phi_raw(self, i: int) -> Optional[int]:
        e = self._tab.get(i)
        if e is not None:
            return e.phi
        if self._rule_a(i) is INF:
            return None
        return self._rule_phi(i)

    def phi_inv_raw(self, j: int) -> Optional[int]:
        if j in self._tab_inv:
            return self._tab_inv[j]
        if self.b_raw(j) is INF:
            return None
        r = self._rule_phi_inv(j)
        if r is None or r in self._tab:
            return None
        return r

    # -- public, horizon-checked ------------------------------------------

    def _check(self, part: int):
        if part < 1:
            raise DomainError(f"parts are positive integers, got {part}")
        if part > self.horizon:
            raise DomainError(f"part {part} is beyond the spec horizon {self.horizon}")

    def a(self, i: int) -> Bound:
        self._check(i)
        return self.a_raw(i)

    def b(self, j: int) -> Bound:
        self._check(j)
        return self.b_raw(j)

    def phi(self, i: int) -> Optional[int]:
        self._check(i)
        return self.phi_raw(i)

    def phi_inv(self, j: int) -> Optional[int]:
        self._check(j)
        return self.phi_inv_raw(j)

    def in_supp_a(self, i: int) -> bool:
        return self.a(i) is not INF

    def in_supp_b(self, j: int) -> bool:
        return self.b(j) is not INF

    # -- misc --------------------------------------------------------------

    def with_horizon(self, horizon: int) -> "SequenceSpec":
        return SequenceSpec(self.rule, self.table, horizon, d=self.d, fill=self.fill, name=self.name)

    def reversed(self) -> "SequenceSpec":
        """The spec of the inverse bijection: swap ``ā``/``b̄`` and invert ``φ``.

        Only available for finite-table specs over an identity fill.
        """
        if self.rule != "finite_table":
            raise DomainError("reversal is implemented for finite_table specs only")
        entries = []
        for e in self.table:
            entries.append(TableEntry(e.i, e.b, e.a, self._tab_inv.get(e.i)))
        return SequenceSpec("finite_table", entries, self.horizon, fill=self.fill, name=None)

    def to_json(self) -> dict:
        out: dict = {"rule": self.rule, "horizon": self.horizon}
        if self.rule == "multiply":
            out["d"] = self.d
        if self.rule in ("identity", "finite_table"):
            out["fill"] = bound_to_json(self.fill)
        if self.table:
            out["table"] = [e.to_json() for e in self.table]
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, obj: dict, horizon: int | None = None) -> "SequenceSpec":
        if not isinstance(obj, dict) or "rule" not in obj:
            raise DomainError("spec JSON must be an object with a 'rule' field")
        table = [TableEntry.from_json(e) for e in obj.get("table", [])]
        return cls(
            obj["rule"],
            table,
            int(horizon if horizon is not None else obj.get("horizon", DEFAULT_HORIZON)),
            d=obj.get("d"),
            fill=obj.get("fill", 1),
            name=obj.get("name"),
        )

    def __repr__(self):
        label = self.name or self.rule
        return f"SequenceSpec({label!r}, horizon={self.horizon}, table={len(self.table)} entries)"


# --------------------------------------------------------------------------
# built-ins


def table_spec(entries, horizon=DEFAULT_HORIZON, *, fill: Bound = 1, name=None) -> SequenceSpec:
    """Finite-table spec from ``(i, a, b, phi)`` tuples over an identity fill."""
    return SequenceSpec(
        "finite_table",
        [TableEntry(int(i), parse_bound(a), parse_bound(b), phi) for i, a, b, phi in entries],
        horizon,
        fill=fill,
        name=name,
    )


def distinct_odd(horizon=DEFAULT_HORIZON) -> SequenceSpec:
    return SequenceSpec("multiply", d=2, horizon=horizon, name="distinct_odd")


def odd_distinct(horizon=DEFAULT_HORIZON) -> SequenceSpec:
    return SequenceSpec("odd_distinct", horizon=horizon, name="odd_distinct")


def mod3_rule(horizon=DEFAULT_HORIZON) -> SequenceSpec:
    return SequenceSpec("mod3_rule", horizon=horizon, name="mod3_rule")


def multiply(d: int, horizon=DEFAULT_HORIZON) -> SequenceSpec:
    return SequenceSpec("multiply", d=d, horizon=horizon, name=f"multiply{d}")


def example_cycle_345(horizon=DEFAULT_HORIZON) -> SequenceSpec:
    """The 3-cycle on parts 3, 4, 5 with ``a = (4, 5, 3)``, ``b = (5, 3, 4)``."""
    return table_spec([(3, 4, 5, 4), (4, 5, 3, 5), (5, 3, 4, 3)], horizon, name="cycle345")


def small_path(horizon=DEFAULT_HORIZON) -> SequenceSpec:
    """Finite path ``1 -> 2 -> 3 -> 4`` with ``a = (∞,1,2,3)``, ``b = (2,3,4,∞)``."""
    return table_spec([(1, INF, 2, None), (2, 1, 3, 1), (3, 2, 4, 2), (4, 3, INF, 3)], horizon, fill=INF, name="path4")


BUILTINS = {
    "distinct_odd": distinct_odd,
    "odd_distinct": odd_distinct,
    "mod3_rule": mod3_rule,
    "mod3": mod3_rule,
    "multiply3": lambda horizon=DEFAULT_HORIZON: multiply(3, horizon),
    "cycle345": example_cycle_345,
    "path4": small_path,
    "identity": lambda horizon=DEFAULT_HORIZON: SequenceSpec("identity", horizon=horizon, fill=INF, name="identity"),
}

# Specs the verification suites sweep over.
VERIFIED_BUILTINS = ("distinct_odd", "odd_distinct", "mod3_rule", "multiply3", "cycle345", "path4")


def load_spec(source: str, horizon: int | None = None) -> SequenceSpec:
    """``builtin:<name>`` or a path to a JSON spec file."""
    if source.startswith("builtin:"):
        key = source.split(":", 1)[1]
        if key not in BUILTINS:
            raise DomainError(f"unknown builtin spec {key!r}; known: {', '.join(sorted(BUILTINS))}")
        return BUILTINS[key](horizon or DEFAULT_HORIZON)
    path = Path(source)
    if not path.is_file():
        raise DomainError(f"spec file not found: {source}")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"spec file {source} is not valid JSON: {exc}") from exc
    return SequenceSpec.from_json(obj, horizon)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    i: int
    a_i: Bound
    phi_i: Optional[int]
    b_phi_i: Optional[Bound]
    reason: str

    def __str__(self):
        return (
            f"violation at i={self.i}: a_i={self.a_i}, phi(i)={self.phi_i}, "
            f"b_phi(i)={self.b_phi_i} ({self.reason})"
        )


@dataclass(frozen=True)
class ValidationReport:
    horizon: int
    violation: Optional[Violation] = None

    @property
    def ok(self) -> bool:
        return self.violation is None

    def raise_if_invalid(self):
        if self.violation is not None:
            raise DomainError(f"spec is not a valid phi-equivalence: {self.violation}")


def validate(spec: SequenceSpec, horizon: int | None = None) -> ValidationReport:
    """Check ``i a_i = φ(i) b_φ(i)`` and bijectivity of φ on ``[1, horizon]``."""
    n = spec.horizon if horizon is None else min(horizon, spec.horizon)
    for i in range(1, n + 1):
        a_i = spec.a_raw(i)
        if a_i is not INF:
            j = spec.phi_raw(i)
            if j is None or j < 1:
                return ValidationReport(n, Violation(i, a_i, j, None, "phi undefined on supp(a)"))
            b_j = spec.b_raw(j)
            if b_j is INF:
                return ValidationReport(n, Violation(i, a_i, j, b_j, "phi(i) not in supp(b)"))
            if i * a_i != j * b_j:
                return ValidationReport(n, Violation(i, a_i, j, b_j, "i*a_i != phi(i)*b_phi(i)"))
            if spec.phi_inv_raw(j) != i:
                return ValidationReport(n, Violation(i, a_i, j, b_j, "phi is not injective here"))
        b_i = spec.b_raw(i)
        if b_i is not INF:
            pre = spec.phi_inv_raw(i)
            if pre is None or spec.a_raw(pre) is INF or spec.phi_raw(pre) != i:
                return ValidationReport(n, Violation(i, a_i, spec.phi_raw(i), b_i, "supp(b) element without preimage"))
    return ValidationReport(n)


# --------------------------------------------------------------------------
# graph components


@dataclass(frozen=True)
class GraphComponent:
    """A connected component of ``G_φ`` listed along its edges.

    Cycles start at their smallest vertex; infinite kinds are cut at the spec
    horizon and flagged ``truncated``.
    """

    kind: str
    vertices: tuple
    truncated: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown component kind {self.kind!r}")

    def __contains__(self, part):
        return part in self.vertices

    def __len__(self):
        return len(self.vertices)

    def phi_order(self) -> tuple:
        """Cycle vertices ``(i_1, ..., i_m)`` with ``φ(i_j) = i_{j+1}``."""
        if self.kind != CYCLE:
            raise DomainError("phi_order is defined for cycles only")
        return (self.vertices[0],) + tuple(reversed(self.vertices[1:]))


def component_of(spec: SequenceSpec, part: int) -> GraphComponent:
    spec._check(part)
    if spec.a_raw(part) is INF and spec.b_raw(part) is INF:
        raise DomainError(f"part {part} is in neither supp(a) nor supp(b)")
    horizon = spec.horizon

    forward = []
    v, fwd_cut, closed = part, False, False
    while True:
        w = spec.phi_inv_raw(v)
        if w is None:
            break
        if w == part:
            closed = True
            break
        if w > horizon:
            fwd_cut = True
            break
        forward.append(w)
        v = w
    if closed:
        cyc = [part] + forward
        k = cyc.index(min(cyc))
        return GraphComponent(CYCLE, tuple(cyc[k:] + cyc[:k]))

    backward = []
    v, bwd_cut = part, False
    while True:
        w = spec.phi_raw(v)
        if w is None:
            break
        if w > horizon:
            bwd_cut = True
            break
        backward.append(w)
        v = w
    vertices = tuple(reversed(backward)) + (part,) + tuple(forward)
    if fwd_cut and bwd_cut:
        kind = BIINFINITE
    elif bwd_cut:
        kind = FORWARD_INFINITE
    elif fwd_cut:
        kind = BACKWARD_INFINITE
    else:
        kind = PATH
    return GraphComponent(kind, vertices, truncated=fwd_cut or bwd_cut)


def check_in_A(spec: SequenceSpec, lam: Partition):
    for p, m in lam.items():
        a_p = spec.a(p)
        if a_p is not INF and m >= a_p:
            raise DomainError(f"partition not in A: m_{p} = {m} but a_{p} = {a_p}")


def in_B(spec: SequenceSpec, lam: Partition) -> bool:
    return all(spec.b(p) is INF or m < spec.b(p) for p, m in lam.items())


def decompose_support(spec: SequenceSpec, lam: Partition) -> list:
    """Split ``λ ∈ A`` by the components of ``G_φ`` its parts lie in.

    Parts with ``a = b = ∞`` lie on no component and never move; they come
    back together as a final piece whose component is ``None``.
    """
    check_in_A(spec, lam)
    out = []
    seen: set = set()
    inert = []
    for p in lam.support:
        if p in seen:
            continue
        if spec.a(p) is INF and spec.b(p) is INF:
            inert.append(p)
            continue
        comp = component_of(spec, p)
        members = set(comp.vertices)
        seen |= members
        out.append((comp, lam.restrict(members)))
    if inert:
        out.append((None, lam.restrict(inert)))
    return out
