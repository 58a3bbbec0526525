import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ohara import INF, DomainError, Partition
from ohara.equivalence import (
    BIINFINITE,
    BUILTINS,
    CYCLE,
    PATH,
    VERIFIED_BUILTINS,
    SequenceSpec,
    check_in_A,
    component_of,
    decompose_support,
    load_spec,
    table_spec,
    validate,
)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtins_validate(name):
    report = validate(load_spec(f"builtin:{name}", 2000))
    assert report.ok, report.violation


def test_broken_relation_is_reported():
    bad = table_spec([(3, 4, 5, 4), (4, 5, 3, 5), (5, 3, 3, 3)])
    report = validate(bad)
    assert not report.ok
    assert report.violation.i == 4
    with pytest.raises(DomainError, match="i=4"):
        report.raise_if_invalid()


def test_non_injective_phi_is_reported():
    bad = table_spec([(2, 1, 1, 2), (4, 1, 2, 2)], fill=INF)
    assert not validate(bad).ok


def test_horizon_is_enforced():
    spec = load_spec("builtin:distinct_odd", 50)
    assert spec.a(50) == 2
    with pytest.raises(DomainError, match="horizon"):
        spec.a(51)


@pytest.mark.parametrize(
    "name, part, kind, vertices",
    [
        ("distinct_odd", 12, "forward_infinite", (96, 48, 24, 12, 6, 3)),
        ("odd_distinct", 12, "backward_infinite", (3, 6, 12, 24, 48, 96)),
        ("mod3_rule", 1, BIINFINITE, (64, 32, 16, 8, 4, 2, 1, 3, 9, 27, 81)),
        ("mod3_rule", 6, CYCLE, (6,)),
        ("cycle345", 4, CYCLE, (3, 5, 4)),
        ("path4", 3, PATH, (1, 2, 3, 4)),
    ],
)
def test_component_kinds(name, part, kind, vertices):
    comp = component_of(load_spec(f"builtin:{name}", 100), part)
    assert comp.kind == kind
    assert comp.vertices == vertices
    assert comp.truncated == (kind not in (CYCLE, PATH))


def test_cycle_phi_order():
    spec = load_spec("builtin:cycle345")
    comp = component_of(spec, 5)
    order = comp.phi_order()
    assert order == (3, 4, 5)
    assert all(spec.phi(order[j]) == order[(j + 1) % 3] for j in range(3))


def test_inert_parts_form_their_own_piece():
    pieces = decompose_support(load_spec("builtin:path4"), Partition.parse("1^5 3 5^3"))
    assert [c.kind if c else None for c, _ in pieces] == [PATH, None]
    assert pieces[1][1] == Partition.parse("5^3")


def test_partition_outside_A_is_refused():
    with pytest.raises(DomainError, match="m_6 = 2 but a_6 = 1"):
        check_in_A(load_spec("builtin:mod3_rule"), Partition.parse("1 6^2"))


@pytest.mark.parametrize("name", VERIFIED_BUILTINS)
def test_json_round_trip(name, tmp_path):
    spec = load_spec(f"builtin:{name}", 500)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec.to_json()))
    back = load_spec(str(path))
    for p in range(1, 501):
        assert (back.a(p), back.b(p), back.phi(p)) == (spec.a(p), spec.b(p), spec.phi(p))


def test_spec_file_errors(tmp_path):
    with pytest.raises(DomainError, match="not found"):
        load_spec(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(DomainError, match="JSON"):
        load_spec(str(bad))
    with pytest.raises(DomainError, match="unknown builtin"):
        load_spec("builtin:nope")
    with pytest.raises(DomainError):
        SequenceSpec("multiply", d=1)


def test_reversed_table_spec_swaps_roles():
    spec = load_spec("builtin:cycle345")
    rev = spec.reversed()
    assert validate(rev).ok
    for p in (3, 4, 5):
        assert rev.a(p) == spec.b(p) and rev.b(p) == spec.a(p)
        assert rev.phi(spec.phi(p)) == p


@given(st.integers(1, 400))
def test_relation_holds_pointwise(i):
    for name in ("distinct_odd", "odd_distinct", "mod3_rule", "multiply3"):
        spec = load_spec(f"builtin:{name}", 2000)
        a = spec.a(i)
        if a is not INF:
            j = spec.phi(i)
            assert i * a == j * spec.b(j)
            assert spec.phi_inv(j) == i
