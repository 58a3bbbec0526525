import numpy as np
import pytest
from _systems import integer_systems
from hypothesis import given, settings

from ohara.cycles import CycleSystem, max_steps_formula
from ohara.kernels import HAVE_NUMBA, box_check, grid_points, grid_run, jit_enabled

BACKENDS = ["numpy", "exact"] + (["numba"] if HAVE_NUMBA else [])


def test_grid_points_order():
    pts = grid_points((2, 3))
    assert pts.tolist() == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]]


@pytest.mark.parametrize("method", ["step", "fixed_point"])
@settings(max_examples=40)
@given(sys=integer_systems(m_max=4, factor_max=5, volume_max=3000))
def test_backends_agree(sys, method):
    _, S0, K0 = grid_run(sys, method="step", backend="exact")
    for backend in BACKENDS:
        _, S, K = grid_run(sys, method=method, backend=backend)
        assert np.array_equal(np.asarray(S, dtype=object), S0)
        assert np.array_equal(np.asarray(K, dtype=object), K0)


def test_box_check_on_cycle345():
    facts = box_check(CycleSystem((3, 4, 5), (4, 5, 3), (5, 3, 4)))
    assert facts["points"] == 60
    assert facts["max_L"] == facts["corner_L"] == 9
    assert facts["inside"] and facts["bijective"] and facts["conserved"]


def test_huge_values_use_exact_backend():
    a = (10**12 + 39, 10**12 + 61)
    sys = CycleSystem.from_sides(a, a[::-1])
    T = np.array([[a[0] - 1, a[1] - 1]], dtype=object)
    _, S, K = grid_run(sys, T, method="fixed_point")
    assert S.dtype == object
    assert int(K.sum()) == max_steps_formula(sys)


def test_env_flag_disables_jit(monkeypatch):
    monkeypatch.setenv("OHARA_JIT", "0")
    assert not jit_enabled()
    monkeypatch.setenv("OHARA_JIT", "1")
    assert jit_enabled() == HAVE_NUMBA


def test_unknown_backend():
    with pytest.raises(ValueError):
        grid_run(CycleSystem((1,), (2,), (2,)), backend="gpu")
