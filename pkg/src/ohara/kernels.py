"""Vectorised cycle kernels over every integer point of a box.

The exhaustive checks run the continuous algorithm (and the fixed-point
solver) at every integer point of ``R(a)``.  Two interchangeable backends do
the 64-bit work: a numba-compiled loop and a pure numpy version that advances
all points in lock-step.  ``OHARA_JIT=0`` in the environment forces numpy.
Inputs whose values could overflow 64 bits go through the exact Python code.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

INT64_SAFE = 2**62


def jit_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("OHARA_JIT", "1") not in ("0", "false", "no", "off")


def grid_points(a) -> np.ndarray:
    """All integer points of ``R(a)`` as rows, last coordinate fastest."""
    axes = [np.arange(int(x), dtype=np.int64) for x in a]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


# --------------------------------------------------------------------------
# numpy backend


def _step_numpy(a, b, T):
    S = T.copy()
    K = np.zeros_like(T)
    m = len(a)
    while True:
        moved = False
        for j in range(m):
            r = S[:, j] // b[j]
            if r.any():
                moved = True
                S[:, j] -= r * b[j]
                S[:, j - 1] += r * a[j - 1]
                K[:, j] += r
        if not moved:
            return S, K


def _fixed_point_numpy(a, b, T, ceiling):
    m = len(a)
    n = T.shape[0]
    x = np.zeros(n, dtype=np.int64)
    K = np.zeros_like(T)
    active = np.ones(n, dtype=bool)
    while active.any():
        nxt = x.copy()
        for j in range(m - 1, 0, -1):
            nxt = (T[:, j] + a[j] * nxt) // b[j]
            K[:, j] = np.where(active, nxt, K[:, j])
        fx = (T[:, 0] + a[0] * nxt) // b[0]
        if (fx < x).any() or (fx > ceiling).any():
            raise ArithmeticError("fixed-point ascent left its range")
        done = fx == x
        K[:, 0] = np.where(active, fx, K[:, 0])
        active &= ~done
        x = np.where(active, fx, x)
    S = T - b * K + a * np.roll(K, -1, axis=1)
    return S, K


# --------------------------------------------------------------------------
# numba backend

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _step_numba(a, b, T):  # pragma: no cover - compiled
        n, m = T.shape
        S = T.copy()
        K = np.zeros_like(T)
        for p in range(n):
            moved = True
            while moved:
                moved = False
                for j in range(m):
                    r = S[p, j] // b[j]
                    if r > 0:
                        moved = True
                        S[p, j] -= r * b[j]
                        S[p, j - 1] += r * a[j - 1]
                        K[p, j] += r
        return S, K

    @numba.njit(cache=True)
    def _fixed_point_numba(a, b, T, ceiling):  # pragma: no cover - compiled
        n, m = T.shape
        K = np.zeros_like(T)
        S = np.zeros_like(T)
        for p in range(n):
            x = 0
            while True:
                nxt = x
                for j in range(m - 1, 0, -1):
                    nxt = (T[p, j] + a[j] * nxt) // b[j]
                    K[p, j] = nxt
                fx = (T[p, 0] + a[0] * nxt) // b[0]
                if fx < x or fx > ceiling:
                    raise ArithmeticError("fixed-point ascent left its range")
                if fx == x:
                    break
                x = fx
            K[p, 0] = x
            for j in range(m):
                S[p, j] = T[p, j] - b[j] * K[p, j] + a[j] * K[p, (j + 1) % m]
        return S, K


# --------------------------------------------------------------------------
# dispatch


def _fits_int64(sys) -> bool:
    from ohara.cycles import max_steps_formula

    bound = (max_steps_formula(sys) + 1) * max(max(sys.a), max(sys.b)) * (sys.m + 1)
    return bound < INT64_SAFE


def _exact_grid(sys, T, fast):
    from ohara.cycles import psi_continuous
    from ohara.fastpath import solve_cycle_fast

    rows_s, rows_k = [], []
    for t in T:
        t = tuple(int(x) for x in t)
        res = solve_cycle_fast(sys, t) if fast else psi_continuous(sys, t)
        rows_s.append(res.s)
        rows_k.append(res.k)
    return np.array(rows_s, dtype=object), np.array(rows_k, dtype=object)


def grid_run(sys, T: np.ndarray | None = None, *, method: str = "step", backend: str | None = None):
    """``(T, S, K)`` for every row of ``T`` (default: the whole integer box).

    ``method`` is ``"step"`` (continuous firing) or ``"fixed_point"``;
    ``backend`` is ``"numba"``, ``"numpy"`` or ``"exact"`` (auto when ``None``).
    """
    if not sys.is_integer:
        raise ValueError("grid kernels need integer sides")
    if T is None:
        T = grid_points(sys.a)
    if backend is None:
        if not _fits_int64(sys):
            backend = "exact"
        else:
            backend = "numba" if jit_enabled() else "numpy"
    if backend == "exact":
        S, K = _exact_grid(sys, T, method == "fixed_point")
        return T, S, K
    a = np.array(sys.a, dtype=np.int64)
    b = np.array(sys.b, dtype=np.int64)
    T = np.ascontiguousarray(T, dtype=np.int64)
    ceiling = sys.matrix.generator[0]
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not installed")
        S, K = _step_numba(a, b, T) if method == "step" else _fixed_point_numba(a, b, T, ceiling)
    elif backend == "numpy":
        S, K = _step_numpy(a, b, T) if method == "step" else _fixed_point_numpy(a, b, T, ceiling)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return T, S, K


def box_check(sys, *, backend: str | None = None) -> dict:
    """Exhaustive facts about the map on the integer points of the source box.

    Returns the maximum step count, the step count at ``a - 1``, whether the
    image is exactly the integer points of the target box, and whether the
    functional ``Σ i_j x_j`` is conserved at every point.
    """
    T, S, K = grid_run(sys, backend=backend)
    L = K.sum(axis=1)
    a = list(sys.a)
    corner = int(np.ravel_multi_index(tuple(x - 1 for x in a), a)) if a else 0
    b = list(sys.b)
    inside = bool(((S >= 0) & (S < np.array(b, dtype=S.dtype))).all())
    if inside:
        flat = np.ravel_multi_index(tuple(S[:, j].astype(np.int64) for j in range(sys.m)), b)
        bijective = len(np.unique(flat)) == len(flat) == int(np.prod(b, dtype=object))
    else:
        bijective = False
    if S.dtype == object or max(sys.i) * max(a + b) * sys.m >= INT64_SAFE:
        D, i = S.astype(object) - T.astype(object), np.array(sys.i, dtype=object)
    else:
        D, i = S - T, np.array(sys.i, dtype=np.int64)
    conserved = bool((D @ i == 0).all())
    return {
        "points": int(T.shape[0]),
        "max_L": int(L.max()),
        "corner_L": int(L[corner]),
        "inside": inside,
        "bijective": bool(bijective),
        "conserved": conserved,
        "S": S,
        "K": K,
    }
