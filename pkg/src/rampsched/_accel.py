"""Claim-sweep kernels behind the grid-based busy-time lower bound search.

Two interchangeable implementations: a numba-jitted scan and a numpy
one built on cumulative sums.  Both accumulate claimed work and busy
time in the same order, so they return identical floats, not merely
close ones.  Selection is by the RAMPSCHED_BACKEND environment
variable ("numba" or "numpy"); unset prefers numba when importable.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    njit = None
    HAS_NUMBA = False

_ENV_VAR = "RAMPSCHED_BACKEND"


def active_backend() -> str:
    """Resolve the kernel backend for this call."""
    pref = os.environ.get(_ENV_VAR, "").strip().lower()
    if pref == "numpy":
        return "numpy"
    if pref == "numba":
        if not HAS_NUMBA:
            raise RuntimeError(f"{_ENV_VAR}=numba but numba is not importable")
        return "numba"
    if pref:
        raise RuntimeError(f"unknown {_ENV_VAR} value {pref!r}")
    return "numba" if HAS_NUMBA else "numpy"


def claim_sweep_numpy(W, L, inside, need, order):
    """Right-to-left greedy claim of grid slices, one job at a time.

    W[j, s] is the work job j absorbs in slice s, L[s] the slice
    length, inside[j, s] whether the slice lies in j's window.  Jobs
    claim unclaimed admissible slices from the right until their need
    is covered.  Returns (feasible, total busy time).
    """
    m = L.shape[0]
    claimed = np.zeros(m, dtype=bool)
    busy = 0.0
    for j in order:
        rem = need[j]
        if rem <= 0.0:
            continue
        idx = np.nonzero(inside[j] & ~claimed)[0][::-1]
        if idx.size == 0:
            return False, busy
        cum_w = np.cumsum(W[j, idx])
        cum_l = np.cumsum(L[idx])
        k = int(np.searchsorted(cum_w, rem, side="left"))
        if k == idx.size:
            claimed[idx] = True
            busy = busy + float(cum_l[-1])
            return False, busy
        claimed[idx[: k + 1]] = True
        busy = busy + float(cum_l[k])
    return True, busy


if HAS_NUMBA:

    @njit(cache=True)
    def _claim_sweep_jit(W, L, inside, need, order):  # pragma: no cover - jitted
        m = L.shape[0]
        claimed = np.zeros(m, dtype=np.bool_)
        busy = 0.0
        for oi in range(order.shape[0]):
            j = order[oi]
            rem = need[j]
            if rem <= 0.0:
                continue
            got = 0.0
            used = 0.0
            done = False
            for s in range(m - 1, -1, -1):
                if claimed[s] or not inside[j, s]:
                    continue
                claimed[s] = True
                got = got + W[j, s]
                used = used + L[s]
                if got >= rem:
                    done = True
                    break
            busy = busy + used
            if not done:
                return False, busy
        return True, busy

    def claim_sweep_numba(W, L, inside, need, order):
        feasible, busy = _claim_sweep_jit(
            np.ascontiguousarray(W, dtype=np.float64),
            np.ascontiguousarray(L, dtype=np.float64),
            np.ascontiguousarray(inside),
            np.ascontiguousarray(need, dtype=np.float64),
            np.ascontiguousarray(order, dtype=np.int64),
        )
        return bool(feasible), float(busy)

else:  # pragma: no cover - depends on the environment

    def claim_sweep_numba(W, L, inside, need, order):
        raise RuntimeError("numba is not importable in this environment")


def claim_sweep(W, L, inside, need, order):
    if active_backend() == "numba":
        return claim_sweep_numba(W, L, inside, need, order)
    return claim_sweep_numpy(W, L, inside, need, order)
