"""Hot inner loops, compiled with numba when available.

Two kernels dominate runtime at scale: the Markov-chain step recurrence
(inherently serial) and the lexicographic search for a column subset whose
row traces take all 2^k values (the inner loop of both VC-dimension and
Boolean-independence searches).  Each kernel has a pure-numpy twin; the
backend is picked at import time.  Set ``VCKIT_NO_NUMBA=1`` to force the
numpy path.  Both paths produce bit-identical results.

Search status codes: 1 = witness found, 0 = search space exhausted,
-1 = check budget exhausted first.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

FOUND = 1
EXHAUSTED = 0
OVER_BUDGET = -1

_DISABLED = os.environ.get("VCKIT_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via VCKIT_NO_NUMBA instead
    numba = None
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA and not _DISABLED


def markov_path_numpy(cum_rows, start, uniforms):
    """Walk the chain: state_{i+1} = inverse-CDF of row state_i at u_i."""
    k = cum_rows.shape[1]
    out = np.empty(uniforms.size, dtype=np.int64)
    state = start
    for i in range(uniforms.size):
        state = int(np.searchsorted(cum_rows[state], uniforms[i], side="right"))
        if state >= k:
            state = k - 1
        out[i] = state
    return out


def full_trace_subset_numpy(matrix, k, max_checks):
    """Find the first k-subset of columns whose row traces hit all 2^k codes.

    Returns (status, combo, checks) where combo is the lexicographically
    first witness (column indices) when status == FOUND.
    """
    n_cols = matrix.shape[1]
    target = 1 << k
    pow2 = (1 << np.arange(k, dtype=np.int64))
    checks = 0
    for combo in itertools.combinations(range(n_cols), k):
        if checks >= max_checks:
            return OVER_BUDGET, np.empty(0, dtype=np.int64), checks
        checks += 1
        codes = matrix[:, combo].astype(np.int64) @ pow2
        if np.unique(codes).size == target:
            return FOUND, np.asarray(combo, dtype=np.int64), checks
    return EXHAUSTED, np.empty(0, dtype=np.int64), checks


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _markov_path_nb(cum_rows, start, uniforms):
        k = cum_rows.shape[1]
        out = np.empty(uniforms.size, dtype=np.int64)
        state = start
        for i in range(uniforms.size):
            state = np.searchsorted(cum_rows[state], uniforms[i], side="right")
            if state >= k:
                state = k - 1
            out[i] = state
        return out

    @numba.njit(cache=True)
    def _full_trace_subset_nb(matrix, k, max_checks):
        n_rows, n_cols = matrix.shape
        target = 1 << k
        combo = np.arange(k, dtype=np.int64)
        empty = np.empty(0, dtype=np.int64)
        # Stamp array avoids clearing a seen-set per candidate subset.
        stamp = np.full(target, -1, dtype=np.int64)
        checks = 0
        while True:
            if checks >= max_checks:
                return OVER_BUDGET, empty, checks
            checks += 1
            distinct = 0
            for r in range(n_rows):
                code = 0
                for i in range(k):
                    if matrix[r, combo[i]]:
                        code |= 1 << i
                if stamp[code] != checks:
                    stamp[code] = checks
                    distinct += 1
                    if distinct == target:
                        break
            if distinct == target:
                return FOUND, combo.copy(), checks
            # lexicographic successor
            i = k - 1
            while i >= 0 and combo[i] == n_cols - k + i:
                i -= 1
            if i < 0:
                return EXHAUSTED, empty, checks
            combo[i] += 1
            for j in range(i + 1, k):
                combo[j] = combo[j - 1] + 1

    def markov_path_numba(cum_rows, start, uniforms):
        return _markov_path_nb(cum_rows, np.int64(start), uniforms)

    def full_trace_subset_numba(matrix, k, max_checks):
        status, combo, checks = _full_trace_subset_nb(
            np.ascontiguousarray(matrix), np.int64(k), np.int64(max_checks)
        )
        return int(status), combo, int(checks)


if USING_NUMBA:
    markov_path = markov_path_numba
    full_trace_subset = full_trace_subset_numba
    BACKEND = "numba"
else:
    markov_path = markov_path_numpy
    full_trace_subset = full_trace_subset_numpy
    BACKEND = "numpy"
