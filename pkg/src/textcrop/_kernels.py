"""Hot numeric kernels, JIT-compiled with numba when available.

Every kernel has two implementations with identical semantics: a numba
``@njit`` version and a pure-numpy fallback. Set ``TEXTCROP_NUMBA=0`` to
force the numpy path (or it is picked automatically when numba is not
importable). ``scripts/bench_kernels.py`` compares the two.

The window-sum kernels consume a shared padded prefix-sum array so that
both paths perform the same scalar operations in the same order; their
results are bit-identical, not merely close.
"""

from __future__ import annotations

import os

import numpy as np

_WANT_NUMBA = os.environ.get("TEXTCROP_NUMBA", "1").lower() not in ("0", "false", "off")

if _WANT_NUMBA:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False

USING_NUMBA = _HAVE_NUMBA


def padded_prefix(grid: np.ndarray) -> np.ndarray:
    """Return the (H+1, W+1) float64 prefix-sum array with a zero border."""
    h, w = grid.shape
    out = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(np.cumsum(grid, axis=0, dtype=np.float64), axis=1, out=out[1:, 1:])
    return out


# ---------------------------------------------------------------------------
# best placement of an h x w window (max inner sum, first max row-major)

def _best_position_np(prefix: np.ndarray, h: int, w: int) -> tuple[int, int, float]:
    sums = (prefix[h:, w:] - prefix[:-h, w:]) - prefix[h:, :-w] + prefix[:-h, :-w]
    flat = int(np.argmax(sums))
    row, col = divmod(flat, sums.shape[1])
    return row, col, float(sums[row, col])


def _best_position_loop(prefix, h, w):  # pragma: no cover - numba source
    n_rows = prefix.shape[0] - h
    n_cols = prefix.shape[1] - w
    best_r = 0
    best_c = 0
    best_s = -np.inf
    for r in range(n_rows):
        for c in range(n_cols):
            s = (prefix[r + h, c + w] - prefix[r, c + w]) - prefix[r + h, c] + prefix[r, c]
            if s > best_s:
                best_s = s
                best_r = r
                best_c = c
    return best_r, best_c, best_s


def window_sum(prefix: np.ndarray, row: int, col: int, h: int, w: int) -> float:
    """Inner sum of the window with top-left (row, col), from the prefix array."""
    return float(
        (prefix[row + h, col + w] - prefix[row, col + w])
        - prefix[row + h, col]
        + prefix[row, col]
    )


# ---------------------------------------------------------------------------
# character-level Levenshtein distance on codepoint arrays

def _levenshtein_np(a: np.ndarray, b: np.ndarray) -> int:
    if a.size == 0:
        return int(b.size)
    if b.size == 0:
        return int(a.size)
    prev = np.arange(b.size + 1, dtype=np.int64)
    steps = np.arange(1, b.size + 1, dtype=np.int64)
    for i in range(a.size):
        sub = prev[:-1] + (b != a[i])
        cand = np.minimum(prev[1:] + 1, sub)
        # resolve the sequential row[j] = min(cand[j], row[j-1] + 1) dependency
        cur = np.minimum.accumulate(cand - steps) + steps
        cur = np.minimum(cur, i + 1 + steps)
        prev = np.concatenate(([i + 1], cur))
    return int(prev[-1])


def _levenshtein_loop(a, b):  # pragma: no cover - numba source
    la = a.shape[0]
    lb = b.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = np.arange(lb + 1)
    cur = np.empty(lb + 1, dtype=np.int64)
    for i in range(la):
        cur[0] = i + 1
        for j in range(lb):
            cost = 0 if a[i] == b[j] else 1
            best = prev[j] + cost
            if prev[j + 1] + 1 < best:
                best = prev[j + 1] + 1
            if cur[j] + 1 < best:
                best = cur[j] + 1
            cur[j + 1] = best
        prev, cur = cur, prev
    return int(prev[lb])


# ---------------------------------------------------------------------------
# greedy near-duplicate scan over unit vectors

def _greedy_dedup_np(vectors: np.ndarray, threshold: float) -> np.ndarray:
    n = vectors.shape[0]
    rep = np.full(n, -1, dtype=np.int64)
    kept: list[int] = []
    for i in range(n):
        if kept:
            sims = vectors[kept] @ vectors[i]
            hits = np.nonzero(sims >= threshold)[0]
            if hits.size:
                rep[i] = kept[int(hits[0])]
                continue
        kept.append(i)
    return rep


def _greedy_dedup_loop(vectors, threshold):  # pragma: no cover - numba source
    n = vectors.shape[0]
    d = vectors.shape[1]
    rep = np.full(n, -1, dtype=np.int64)
    kept = np.empty(n, dtype=np.int64)
    n_kept = 0
    for i in range(n):
        assigned = False
        for k in range(n_kept):
            j = kept[k]
            s = 0.0
            for c in range(d):
                s += vectors[j, c] * vectors[i, c]
            if s >= threshold:
                rep[i] = j
                assigned = True
                break
        if not assigned:
            kept[n_kept] = i
            n_kept += 1
    return rep


if USING_NUMBA:
    best_position = njit(cache=True)(_best_position_loop)
    levenshtein = njit(cache=True)(_levenshtein_loop)
    greedy_dedup = njit(cache=True)(_greedy_dedup_loop)
else:
    best_position = _best_position_np
    levenshtein = _levenshtein_np
    greedy_dedup = _greedy_dedup_np
