"""Pure-numpy kernels for sharp-maximal computations (fallback backend).

Same interface as the compiled ``oscillatk._sharp`` extension.  Window
oscillations are evaluated through strided window views, chunked to bound
memory; the "max over all cubes containing a cell" propagation is a
right-aligned sliding maximum done with scipy's maximum filters.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import maximum_filter, maximum_filter1d

BACKEND = "python"

_CHUNK_ELEMS = 4_000_000


def _window_osc_1d(values: np.ndarray, L: int, p: float) -> np.ndarray:
    """Mean oscillation of every length-L window: out[s] over [s, s+L)."""
    n = values.size
    m = n - L + 1
    prefix = np.concatenate(([0.0], np.cumsum(values)))
    means = (prefix[L:] - prefix[:-L]) / L
    out = np.empty(m)
    rows = max(1, _CHUNK_ELEMS // L)
    win = sliding_window_view(values, L)
    for s in range(0, m, rows):
        e = min(s + rows, m)
        dev = np.abs(win[s:e] - means[s:e, None])
        if p == 1.0:
            out[s:e] = dev.mean(axis=1)
        elif p == 2.0:
            out[s:e] = np.sqrt((dev * dev).mean(axis=1))
        else:
            out[s:e] = (dev ** p).mean(axis=1) ** (1.0 / p)
    return out


def _propagate_1d(osc: np.ndarray, n: int, L: int) -> np.ndarray:
    """max over starts s in [x-L+1, x] of osc[s], for every cell x."""
    padded = np.full(n, -np.inf)
    padded[: osc.size] = osc
    return maximum_filter1d(padded, size=L, mode="constant", cval=-np.inf,
                            origin=(L - 1) // 2)


def sharp1d(values: np.ndarray, p: float, lengths: np.ndarray, want_sharp: bool):
    """Sharp function / BMO maximum over all windows with the given lengths.

    Returns ``(sharp, bmo)`` where sharp is None unless requested.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    n = values.size
    sharp = np.zeros(n) if want_sharp else None
    bmo = 0.0
    for L in np.asarray(lengths, dtype=np.int64):
        L = int(L)
        if L <= 1 or L > n:
            continue
        osc = _window_osc_1d(values, L, p)
        bmo = max(bmo, float(osc.max()))
        if want_sharp:
            np.maximum(sharp, _propagate_1d(osc, n, L), out=sharp)
    return sharp, bmo


def _window_osc_2d(values: np.ndarray, L: int, p: float) -> np.ndarray:
    n = values.shape[0]
    m = n - L + 1
    P = np.zeros((n + 1, n + 1))
    P[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    means = (P[L:, L:] - P[:-L, L:] - P[L:, :-L] + P[:-L, :-L]) / (L * L)
    out = np.empty((m, m))
    win = sliding_window_view(values, (L, L))
    rows = max(1, _CHUNK_ELEMS // (m * L * L))
    for s in range(0, m, rows):
        e = min(s + rows, m)
        dev = np.abs(win[s:e] - means[s:e, :, None, None])
        if p == 1.0:
            out[s:e] = dev.mean(axis=(2, 3))
        elif p == 2.0:
            out[s:e] = np.sqrt((dev * dev).mean(axis=(2, 3)))
        else:
            out[s:e] = (dev ** p).mean(axis=(2, 3)) ** (1.0 / p)
    return out


def _propagate_2d(osc: np.ndarray, n: int, L: int) -> np.ndarray:
    padded = np.full((n, n), -np.inf)
    padded[: osc.shape[0], : osc.shape[1]] = osc
    o = (L - 1) // 2
    return maximum_filter(padded, size=(L, L), mode="constant", cval=-np.inf,
                          origin=(o, o))


def sharp2d(values: np.ndarray, p: float, sides: np.ndarray, want_sharp: bool):
    """2-d analogue of :func:`sharp1d` over square windows."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    n = values.shape[0]
    sharp = np.zeros((n, n)) if want_sharp else None
    bmo = 0.0
    for L in np.asarray(sides, dtype=np.int64):
        L = int(L)
        if L <= 1 or L > n:
            continue
        osc = _window_osc_2d(values, L, p)
        bmo = max(bmo, float(osc.max()))
        if want_sharp:
            np.maximum(sharp, _propagate_2d(osc, n, L), out=sharp)
    return sharp, bmo
