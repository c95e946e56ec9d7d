"""Small numerical kernels shared by the threshold and energy code."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a,
    b,
    rtol: float = 1e-9,
    atol: float = 1e-15,
    max_depth: int = 40,
) -> np.ndarray:
    """Integrate ``f`` over many intervals ``[a_k, b_k]`` at once.

    Each interval is refined independently with the classical
    ``|S2 - S1| <= 15 tol`` acceptance test and Richardson correction, but all
    pending panels are evaluated in one vectorized call per sweep.  ``f`` must
    accept and return 1D arrays.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    shape = a.shape
    a = a.ravel().copy()
    b = b.ravel().copy()
    out = np.zeros(a.size)
    if a.size == 0:
        return out.reshape(shape)

    m = 0.5 * (a + b)
    fa, fm, fb = (f(v) for v in (a, m, b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = np.maximum(atol, rtol * np.abs(whole))
    owner = np.arange(a.size)
    lo, hi, depth = a, b, np.zeros(a.size, dtype=int)

    while lo.size:
        mid = 0.5 * (lo + hi)
        x_l = 0.5 * (lo + mid)
        x_r = 0.5 * (mid + hi)
        vals = f(np.concatenate([x_l, x_r]))
        f_l, f_r = vals[: lo.size], vals[lo.size :]
        h = hi - lo
        left = h / 12.0 * (fa + 4.0 * f_l + fm)
        right = h / 12.0 * (fm + 4.0 * f_r + fb)
        err = left + right - whole
        done = (np.abs(err) <= 15.0 * tol) | (depth >= max_depth)
        np.add.at(out, owner[done], (left + right + err / 15.0)[done])

        keep = ~done
        lo_k, mid_k, hi_k = lo[keep], mid[keep], hi[keep]
        lo = np.concatenate([lo_k, mid_k])
        hi = np.concatenate([mid_k, hi_k])
        fa = np.concatenate([fa[keep], fm[keep]])
        new_fm = np.concatenate([f_l[keep], f_r[keep]])
        fb = np.concatenate([fm[keep], fb[keep]])
        fm = new_fm
        whole = np.concatenate([left[keep], right[keep]])
        tol = np.concatenate([tol[keep], tol[keep]]) / 2.0
        owner = np.concatenate([owner[keep], owner[keep]])
        depth = np.concatenate([depth[keep], depth[keep]]) + 1
    return out.reshape(shape)


def golden_section(
    f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-10, max_iter: int = 200
) -> tuple[float, float]:
    """Minimize a unimodal scalar function on ``[lo, hi]``; returns ``(x, f(x))``."""
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w
