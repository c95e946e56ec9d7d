"""Brute-force threshold scan, independent of the adaptive machinery.

It shares no quadrature or refinement code with :mod:`thresholds`, which
makes it a useful cross-check for new radial profiles.
"""

import numpy as np
from scipy.integrate import cumulative_simpson


def threshold_bruteforce(mu_fn, f_fn, rho, n_slices=1000, n_t=10_001):
    """Dense mesh scan of both threshold ratios.

    Each chord ``x2 = const`` of the disc gets ``n_t`` uniform nodes in
    ``t in [-c, 0]`` and a cumulative composite Simpson integral; slices
    are clustered toward the rim.  Rim and axis nodes, where the ratios are
    0/0, are simply skipped.
    """
    k = np.arange(n_slices)
    x2s = rho * np.sin(0.5 * np.pi * k / n_slices)
    lo, hi = np.inf, -np.inf
    for x2 in x2s:
        c = np.sqrt(rho**2 - x2**2)
        t = np.linspace(-c, 0.0, n_t)
        r = np.hypot(t, x2)
        m = np.maximum(mu_fn(r), 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            f1 = np.where(r > 0, f_fn(r) * np.abs(t) / np.where(r > 0, r, 1.0), 0.0)
        G = cumulative_simpson(f1 * np.sqrt(m), x=t, initial=0.0)
        m_axis = max(float(mu_fn(np.array([x2]))[0]), 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            low = np.sqrt(2) * m[1:] ** 1.5 / (3 * G[1:])
            up = np.sqrt(2) * (m_axis**1.5 - m[:-1] ** 1.5) / (3 * (G[-1] - G[:-1]))
        lo = min(lo, np.nanmin(low))
        hi = max(hi, np.nanmax(up))
    return lo, hi
