"""Airy function, Painleve II profiles and the rim boundary layer.

The bounded solutions of ``y'' = s y + 2 y^3 + alpha`` are computed by
Newton's method on the second-order finite-difference system with Dirichlet
data taken from the two asymptotic regimes: the decaying branch on the
right and the branch of ``s y + 2 y^3 + alpha = 0`` near ``sqrt(|s|/2)`` on
the left.  Shooting is useless here because every neighbouring solution
blows up.
"""

from __future__ import annotations

import csv
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded
from scipy.special import gamma

from .fields import Field, Profile1D, field_spline
from .model import ModelConfig, f1, geometry

AIRY_RANGE = (-20.0, 20.0)
_AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * gamma(2.0 / 3.0))
_AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * gamma(1.0 / 3.0))
_SERIES_EDGE = 2.0
_ASYMPTOTIC_START = 25.0

DEFAULT_DOMAIN = (-12.0, 8.0)
DEFAULT_NODES = 4001


class PainleveConvergenceError(RuntimeError):
    pass


class ContinuationError(RuntimeError):
    def __init__(self, message: str, last_alpha: float, last: Profile1D | None):
        super().__init__(message)
        self.last_alpha = last_alpha
        self.last = last


# ---------------------------------------------------------------------------
# Airy function

def airy_series(s) -> tuple[np.ndarray, np.ndarray]:
    """``(Ai, Ai')`` from the Maclaurin series; accurate for ``|s| <= 2``.

    ``Ai = Ai(0) f + Ai'(0) g`` with ``f = sum a_k s^{3k}`` and
    ``g = sum b_k s^{3k+1}``.
    """
    s = np.asarray(s, dtype=float)
    f, g = np.zeros_like(s), np.zeros_like(s)
    fp, gp = np.zeros_like(s), np.zeros_like(s)
    a, b = 1.0, 1.0
    for k in range(30):
        f += a * s ** (3 * k)
        g += b * s ** (3 * k + 1)
        if k > 0:
            fp += 3 * k * a * s ** (3 * k - 1)
        gp += (3 * k + 1) * b * s ** (3 * k)
        a /= (3 * k + 2) * (3 * k + 3)
        b /= (3 * k + 3) * (3 * k + 4)
    return _AI0 * f + _AIP0 * g, _AI0 * fp + _AIP0 * gp


def _airy_asymptotic(s: float) -> tuple[float, float]:
    zeta = 2.0 / 3.0 * s**1.5
    # u_k of the standard expansion, a few terms suffice for zeta > 80
    u = [1.0, 5.0 / 72.0, 385.0 / 10368.0, 85085.0 / 2239488.0]
    v = [1.0, -7.0 / 72.0, -455.0 / 10368.0, -95095.0 / 2239488.0]
    su = sum((-1) ** k * c / zeta**k for k, c in enumerate(u))
    sv = sum((-1) ** k * c / zeta**k for k, c in enumerate(v))
    pref = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return pref * su / s**0.25, -pref * s**0.25 * sv


def _airy_rhs(s, y):
    return [y[1], s * y[0]]


@lru_cache(maxsize=1)
def _airy_branches():
    a0, d0 = _airy_asymptotic(_ASYMPTOTIC_START)
    # the recessive solution is dominant toward decreasing s, so integrate back
    right = solve_ivp(_airy_rhs, (_ASYMPTOTIC_START, _SERIES_EDGE), [a0, d0], method="DOP853",
                      rtol=1e-13, atol=1e-300, dense_output=True)
    ai, aip = airy_series(np.array(-_SERIES_EDGE))
    left = solve_ivp(_airy_rhs, (-_SERIES_EDGE, AIRY_RANGE[0]), [float(ai), float(aip)], method="DOP853",
                     rtol=1e-13, atol=1e-15, dense_output=True)
    return right.sol, left.sol


def airy_ai(s) -> np.ndarray | float:
    """``Ai(s)`` on ``[-20, 20]``: series near 0, ODE integration elsewhere."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr < AIRY_RANGE[0]) or np.any(arr > AIRY_RANGE[1]):
        raise ValueError(f"airy_ai validated on {AIRY_RANGE} only")
    out = np.empty_like(arr)
    mid = np.abs(arr) <= _SERIES_EDGE
    out[mid] = airy_series(arr[mid])[0]
    right, left = _airy_branches()
    hi = arr > _SERIES_EDGE
    lo = arr < -_SERIES_EDGE
    if hi.any():
        out[hi] = right(arr[hi])[0]
    if lo.any():
        out[lo] = left(arr[lo])[0]
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Painleve II

def left_branch_root(s: float, alpha: float) -> float:
    """Real root of ``s y + 2 y^3 + alpha = 0`` closest to ``sqrt(|s|/2)``."""
    roots = np.roots([2.0, 0.0, s, alpha])
    real = roots[np.abs(roots.imag) < 1e-9].real
    target = math.sqrt(abs(s) / 2.0)
    y = real[np.argmin(np.abs(real - target))]
    # polish
    for _ in range(3):
        y -= (s * y + 2 * y**3 + alpha) / (s + 6 * y**2)
    return float(y)


def _collocation_residual(y: np.ndarray, s: np.ndarray, h: float, alpha: float) -> np.ndarray:
    return (y[:-2] - 2 * y[1:-1] + y[2:]) / h**2 - s[1:-1] * y[1:-1] - 2 * y[1:-1] ** 3 - alpha


def collocation_residual(p: Profile1D, alpha: float = 0.0) -> float:
    """Max interior residual of the difference equation."""
    return float(np.max(np.abs(_collocation_residual(p.values, p.s, p.spacing, alpha))))


def _newton(y: np.ndarray, s: np.ndarray, h: float, alpha: float, max_iter: int = 50, tol: float = 1e-12):
    y = y.copy()
    m = y.size - 2
    ab = np.empty((3, m))
    for it in range(max_iter):
        F = _collocation_residual(y, s, h, alpha)
        ab[0, 1:] = 1.0 / h**2
        ab[2, :-1] = 1.0 / h**2
        ab[1] = -2.0 / h**2 - s[1:-1] - 6.0 * y[1:-1] ** 2
        dy = solve_banded((1, 1), ab, -F)
        y[1:-1] += dy
        if float(np.max(np.abs(dy))) < tol:
            return y, it + 1
    raise PainleveConvergenceError(f"Newton did not converge in {max_iter} iterations (alpha={alpha})")


def _check_domain(domain, n):
    s_min, s_max = domain
    if s_min > -8 or s_max < 6:
        raise ValueError("domain must contain [-8, 6]")
    if s_max > AIRY_RANGE[1]:
        raise ValueError(f"s_max beyond the Airy range {AIRY_RANGE}")
    if n < 101:
        raise ValueError("need at least 101 nodes")


def _profile(y, s_min, s_max):
    h = (s_max - s_min) / (y.size - 1)
    return Profile1D(s_min, s_max, y, np.gradient(y, h, edge_order=2))


@lru_cache(maxsize=8)
def _hm_cached(s_min: float, s_max: float, n: int) -> Profile1D:
    s = np.linspace(s_min, s_max, n)
    h = s[1] - s[0]
    blend = 0.5 * (1.0 - np.tanh(s))
    ai = airy_ai(np.clip(s, *AIRY_RANGE))
    y0 = blend * np.sqrt(np.maximum(-s, 0.0) / 2.0 + 0.25) + (1 - blend) * ai
    y0[0] = math.sqrt(abs(s_min) / 2.0)
    y0[-1] = float(airy_ai(s_max))
    y, _ = _newton(y0, s, h, 0.0)
    return _profile(y, s_min, s_max)


def hastings_mcleod(domain: tuple[float, float] = DEFAULT_DOMAIN, n: int = DEFAULT_NODES) -> Profile1D:
    """The positive decreasing solution with ``h ~ Ai`` at ``+inf`` and ``sqrt(|s|/2)`` at ``-inf``."""
    _check_domain(domain, n)
    return _hm_cached(float(domain[0]), float(domain[1]), int(n))


def painleve_solve_alpha(
    alpha: float,
    domain: tuple[float, float] = DEFAULT_DOMAIN,
    n: int = DEFAULT_NODES,
    max_step: float = 0.1,
) -> Profile1D:
    """Bounded solution of ``y'' = s y + 2 y^3 + alpha`` by continuation from ``alpha = 0``."""
    _check_domain(domain, n)
    s_min, s_max = float(domain[0]), float(domain[1])
    s = np.linspace(s_min, s_max, n)
    h = s[1] - s[0]
    y = hastings_mcleod(domain, n).values
    if alpha == 0:
        return _profile(y, s_min, s_max)
    steps = max(1, math.ceil(abs(alpha) / max_step - 1e-12))
    last = 0.0
    for k in range(1, steps + 1):
        al = alpha * k / steps
        guess = y.copy()
        guess[0] = left_branch_root(s_min, al)
        guess[-1] = float(airy_ai(s_max)) - al / s_max
        try:
            y, _ = _newton(guess, s, h, al)
        except (PainleveConvergenceError, np.linalg.LinAlgError) as exc:
            raise ContinuationError(
                f"continuation failed between alpha={last} and {al}: {exc}", last, _profile(y, s_min, s_max)
            ) from exc
        last = al
    return _profile(y, s_min, s_max)


def heteroclinic(x) -> np.ndarray:
    return np.tanh(np.asarray(x, dtype=float) / math.sqrt(2.0))


def profile_to_csv(p: Profile1D, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "y"])
        for s, y in zip(p.s, p.values):
            w.writerow([f"{s:.17g}", f"{y:.17g}"])


# ---------------------------------------------------------------------------
# boundary layer of a 2D field

def boundary_layer_alpha(config: ModelConfig, theta: float) -> float:
    """``a f1(xi) / (sqrt2 mu1)`` at ``xi = rho e^{i theta}``."""
    g = geometry(config)
    x = g.rho * math.cos(theta)
    y = g.rho * math.sin(theta)
    return config.a * float(f1(config, np.array(x), np.array(y))) / (math.sqrt(2.0) * g.mu1)


def rescale_boundary_layer(
    u: Field, config: ModelConfig, theta: float, s_range: tuple[float, float] = (-6.0, 6.0), n: int = 241
) -> Profile1D:
    """``w(s1) = 2^{-1/2} (-mu1 eps)^{-1/3} u(xi + eps^{2/3} s1 e / (-mu1)^{1/3})`` along the normal ``e``."""
    g = geometry(config)
    eps = config.epsilon
    k = (-g.mu1) ** (1.0 / 3.0)
    s1 = np.linspace(s_range[0], s_range[1], n)
    e = np.array([math.cos(theta), math.sin(theta)])
    pts = g.rho * e[None, :] + (eps ** (2.0 / 3.0) * s1 / k)[:, None] * e[None, :]
    if g.rho + eps ** (2.0 / 3.0) * s1[0] / k <= 0:
        raise ValueError("rescaled sampling line crosses the disc centre; shrink s_range or epsilon")
    L = config.grid.half_extent - 2.0 * config.grid.spacing
    if np.any(np.abs(pts) > L):
        raise ValueError("rescaled sampling line leaves the grid")
    vals = field_spline(u).ev(pts[:, 0], pts[:, 1])
    return Profile1D(s_range[0], s_range[1], vals / (math.sqrt(2.0) * (k**3 * eps) ** (1.0 / 3.0)))


def boundary_layer_compare(
    profile: Profile1D, alpha: float, domain: tuple[float, float] = DEFAULT_DOMAIN, n: int = DEFAULT_NODES
) -> float:
    """L-infinity distance to the Painleve profile, sign matched.

    ``-y`` solves the equation with ``-alpha``, so a profile that is negative
    on the bistable side is compared with ``-y_{-alpha}``.
    """
    sign = 1.0 if profile.values[0] >= 0 else -1.0
    ref = painleve_solve_alpha(sign * alpha, domain, n)
    s = profile.s
    if s[0] < ref.s_min or s[-1] > ref.s_max:
        raise ValueError("profile extends beyond the reference domain")
    return float(np.max(np.abs(profile.values - sign * ref(s))))
