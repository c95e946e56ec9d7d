"""Critical forcing amplitudes of the wall transition.

On the slice ``x2 = const`` of the disc ``{mu > 0}`` let ``c = sqrt(rho^2 - x2^2)``
and

    G(t) = int_{-c}^{t} |f1(s, x2)| sqrt(mu(s, x2)) ds,    -c <= t <= 0.

The lower threshold is the infimum over the left half-disc of
``sqrt2 mu^{3/2} / (3 G)`` and the upper one the supremum of
``sqrt2 (mu(0,x2)^{3/2} - mu^{3/2}) / (3 (G(0) - G))``.  Both ratios are 0/0 at
one end of the slice (the rim for the first, the axis for the second); by
l'Hopital both limits equal ``lambda(r) = -mu_rad'(r) / (sqrt2 f_rad(r))`` at
the corresponding radius, which is how the endpoints are evaluated.

Slices are parametrised by ``t = -c + tau^2`` so that the square-root zero of
``mu`` at the rim becomes a smooth zero of the integrand in ``tau``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelConfig, dmu_over_f, f_rad, geometry, mu_rad, validate_hypotheses
from .quadrature import adaptive_simpson, golden_section

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
LHOPITAL_GAP = 1e-4
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


class OutOfDiscError(ValueError):
    pass


@dataclass
class ThresholdReport:
    a_star: float
    a_star_sup: float
    middle_bound: float
    slices: np.ndarray  # rows (x2, a_*(x2), a^*(x2))
    argmin: tuple[float, float]
    argmax: tuple[float, float]
    error_bar: float = 0.0
    f_prime_origin_positive: bool = True
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "a_star": self.a_star,
            "a_star_sup": self.a_star_sup,
            "middle_bound": self.middle_bound,
            "argmin": list(self.argmin),
            "argmax": list(self.argmax),
            "error_bar": self.error_bar,
            "f_prime_origin_positive": self.f_prime_origin_positive,
            "warnings": list(self.warnings),
            "slices": self.slices.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ThresholdReport":
        return cls(
            float(d["a_star"]), float(d["a_star_sup"]), float(d["middle_bound"]),
            np.asarray(d["slices"], dtype=float).reshape(-1, 3),
            tuple(d["argmin"]), tuple(d["argmax"]), float(d["error_bar"]),
            bool(d["f_prime_origin_positive"]), list(d["warnings"]),
        )


class _Slice:
    """Quadrature state for one chord ``x2 = const``."""

    def __init__(self, config: ModelConfig, x2: float, n_t: int, rtol: float):
        rho = geometry(config).rho
        if not abs(x2) < rho:
            raise OutOfDiscError(f"|x2| = {abs(x2)} is not inside the disc of radius {rho}")
        self.config = config
        self.x2 = abs(float(x2))
        self.c = math.sqrt(rho**2 - self.x2**2)
        self.rtol = rtol
        self.tau = np.linspace(0.0, math.sqrt(self.c), n_t)
        # roundoff floor scaled to the chord integral itself; rim slices are tiny
        coarse = np.abs(self._integrand(self.tau))
        scale = float(np.sum(coarse)) * (self.tau[1] - self.tau[0])
        pieces = adaptive_simpson(
            self._integrand, self.tau[:-1], self.tau[1:], rtol=rtol, atol=1e-15 * scale / n_t
        )
        self.G = np.concatenate([[0.0], np.cumsum(pieces)])
        self.mu_axis = float(self._mu_tau(np.array([math.sqrt(self.c)]))[0][0])
        self.lam_rim = float(dmu_over_f(config, rho))
        self.lam_axis = float(dmu_over_f(config, self.x2))

    def _mu_tau(self, tau):
        """``(mu, r)`` at ``t = -c + tau^2``, free of cancellation near the rim."""
        t = -self.c + tau * tau
        r = np.hypot(t, self.x2)
        cfg = self.config
        if cfg.profile is None:
            # rho^2 - r^2 = tau^2 (2c - tau^2) exactly on the chord
            gap = tau * tau * (2.0 * self.c - tau * tau)
            m = -cfg.mu0 * np.expm1(gap / cfg.w**2)
        else:
            m = mu_rad(cfg, r)
        return np.maximum(m, 0.0), r

    def _mu32_drop(self, tau, m):
        """``mu(0,x2)^{3/2} - mu(t,x2)^{3/2}``."""
        cfg = self.config
        if cfg.profile is None:
            t = -self.c + tau * tau
            diff = -cfg.I0 * math.exp(-(self.x2 / cfg.w) ** 2) * np.expm1(-(t / cfg.w) ** 2)
        else:
            diff = self.mu_axis - m
        a, b = self.mu_axis, m
        sa, sb = math.sqrt(a), np.sqrt(b)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(sa + sb > 0, diff * (a + sa * sb + b) / (sa + sb), 0.0)

    def _integrand(self, tau):
        t = -self.c + tau * tau
        m, r = self._mu_tau(tau)
        r_safe = np.where(r > 0, r, 1.0)
        f1_abs = np.where(r > 0, f_rad(self.config, r) * np.abs(t) / r_safe, 0.0)
        return f1_abs * np.sqrt(m) * 2.0 * tau

    def G_at(self, tau: float) -> float:
        k = int(np.clip(np.searchsorted(self.tau, tau) - 1, 0, self.tau.size - 2))
        if tau == self.tau[k]:
            return float(self.G[k])
        # partial mesh cell: the integrand is smooth in tau, a fixed Gauss rule suffices
        lo = self.tau[k]
        half = 0.5 * (tau - lo)
        piece = half * float(np.dot(_GL_W, self._integrand(lo + half * (_GL_X + 1.0))))
        return float(self.G[k] + piece)

    def lower_ratio(self, tau, G=None) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if G is None:
            G = np.array([self.G_at(x) for x in tau])
        m, _ = self._mu_tau(tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = SQRT2 * m**1.5 / (3.0 * G)
        return np.where(tau == 0.0, self.lam_rim, out)

    def upper_ratio(self, tau, G=None) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if G is None:
            G = np.array([self.G_at(x) for x in tau])
        t = -self.c + tau * tau
        m, _ = self._mu_tau(tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = SQRT2 * self._mu32_drop(tau, m) / (3.0 * (self.G[-1] - G))
        return np.where(np.abs(t) < LHOPITAL_GAP, self.lam_axis, out)

    def _refine(self, ratio, values, sign) -> tuple[float, float]:
        k = int(np.argmin(sign * values))
        lo = self.tau[max(k - 1, 0)]
        hi = self.tau[min(k + 1, self.tau.size - 1)]
        tau, v = golden_section(lambda s: sign * float(ratio(s)[0]), lo, hi, xtol=1e-7 * max(hi, 1e-12))
        v = sign * v
        if sign * values[k] <= sign * v:
            return float(self.tau[k]), float(values[k])
        return tau, v

    def lower(self) -> tuple[float, float]:
        """``(t, a_*(x2))`` with the minimizing abscissa."""
        vals = self.lower_ratio(self.tau, self.G)
        tau, v = self._refine(self.lower_ratio, vals, +1.0)
        return -self.c + tau * tau, v

    def upper(self) -> tuple[float, float]:
        vals = self.upper_ratio(self.tau, self.G)
        tau, v = self._refine(self.upper_ratio, vals, -1.0)
        return -self.c + tau * tau, v

    def full_integral(self) -> float:
        return 2.0 * float(self.G[-1])


def _x2_mesh(rho: float, n: int) -> np.ndarray:
    # cosine clustering toward the rim, where slices shorten
    j = np.arange(n)
    return rho * np.sin(0.5 * math.pi * j / n)


def threshold_slices(config: ModelConfig, x2_values, n_t: int = 201, rtol: float = 1e-9) -> np.ndarray:
    """Rows ``(a_*(x2), a^*(x2))`` for each requested ``x2`` with ``|x2| < rho``."""
    x2_values = np.atleast_1d(np.asarray(x2_values, dtype=float))
    out = np.empty((x2_values.size, 2))
    for i, x2 in enumerate(x2_values):
        s = _Slice(config, x2, n_t, rtol)
        out[i] = s.lower()[1], s.upper()[1]
    return out


def _scan(config: ModelConfig, n_x2: int, n_t: int, rtol: float, side: str):
    """Extremum of one threshold ratio over the half-disc: ``(value, (x1, x2), rows)``."""
    rho = geometry(config).rho
    xs = _x2_mesh(rho, n_x2)
    evaluate = _Slice.lower if side == "lower" else _Slice.upper
    sign = 1.0 if side == "lower" else -1.0
    found = [evaluate(_Slice(config, x2, n_t, rtol)) for x2 in xs]
    vals = np.array([v for _, v in found])
    k = int(np.argmin(sign * vals))
    best_v, best_at = float(vals[k]), (found[k][0], float(xs[k]))

    lo_x = xs[max(k - 1, 0)]
    hi_x = xs[k + 1] if k + 1 < xs.size else rho * (1 - 1e-9)
    x_r, v_r = golden_section(
        lambda x2: sign * evaluate(_Slice(config, x2, n_t, rtol))[1], lo_x, hi_x, xtol=1e-6
    )
    if v_r < sign * best_v:
        t_r, best_v = evaluate(_Slice(config, x_r, n_t, rtol))
        best_at = (t_r, x_r)
    return best_v, best_at, np.column_stack([xs, vals])


def middle_bound(config: ModelConfig, rtol: float = 1e-10) -> float:
    """``2 sqrt2 int_{-rho}^{rho} mu_rad^{3/2} / (3 int_D |f1| sqrt(mu))``."""
    return 2.0 * SQRT2 * wall_line_integral(config, rtol) / (3.0 * forcing_disc_integral(config, rtol))


def wall_line_integral(config: ModelConfig, rtol: float = 1e-10) -> float:
    """``int_{-rho}^{rho} mu_rad(r)^{3/2} dr`` (with ``r = rho - tau^2``)."""
    rho = geometry(config).rho

    def g(tau):
        r = rho - tau * tau
        return np.maximum(mu_rad(config, r), 0.0) ** 1.5 * 2.0 * tau

    return 2.0 * float(adaptive_simpson(g, 0.0, math.sqrt(rho), rtol=rtol))


def forcing_disc_integral(config: ModelConfig, rtol: float = 1e-10) -> float:
    """``int_{D(0,rho)} |f1| sqrt(mu)``; the angular factor ``int |cos| = 4`` is exact."""
    rho = geometry(config).rho

    def g(tau):
        r = rho - tau * tau
        return f_rad(config, r) * np.sqrt(np.maximum(mu_rad(config, r), 0.0)) * r * 2.0 * tau

    return 4.0 * float(adaptive_simpson(g, 0.0, math.sqrt(rho), rtol=rtol))


def energy_upper_bound(config: ModelConfig) -> float:
    """Limit bound ``min(0, (2 sqrt2/3) int mu_rad^{3/2} - a int_D |f1| sqrt(mu))`` on the renormalized energy."""
    wall = 2.0 * SQRT2 / 3.0 * wall_line_integral(config)
    return min(0.0, wall - config.a * forcing_disc_integral(config))


def threshold_report(config: ModelConfig, mesh: tuple[int, int] = (96, 201), rtol: float = 1e-9) -> ThresholdReport:
    n_x2, n_t = mesh
    hyp = validate_hypotheses(config)
    warnings = []
    if not hyp.f_prime_origin_positive:
        msg = "f_rad'(0) <= 0: the upper threshold need not be finite; reporting the mesh supremum"
        log.warning(msg)
        warnings.append(msg)
    a_lo, arg_lo, rows_lo = _scan(config, n_x2, n_t, rtol, "lower")
    a_hi, arg_hi, rows_hi = _scan(config, n_x2, n_t, rtol, "upper")
    coarse = (max(n_x2 // 2, 4), max(n_t // 2 + 1, 5))
    err = max(
        abs(a_lo - _scan(config, *coarse, rtol, "lower")[0]),
        abs(a_hi - _scan(config, *coarse, rtol, "upper")[0]),
    )
    rows = np.column_stack([rows_lo, rows_hi[:, 1]])
    return ThresholdReport(
        a_star=a_lo,
        a_star_sup=a_hi,
        middle_bound=middle_bound(config),
        slices=rows,
        argmin=arg_lo,
        argmax=arg_hi,
        error_bar=err,
        f_prime_origin_positive=hyp.f_prime_origin_positive,
        warnings=warnings,
    )


def threshold_a_star(config: ModelConfig, mesh: tuple[int, int] = (96, 201)) -> float:
    return _scan(config, *mesh, 1e-9, "lower")[0]


def threshold_a_star_sup(config: ModelConfig, mesh: tuple[int, int] = (96, 201)) -> float:
    hyp = validate_hypotheses(config)
    if not hyp.f_prime_origin_positive:
        log.warning("f_rad'(0) <= 0: the upper threshold need not be finite")
    return _scan(config, *mesh, 1e-9, "upper")[0]


def beta_functions(config: ModelConfig, a: float, x) -> tuple[float, float]:
    """The auxiliary functions whose signs at ``a`` characterise the two thresholds."""
    x1, x2 = float(x[0]), float(x[1])
    rho = geometry(config).rho
    r = math.hypot(x1, x2)
    if x1 > 0 or r > rho * (1 + 1e-12):
        raise OutOfDiscError(f"point {x} outside the closed left half-disc")
    if abs(x2) >= rho:
        return 0.0, 0.0
    s = _Slice(config, x2, 33, 1e-10)
    tau = math.sqrt(max(x1 + s.c, 0.0))
    G = s.G_at(tau)
    m, _ = s._mu_tau(np.array([tau]))
    b_lo = SQRT2 / 3.0 * float(m[0]) ** 1.5 - a * G
    b_hi = SQRT2 / 3.0 * float(s._mu32_drop(np.array([tau]), m)[0]) - a * (float(s.G[-1]) - G)
    return b_lo, b_hi
