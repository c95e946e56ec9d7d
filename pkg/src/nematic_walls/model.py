"""Illumination profile mu, forcing f, and the derived disc geometry.

The film sees a radial profile ``mu(x) = mu_rad(|x|)`` which is positive on a
disc of radius ``rho`` (bistable, two tilt states) and negative outside it.
The forcing is radial as well, ``f(x) = f_rad(|x|) x/|x|``.  The physical
case is the Gaussian beam ``mu = mu0 + I0 exp(-|x|^2/w^2)`` with
``f = -grad(mu)/2``; any uniformly tabulated radial pair can be used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect


class ConfigError(ValueError):
    """Invalid model or grid parameters."""


class ProfileRangeError(ValueError):
    """A tabulated profile was evaluated outside its table."""


class NoRootError(ValueError):
    """mu_rad has no sign change, so the bistable disc is empty."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform node grid on the square [-L, L]^2."""

    half_extent: float = 2.0
    nx: int = 201
    ny: int = 201

    def __post_init__(self):
        if self.nx < 16 or self.ny < 16:
            raise ConfigError(f"grid needs at least 16 nodes per axis, got {self.nx}x{self.ny}")
        if not self.half_extent > 0:
            raise ConfigError("grid half_extent must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / (self.nx - 1)

    @property
    def spacing_x2(self) -> float:
        return 2.0 * self.half_extent / (self.ny - 1)

    @classmethod
    def for_epsilon(cls, epsilon: float, half_extent: float = 2.0, per_epsilon: float = 2.5) -> "GridSpec":
        """Odd square grid with spacing close to ``epsilon / per_epsilon``."""
        n = math.ceil(2.0 * half_extent * per_epsilon / epsilon)
        n += n % 2  # n intervals even, so x = 0 is a node
        return cls(half_extent, n + 1, n + 1)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        L = self.half_extent
        return np.linspace(-L, L, self.nx), np.linspace(-L, L, self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates, indexed ``[i, j] -> (x1_i, x2_j)``."""
        x1, x2 = self.axes()
        return np.meshgrid(x1, x2, indexing="ij")


@dataclass(frozen=True)
class ToleranceSet:
    """Stopping rules for the gradient flow.

    ``dt=None`` selects ``min(1, 0.5 h^2/eps^2)`` at run time.
    """

    residual_tol: float = 1e-8
    dt: float | None = None
    max_steps: int = 20000
    energy_stall_tol: float = 1e-14

    def __post_init__(self):
        if not (self.residual_tol > 0 and self.max_steps > 0 and self.energy_stall_tol > 0):
            raise ConfigError("tolerances must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")


@dataclass(frozen=True)
class TabulatedProfile:
    """Radial profiles sampled uniformly on [0, r_max].

    ``mu_rad`` is interpolated by a cubic spline with ``mu'(0) = 0`` (even);
    ``f_rad`` by one with ``f''(0) = 0`` and ``f(0) = 0`` imposed (odd).
    Beyond ``r_max`` the forcing is extended by zero, while ``mu`` raises.
    """

    r_max: float
    mu_rad: tuple[float, ...]
    f_rad: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mu_rad", tuple(float(v) for v in self.mu_rad))
        object.__setattr__(self, "f_rad", tuple(float(v) for v in self.f_rad))
        if len(self.mu_rad) < 4 or len(self.mu_rad) != len(self.f_rad):
            raise ConfigError("tabulated profile needs >= 4 samples and equal lengths")
        if not self.r_max > 0:
            raise ConfigError("tabulated profile r_max must be positive")

    @classmethod
    def from_functions(cls, mu_fn, f_fn, r_max: float, n: int = 2001) -> "TabulatedProfile":
        r = np.linspace(0.0, r_max, n)
        return cls(r_max, tuple(mu_fn(r)), tuple(f_fn(r)))

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, len(self.mu_rad))


@lru_cache(maxsize=32)
def _splines(profile: TabulatedProfile) -> tuple[CubicSpline, CubicSpline]:
    r = profile.r
    mu_s = CubicSpline(r, profile.mu_rad, bc_type=((1, 0.0), "not-a-knot"))
    f_vals = np.array(profile.f_rad)
    f_vals[0] = 0.0
    f_s = CubicSpline(r, f_vals, bc_type=((2, 0.0), "not-a-knot"))
    return mu_s, f_s


@dataclass(frozen=True)
class ModelConfig:
    """Every physical and numerical parameter of one run.

    ``profile=None`` is the Gaussian beam built from ``mu0, I0, w``.
    ``f_scale`` multiplies the forcing (1 gives ``f = -grad(mu)/2``).
    """

    epsilon: float = 0.05
    a: float = 0.0
    mu0: float = -0.5
    I0: float = 1.0
    w: float = 1.0
    profile: TabulatedProfile | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    tolerances: ToleranceSet = field(default_factory=ToleranceSet)
    f_scale: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if not self.a >= 0:
            raise ConfigError("forcing amplitude a must be nonnegative")
        if not self.f_scale > 0:
            raise ConfigError("f_scale must be positive")
        if self.profile is None:
            if not (-self.I0 < self.mu0 < 0):
                raise ConfigError(f"need -I0 < mu0 < 0, got mu0={self.mu0}, I0={self.I0}")
            if not (self.I0 > 0 and self.w > 0):
                raise ConfigError("I0 and w must be positive")

    @property
    def profile_type(self) -> str:
        return "gaussian" if self.profile is None else "custom"

    def with_(self, **changes) -> "ModelConfig":
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# radial profiles

def mu_rad(config: ModelConfig, r) -> np.ndarray:
    r = np.abs(np.asarray(r, dtype=float))
    if config.profile is None:
        return config.mu0 + config.I0 * np.exp(-(r / config.w) ** 2)
    p = config.profile
    if np.any(r > p.r_max * (1 + 1e-12)):
        raise ProfileRangeError(f"|x|={float(np.max(r)):.6g} exceeds tabulated r_max={p.r_max}")
    return _splines(p)[0](r)


def dmu_rad(config: ModelConfig, r) -> np.ndarray:
    r = np.abs(np.asarray(r, dtype=float))
    if config.profile is None:
        return -2.0 * r / config.w**2 * config.I0 * np.exp(-(r / config.w) ** 2)
    p = config.profile
    d = 1e-6 * p.r_max
    hi = np.minimum(r + d, p.r_max)
    # mu_rad is even, so |r - d| keeps the stencil valid at the origin
    return (mu_rad(config, hi) - mu_rad(config, np.abs(hi - 2 * d))) / (2 * d)


def f_rad(config: ModelConfig, r) -> np.ndarray:
    r = np.abs(np.asarray(r, dtype=float))
    if config.profile is None:
        base = config.I0 / config.w**2 * r * np.exp(-(r / config.w) ** 2)
    else:
        p = config.profile
        inside = r <= p.r_max
        base = np.where(inside, _splines(p)[1](np.minimum(r, p.r_max)), 0.0)
    return config.f_scale * base


def dmu_over_f(config: ModelConfig, r) -> np.ndarray:
    """``-mu_rad'(r) / (sqrt(2) f_rad(r))``, the local balance ratio.

    This is the common limit of both threshold ratios at the rim and on the
    axis ``x1 = 0``.  Small radii are lifted to 1e-4 where both factors vanish.
    """
    r = np.maximum(np.abs(np.asarray(r, dtype=float)), 1e-4)
    return -dmu_rad(config, r) / (math.sqrt(2.0) * f_rad(config, r))


def mu(config: ModelConfig, x1, x2) -> np.ndarray:
    return mu_rad(config, np.hypot(x1, x2))


def forcing(config: ModelConfig, x1, x2) -> tuple[np.ndarray, np.ndarray]:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    r = np.hypot(x1, x2)
    safe = np.where(r > 0, r, 1.0)
    scale = np.where(r > 0, f_rad(config, r) / safe, 0.0)
    return scale * x1, scale * x2


def f1(config: ModelConfig, x1, x2) -> np.ndarray:
    return forcing(config, x1, x2)[0]


def mu_eval(config: ModelConfig, x) -> float:
    """mu at a single point ``x = (x1, x2)``."""
    return float(mu(config, x[0], x[1]))


def f_eval(config: ModelConfig, x) -> np.ndarray:
    """Forcing vector at a single point; the zero vector at the origin."""
    g1, g2 = forcing(config, x[0], x[1])
    return np.array([float(g1), float(g2)])


# ---------------------------------------------------------------------------
# geometry and hypotheses

@dataclass(frozen=True)
class ModelGeometry:
    rho: float
    mu1: float
    mu_origin: float


def geometry(config: ModelConfig) -> ModelGeometry:
    """Radius of the bistable disc and the slope of mu_rad there."""
    if config.profile is None:
        mu0, I0, w = config.mu0, config.I0, config.w
        if not (mu0 < 0 < mu0 + I0):
            raise NoRootError("mu_rad does not change sign")
        rho = w * math.sqrt(math.log(I0 / -mu0))
        return ModelGeometry(rho=rho, mu1=-(2 * rho / w**2) * (-mu0), mu_origin=mu0 + I0)
    p = config.profile
    m0 = float(mu_rad(config, 0.0))
    m_end = float(mu_rad(config, p.r_max))
    if not (m0 > 0 > m_end):
        raise NoRootError(f"mu_rad(0)={m0:.4g}, mu_rad(r_max)={m_end:.4g}: no sign change")
    rho = bisect(lambda r: float(mu_rad(config, r)), 0.0, p.r_max, xtol=1e-12)
    return ModelGeometry(rho=rho, mu1=float(dmu_rad(config, rho)), mu_origin=m0)


@dataclass
class HypothesisReport:
    checks: dict[str, bool]
    details: dict[str, str]
    f_prime_origin_positive: bool

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]


def validate_hypotheses(config: ModelConfig, n: int = 20001) -> HypothesisReport:
    """Sample the radial profiles on (0, 2L] and test the standing assumptions.

    Tabulated profiles are only sampled where the table exists.
    """
    r_end = 2.0 * config.grid.half_extent
    if config.profile is not None:
        r_end = min(r_end, config.profile.r_max)
    r = np.linspace(0.0, r_end, n)[1:]
    m = mu_rad(config, r)
    dm = dmu_rad(config, r)
    fr = f_rad(config, r)
    sign_changes = int(np.count_nonzero(np.diff(np.sign(m)) != 0))
    checks = {
        "mu_decreasing": bool(np.all(dm < 0)) and bool(np.all(np.diff(m) < 0)),
        "unique_zero": sign_changes == 1 and float(mu_rad(config, 0.0)) > 0,
        "f_positive": bool(np.all(fr > 0)),
        "bounded": bool(np.all(np.isfinite(m)) and np.all(np.isfinite(fr))),
    }
    details = {
        "mu_decreasing": f"max mu_rad' = {float(np.max(dm)):.3e}",
        "unique_zero": f"{sign_changes} sign change(s) of mu_rad on (0, {r_end:.3g}]",
        "f_positive": f"min f_rad = {float(np.min(fr)):.3e}",
        "bounded": "finite samples" if checks["bounded"] else "non-finite samples",
    }
    d = 1e-5 * r_end
    fp0 = float(f_rad(config, d)) / d
    # relative to the profile's own slope scale, so interpolation noise on a
    # table with f'(0) = 0 does not read as positive
    scale = float(np.max(np.abs(fr))) / r_end
    return HypothesisReport(checks, details, f_prime_origin_positive=fp0 > 1e-6 * scale)


# ---------------------------------------------------------------------------
# flat JSON form

def config_to_dict(config: ModelConfig) -> dict[str, Any]:
    out: dict[str, Any] = {
        "epsilon": config.epsilon,
        "a": config.a,
        "mu0": config.mu0,
        "I0": config.I0,
        "w": config.w,
        "f_scale": config.f_scale,
        "grid.half_extent": config.grid.half_extent,
        "grid.nx": config.grid.nx,
        "grid.ny": config.grid.ny,
        "profile.type": config.profile_type,
        "tol.residual": config.tolerances.residual_tol,
        "tol.dt": config.tolerances.dt,
        "tol.max_steps": config.tolerances.max_steps,
        "tol.energy_stall": config.tolerances.energy_stall_tol,
    }
    if config.profile is not None:
        out["profile.r_max"] = config.profile.r_max
        out["profile.mu_rad"] = list(config.profile.mu_rad)
        out["profile.f_rad"] = list(config.profile.f_rad)
    return out


_KNOWN_KEYS = {
    "epsilon", "a", "mu0", "I0", "w", "f_scale",
    "grid.half_extent", "grid.nx", "grid.ny",
    "profile.type", "profile.r_max", "profile.mu_rad", "profile.f_rad",
    "tol.residual", "tol.dt", "tol.max_steps", "tol.energy_stall",
}


def config_from_dict(data: dict[str, Any]) -> ModelConfig:
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = ModelConfig()
    ptype = data.get("profile.type", "gaussian")
    if ptype == "gaussian":
        profile = None
    elif ptype == "custom":
        try:
            profile = TabulatedProfile(
                float(data["profile.r_max"]), data["profile.mu_rad"], data["profile.f_rad"]
            )
        except KeyError as exc:
            raise ConfigError(f"custom profile needs key {exc}") from None
    else:
        raise ConfigError(f"profile.type must be 'gaussian' or 'custom', got {ptype!r}")
    grid = GridSpec(
        float(data.get("grid.half_extent", base.grid.half_extent)),
        int(data.get("grid.nx", base.grid.nx)),
        int(data.get("grid.ny", data.get("grid.nx", base.grid.ny))),
    )
    dt = data.get("tol.dt", None)
    tols = ToleranceSet(
        residual_tol=float(data.get("tol.residual", base.tolerances.residual_tol)),
        dt=None if dt is None else float(dt),
        max_steps=int(data.get("tol.max_steps", base.tolerances.max_steps)),
        energy_stall_tol=float(data.get("tol.energy_stall", base.tolerances.energy_stall_tol)),
    )
    return ModelConfig(
        epsilon=float(data.get("epsilon", base.epsilon)),
        a=float(data.get("a", base.a)),
        mu0=float(data.get("mu0", base.mu0)),
        I0=float(data.get("I0", base.I0)),
        w=float(data.get("w", base.w)),
        f_scale=float(data.get("f_scale", base.f_scale)),
        profile=profile,
        grid=grid,
        tolerances=tols,
    )
