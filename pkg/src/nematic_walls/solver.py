"""Stationary states of the film by semi-implicit gradient flow.

One step of ``u_t = eps^2 Lap u + mu u - u^3 + eps a f1`` treats diffusion
implicitly and the reaction explicitly,

    (I - dt eps^2 Lap_h) u+ = u + dt (mu u - u^3 + eps a f1),

with homogeneous Dirichlet data on the box.  The 5-point Dirichlet Laplacian
is diagonal in the type-I sine basis, so each step costs two DSTs.  A step
that raises the discrete energy is retried with ``dt/2``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy.fft import dstn, idstn

from .energy import EnergyBreakdown, coefficients, energy_total
from .fields import Field, GridMismatchError
from .model import ModelConfig, ToleranceSet, geometry, mu_rad

log = logging.getLogger(__name__)

WALL_BETA = 0.4
RANDOM_SEED = 42
RESIDUAL_EVERY = 10
STALL_WINDOW = 500
TIE_RTOL = 1e-10


class DivergenceError(RuntimeError):
    pass


class NoConvergenceError(RuntimeError):
    def __init__(self, message: str, best: "SolveResult | None" = None):
        super().__init__(message)
        self.best = best


@dataclass
class SolveResult:
    field: Field
    energy: EnergyBreakdown
    residual: float
    steps_taken: int
    initializer_label: str
    converged: bool
    dt: float = 0.0
    candidates: dict[str, dict] = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "initializer": self.initializer_label,
            "converged": self.converged,
            "residual": self.residual,
            "steps": self.steps_taken,
            "dt": self.dt,
            "energy": self.energy.total,
            "renormalized": self.energy.renormalized,
        }


# ---------------------------------------------------------------------------
# comparison functions used as initializers

def thomas_fermi_profile(config: ModelConfig, x1, x2) -> np.ndarray:
    """The C^0 Thomas-Fermi cap with a linear ramp of width eps^(2/3) at the rim."""
    rho = geometry(config).rho
    delta = min(config.epsilon ** (2.0 / 3.0), rho)
    r = np.hypot(x1, x2)
    inner = r <= rho - delta
    ramp_top = math.sqrt(max(float(mu_rad(config, rho - delta)), 0.0))
    out = np.zeros_like(r)
    out[inner] = np.sqrt(np.maximum(mu_rad(config, r[inner]), 0.0))
    collar = (~inner) & (r <= rho)
    out[collar] = ramp_top * (rho - r[collar]) / delta
    return out


def thomas_fermi_ansatz(config: ModelConfig, sign: int = 1) -> Field:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    X1, X2 = config.grid.mesh()
    return Field(config.grid, sign * thomas_fermi_profile(config, X1, X2))


def wall_amplitude(config: ModelConfig, x2, beta: float = WALL_BETA) -> np.ndarray:
    """Amplitude ``l(x2)`` that glues the tanh ridge to the cap at ``|x1| = eps zeta``."""
    eps = config.epsilon
    zeta = eps ** (-beta)
    rho = geometry(config).rho
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    cap_edge = thomas_fermi_profile(config, np.full_like(x2, eps * zeta), x2)
    cap_axis = thomas_fermi_profile(config, np.zeros_like(x2), x2)
    reach = math.sqrt(max(rho**2 - (eps * zeta) ** 2, 0.0))
    th = np.tanh(zeta * cap_axis / math.sqrt(2.0))
    ok = (np.abs(x2) <= reach) & (th > 0)
    return np.where(ok, cap_edge / np.where(ok, th, 1.0), 0.0)


def wall_ansatz(config: ModelConfig, beta: float = WALL_BETA) -> Field:
    """Odd ridge: a tanh wall on ``x1 = 0`` glued to the signed cap."""
    eps = config.epsilon
    zeta = eps ** (-beta)
    X1, X2 = config.grid.mesh()
    cap = thomas_fermi_profile(config, X1, X2)
    x2 = X2[0]
    amp = wall_amplitude(config, x2, beta)[None, :]
    axis = thomas_fermi_profile(config, np.zeros_like(x2), x2)[None, :]
    ridge = amp * np.tanh(X1 * axis / (math.sqrt(2.0) * eps))
    vals = np.where(np.abs(X1) <= eps * zeta, ridge, np.sign(X1) * cap)
    return Field(config.grid, vals)


def random_initializer(config: ModelConfig, seed: int = RANDOM_SEED) -> Field:
    rng = np.random.default_rng(seed)
    return Field(config.grid, rng.uniform(-0.1, 0.1, size=(config.grid.nx, config.grid.ny)))


# ---------------------------------------------------------------------------
# residual and time stepping

def _laplacian_interior(v: np.ndarray, hx: float, hy: float) -> np.ndarray:
    c = v[1:-1, 1:-1]
    return (v[2:, 1:-1] - 2 * c + v[:-2, 1:-1]) / hx**2 + (v[1:-1, 2:] - 2 * c + v[1:-1, :-2]) / hy**2


def _residual(v, m, g1, config: ModelConfig) -> float:
    eps = config.epsilon
    lap = _laplacian_interior(v, config.grid.spacing, config.grid.spacing_x2)
    c = v[1:-1, 1:-1]
    r = eps**2 * lap + (m[1:-1, 1:-1] - c * c) * c + eps * config.a * g1[1:-1, 1:-1]
    return float(np.max(np.abs(r))) if r.size else 0.0


def pde_residual(u: Field, config: ModelConfig) -> float:
    """Max over interior nodes of ``|eps^2 Lap_h u + mu u - u^3 + eps a f1|``."""
    if u.grid != config.grid:
        raise GridMismatchError("field grid differs from config grid")
    m, g1, *_ = coefficients(config)
    return _residual(u.values, m, g1, config)


def default_dt(config: ModelConfig) -> float:
    h = min(config.grid.spacing, config.grid.spacing_x2)
    return min(1.0, 0.5 * h**2 / config.epsilon**2)


def _dirichlet_symbol(n: int, h: float) -> np.ndarray:
    k = np.arange(1, n - 1)
    return -4.0 / h**2 * np.sin(np.pi * k / (2 * (n - 1))) ** 2


def apriori_amplitude(config: ModelConfig, init: np.ndarray | None = None) -> float:
    """Bound on the roots of ``u^3 - mu u - eps a f1`` over the grid."""
    m, g1, *_ = coefficients(config)
    b = math.sqrt(max(float(np.max(m)), 0.0)) + (config.epsilon * config.a * float(np.max(np.abs(g1)))) ** (1 / 3)
    if init is not None:
        b = max(b, float(np.max(np.abs(init))))
    return max(b, 1e-12)


def gradient_flow_run(
    init: Field,
    config: ModelConfig,
    label: str = "custom",
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> SolveResult:
    """Run the flow from ``init`` until the residual meets ``residual_tol``."""
    if init.grid != config.grid:
        raise GridMismatchError("initial field grid differs from config grid")
    tols: ToleranceSet = config.tolerances
    eps, a = config.epsilon, config.a
    grid = config.grid
    hx, hy = grid.spacing, grid.spacing_x2
    m, g1, _, wx, wy = coefficients(config)
    W = np.outer(wx, wy)
    lam = _dirichlet_symbol(grid.nx, hx)[:, None] + _dirichlet_symbol(grid.ny, hy)[None, :]
    m_in = m[1:-1, 1:-1]
    src = eps * a * g1[1:-1, 1:-1]
    # energy = sum(gx dx^2) + sum(gy dy^2) + sum(v^2 (c2 + c4 v^2) + c1 v)
    gx = np.broadcast_to(0.5 * eps * wy[None, :] / hx, (grid.nx - 1, grid.ny))
    gy = np.broadcast_to(0.5 * eps * wx[:, None] / hy, (grid.nx, grid.ny - 1))
    c2 = -W * m / (2 * eps)
    c4 = W / (4 * eps)
    c1 = -a * W * g1

    def energy(v):
        dx = v[1:] - v[:-1]
        dy = v[:, 1:] - v[:, :-1]
        v2 = v * v
        return float(np.vdot(gx, dx * dx) + np.vdot(gy, dy * dy) + np.vdot(v2, c2 + c4 * v2) + np.vdot(c1, v))

    v = init.values.copy()
    v[0, :] = v[-1, :] = v[:, 0] = v[:, -1] = 0.0
    bound = 10.0 * apriori_amplitude(config, v)
    dt = tols.dt if tols.dt is not None else default_dt(config)
    denom = 1.0 - dt * eps**2 * lam
    e_old = energy(v)
    stall = 0
    stall_res = math.inf
    res = _residual(v, m, g1, config)
    steps = 0
    converged = False
    while steps < tols.max_steps:
        c = v[1:-1, 1:-1]
        rhs = c + dt * ((m_in - c * c) * c + src)
        new = v.copy()
        new[1:-1, 1:-1] = idstn(dstn(rhs, type=1) / denom, type=1)
        e_new = energy(new)
        if e_new > e_old + 1e-12 * max(1.0, abs(e_old)):
            if dt < 1e-12:
                raise DivergenceError(f"[{label}] time step underflow at step {steps}")
            dt *= 0.5
            denom = 1.0 - dt * eps**2 * lam
            log.debug("[%s] energy rose at step %d, dt -> %.3g", label, steps, dt)
            continue
        steps += 1
        peak = float(np.max(np.abs(new)))
        if not np.isfinite(peak) or peak > bound:
            raise DivergenceError(f"[{label}] |u| = {peak:.3g} exceeds 10x a-priori bound at step {steps}")
        change = abs(e_new - e_old)
        v, e_old = new, e_new
        if callback is not None:
            callback(steps, v)
        # the residual costs as much as a step; sample it sparsely
        if steps == 1 or steps % RESIDUAL_EVERY == 0 or steps == tols.max_steps:
            res = _residual(v, m, g1, config)
            if res <= tols.residual_tol:
                converged = True
                break
        if change < tols.energy_stall_tol * max(1.0, abs(e_new)):
            if stall == 0:
                stall_res = _residual(v, m, g1, config)
            stall += 1
        else:
            stall = 0
        if stall >= STALL_WINDOW:
            # flat energy alone is normal close to convergence; quit only if
            # the residual has stopped improving as well
            res = _residual(v, m, g1, config)
            if res > 0.99 * stall_res:
                log.info("[%s] stalled at step %d, residual %.3g", label, steps, res)
                break
            stall = 0
    u = Field(grid, v)
    return SolveResult(
        field=u,
        energy=energy_total(u, config),
        residual=res,
        steps_taken=steps,
        initializer_label=label,
        converged=converged,
        dt=dt,
    )


def default_initializers(config: ModelConfig, seed: int = RANDOM_SEED) -> dict[str, Field]:
    return {
        "tf_plus": thomas_fermi_ansatz(config, +1),
        "tf_minus": thomas_fermi_ansatz(config, -1),
        "wall": wall_ansatz(config),
        "zero": Field.zeros(config.grid),
        "random": random_initializer(config, seed),
    }


def minimize_multistart(
    config: ModelConfig,
    seed: int = RANDOM_SEED,
    labels: Iterable[str] | None = None,
    extra: dict[str, Field] | None = None,
) -> SolveResult:
    """Lowest-energy converged state over the standard initializers.

    ``labels`` restricts the standard set; ``extra`` adds warm starts.  Every
    candidate's energy, residual and convergence flag is kept in
    ``result.candidates``.
    """
    inits = default_initializers(config, seed)
    if labels is not None:
        inits = {k: inits[k] for k in labels}
    if extra:
        inits.update(extra)
    results: dict[str, SolveResult] = {}
    for name, init in inits.items():
        try:
            results[name] = gradient_flow_run(init, config, label=name)
        except DivergenceError as exc:
            log.warning("%s", exc)
    table = {
        k: {"energy": r.energy.total, "renormalized": r.energy.renormalized,
            "residual": r.residual, "converged": r.converged, "steps": r.steps_taken}
        for k, r in results.items()
    }
    done = [r for r in results.values() if r.converged]
    if not done:
        best = min(results.values(), key=lambda r: r.energy.total, default=None)
        if best is not None:
            best.candidates = table
        raise NoConvergenceError("no initializer converged", best)
    # energies equal to roundoff (mirror branches, or a random start landing
    # on the same state) count as ties and go to the first label in order
    e_min = min(r.energy.total for r in done)
    cut = e_min + TIE_RTOL * max(1.0, abs(e_min))
    winner = next(r for r in done if r.energy.total <= cut)
    winner.candidates = table
    return winner
