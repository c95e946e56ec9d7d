"""Domain walls as zero level sets, and checks of the limiting profiles.

The zero set is traced by marching squares with linear interpolation on cell
edges.  Ambiguous (saddle) cells are split according to the sign of the cell
average, and exact zeros count as ``+1e-15`` so every crossing lies on an edge
with a strict sign change.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .energy import coefficients
from .fields import Field, field_spline
from .model import ModelConfig, geometry, mu_rad
from .thresholds import ThresholdReport

ZERO_NUDGE = 1e-15
DEFAULT_NOISE_FLOOR = 1e-12
CONSISTENCY_RADIUS = 5.0  # in units of epsilon

REGIMES = ("shadow_wall", "standard_wall", "indeterminate", "no_wall")


class NotApplicableError(ValueError):
    pass


@dataclass
class ZeroSet:
    polylines: list[np.ndarray] = field(default_factory=list)
    closed: list[bool] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.polylines

    @property
    def vertices(self) -> np.ndarray:
        if self.empty:
            return np.empty((0, 2))
        return np.concatenate(self.polylines)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["polyline_id", "x1", "x2"])
            for k, line in enumerate(self.polylines):
                for x1, x2 in line:
                    w.writerow([k, f"{x1:.17g}", f"{x2:.17g}"])


# ---------------------------------------------------------------------------
# marching squares

# cell edges: 0 bottom (x2 = x2_j), 1 right (x1 = x1_{i+1}), 2 top, 3 left


def _edge_key(i: int, j: int, e: int) -> tuple:
    if e == 0:
        return ("h", i, j)
    if e == 1:
        return ("v", i + 1, j)
    if e == 2:
        return ("h", i, j + 1)
    return ("v", i, j)


def extract_zero_set(
    u: Field, noise_floor: float = 0.0, exclude_boundary: bool = False
) -> ZeroSet:
    """Polylines of ``{u = 0}``.

    ``noise_floor`` (relative to ``max|u|``) skips cells whose four corner
    values are all below it in magnitude; sign changes there are roundoff.
    ``exclude_boundary`` skips cells touching the outer node ring, where the
    Dirichlet data are identically zero.
    """
    V = np.where(u.values == 0.0, ZERO_NUDGE, u.values)
    x1, x2 = u.grid.axes()
    pos = V > 0
    nx, ny = V.shape

    bl, br, tr, tl = pos[:-1, :-1], pos[1:, :-1], pos[1:, 1:], pos[:-1, 1:]
    active = ~((bl == br) & (br == tr) & (tr == tl))
    if noise_floor > 0:
        A = np.abs(V)
        cap = noise_floor * float(np.max(A))
        big = np.maximum.reduce([A[:-1, :-1], A[1:, :-1], A[1:, 1:], A[:-1, 1:]])
        active &= big >= cap
    if exclude_boundary:
        active[0, :] = active[-1, :] = active[:, 0] = active[:, -1] = False

    def point(key):
        kind, i, j = key
        if kind == "h":
            a, b = V[i, j], V[i + 1, j]
            s = a / (a - b)
            return (x1[i] + s * (x1[i + 1] - x1[i]), x2[j])
        a, b = V[i, j], V[i, j + 1]
        s = a / (a - b)
        return (x1[i], x2[j] + s * (x2[j + 1] - x2[j]))

    adj: dict[tuple, list[tuple]] = {}

    def link(p, q):
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)

    for i, j in zip(*np.nonzero(active)):
        c = (pos[i, j], pos[i + 1, j], pos[i + 1, j + 1], pos[i, j + 1])
        # edge e joins corners e and e+1 (counter-clockwise from bottom-left)
        cut = [e for e in range(4) if c[e] != c[(e + 1) % 4]]
        keys = [_edge_key(i, j, e) for e in cut]
        if len(cut) == 2:
            link(keys[0], keys[1])
            continue
        centre = 0.25 * (V[i, j] + V[i + 1, j] + V[i + 1, j + 1] + V[i, j + 1]) > 0
        if centre == c[0]:
            # bottom-left joins the centre: isolate bottom-right and top-left
            link(_edge_key(i, j, 0), _edge_key(i, j, 1))
            link(_edge_key(i, j, 2), _edge_key(i, j, 3))
        else:
            link(_edge_key(i, j, 3), _edge_key(i, j, 0))
            link(_edge_key(i, j, 1), _edge_key(i, j, 2))

    seen: set[tuple] = set()
    lines, closed = [], []

    def walk(start):
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [q for q in adj[cur] if q != prev and q not in seen]
            if not nxt:
                is_closed = len(chain) > 2 and start in adj[cur] and prev is not None
                return chain, is_closed
            prev, cur = cur, nxt[0]
            seen.add(cur)
            chain.append(cur)

    # open chains start at degree-1 edges, sorted for reproducibility
    for key in sorted(k for k, v in adj.items() if len(v) == 1):
        if key not in seen:
            chain, _ = walk(key)
            lines.append(chain)
            closed.append(False)
    for key in sorted(adj):
        if key not in seen:
            chain, is_closed = walk(key)
            lines.append(chain)
            closed.append(is_closed)

    polys = [np.array([point(k) for k in chain]) for chain in lines]
    return ZeroSet(polys, closed)


# ---------------------------------------------------------------------------
# predicted sets

@dataclass(frozen=True)
class WallSetDescriptor:
    regime: str
    description: str
    distance: Callable[[np.ndarray], np.ndarray]
    inner_distance: Callable[[np.ndarray], np.ndarray] | None = None


def _circle(rho):
    return lambda p: np.abs(np.hypot(p[:, 0], p[:, 1]) - rho)


def _left_arc(rho):
    def d(p):
        on_side = p[:, 0] <= 0
        radial = np.abs(np.hypot(p[:, 0], p[:, 1]) - rho)
        ends = np.minimum(np.hypot(p[:, 0], p[:, 1] - rho), np.hypot(p[:, 0], p[:, 1] + rho))
        return np.where(on_side, radial, ends)

    return d


def _rays(rho):
    def d(p):
        far = np.abs(p[:, 1]) >= rho
        return np.where(far, np.abs(p[:, 0]), np.hypot(p[:, 0], np.abs(p[:, 1]) - rho))

    return d


def predicted_wall_set(config: ModelConfig, regime: str) -> WallSetDescriptor:
    """Distance evaluators to the limiting wall set of a regime.

    The shadow regime has an inner set (left half-circle plus the two axis
    rays outside the disc) and an outer superset (full circle plus rays);
    whether the right half-circle is part of the limit is left open, so
    deviation is measured against the outer set.
    """
    rho = geometry(config).rho
    if regime == "standard_wall":
        return WallSetDescriptor(regime, "{x1 = 0}", lambda p: np.abs(np.atleast_2d(p)[:, 0]))
    if regime == "shadow_wall":
        circ, arc, rays = _circle(rho), _left_arc(rho), _rays(rho)

        def outer(p):
            p = np.atleast_2d(np.asarray(p, dtype=float))
            return np.minimum(circ(p), rays(p))

        def inner(p):
            p = np.atleast_2d(np.asarray(p, dtype=float))
            return np.minimum(arc(p), rays(p))

        return WallSetDescriptor(
            regime, f"{{|x| = {rho:.6g}}} U {{x1 = 0, |x2| >= {rho:.6g}}}", outer, inner
        )
    if regime == "no_wall":
        return WallSetDescriptor(regime, "empty set", lambda p: np.full(len(np.atleast_2d(p)), np.inf))
    raise NotApplicableError(f"no predicted wall set for regime {regime!r}")


@dataclass
class RegimeVerdict:
    regime: str
    deviation_to_predicted: float
    predicted_set_descriptor: str
    consistent: bool
    deviation_grid_units: float = 0.0
    distances: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        def clean(x):
            return None if not math.isfinite(x) else x

        return {
            "regime": self.regime,
            "deviation_to_predicted": clean(self.deviation_to_predicted),
            "deviation_grid_units": clean(self.deviation_grid_units),
            "predicted_set_descriptor": self.predicted_set_descriptor,
            "consistent": self.consistent,
            "distances": {k: clean(v) for k, v in self.distances.items()},
        }


def classify_regime(a: float, report: ThresholdReport, tol: float = 0.0) -> str:
    if a == 0:
        return "no_wall"
    if a < report.a_star - tol:
        return "shadow_wall"
    if a > report.a_star_sup + tol:
        return "standard_wall"
    return "indeterminate"


def wall_deviation(z: ZeroSet, config: ModelConfig, a: float, report: ThresholdReport) -> RegimeVerdict:
    """Sup distance (length units) from the zero set to the predicted wall set."""
    regime = classify_regime(a, report, tol=report.error_bar)
    pts = z.vertices
    h = config.grid.spacing
    radius = CONSISTENCY_RADIUS * config.epsilon

    def sup(d):
        return float(np.max(d(pts))) if len(pts) else 0.0

    if regime == "no_wall":
        dev = 0.0 if z.empty else math.inf
        return RegimeVerdict(regime, dev, "empty set", z.empty, dev / h if z.empty else math.inf)
    if regime == "indeterminate":
        dists = {
            "standard_wall": sup(predicted_wall_set(config, "standard_wall").distance),
            "shadow_wall": sup(predicted_wall_set(config, "shadow_wall").distance),
        }
        dev = min(dists.values())
        return RegimeVerdict(regime, dev, "no prediction", False, dev / h, dists)
    desc = predicted_wall_set(config, regime)
    dev = sup(desc.distance) if not z.empty else math.inf
    dists = {"outer": dev}
    if desc.inner_distance is not None and not z.empty:
        dists["inner"] = sup(desc.inner_distance)
    return RegimeVerdict(regime, dev, desc.description, dev <= radius, dev / h, dists)


# ---------------------------------------------------------------------------
# limit checks

def thomas_fermi_error(
    u: Field,
    config: ModelConfig,
    shrink: float = 0.8,
    wall_collar: float = 0.0,
    signed: bool = False,
) -> float:
    """``max ||u| - sqrt(mu+)|`` on ``D(0, shrink rho)`` away from the rim layer.

    ``wall_collar`` removes ``|x1| < wall_collar``.  With ``signed=True`` the
    comparison is against ``s sign(x1) sqrt(mu+)`` with the orientation ``s``
    read off the field.
    """
    rho = geometry(config).rho
    X1, X2 = config.grid.mesh()
    r = np.hypot(X1, X2)
    m, *_ = coefficients(config)
    region = (r < shrink * rho) & (r < rho - config.epsilon ** (2.0 / 3.0)) & (np.abs(X1) >= wall_collar)
    if not region.any():
        raise ValueError("empty evaluation region")
    target = np.sqrt(np.maximum(m, 0.0))
    v = u.values
    if signed:
        s = 1.0 if np.sum(v * np.sign(X1) * region) >= 0 else -1.0
        return float(np.max(np.abs(v - s * np.sign(X1) * target)[region]))
    return float(np.max(np.abs(np.abs(v) - target)[region]))


def outer_limit_check(u: Field, config: ModelConfig, annulus: tuple[float, float] | None = None) -> float:
    """``max |u/eps + a f1/mu|`` over the annulus ``r_in <= |x| <= r_out``."""
    rho = geometry(config).rho
    r_in, r_out = annulus if annulus is not None else (1.2 * rho, 1.5 * rho)
    if not (rho < r_in < r_out < config.grid.half_extent):
        raise ValueError(f"annulus ({r_in}, {r_out}) must satisfy rho < r_in < r_out < L")
    X1, X2 = config.grid.mesh()
    r = np.hypot(X1, X2)
    sel = (r >= r_in) & (r <= r_out)
    m, g1, *_ = coefficients(config)
    val = u.values / config.epsilon + config.a * g1 / m
    return float(np.max(np.abs(val[sel])))


def cross_section_tanh_fit(u: Field, config: ModelConfig, x2: float, n: int = 201) -> tuple[float, float]:
    """Compare the row through ``x2`` with the heteroclinic profile at the wall.

    Returns ``(amplitude_error, profile_error)``: the half-jump across
    ``s1 = +-5`` against the profile's, and the max deviation over
    ``s1 in [-5, 5]`` with ``x1 = t_bar + eps s1``.
    """
    rho = geometry(config).rho
    if not abs(x2) < rho:
        raise NotApplicableError("cross section must cut the disc")
    eps = config.epsilon
    spl = field_spline(u)
    x1 = u.grid.axes()[0][1:-1]
    row = spl(x1, np.array([x2]))[:, 0]
    floor = DEFAULT_NOISE_FLOOR * float(np.max(np.abs(row)))
    keep = np.abs(row) > floor
    xs, vs = x1[keep], row[keep]
    flips = np.nonzero(np.sign(vs[:-1]) != np.sign(vs[1:]))[0]
    if flips.size != 1:
        raise NotApplicableError(f"row x2={x2} has {flips.size} sign changes, expected one")
    k = flips[0]
    t_bar = xs[k] + vs[k] * (xs[k + 1] - xs[k]) / (vs[k] - vs[k + 1])
    amp = math.sqrt(max(float(mu_rad(config, abs(x2))), 0.0))
    orient = 1.0 if vs[k + 1] > 0 else -1.0
    s = np.linspace(-5.0, 5.0, n)
    got = spl(t_bar + eps * s, np.array([x2]))[:, 0]
    want = orient * amp * np.tanh(s * amp / math.sqrt(2.0))
    profile_error = float(np.max(np.abs(got - want)))
    amplitude_error = abs(0.5 * abs(got[-1] - got[0]) - amp * math.tanh(5.0 * amp / math.sqrt(2.0)))
    return amplitude_error, profile_error


def apriori_bound_check(u: Field, config: ModelConfig) -> float:
    """``max |u| / (sqrt(mu+) + eps^{1/3})`` over the grid."""
    m, *_ = coefficients(config)
    return float(np.max(np.abs(u.values) / (np.sqrt(np.maximum(m, 0.0)) + config.epsilon ** (1.0 / 3.0))))


def angular_variation(u: Field, config: ModelConfig, fractions=(0.25, 0.5, 0.75), n_theta: int = 360) -> float:
    """Largest oscillation of ``u`` around the circles ``|x| = f rho``."""
    rho = geometry(config).rho
    spl = field_spline(u)
    theta = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    worst = 0.0
    for frac in fractions:
        R = frac * rho
        vals = spl.ev(R * np.cos(theta), R * np.sin(theta))
        worst = max(worst, float(np.ptp(vals)))
    return worst
