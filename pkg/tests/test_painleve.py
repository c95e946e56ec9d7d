import math

import numpy as np
import pytest
from scipy.integrate import solve_bvp
from scipy.special import airy

from nematic_walls.energy import painleve_energy
from nematic_walls.fields import Field, Profile1D
from nematic_walls.model import GridSpec, ModelConfig, geometry
from nematic_walls.painleve import (
    airy_ai, airy_series, boundary_layer_alpha, boundary_layer_compare, collocation_residual, hastings_mcleod,
    left_branch_root, painleve_solve_alpha, profile_to_csv, rescale_boundary_layer,
)
from nematic_walls.acceptance import bump_test


def test_airy_matches_scipy():
    s = np.linspace(-20, 20, 2001)
    assert np.max(np.abs(airy_ai(s) - airy(s)[0])) < 1e-10
    with pytest.raises(ValueError):
        airy_ai(21.0)


def test_airy_series_derivative():
    s = np.linspace(-2, 2, 41)
    ai, aip = airy_series(s)
    assert np.allclose(aip, airy(s)[1], atol=1e-13)


@pytest.fixture(scope="module")
def hm():
    return hastings_mcleod()


def test_hastings_mcleod_properties(hm):
    assert collocation_residual(hm) < 1e-8
    assert float(hm(5.0)) / airy_ai(5.0) == pytest.approx(1.0, abs=1e-3)
    assert float(hm(-8.0)) / 2.0 == pytest.approx(1.0, abs=1e-2)
    assert np.all(np.diff(hm.values) < 0)


def test_hastings_mcleod_against_solve_bvp(hm):
    s = np.linspace(-12, 8, 401)

    def rhs(x, y):
        return np.vstack([y[1], x * y[0] + 2 * y[0] ** 3])

    def bc(ya, yb):
        return np.array([ya[0] - left_branch_root(-12.0, 0.0), yb[0] - airy_ai(8.0)])

    guess = np.vstack([hm(s), np.gradient(hm(s), s)])
    sol = solve_bvp(rhs, bc, s, guess, tol=1e-10, max_nodes=200000)
    assert sol.success
    assert np.max(np.abs(sol.sol(s)[0] - hm(s))) < 1e-5


def test_bump_test_passes(hm):
    gains = bump_test(hm)
    assert len(gains) == 20 and min(gains) >= 0


def test_bumps_detect_a_non_minimizer(hm):
    fake = Profile1D(hm.s_min, hm.s_max, 0.8 * hm.values)
    assert min(bump_test(fake)) < 0


@pytest.mark.parametrize("alpha", [0.3, -0.3])
def test_alpha_solution(alpha):
    y = painleve_solve_alpha(alpha)
    assert collocation_residual(y, alpha) < 1e-8
    assert y.values[0] == pytest.approx(left_branch_root(y.s_min, alpha))


def test_alpha_symmetry():
    a = painleve_solve_alpha(0.25)
    b = painleve_solve_alpha(-0.25)
    # -y_{-alpha} solves the same equation but is a different branch at -inf
    assert np.all(a.values[-50:] < 0) and np.all(b.values[-50:] > 0)


def test_left_branch_root():
    for s, al in ((-12.0, 0.0), (-8.0, 0.4), (-10.0, -0.4)):
        y = left_branch_root(s, al)
        assert s * y + 2 * y**3 + al == pytest.approx(0.0, abs=1e-12)
        assert y > 0


def test_domain_checks():
    with pytest.raises(ValueError):
        hastings_mcleod((-5.0, 8.0))
    with pytest.raises(ValueError):
        hastings_mcleod((-12.0, 8.0), n=50)


def test_profile_csv(tmp_path, hm):
    profile_to_csv(hm, tmp_path / "h.csv")
    data = np.loadtxt(tmp_path / "h.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 1], hm.values)


def test_boundary_layer_alpha():
    cfg = ModelConfig(a=1.0)
    assert boundary_layer_alpha(cfg.with_(a=0.0), math.pi) == 0.0
    # forcing is radial, so its x1 component flips sign between the two sides
    assert boundary_layer_alpha(cfg, 0.0) == pytest.approx(-boundary_layer_alpha(cfg, math.pi))
    assert boundary_layer_alpha(cfg, math.pi / 2) == pytest.approx(0.0, abs=1e-15)


def test_rescale_round_trip(hm):
    # build a field from the profile itself, rescale back, compare
    cfg = ModelConfig(epsilon=0.025, grid=GridSpec(2.0, 401, 401))
    g = geometry(cfg)
    k = (-g.mu1) ** (1 / 3)
    x1, x2 = cfg.grid.mesh()
    s = (np.hypot(x1, x2) - g.rho) * k / cfg.epsilon ** (2 / 3)
    vals = math.sqrt(2) * (k**3 * cfg.epsilon) ** (1 / 3) * hm(np.clip(s, -12, 8))
    p = rescale_boundary_layer(Field(cfg.grid, vals), cfg, math.pi)
    assert boundary_layer_compare(p, 0.0) < 1e-3
    flipped = Profile1D(p.s_min, p.s_max, -p.values)
    assert boundary_layer_compare(flipped, 0.0) < 1e-3
    with pytest.raises(ValueError):
        rescale_boundary_layer(Field(cfg.grid, vals), cfg, math.pi, s_range=(-6, 60))
    with pytest.raises(ValueError, match="centre"):
        rescale_boundary_layer(Field(cfg.grid, vals), cfg, math.pi, s_range=(-12, 6))


def test_painleve_energy_prefers_hm(hm):
    w = (-6.0, 4.0)
    assert painleve_energy(hm, 0.0, w) < painleve_energy(Profile1D(hm.s_min, hm.s_max, 0.9 * hm.values), 0.0, w)
