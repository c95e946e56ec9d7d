import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nematic_walls.fields import Field
from nematic_walls.model import GridSpec, ModelConfig, geometry
from nematic_walls.solver import minimize_multistart
from nematic_walls.thresholds import ThresholdReport
from nematic_walls.walls import (
    NotApplicableError, ZeroSet, angular_variation, apriori_bound_check, classify_regime,
    cross_section_tanh_fit, extract_zero_set, predicted_wall_set, thomas_fermi_error, wall_deviation,
)

GRID = GridSpec(2.0, 101, 101)


def field_of(fn, grid=GRID):
    x1, x2 = grid.mesh()
    return Field(grid, fn(x1, x2))


def fake_report(lo, hi, err=0.0):
    return ThresholdReport(lo, hi, 0.5 * (lo + hi), np.zeros((0, 3)), (0.0, 0.0), (0.0, 0.0), err)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.0, 1.0))
def test_zero_set_of_affine_field_is_exact(c, slope):
    # the zero set of an affine field is reproduced exactly by linear interpolation
    u = field_of(lambda x1, x2: x1 - c - slope * x2)
    z = extract_zero_set(u)
    assert len(z.polylines) == 1
    p = z.vertices
    assert np.max(np.abs(p[:, 0] - c - slope * p[:, 1])) < 1e-12


def test_circle_is_closed_and_second_order():
    h = GRID.spacing
    z = extract_zero_set(field_of(lambda x1, x2: x1**2 + x2**2 - 1.0))
    assert z.closed == [True]
    err = np.abs(np.hypot(*z.vertices.T) - 1.0).max()
    assert err < h * h


def test_saddle_gives_two_crossing_branches():
    z = extract_zero_set(field_of(lambda x1, x2: (x1 - 0.013) * (x2 + 0.021)))
    assert len(z.polylines) == 2


def test_constant_and_noise_floor():
    assert extract_zero_set(field_of(lambda x1, x2: 1.0 + 0 * x1)).empty
    noise = np.random.default_rng(0).normal(scale=1e-14, size=(101, 101))
    u = field_of(lambda x1, x2: np.exp(-20 * (x1**2 + x2**2))).values + noise
    assert not extract_zero_set(Field(GRID, u)).empty
    assert extract_zero_set(Field(GRID, u), noise_floor=1e-12).empty


def test_boundary_ring_excluded():
    u = field_of(lambda x1, x2: np.where(np.abs(x1) > 1.97, 0.0, 1.0 + 0 * x1))
    assert extract_zero_set(u, exclude_boundary=True).empty


def test_csv_roundtrip(tmp_path):
    z = extract_zero_set(field_of(lambda x1, x2: x1**2 + x2**2 - 0.5))
    z.to_csv(tmp_path / "z.csv")
    data = np.loadtxt(tmp_path / "z.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 1:], z.vertices)
    ZeroSet([], []).to_csv(tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().strip() == "polyline_id,x1,x2"


def test_regime_classification():
    rep = fake_report(1.0, 2.0, err=0.01)
    assert classify_regime(0.0, rep) == "no_wall"
    assert classify_regime(0.5, rep, 0.01) == "shadow_wall"
    assert classify_regime(2.5, rep, 0.01) == "standard_wall"
    assert classify_regime(1.5, rep, 0.01) == "indeterminate"
    assert classify_regime(0.995, rep, 0.01) == "indeterminate"
    with pytest.raises(NotApplicableError):
        predicted_wall_set(ModelConfig(), "indeterminate")


def test_predicted_sets_distances():
    cfg = ModelConfig()
    rho = geometry(cfg).rho
    std = predicted_wall_set(cfg, "standard_wall")
    assert np.allclose(std.distance(np.array([[0.3, 0.1], [-0.2, 5.0]])), [0.3, 0.2])
    sh = predicted_wall_set(cfg, "shadow_wall")
    pts = np.array([[rho, 0.0], [0.0, 1.5], [-rho, 0.0], [0.1, 0.0]])
    assert np.allclose(sh.distance(pts), [0.0, 0.0, 0.0, rho - 0.1])
    # the right half-circle belongs to the outer set only
    assert sh.inner_distance(pts[:1])[0] == pytest.approx(math.hypot(rho, rho))


def test_wall_deviation_straight_line():
    cfg = ModelConfig(epsilon=0.04, a=2.0, grid=GRID)
    z = extract_zero_set(field_of(lambda x1, x2: x1 - 0.1))
    v = wall_deviation(z, cfg, 2.0, fake_report(1.0, 1.5))
    assert v.regime == "standard_wall"
    assert v.deviation_to_predicted == pytest.approx(0.1)
    assert v.deviation_grid_units == pytest.approx(0.1 / GRID.spacing)
    assert v.consistent
    assert not wall_deviation(z, cfg.with_(epsilon=0.01), 2.0, fake_report(1.0, 1.5)).consistent


def test_no_wall_verdict_has_json_safe_dict():
    cfg = ModelConfig(grid=GRID)
    z = extract_zero_set(field_of(lambda x1, x2: x1))
    d = wall_deviation(z, cfg, 0.0, fake_report(1.0, 1.5)).to_dict()
    assert d["regime"] == "no_wall" and d["deviation_to_predicted"] is None and not d["consistent"]


def test_diagnostics_on_exact_profiles():
    eps = 0.05
    cfg = ModelConfig(epsilon=eps, a=2.0, grid=GridSpec(2.0, 201, 201))
    from nematic_walls.model import mu_rad
    m = lambda x1, x2: np.sqrt(np.maximum(mu_rad(cfg, np.hypot(x1, x2)), 0.0))  # noqa: E731
    tf = field_of(m, cfg.grid)
    assert thomas_fermi_error(tf, cfg) < 1e-12
    assert angular_variation(tf, cfg) < 1e-3
    assert apriori_bound_check(tf, cfg) <= 1.0
    kink = field_of(lambda x1, x2: m(0 * x1, x2) * np.tanh((x1 - 0.03) * m(0 * x1, x2) / (math.sqrt(2) * eps)),
                    cfg.grid)
    amp_err, prof_err = cross_section_tanh_fit(kink, cfg, 0.2)
    assert amp_err < 1e-6 and prof_err < 1e-4
    with pytest.raises(NotApplicableError):
        cross_section_tanh_fit(tf, cfg, 0.2)


def test_small_minimizers_match_regimes():
    from nematic_walls.thresholds import threshold_report
    rep = threshold_report(ModelConfig())
    for a, want in ((0.7, "shadow_wall"), (2.1, "standard_wall")):
        cfg = ModelConfig(epsilon=0.1, a=a, grid=GridSpec(2.0, 81, 81))
        from nematic_walls.model import ToleranceSet
        res = minimize_multistart(cfg.with_(tolerances=ToleranceSet(dt=1.0)))
        z = extract_zero_set(res.field, 1e-12, exclude_boundary=True)
        assert wall_deviation(z, cfg, a, rep).regime == want
