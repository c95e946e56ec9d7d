import json
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from nematic_walls.model import ModelConfig, TabulatedProfile, geometry
from nematic_walls.thresholds import (
    OutOfDiscError, ThresholdReport, beta_functions, energy_upper_bound, forcing_disc_integral, middle_bound,
    threshold_a_star, threshold_a_star_sup, threshold_report, threshold_slices, wall_line_integral,
)

from .oracles import threshold_bruteforce

SQRT2 = math.sqrt(2.0)


def quadratic_gauss():
    return ModelConfig(profile=TabulatedProfile.from_functions(lambda r: 1 - r**2, lambda r: r * np.exp(-r * r), 3.0))


@pytest.fixture(scope="module")
def gaussian_report():
    return threshold_report(ModelConfig())


def test_gaussian_thresholds_are_sqrt2(gaussian_report):
    rep = gaussian_report
    assert abs(rep.a_star - SQRT2) < 1e-6
    assert abs(rep.a_star_sup - SQRT2) < 1e-6
    assert abs(rep.middle_bound - SQRT2) < 1e-9
    assert rep.error_bar < 1e-6


def test_gaussian_report_is_fast():
    t0 = time.perf_counter()
    threshold_report(ModelConfig(mu0=-0.3))
    assert time.perf_counter() - t0 < 10.0


@pytest.mark.parametrize("kw", [dict(mu0=-0.3), dict(mu0=-0.7, I0=1.0, w=0.6)])
def test_any_gaussian_gives_sqrt2(kw):
    cfg = ModelConfig(**kw)
    assert threshold_a_star(cfg) == pytest.approx(SQRT2, abs=1e-6)
    assert threshold_a_star_sup(cfg) == pytest.approx(SQRT2, abs=1e-6)


def test_f_scale_divides_thresholds():
    cfg = ModelConfig(f_scale=2.0)
    assert threshold_a_star(cfg) == pytest.approx(SQRT2 / 2, abs=1e-6)


def test_slices_per_x2():
    cfg = ModelConfig()
    rows = threshold_slices(cfg, [0.0, 0.3, 0.6])
    assert rows.shape == (3, 2)
    assert np.allclose(rows, SQRT2, atol=1e-6)


def test_custom_profile_against_oracle():
    cfg = quadratic_gauss()
    rep = threshold_report(cfg)
    lo, hi = threshold_bruteforce(lambda r: 1 - r**2, lambda r: r * np.exp(-r * r), 1.0)
    assert rep.a_star == pytest.approx(lo, rel=1e-4)
    assert rep.a_star_sup == pytest.approx(hi, rel=1e-4)
    assert rep.a_star <= rep.middle_bound <= rep.a_star_sup


def test_upper_threshold_reaches_rim_limit():
    # the supremum sits at the rim for this profile: -mu'(1)/(sqrt2 f(1)) = 2e/sqrt2
    rep = threshold_report(quadratic_gauss())
    assert rep.a_star_sup == pytest.approx(2 * math.e / SQRT2, rel=1e-5)


def test_integrals_against_quad():
    cfg = quadratic_gauss()
    assert wall_line_integral(cfg) == pytest.approx(quad(lambda t: (1 - t * t) ** 1.5, -1, 1)[0], rel=1e-8)
    want = 4 * quad(lambda r: r * math.exp(-r * r) * math.sqrt(1 - r * r) * r, 0, 1)[0]
    assert forcing_disc_integral(cfg) == pytest.approx(want, rel=1e-6)
    assert middle_bound(cfg) == pytest.approx(2 * SQRT2 * wall_line_integral(cfg) / (3 * forcing_disc_integral(cfg)))


def test_energy_upper_bound():
    cfg = ModelConfig()
    assert energy_upper_bound(cfg.with_(a=0.0)) == 0.0
    assert energy_upper_bound(cfg.with_(a=2.1)) < 0.0


def test_report_json_roundtrip(gaussian_report):
    back = ThresholdReport.from_dict(json.loads(json.dumps(gaussian_report.to_dict())))
    assert back.a_star == gaussian_report.a_star
    assert np.array_equal(back.slices, gaussian_report.slices)


def test_beta_functions():
    cfg = ModelConfig()
    rho = geometry(cfg).rho
    with pytest.raises(OutOfDiscError):
        beta_functions(cfg, 1.0, (0.1, 0.0))
    with pytest.raises(OutOfDiscError):
        beta_functions(cfg, 1.0, (-rho - 0.01, 0.0))
    lo, hi = beta_functions(cfg, 1.0, (-0.3, 0.2))
    lo2, hi2 = beta_functions(cfg, 2.0, (-0.3, 0.2))
    assert np.isfinite([lo, hi, lo2, hi2]).all()
    # both are affine in a with opposite signs across the threshold
    assert np.sign(lo) != np.sign(lo2)


def test_flat_forcing_warns():
    prof = TabulatedProfile.from_functions(lambda r: 1 - r**2, lambda r: r**3 + 1e-3 * r**5, 3.0)
    rep = threshold_report(ModelConfig(profile=prof))
    assert rep.warnings and not rep.f_prime_origin_positive
    assert np.isfinite(rep.a_star)
