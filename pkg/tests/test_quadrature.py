import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from nematic_walls.quadrature import adaptive_simpson, golden_section, trapezoid_weights


def test_sqrt_endpoint_singularity():
    got = adaptive_simpson(lambda x: np.sqrt(x), 0.0, 1.0, rtol=1e-10)
    assert float(got) == pytest.approx(2.0 / 3.0, rel=1e-8)


def test_vectorised_intervals_match_quad():
    f = lambda x: np.exp(-x * x) * np.cos(3 * x)  # noqa: E731
    a = np.array([-1.0, 0.0, 0.3, 2.0])
    b = np.array([0.0, 0.5, 2.7, 2.0001])
    got = adaptive_simpson(f, a, b, rtol=1e-11)
    want = [quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13)[0] for lo, hi in zip(a, b)]
    assert np.allclose(got, want, rtol=1e-9, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-2.0, 2.0))
def test_cubic_is_exact(c, lo):
    f = lambda x: c * x**3 - x + 1  # noqa: E731
    got = float(adaptive_simpson(f, lo, lo + 1.5))
    exact = c * ((lo + 1.5) ** 4 - lo**4) / 4 - ((lo + 1.5) ** 2 - lo**2) / 2 + 1.5
    assert got == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_golden_section():
    x, fx = golden_section(lambda t: (t - math.pi / 4) ** 2 + 1, 0.0, 2.0, xtol=1e-10)
    # a quadratic minimum is only located to about sqrt(machine eps)
    assert x == pytest.approx(math.pi / 4, abs=1e-7)
    assert fx == pytest.approx(1.0)


def test_trapezoid_weights_sum_to_length():
    w = trapezoid_weights(11, 0.2)
    assert w.sum() == pytest.approx(2.0)
    assert w[0] == w[-1] == pytest.approx(0.1)
