import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toroidal_lab.errors import AliasingError, DegenerateFitError
from toroidal_lab.laurent import (
    LaurentSeries1,
    LaurentSeries2,
    coeffs_from_circle_samples,
    decay_rate_fit,
    eval_series,
    series_from_function,
    weighted_norm,
)


def circle(K, r=1.0):
    return r * np.exp(2j * np.pi * np.arange(K) / K)


def test_monomial_extraction():
    z = circle(16)
    a = coeffs_from_circle_samples(z**3, 1.0, (-7, 7))
    assert abs(a[3 + 7] - 1) < 1e-13
    a[3 + 7] = 0
    assert np.abs(a).max() < 1e-13


def test_inverse_power_on_radius_two():
    z = circle(16, 2.0)
    a = coeffs_from_circle_samples(1 / z, 2.0, (-7, 7))
    assert abs(a[-1 + 7] - 1) < 1e-13


def test_zero_samples():
    assert not np.any(coeffs_from_circle_samples(np.zeros(8), 1.0, (-3, 3)))


def test_aliasing_detected():
    with pytest.raises(AliasingError):
        coeffs_from_circle_samples(np.zeros(8), 1.0, (-4, 4))


def test_eval_examples():
    s = LaurentSeries2(np.full((1, 1), 2.5 + 1j), 0, 0)
    assert eval_series(s, 0.3 + 0.1j, 7.0) == 2.5 + 1j
    s = LaurentSeries2(np.array([[1.0]]), 1, 0)
    assert eval_series(s, 1.0, 2.0) == 2.0


def test_negative_powers():
    s = LaurentSeries1(np.array([1.0, 0, 0, 0, 1.0]), -2)
    z = 0.5 + 0.5j
    assert abs(eval_series(s, z) - (z**-2 + z**2)) < 1e-14


def test_round_trip_random():
    rng = np.random.default_rng(0)
    K = 32
    for _ in range(100):
        c = rng.normal(size=31) + 1j * rng.normal(size=31)
        s = LaurentSeries1(c, -15)
        back = coeffs_from_circle_samples(eval_series(s, circle(K)), 1.0, (-15, 15))
        assert np.abs(back - c).max() <= 1e-12 * np.abs(c).max()


def test_radius_consistency():
    f = lambda z: np.exp(z) + 1 / (z - 0.1)
    K = 256
    a1 = coeffs_from_circle_samples(f(circle(K, 0.5)), 0.5, (-10, 10))
    a2 = coeffs_from_circle_samples(f(circle(K, 0.8)), 0.8, (-10, 10))
    assert np.abs(a1 - a2).max() < 1e-10


def test_two_variable_extraction():
    f = lambda xi, eta: 3 * xi**2 * eta**-1 + 0.5 * eta
    s = series_from_function(f, 3, 3, 1.5, 0.7)
    assert abs(s[-1, 2] - 3) < 1e-12 and abs(s[1, 0] - 0.5) < 1e-12
    s2 = s.coeffs.copy()
    s2[-1 + 3, 2 + 3] = 0
    s2[1 + 3, 0 + 3] = 0
    assert np.abs(s2).max() < 1e-12


def test_linearity():
    rng = np.random.default_rng(1)
    f, g = rng.normal(size=16) + 0j, rng.normal(size=16) + 0j
    a, b = 0.7 - 2j, 3.1
    lhs = coeffs_from_circle_samples(a * f + b * g, 1.0, (-7, 7))
    rhs = a * coeffs_from_circle_samples(f, 1.0, (-7, 7)) + b * coeffs_from_circle_samples(g, 1.0, (-7, 7))
    assert np.abs(lhs - rhs).max() < 1e-14


def test_decay_fit_geometric():
    rho = 0.6
    s = LaurentSeries1(rho ** np.arange(0, 20), 0)
    inner, outer = decay_rate_fit(s)
    assert inner is None and outer == pytest.approx(math.log(rho), abs=1e-6)


def test_decay_fit_two_sided():
    k = np.arange(-10, 11)
    inner, outer = decay_rate_fit(LaurentSeries1(2.0 ** -np.abs(k), -10))
    assert inner == pytest.approx(math.log(2)) and outer == pytest.approx(-math.log(2))


def test_decay_fit_degenerate():
    c = np.zeros(9)
    c[4] = 1
    with pytest.raises(DegenerateFitError):
        decay_rate_fit(LaurentSeries1(c, -4))


def test_weighted_norm_examples():
    c = np.zeros((1, 1))
    c[0, 0] = 3
    assert weighted_norm(LaurentSeries2(c, 0, 0)) == 3
    s = LaurentSeries2(np.ones((5, 1)), -2, 0)
    got = weighted_norm(s, lambda n, m: 2.0 ** -abs(n))
    assert got == math.sqrt(1 + 2 * 0.5**2 + 2 * 0.25**2)
    assert weighted_norm(LaurentSeries1(np.zeros(0), 0)) == 0


def test_serialization_round_trip():
    rng = np.random.default_rng(2)
    s = LaurentSeries2(rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5)), -1, -2)
    d = json.loads(json.dumps(s.as_dict()))
    assert d["index_convention"] == "a[n,m] * xi^m * eta^n"
    back = LaurentSeries2.from_dict(d)
    assert np.array_equal(back.coeffs, s.coeffs) and (back.n_min, back.m_min) == (-1, -2)
    bad = dict(d, index_convention="a[m,n]")
    with pytest.raises(ValueError):
        LaurentSeries2.from_dict(bad)
    assert s.to_csv().splitlines()[0] == "n,m,re,im"


def test_nan_rejected():
    with pytest.raises(ValueError):
        LaurentSeries1(np.array([np.nan]), 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=1, max_size=15),
       st.integers(-7, 0))
def test_extraction_inverts_eval(coeffs, m_min):
    s = LaurentSeries1(np.array(coeffs), m_min)
    K = 32
    back = coeffs_from_circle_samples(eval_series(s, circle(K)), 1.0, (s.m_min, s.m_max))
    scale = max(1.0, float(np.abs(s.coeffs).max()))
    assert np.abs(back - s.coeffs).max() <= 1e-12 * scale
