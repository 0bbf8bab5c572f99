import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from cablemom.bessel import (
    i_log_derivative,
    i_over_power_series,
    i_radius_ratio,
    i_ratios,
    k_log_derivative,
    k_radius_ratio,
    log_derivative_excess,
)

mpmath.mp.dps = 40


def mp_ratio(n, z):
    return complex(mpmath.besseli(n + 1, z) / mpmath.besseli(n, z))


@pytest.mark.parametrize("z", [0.5, 3 + 4j, 30 * cmath.exp(0.25j * math.pi), 800 * cmath.exp(0.25j * math.pi), 1e-4 + 1e-4j, 2j])
def test_i_ratios_against_mpmath(z):
    r = i_ratios(6, z)
    for n in range(7):
        assert abs(r[n] - mp_ratio(n, z)) <= 1e-13 * abs(r[n])


@settings(max_examples=100, deadline=None)
@given(mag=st.floats(1e-2, 300), phase=st.floats(0, math.pi / 2))
def test_i_ratios_against_scipy(mag, phase):
    z = mag * cmath.exp(1j * phase)
    r = i_ratios(4, z)
    ref = special.ive(np.arange(1, 6), z) / special.ive(np.arange(5), z)
    assert np.allclose(r, ref, rtol=1e-11, atol=0)


def test_small_argument_series_is_continuous():
    z = 1e-3 * cmath.exp(0.25j * math.pi)
    below = i_ratios(3, z * (1 - 1e-9))
    above = i_ratios(3, z * (1 + 1e-9))
    assert np.allclose(below, above, rtol=1e-8)


def test_log_derivative_excess_zero_argument():
    assert np.all(log_derivative_excess(3, 0.0) == 0)


def test_log_derivatives():
    z = 7 * cmath.exp(0.25j * math.pi)
    n = np.arange(4)
    ip = np.array([complex(mpmath.besseli(k, z, derivative=1) / mpmath.besseli(k, z)) for k in n]) * z
    kp = np.array([complex(-(mpmath.besselk(k - 1, z) + mpmath.besselk(k + 1, z)) / 2 / mpmath.besselk(k, z)) for k in n]) * z
    assert np.allclose(i_log_derivative(n, z), ip, rtol=1e-13)
    assert np.allclose(k_log_derivative(n, z), kp, rtol=1e-13)


def test_radius_ratios_at_large_argument():
    g = 3000 * cmath.exp(0.25j * math.pi)
    n = np.arange(3)
    r1, r2 = 0.03775, 0.03797
    ri = i_radius_ratio(n, g, r1, r2)
    rk = k_radius_ratio(n, g, r2, r1)
    for k in n:
        ref_i = complex(mpmath.besseli(k, g * r1) / mpmath.besseli(k, g * r2))
        ref_k = complex(mpmath.besselk(k, g * r2) / mpmath.besselk(k, g * r1))
        assert abs(ri[k] - ref_i) <= 1e-11 * abs(ref_i)
        assert abs(rk[k] - ref_k) <= 1e-11 * abs(ref_k)


@pytest.mark.parametrize("n", [0, 1, 4])
def test_power_series_matches_bessel(n):
    w = np.array([0.0, 0.3, -2.0 + 1j, 25j])
    s = i_over_power_series(n, w)
    x = 2 * np.sqrt(w + 0j)
    with np.errstate(invalid="ignore", divide="ignore"):
        ref = special.iv(n, x) / w ** (n / 2)
    ref[0] = 1 / math.factorial(n)
    assert np.allclose(s, ref, rtol=1e-12)
