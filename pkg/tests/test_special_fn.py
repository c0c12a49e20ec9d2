import math

import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, settings, strategies as st

from radial_gate import kernels, special_fn as sf
from radial_gate.errors import DomainError

GRID = np.concatenate([np.linspace(1e-3, 8.0, 60), np.linspace(8.0, 60.0, 80)])


@pytest.mark.parametrize("m", range(0, 8))
def test_j_matches_scipy(m):
    ref = sc.jv(m, GRID)
    got = sf.besselj(m, GRID)
    assert np.max(np.abs(got - ref)) < 1e-12


@pytest.mark.parametrize("m", range(0, 8))
def test_y_matches_scipy(m):
    x = GRID[GRID > 0.05]
    ref = sc.yv(m, x)
    got = sf.bessely(m, x)
    assert np.max(np.abs(got - ref) / np.maximum(1.0, np.abs(ref))) < 1e-12


@pytest.mark.parametrize("which", kernels.available())
def test_backends_agree_with_scipy(which):
    for m in (0, 1, 5):
        assert np.allclose(kernels.jn_array(m, GRID, which), sc.jv(m, GRID), rtol=0, atol=1e-12)


def test_backend_parity():
    if len(kernels.available()) < 2:
        pytest.skip("compiled kernel not built")
    for m in range(6):
        a = kernels.yn_array(m, GRID, "python")
        b = kernels.yn_array(m, GRID, "cython")
        assert np.max(np.abs(a - b) / np.maximum(1, np.abs(a))) < 1e-14


def test_origin_values():
    assert sf.besselj(0, 0.0) == 1.0
    assert sf.besselj(3, 0.0) == 0.0
    assert sf.cyl_derivative(sf.J(0), 0.0) == 0.0


def test_y0_small_argument_form():
    x = 0.01
    approx = (2 / math.pi) * (sf.EULER_GAMMA + math.log(x / 2))
    assert abs(sf.bessely(0, x) - approx) < 1e-4


def test_y0_derivative_small_argument():
    x = 0.01
    assert abs(sf.cyl_derivative(sf.Y(0), x) / ((2 / math.pi) / x) - 1) < 1e-2


def test_y_domain():
    with pytest.raises(DomainError):
        sf.bessely(0, 0.0)
    with pytest.raises(DomainError):
        sf.besselj(1, -1.0)


def test_negative_order_sign():
    x = np.linspace(0.5, 20, 40)
    assert np.allclose(sf.besselj(-3, x), -sf.besselj(3, x), atol=0)
    assert np.allclose(sf.bessely(-2, x), sf.bessely(2, x), atol=0)


@pytest.mark.parametrize("m", range(0, 6))
def test_wronskian(m):
    x = np.linspace(0.1, 50.0, 200)
    w = (sf.besselj(m, x) * sf.cyl_derivative(sf.Y(m), x)
         - sf.cyl_derivative(sf.J(m), x) * sf.bessely(m, x))
    assert np.max(np.abs(w / (2 / (math.pi * x)) - 1)) < 1e-8


@pytest.mark.parametrize("kind", [sf.J(0), sf.J(2), sf.Y(0), sf.Y(3)])
def test_bessel_equation_residual(kind):
    x = np.linspace(0.2, 40.0, 100)
    m = kind.order
    f = sf.cyl_eval(kind, x)
    d1 = sf.cyl_derivative(kind, x)
    d2 = sf.cyl_second_derivative(kind, x)
    terms = np.stack([x * x * d2, x * d1, (x * x - m * m) * f])
    res = np.abs(terms.sum(axis=0)) / np.max(np.abs(terms), axis=0)
    assert np.max(res) < 1e-8


@pytest.mark.parametrize("kind", [sf.J(0), sf.J(1), sf.Y(0), sf.Y(4)])
def test_derivative_against_finite_difference(kind):
    x = np.linspace(0.5, 30, 50)
    h = 1e-5
    fd = (sf.cyl_eval(kind, x + h) - sf.cyl_eval(kind, x - h)) / (2 * h)
    d = sf.cyl_derivative(kind, x)
    assert np.max(np.abs(fd - d) / np.maximum(1.0, np.abs(d))) < 1e-8


def test_crossover_continuity():
    for x0 in (sf.SERIES_CROSSOVER, sf.ASYMPTOTIC_CROSSOVER):
        for m in (0, 1, 2):
            lo, hi = x0 * (1 - 1e-12), x0 * (1 + 1e-12)
            assert abs(sf.besselj(m, lo) - sf.besselj(m, hi)) < 1e-10
            assert abs(sf.bessely(m, lo) - sf.bessely(m, hi)) < 1e-10


def test_second_zero_of_y0():
    assert abs(sf.cyl_zero(sf.ZeroIndex(sf.Y(0), 2)) - 3.95768) < 5e-5


def test_first_zero_of_j0():
    x = sf.cyl_zero(sf.ZeroIndex(sf.J(0), 1))
    assert abs(x - 2.404826) < 1e-6
    assert abs(sf.besselj(0, x)) < 1e-14
    assert sf.cyl_derivative(sf.J(0), x) < 0


def test_first_zero_of_j1_at_j0_extremum():
    # J0' = -J1, so the first zero of J1 is where J0 has its minimum
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda t: sf.besselj(0, t), bounds=(2.5, 5.0),
                          method="bounded", options={"xatol": 1e-10})
    assert abs(sf.cyl_zero(sf.ZeroIndex(sf.J(1), 1)) - res.x) < 1e-6


@pytest.mark.parametrize("m", range(0, 6))
def test_zeros_match_scipy(m):
    got = sf.zeros(sf.J(m), 10)
    assert np.max(np.abs(got - sc.jn_zeros(m, 10))) < 1e-12
    gy = sf.zeros(sf.Y(m), 10)
    assert np.max(np.abs(gy - sc.yn_zeros(m, 10))) < 1e-12


def test_j0_y0_zeros_interlace():
    j = sf.zeros(sf.J(0), 10)
    y = sf.zeros(sf.Y(0), 11)
    assert all(y[n] < j[n] < y[n + 1] for n in range(10))


def test_mcmahon_estimate_is_close():
    for n in range(1, 6):
        exact = sf.cyl_zero(sf.ZeroIndex(sf.J(0), n))
        assert abs(sf.mcmahon_estimate(sf.J(0), n) - exact) < 0.01


def test_zero_index_validation():
    with pytest.raises(ValueError):
        sf.ZeroIndex(sf.J(0), 0)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(0, 10), x=st.floats(0.01, 200.0))
def test_scipy_agreement_property(m, x):
    assert abs(sf.besselj(m, x) - sc.jv(m, x)) < 1e-11
    y = sc.yv(m, x)
    assert abs(sf.bessely(m, x) - y) < 1e-11 * max(1.0, abs(y))
