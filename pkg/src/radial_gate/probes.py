"""Smooth probes for distributional pairings.

Every probe factorises as f_i(x) f_j(y) with f_n(t) = t^n exp(-t^2 / 2 sigma^2),
so any partial derivative is a product of two one-dimensional derivatives,
each a short sum of probabilists' Hermite polynomials.
"""
import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import hermite_e

from .errors import InsufficientDerivativeOrder


class ProbeFamily(enum.Enum):
    GAUSSIAN = "gaussian"
    MONOMIAL_GAUSSIAN = "monomial_gaussian"


def _gauss_deriv(q, t, sigma):
    """q-th derivative of exp(-t^2/2 sigma^2)."""
    u = t / sigma
    c = np.zeros(q + 1)
    c[q] = 1.0
    return (-1.0 / sigma) ** q * hermite_e.hermeval(u, c) * np.exp(-0.5 * u * u)


def _factor_deriv(n, power, t, sigma):
    """n-th derivative of t^power exp(-t^2/2 sigma^2) by Leibniz."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for k in range(min(n, power) + 1):
        falling = math.perm(power, k)
        out = out + math.comb(n, k) * falling * t ** (power - k) * _gauss_deriv(n - k, t, sigma)
    return out


def _hermite_at_zero(q):
    # He_q(0) = 0 for odd q, (-1)^{q/2} (q-1)!! for even q
    if q % 2:
        return 0
    return (-1) ** (q // 2) * math.prod(range(q - 1, 0, -2))


def _factor_deriv_at_zero(n, power, sigma2):
    """Exact n-th derivative at 0 of t^power exp(-t^2/2 sigma^2)."""
    if n < power:
        return Fraction(0)
    q = n - power
    he = _hermite_at_zero(q)
    if he == 0:
        return Fraction(0)
    # (-1/sigma)^q He_q(0) with q even
    return math.comb(n, power) * math.factorial(power) * Fraction(he) / sigma2 ** (q // 2)


@dataclass(frozen=True)
class TestFunction:
    """phi(x, y) = x^i y^j exp(-(x^2 + y^2) / 2 sigma^2).

    ``max_order`` is the highest total derivative order callers may request;
    the formulas themselves hold for any order.
    """

    __test__ = False  # not a pytest class

    family: ProbeFamily
    sigma: Fraction
    monomial: tuple = (0, 0)
    max_order: int = 6

    def __post_init__(self):
        sigma = Fraction(self.sigma).limit_denominator(10**12) if isinstance(
            self.sigma, float) else Fraction(self.sigma)
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "sigma", sigma)
        i, j = map(int, self.monomial)
        if i < 0 or j < 0:
            raise ValueError("monomial exponents must be non-negative")
        if self.family is ProbeFamily.GAUSSIAN and (i, j) != (0, 0):
            raise ValueError("plain Gaussian has no monomial prefactor")
        if self.family is ProbeFamily.MONOMIAL_GAUSSIAN and i + j > 4:
            raise ValueError("monomial prefactor limited to total order 4")
        object.__setattr__(self, "monomial", (i, j))

    @classmethod
    def gaussian(cls, sigma=Fraction(1, 2), max_order=6):
        return cls(ProbeFamily.GAUSSIAN, sigma, (0, 0), max_order)

    @classmethod
    def monomial_gaussian(cls, i, j, sigma=Fraction(1, 2), max_order=6):
        fam = ProbeFamily.GAUSSIAN if (i, j) == (0, 0) else ProbeFamily.MONOMIAL_GAUSSIAN
        return cls(fam, sigma, (i, j), max_order)

    def __str__(self):
        i, j = self.monomial
        return f"x^{i} y^{j} gauss(sigma={float(self.sigma):g})"

    @property
    def sigma_f(self):
        return float(self.sigma)

    def r_cut(self, tol=1e-18):
        """Radius beyond which |phi| stays below ``tol`` (never below 10 sigma)."""
        s = self.sigma_f
        n = sum(self.monomial)
        r = 10.0 * s
        # |phi| <= r^n exp(-r^2/2s^2), decreasing once r > sqrt(n) s
        while r ** n * math.exp(-0.5 * (r / s) ** 2) >= tol:
            r += 0.5 * s
        return r

    def _check_order(self, order):
        if order > self.max_order:
            raise InsufficientDerivativeOrder(
                f"{self} provides derivatives to order {self.max_order}, need {order}")

    def derivative(self, ix, iy, x, y):
        """d^{ix+iy} phi / dx^ix dy^iy at the points (x, y)."""
        self._check_order(ix + iy)
        i, j = self.monomial
        s = self.sigma_f
        return _factor_deriv(ix, i, x, s) * _factor_deriv(iy, j, y, s)

    def __call__(self, x, y):
        return self.derivative(0, 0, x, y)

    def laplacian(self, x, y):
        return self.derivative(2, 0, x, y) + self.derivative(0, 2, x, y)

    def radial_derivative(self, r, theta):
        x, y = r * np.cos(theta), r * np.sin(theta)
        return np.cos(theta) * self.derivative(1, 0, x, y) + np.sin(theta) * self.derivative(0, 1, x, y)

    def exact_origin_derivative(self, ix, iy):
        """d^{ix+iy} phi(0, 0) as an exact Fraction."""
        self._check_order(ix + iy)
        i, j = self.monomial
        s2 = self.sigma * self.sigma
        return _factor_deriv_at_zero(ix, i, s2) * _factor_deriv_at_zero(iy, j, s2)

    def origin_derivative(self, ix, iy):
        return float(self.exact_origin_derivative(ix, iy))


def monomial_basis(max_degree=3, sigma=Fraction(1, 2), max_order=6):
    """Probes x^i y^j gauss for i + j <= max_degree, ordered by degree then x-power desc."""
    out = []
    for deg in range(max_degree + 1):
        for i in range(deg, -1, -1):
            out.append(TestFunction.monomial_gaussian(i, deg - i, sigma, max_order))
    return out
