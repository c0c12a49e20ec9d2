import math
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from radial_gate.anomaly_algebra import (
    PI, PUBLISHED_LAPLACIAN_ANOMALY, AnomalyCoefficient, CartesianDerivative, DeltaSum,
    ExactCoefficient, IteratedLaplacian, angular_coefficient, angular_laplacian,
    anomaly_pattern, cartesian, derivative_functional, laplacian_anomaly,
    pair_with_testfn, q_term, reduce_to_cartesian, schwartz_laplacian, to_laplacian_level,
)
from radial_gate.errors import AcceptableBranch, DomainError, UnreducibleWeight
from radial_gate.origin_classifier import Branch, Dimension, RadialProblem
from radial_gate.probes import TestFunction, monomial_basis

I = 1j


def _pi(c):
    return ExactCoefficient.of(c, 1)


def _q(m, **kw):
    return q_term(RadialProblem(Dimension.TWO_D, m), **kw)


# -- symbolic oracle ------------------------------------------------------------
# For harmonic psi = r^-|m| e^{i m theta} and phi = x^a y^b, Green's identity on
# r > eps leaves <lap psi, phi> = -oint (psi d_r phi - phi d_r psi) eps dtheta.
# Both factors are homogeneous, so the integrand is (a + b + |m|) psi phi and
# the angular integral is 2 pi times the constant term in w = e^{i theta}.

W, EPS = sp.symbols("w epsilon")


def _green_pairing(m, a, b):
    cos = (W + 1 / W) / 2
    sin = (W - 1 / W) / (2 * sp.I)
    body = sp.expand(W ** m * cos ** a * sin ** b)
    const = sum(t for t in sp.Add.make_args(body) if not t.has(W))
    val = sp.nsimplify(-2 * sp.pi * (a + b + abs(m)) * EPS ** (a + b - abs(m)) * const)
    return sp.limit(val, EPS, 0, "+")


def _oracle_coefficients(m):
    """Cartesian coefficients c_alpha of the anomaly of r^-|m| e^{i m theta}."""
    out = {}
    for deg in range(5):
        for a in range(deg, -1, -1):
            b = deg - a
            val = _green_pairing(m, a, b)
            assert val.is_finite
            # <c d^alpha delta, x^a y^b> = c (-1)^{a+b} a! b! for alpha = (a, b)
            c = sp.nsimplify(val / ((-1) ** deg * math.factorial(a) * math.factorial(b)))
            if c != 0:
                out[(a, b)] = c
    return out


def _as_sympy(coeff):
    return (sp.Rational(coeff.re.numerator, coeff.re.denominator)
            + sp.I * sp.Rational(coeff.im.numerator, coeff.im.denominator)) * sp.pi ** coeff.pi_power


@pytest.mark.parametrize("m", [1, -1, 2, -2, 3, -3])
def test_laplacian_anomaly_matches_green_oracle(m):
    got = {a: _as_sympy(c) for a, c in laplacian_anomaly(m).cartesian_coefficients().items()}
    ref = _oracle_coefficients(m)
    assert set(got) == set(ref)
    for a in ref:
        assert sp.simplify(got[a] - ref[a]) == 0


def test_log_anomaly_matches_green_oracle():
    # psi = ln r, phi = 1: -oint (0 - 1/eps) eps dtheta
    r, th = sp.symbols("r theta", positive=True)
    val = -sp.integrate((-sp.diff(sp.log(r), r) * r).subs(r, EPS), (th, 0, 2 * sp.pi))
    assert val == 2 * sp.pi
    assert laplacian_anomaly(0) == cartesian({(0, 0): 2})


# -- C_p ------------------------------------------------------------------------

@pytest.mark.parametrize("p", range(1, 7))
def test_c_p_closed_form(p):
    expected = Fraction(-4 * p, 2 ** (2 * p - 1) * math.factorial(p) ** 2)
    assert AnomalyCoefficient(p).c == ExactCoefficient(expected, 0, 1)


def test_c_p_low_values():
    assert AnomalyCoefficient(1).c == _pi(-2)
    assert AnomalyCoefficient(2).c == _pi(Fraction(-1, 4))
    assert AnomalyCoefficient(3).c == _pi(Fraction(-1, 96))
    assert AnomalyCoefficient(0).chi_c.is_zero
    assert AnomalyCoefficient(-1).chi_c.is_zero


# -- worked examples -------------------------------------------------------------

def test_schwartz_examples():
    res = schwartz_laplacian(-2)
    assert (res.classical_coefficient, res.classical_exponent) == (4, -4)
    assert res.anomaly == DeltaSum([(_pi(-2), IteratedLaplacian(1))])
    res = schwartz_laplacian(-1)
    assert (res.classical_coefficient, res.classical_exponent) == (1, -3)
    assert res.anomaly.is_empty
    assert schwartz_laplacian(-4).anomaly.coefficient(IteratedLaplacian(2)) == _pi(Fraction(-1, 4))
    assert schwartz_laplacian(-3).anomaly.is_empty


@pytest.mark.parametrize("m", range(-4, 5))
def test_acceptable_branch_anomaly_free(m):
    res = angular_laplacian(abs(m), m)
    assert res.classical_coefficient == 0
    assert res.anomaly.is_empty


def test_angular_examples():
    res = angular_laplacian(-1, 1)
    assert res.anomaly == DeltaSum([(_pi(-1), IteratedLaplacian(1, 1, 1))])
    res = angular_laplacian(-2, 2)
    assert res.anomaly == DeltaSum([(_pi(Fraction(-1, 8)), IteratedLaplacian(2, 2, 2))])
    res = angular_laplacian(-3, 3)
    assert res.anomaly == DeltaSum([(_pi(Fraction(-1, 192)), IteratedLaplacian(3, 3, 3))])
    assert angular_coefficient(1, 1) == _pi(-1)


def test_reduce_examples():
    got = reduce_to_cartesian(DeltaSum([(1, IteratedLaplacian(1, 1, 1))]))
    assert got == cartesian({(1, 0): -2, (0, 1): -2j}, 0)
    got = reduce_to_cartesian(DeltaSum([(_pi(Fraction(-1, 8)), IteratedLaplacian(2, 2, -2))]))
    assert got == cartesian({(2, 0): -1, (0, 2): 1, (1, 1): 2j})


def test_reduce_m3_derived():
    got = reduce_to_cartesian(DeltaSum([(_pi(Fraction(-1, 192)), IteratedLaplacian(3, 3, 3))]))
    q = Fraction(1, 4)
    assert got == cartesian({(3, 0): q, (2, 1): complex(0, 3 * q),
                             (1, 2): -3 * q, (0, 3): complex(0, -q)})


def test_reduce_rejects_non_polynomial_weight():
    with pytest.raises(UnreducibleWeight):
        reduce_to_cartesian(DeltaSum([(1, IteratedLaplacian(2, 1, 2))]))
    with pytest.raises(DomainError):
        reduce_to_cartesian(DeltaSum(dimension=3))


# -- q_term ---------------------------------------------------------------------

def test_q_log_case():
    q = _q(0, C=3)
    assert q.hbar2_over_mu == 1
    assert q == DeltaSum([(_pi(-3), CartesianDerivative((0, 0)))], hbar2_over_mu=1)


def test_q_m1_row():
    assert to_laplacian_level(_q(1)) == cartesian({(1, 0): 2, (0, 1): 2j})
    assert to_laplacian_level(_q(-1, a0=Fraction(1, 3))) == cartesian(
        {(1, 0): Fraction(2, 3), (0, 1): ExactCoefficient(0, Fraction(-2, 3), 1)})


@pytest.mark.parametrize("m", [2, -2])
def test_q_m2_row(m):
    s = 1 if m > 0 else -1
    assert to_laplacian_level(_q(m)) == cartesian({(2, 0): -1, (0, 2): 1, (1, 1): complex(0, -2 * s)})


@pytest.mark.parametrize("m", [1, -1, 2, -2])
def test_q_matches_quoted_rows(m):
    assert to_laplacian_level(_q(m)) == PUBLISHED_LAPLACIAN_ANOMALY[m]


@pytest.mark.parametrize("m", [3, -3])
def test_q_m3_differs_from_quoted_row(m):
    # the quoted |m| = 3 row is not what the algebra or the Green oracle give
    assert to_laplacian_level(_q(m)) != PUBLISHED_LAPLACIAN_ANOMALY[m]
    assert to_laplacian_level(_q(m)) == laplacian_anomaly(m)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_consistency_with_angular_reduction(m):
    for a0 in (1, Fraction(-5, 7), complex(2, 1)):
        red = reduce_to_cartesian(angular_laplacian(-m, m).anomaly)
        assert _q(m, a0=a0) == red.scale(ExactCoefficient.of(a0) * Fraction(-1, 2), hbar2_over_mu=1)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_conjugation_symmetry(m):
    for a0 in (1, Fraction(3, 2), -4):
        assert _q(-m, a0=a0) == _q(m, a0=a0).conjugate()


def test_q_acceptable_and_3d():
    with pytest.raises(AcceptableBranch):
        _q(2, branch=Branch.SMOOTH)
    assert _q(2, branch=Branch.SMOOTH, allow_acceptable=True).is_empty
    with pytest.raises(DomainError):
        q_term(RadialProblem(Dimension.THREE_D, 1))
    with pytest.raises(ValueError):
        _q(1, branch=Branch.LOG)


def test_anomaly_pattern_three_d():
    assert anomaly_pattern(RadialProblem(Dimension.THREE_D, 2)) == (3, 2, "∂_ij δ⁽³⁾(r)")


# -- algebra and serialisation --------------------------------------------------

def test_exact_coefficient_arithmetic():
    a = ExactCoefficient(Fraction(1, 2), 3, 1)
    assert a * ExactCoefficient(0, 1) == ExactCoefficient(-3, Fraction(1, 2), 1)
    assert (a - a).is_zero
    assert ExactCoefficient(0, 2) ** 2 == ExactCoefficient(-4)
    with pytest.raises(ValueError):
        a + ExactCoefficient(1)
    assert complex(PI) == pytest.approx(math.pi)
    assert str(ExactCoefficient(Fraction(-1, 4), 0, 1)) == "-1/4π"


def test_normal_form_merges_and_orders():
    d = DeltaSum([(_pi(1), CartesianDerivative((0, 1))), (_pi(1), CartesianDerivative((1, 0))),
                  (_pi(2), CartesianDerivative((0, 1))), (_pi(-1), CartesianDerivative((1, 0))),
                  (_pi(1), CartesianDerivative((0, 0)))])
    assert [f.alpha for _, f in d.terms] == [(0, 0), (0, 1)]
    assert d.coefficient(CartesianDerivative((0, 1))) == _pi(3)


@pytest.mark.parametrize("m", [0, 1, -2, 3])
def test_json_roundtrip(m):
    for d in (_q(m), angular_laplacian(-abs(m) - 2, m).anomaly):
        assert DeltaSum.from_json(d.to_json()) == d
    one = _q(1).to_dict()["terms"][0]
    assert set(one) >= {"coeff_re_num", "coeff_re_den", "coeff_im_num", "coeff_im_den",
                        "pi_power", "multi_index"}


# -- pairing --------------------------------------------------------------------

def test_pairing_basics():
    phi = TestFunction.monomial_gaussian(1, 0, Fraction(1, 2))
    g = TestFunction.gaussian()
    assert pair_with_testfn(cartesian({(0, 0): 2}), g) == pytest.approx(2 * math.pi)
    dx = DeltaSum([(1, CartesianDerivative((1, 0)))])
    assert pair_with_testfn(dx, phi) == pytest.approx(-phi.origin_derivative(1, 0))
    lap = DeltaSum([(1, IteratedLaplacian(2))])
    assert pair_with_testfn(lap, g) == pytest.approx(
        g.origin_derivative(4, 0) + 2 * g.origin_derivative(2, 2) + g.origin_derivative(0, 4))


def test_pairing_schrodinger_level_units():
    q = _q(0)
    g = TestFunction.gaussian()
    assert pair_with_testfn(q, g, hbar=2.0, mass=0.5) == pytest.approx(-8 * math.pi)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_reduction_identity_exact_on_basis(p):
    basis = monomial_basis(3, Fraction(1, 2), max_order=6)
    assert len(basis) == 10
    lhs = DeltaSum([(1, IteratedLaplacian(p, 2, 0))])
    rhs = DeltaSum([(4 * p * p, IteratedLaplacian(p - 1))])
    for phi in basis:
        assert pair_with_testfn(lhs, phi, exact=True) == pair_with_testfn(rhs, phi, exact=True)


def test_reduced_and_iterated_pairings_agree():
    basis = monomial_basis(3, Fraction(3, 5))
    for m in (1, 2, 3, -3):
        it = angular_laplacian(-abs(m), m).anomaly
        red = reduce_to_cartesian(it)
        for phi in basis:
            assert pair_with_testfn(it, phi, exact=True) == pair_with_testfn(red, phi, exact=True)


def test_derivative_functional_signs():
    d = cartesian({(1, 0): 1, (2, 1): 1}, 0)
    func = derivative_functional(d)
    assert func[(1, 0)] == ExactCoefficient(-1) and func[(2, 1)] == ExactCoefficient(-1)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(-3, 3).filter(bool), re=st.fractions(max_denominator=20),
       im=st.fractions(max_denominator=20))
def test_q_linear_in_a0(m, re, im):
    a0 = ExactCoefficient(re, im)
    assert _q(m, a0=a0) == _q(m).scale(a0)
