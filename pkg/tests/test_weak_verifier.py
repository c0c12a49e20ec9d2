import json
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

from radial_gate.anomaly_algebra import cartesian, laplacian_anomaly, pair_with_testfn
from radial_gate.errors import IllConditionedBasis, NonConvergent
from radial_gate.origin_classifier import Branch, Dimension, PotentialSpec, RadialProblem, frobenius_series
from radial_gate.probes import TestFunction, monomial_basis
from radial_gate.weak_verifier import (
    CylinderY0, LogBranch, PowerBranch, QuadratureConfig, SmoothBranch, excision_boundary_term,
    extrapolate, measure_coefficient, multi_indices, regularized_annulus_integral,
    regularized_flux, regularized_laplacian, weak_residual, weak_residuals,
)

FIVE = [TestFunction.gaussian(Fraction(1, 2)), TestFunction.gaussian(Fraction(3, 10)),
        TestFunction.monomial_gaussian(1, 0), TestFunction.monomial_gaussian(1, 1, Fraction(7, 10)),
        TestFunction.monomial_gaussian(0, 2, Fraction(2, 5))]


def _smooth(m, energy=0.6, potential=None):
    prob = RadialProblem(Dimension.TWO_D, m, potential=potential or PotentialSpec.zero())
    return SmoothBranch(m, frobenius_series(prob, energy=energy, order=24))


GAUSSIANS = [TestFunction.gaussian(Fraction(k, 10)) for k in (3, 4, 5, 6, 8)]


def test_log_branch_against_two_pi_phi0():
    for rep, phi in zip(weak_residuals(LogBranch(), GAUSSIANS), GAUSSIANS):
        assert rep.predicted == pytest.approx(2 * math.pi * phi.origin_derivative(0, 0), abs=0)
        assert rep.relative_error <= 1e-6


def test_log_branch_odd_probes_vanish():
    odd = [TestFunction.monomial_gaussian(1, 0), TestFunction.monomial_gaussian(1, 1)]
    for rep in weak_residuals(LogBranch(), odd):
        assert rep.predicted == 0
        assert abs(rep.measured) <= 1e-9


def test_log_branch_independent_of_k():
    a = weak_residuals(LogBranch(1.0, 1.0), FIVE)
    b = weak_residuals(LogBranch(1.0, 10.0), FIVE)
    for x, y in zip(a, b):
        assert abs(x.measured - y.measured) <= 1e-6


@pytest.mark.parametrize("m", [0, 1, 2, -3])
def test_smooth_branch_has_no_anomaly(m):
    for rep in weak_residuals(_smooth(m), monomial_basis(3)):
        assert abs(rep.measured) <= 1e-6
        assert rep.predicted == 0


def test_smooth_branch_with_potential():
    psi = _smooth(1, 1.1, PotentialSpec.power(0.5, 2))
    for rep in weak_residuals(psi, FIVE):
        assert abs(rep.measured) <= 1e-6


@pytest.mark.parametrize("m", [1, -1, 2, 3])
def test_power_branch_matches_symbolic_pairing(m):
    basis = monomial_basis(3)
    for rep, phi in zip(weak_residuals(PowerBranch.leading(m), basis), basis):
        assert rep.predicted == pair_with_testfn(laplacian_anomaly(m), phi)
        assert abs(rep.measured - rep.predicted) <= 1e-8 * max(1.0, abs(rep.predicted))


def test_power_branch_full_series():
    prob = RadialProblem(Dimension.TWO_D, 1)
    psi = PowerBranch(1, frobenius_series(prob, energy=0.8, branch=Branch.POWER, order=10))
    for rep in weak_residuals(psi, FIVE):
        assert abs(rep.measured - rep.predicted) <= 1e-8 * max(1.0, abs(rep.predicted))


def test_power_branch_validation():
    with pytest.raises(ValueError):
        PowerBranch(2, frobenius_series(RadialProblem(Dimension.TWO_D, 2)))
    with pytest.raises(ValueError):
        SmoothBranch(1, frobenius_series(RadialProblem(Dimension.TWO_D, 2)))


def test_linearity():
    p1, p2 = LogBranch(), PowerBranch.leading(1)
    combo = 2.0 * p1 + (-1.5) * p2
    r1, r2, rc = (weak_residuals(p, FIVE) for p in (p1, p2, combo))
    for a, b, c in zip(r1, r2, rc):
        assert abs(c.measured - (2.0 * a.measured - 1.5 * b.measured)) <= 1e-8
        assert c.predicted == pytest.approx(2.0 * a.predicted - 1.5 * b.predicted)


def test_y0_anomaly_is_four_delta():
    phi = TestFunction.gaussian()
    rep = weak_residual(CylinderY0(energy=0.7), phi)
    assert rep.measured.real / phi.origin_derivative(0, 0) == pytest.approx(4.0, rel=1e-6)


def test_raw_pairings_match_boundary_oracle():
    # Green: int_{r>eps} (psi lap phi - phi L_c psi) = -oint (psi d_r phi - phi d_r psi) eps
    for psi in (LogBranch(), PowerBranch.leading(2), CylinderY0(0.5)):
        rep = weak_residual(psi, TestFunction.monomial_gaussian(2, 0))
        for e, raw in zip(rep.excision_radii, rep.raw):
            ref = excision_boundary_term(psi, TestFunction.monomial_gaussian(2, 0), e)
            assert abs(raw + ref) <= 1e-10 * max(1.0, abs(ref))


@pytest.mark.parametrize("psi", [LogBranch(), PowerBranch.leading(1), PowerBranch.leading(3)],
                         ids=lambda p: p.name)
def test_extrapolation_stable_under_halving(psi):
    phi = TestFunction.monomial_gaussian(1, 0)
    quad = QuadratureConfig()
    a = weak_residual(psi, phi, quad)
    b = weak_residual(psi, phi, quad.with_eps([e / 2 for e in quad.eps_list]))
    assert abs(a.measured - b.measured) <= max(a.error_bar, b.error_bar, 1e-14)


def test_extrapolate_recovers_polynomial_limit():
    eps = np.array([0.1 * 0.5 ** k for k in range(7)])
    vals = 3.0 + 2.0 * eps ** 2 * np.log(eps) - 5.0 * eps ** 2 + 0.5 * eps ** 4
    ex = extrapolate(eps, vals, [(2, True), (2, False), (4, True), (4, False)], 4)
    assert ex.value == pytest.approx(3.0, abs=1e-12)
    assert ex.error < 1e-10


def test_nonconvergent_when_tolerance_unreachable():
    quad = QuadratureConfig(extrapolation_order=1, tolerance=1e-14)
    with pytest.raises(NonConvergent):
        weak_residual(PowerBranch.leading(2), TestFunction.monomial_gaussian(2, 0), quad)


def test_angular_resolution_guard():
    with pytest.raises(ValueError):
        weak_residual(PowerBranch.leading(3), TestFunction.gaussian(), QuadratureConfig(angular_nodes=16))


def test_quadrature_config_json(tmp_path):
    q = QuadratureConfig(eps_list=(0.04, 0.02, 0.01, 0.005), angular_nodes=80)
    text = json.dumps(q.to_dict())
    assert QuadratureConfig.from_json(text) == q
    path = tmp_path / "q.json"
    path.write_text(text)
    assert QuadratureConfig.from_json(str(path)) == q
    with pytest.raises(ValueError):
        QuadratureConfig(eps_list=(0.01, 0.02, 0.005))
    with pytest.raises(ValueError):
        QuadratureConfig(eps_list=(0.01, 0.005))


# -- coefficient recovery -------------------------------------------------------

def test_multi_indices_order():
    assert multi_indices(2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_measure_log():
    res = measure_coefficient(LogBranch())
    assert res.coefficient((0, 0)) == pytest.approx(2 * math.pi, rel=1e-8)
    for a, v in res.coefficients.items():
        if a != (0, 0):
            assert abs(v) <= 1e-4


@pytest.mark.parametrize("m", [1, 2, -2, 3, -3])
def test_measure_power_recovers_derived_anomaly(m):
    res = measure_coefficient(PowerBranch.leading(m))
    for a, (v, e, err) in res.compare(laplacian_anomaly(m)).items():
        assert err <= 1e-6, (a, v, e)
    assert res.condition_number < 1e3


def test_measure_m2_matches_quoted_row():
    res = measure_coefficient(PowerBranch.leading(2))
    expected = cartesian({(2, 0): -1, (0, 2): 1, (1, 1): -2j})
    assert max(err for *_, err in res.compare(expected).values()) <= 1e-6


def test_measure_smooth():
    res = measure_coefficient(_smooth(2))
    assert max(abs(v) for v in res.coefficients.values()) <= 1e-6


def test_ill_conditioned_basis():
    with pytest.raises(IllConditionedBasis):
        measure_coefficient(LogBranch(), basis=monomial_basis(2))
    twins = [TestFunction.gaussian()] * 10
    with pytest.raises(IllConditionedBasis):
        measure_coefficient(LogBranch(), basis=twins)


# -- regularised logarithm ------------------------------------------------------

def test_flux_closed_form_random_pairs():
    rng = np.random.default_rng(20261017)
    for alpha, eps in 10 ** rng.uniform(-6, 0, size=(100, 2)):
        assert regularized_flux(alpha, eps) == pytest.approx(
            2 * math.pi * eps / (eps + alpha), rel=1e-12, abs=0)


def test_flux_examples():
    assert regularized_flux(0.3, 0.3) == pytest.approx(math.pi, rel=1e-14)
    # 2 pi eps / (eps + alpha) sits 1e-6 relative below 2 pi eps here
    small = regularized_flux(1.0, 1e-6)
    assert small == pytest.approx(2 * math.pi * 1e-6 / (1 + 1e-6), rel=1e-12)
    assert small == pytest.approx(2 * math.pi * 1e-6, rel=2e-6)
    eps = 0.1
    seq = [regularized_flux(eps * 2.0 ** -j, eps) for j in range(21)]
    gaps = [2 * math.pi - v for v in seq]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-5


def test_regularized_laplacian_values():
    assert regularized_laplacian(1.0, 1.0) == 0.25
    assert regularized_laplacian(1e-8, 1.0) == pytest.approx(1e-8, rel=1e-7)
    with pytest.raises(ValueError):
        regularized_laplacian(1.0, 0.0)


@pytest.mark.parametrize("alpha,eps,outer", [(1.0, 0.1, 2.0), (1e-3, 1e-4, 1.0), (0.5, 1e-6, 3.0)])
def test_annulus_equals_flux_difference(alpha, eps, outer):
    area = regularized_annulus_integral(alpha, eps, outer)
    assert area == pytest.approx(regularized_flux(alpha, outer) - regularized_flux(alpha, eps), rel=1e-12)
    ref = scipy_quad(lambda r: 2 * math.pi * r * regularized_laplacian(alpha, r), eps, outer,
                     points=[alpha] if eps < alpha < outer else None, limit=200, epsabs=0, epsrel=1e-13)[0]
    assert area == pytest.approx(ref, rel=1e-10)
