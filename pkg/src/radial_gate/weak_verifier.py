"""Weak-form measurement of the delta terms hidden in nabla^2 psi.

For a candidate psi and a probe phi the excised pairing

    M(eps) = int_{r > eps} (psi nabla^2 phi - phi L_c psi) dA

(L_c the pointwise Laplacian away from the origin) tends to <A, phi>, where
A is the distributional remainder of nabla^2 psi at r = 0. M(eps) is
computed on a polar grid: Gauss-Legendre panels in r graded geometrically
from eps, and a uniform periodic rule in the angle. The excision disk is the
full circle, so the angular rule cancels the non-integrable low harmonics
exactly. M is sampled on a list of radii and extrapolated to eps = 0 by a
least-squares fit in the powers of eps that the Taylor expansion of phi
allows.
"""
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import special_fn
from .anomaly_algebra import (CartesianDerivative, DeltaSum, ExactCoefficient,
                              angular_laplacian, pair_with_testfn, reduce_to_cartesian)
from .errors import IllConditionedBasis, NonConvergent
from .origin_classifier import FrobeniusSeries
from .probes import monomial_basis

FLOOR = 1e-9


# -- candidates ---------------------------------------------------------------

class SingularCandidate:
    """psi(r, theta) = radial(r) e^{i m theta} plus its classical Laplacian."""

    m = 0
    name = "candidate"

    def radial(self, r):
        raise NotImplementedError

    def radial_derivative(self, r):
        raise NotImplementedError

    def classical_laplacian_radial(self, r):
        raise NotImplementedError

    def predicted_anomaly(self):
        raise NotImplementedError

    def correction_terms(self):
        """[(power, has_log)] of eps-corrections to M(eps), constant excluded."""
        raise NotImplementedError

    # full-plane evaluations share one harmonic factor
    def value(self, r, theta):
        return self.radial(r) * np.exp(1j * self.m * theta)

    def classical_laplacian(self, r, theta):
        return self.classical_laplacian_radial(r) * np.exp(1j * self.m * theta)

    def dr(self, r, theta):
        return self.radial_derivative(r) * np.exp(1j * self.m * theta)

    def __add__(self, other):
        return Composite(((1.0, self), (1.0, other)))

    def __rmul__(self, c):
        return Composite(((c, self),))


def _log_terms(n):
    out = []
    for j in range(1, n + 1):
        out += [(2 * j, True), (2 * j, False)]
    return out


@dataclass(frozen=True)
class LogBranch(SingularCandidate):
    """psi = C ln(k r)."""

    C: float = 1.0
    k: float = 1.0
    m = 0

    @property
    def name(self):
        return f"log(C={self.C:g},k={self.k:g})"

    def radial(self, r):
        return self.C * np.log(self.k * r)

    def radial_derivative(self, r):
        return self.C / r

    def classical_laplacian_radial(self, r):
        return np.zeros_like(r)

    def predicted_anomaly(self):
        return DeltaSum([(ExactCoefficient.of(self.C) * ExactCoefficient(2, 0, 1),
                          CartesianDerivative((0, 0)))])

    def correction_terms(self):
        return _log_terms(4)


@dataclass(frozen=True)
class _SeriesBranch(SingularCandidate):
    m: int = 0
    series: FrobeniusSeries = None

    def _terms(self):
        return [(self.series.leading_exponent + e, c)
                for e, c in zip(self.series.offsets, self.series.coefficients)]

    def radial(self, r):
        return sum(c * r ** p for p, c in self._terms())

    def radial_derivative(self, r):
        return sum(c * p * r ** (p - 1) for p, c in self._terms() if p != 0)

    def classical_laplacian_radial(self, r):
        m2 = self.m * self.m
        return sum(c * (p * p - m2) * r ** (p - 2) for p, c in self._terms() if p * p != m2)

    def predicted_anomaly(self):
        total = DeltaSum()
        for p, c in self._terms():
            if float(p).is_integer():
                res = angular_laplacian(int(p), self.m)
                if res.anomaly:
                    red = reduce_to_cartesian(res.anomaly)
                    total = total + red.scale(ExactCoefficient.of(c))
        return total

    def correction_terms(self):
        base = self.series.leading_exponent + abs(self.m)
        pows = set()
        for e in self.series.offsets:
            for j in range(6):
                p = base + e + 2 * j
                if p > 1e-12:
                    pows.add(round(p, 12))
        return [(p, False) for p in sorted(pows)]


@dataclass(frozen=True)
class PowerBranch(_SeriesBranch):
    """psi = e^{i m theta} r^{-|m|} sum a_e r^e."""

    def __post_init__(self):
        if self.series.leading_exponent != -abs(self.m) or self.m == 0:
            raise ValueError("power branch needs m != 0 and leading exponent -|m|")

    @property
    def name(self):
        return f"power(m={self.m})"

    @classmethod
    def leading(cls, m, a0=1.0):
        return cls(m, FrobeniusSeries(-abs(m), (0,), (a0,), 0.0))


@dataclass(frozen=True)
class SmoothBranch(_SeriesBranch):
    """psi = e^{i m theta} r^{|m|} sum a_e r^e."""

    def __post_init__(self):
        if self.series.leading_exponent != abs(self.m):
            raise ValueError("smooth branch needs leading exponent |m|")

    @property
    def name(self):
        return f"smooth(m={self.m})"


@dataclass(frozen=True)
class CylinderY0(SingularCandidate):
    """psi = Y0(k r) with k = sqrt(2 mu E) / hbar; L_c psi = -k^2 psi."""

    energy: float = 0.5
    hbar: float = 1.0
    mass: float = 1.0
    m = 0

    @property
    def name(self):
        return f"Y0(E={self.energy:g})"

    @property
    def k(self):
        return math.sqrt(2.0 * self.mass * self.energy) / self.hbar

    def radial(self, r):
        return special_fn.bessely(0, self.k * r)

    def radial_derivative(self, r):
        return -self.k * special_fn.bessely(1, self.k * r)

    def classical_laplacian_radial(self, r):
        return -self.k ** 2 * self.radial(r)

    def predicted_anomaly(self):
        return DeltaSum([(4, CartesianDerivative((0, 0)))])

    def correction_terms(self):
        return _log_terms(4)


@dataclass(frozen=True)
class Composite(SingularCandidate):
    parts: tuple = ()

    @property
    def name(self):
        return " + ".join(f"{c:g}*{p.name}" for c, p in self.parts)

    def value(self, r, theta):
        return sum(c * p.value(r, theta) for c, p in self.parts)

    def classical_laplacian(self, r, theta):
        return sum(c * p.classical_laplacian(r, theta) for c, p in self.parts)

    def dr(self, r, theta):
        return sum(c * p.dr(r, theta) for c, p in self.parts)

    def predicted_anomaly(self):
        total = DeltaSum()
        for c, p in self.parts:
            total = total + p.predicted_anomaly().scale(ExactCoefficient.of(c))
        return total

    def correction_terms(self):
        seen = set()
        for _, p in self.parts:
            seen.update(p.correction_terms())
        # at equal power the log term dominates as eps -> 0
        return sorted(seen, key=lambda t: (t[0], not t[1]))

    def __add__(self, other):
        extra = other.parts if isinstance(other, Composite) else ((1.0, other),)
        return Composite(self.parts + extra)


# -- quadrature ---------------------------------------------------------------

def _default_eps():
    return tuple(2e-2 * 0.5 ** k for k in range(8))


@dataclass(frozen=True)
class QuadratureConfig:
    eps_list: tuple = field(default_factory=_default_eps)
    radial_nodes: int = 32
    panel_ratio: float = 2.0
    max_panel_width: float | None = None   # default: smallest probe sigma
    angular_nodes: int = 64
    extrapolation_order: int = 4
    tolerance: float = 1e-6

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        if len(eps) < 3 or any(e <= 0 for e in eps):
            raise ValueError("need at least three positive excision radii")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("excision radii must be strictly decreasing")
        object.__setattr__(self, "eps_list", eps)
        if self.panel_ratio <= 1.0:
            raise ValueError("panel_ratio must exceed 1")
        if self.radial_nodes < 2 or self.angular_nodes < 4:
            raise ValueError("too few quadrature nodes")

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "eps_list" in data:
            data["eps_list"] = tuple(data["eps_list"])
        return cls(**data)

    @classmethod
    def from_json(cls, source):
        """Load from a JSON string or a path to a JSON file."""
        text = source
        if not source.lstrip().startswith("{"):
            with open(source) as fh:
                text = fh.read()
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        d = asdict(self)
        d["eps_list"] = list(self.eps_list)
        return d

    def with_eps(self, eps_list):
        d = self.to_dict()
        d["eps_list"] = tuple(eps_list)
        return QuadratureConfig.from_dict(d)


def _panels(eps, r_cut, ratio, max_width):
    edges = [eps]
    while edges[-1] < r_cut:
        nxt = min(edges[-1] * ratio, edges[-1] + max_width, r_cut)
        edges.append(nxt)
    return edges


_GL = {}


def _gauss_legendre(n):
    if n not in _GL:
        _GL[n] = np.polynomial.legendre.leggauss(n)
    return _GL[n]


def _angles(n):
    return 2.0 * math.pi * np.arange(n) / n


def _excised_pairings(psi, probes, eps, quad, r_cut, max_width):
    """M(eps) for every probe; panel partial sums combined with fsum."""
    xg, wg = _gauss_legendre(quad.radial_nodes)
    th = _angles(quad.angular_nodes)
    dth = 2.0 * math.pi / quad.angular_nodes
    cos_t, sin_t = np.cos(th), np.sin(th)
    edges = _panels(eps, r_cut, quad.panel_ratio, max_width)
    parts = [[] for _ in probes]
    for a, b in zip(edges, edges[1:]):
        r = 0.5 * (b - a) * xg + 0.5 * (a + b)
        w = 0.5 * (b - a) * wg * r * dth
        R, T = np.meshgrid(r, th, indexing="ij")
        val = psi.value(R, T)
        lap = psi.classical_laplacian(R, T)
        X, Y = np.outer(r, cos_t), np.outer(r, sin_t)
        for k, phi in enumerate(probes):
            f = val * phi.laplacian(X, Y) - phi(X, Y) * lap
            parts[k].append(np.dot(w, f.sum(axis=1)))
    out = []
    for p in parts:
        arr = np.asarray(p, dtype=complex)
        out.append(complex(math.fsum(arr.real), math.fsum(arr.imag)))
    return out


def excision_boundary_term(psi, phi, eps, angular_nodes=64):
    """oint_{r=eps} (psi d_r phi - phi d_r psi) eps dtheta.

    By Green's identity M(eps) equals minus this quantity (up to the probe tail).
    """
    th = _angles(angular_nodes)
    r = np.full_like(th, eps)
    x, y = eps * np.cos(th), eps * np.sin(th)
    f = psi.value(r, th) * phi.radial_derivative(r, th) - phi(x, y) * psi.dr(r, th)
    s = f * eps * 2.0 * math.pi / angular_nodes
    return complex(math.fsum(s.real), math.fsum(s.imag))


@dataclass
class Extrapolation:
    value: complex
    error: complex | float
    coefficients: np.ndarray
    terms: list


def extrapolate(eps, values, terms, order):
    """Least-squares fit values ~ c0 + sum c_k eps^p_k (ln eps)^[log_k].

    ``error`` is the largest leave-one-out shift of c0.
    """
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(values, dtype=complex)
    n = min(order, len(eps) - 2, len(terms))
    use = terms[:n]

    def design(e):
        cols = [np.ones_like(e)]
        for p, lg in use:
            c = e ** p
            if lg:
                c = c * np.log(e)
            cols.append(c)
        return np.stack(cols, axis=1)

    def fit(idx):
        A = design(eps[idx])
        scale = np.max(np.abs(A), axis=0)
        scale[scale == 0] = 1.0
        sol = np.linalg.lstsq(A / scale, vals[idx], rcond=None)[0]
        return sol / scale

    full = fit(np.arange(len(eps)))
    loo = [fit(np.delete(np.arange(len(eps)), i))[0] for i in range(len(eps))]
    err = max(abs(v - full[0]) for v in loo)
    return Extrapolation(complex(full[0]), float(err), full, use)


@dataclass
class ResidualReport:
    candidate: str
    probe: str
    measured: complex
    predicted: complex
    excision_radii: list
    raw: list
    extrapolated_value: complex
    error_bar: float
    relative_error: float

    def as_dict(self):
        return {
            "candidate": self.candidate,
            "probe": self.probe,
            "measured": [self.measured.real, self.measured.imag],
            "predicted": [self.predicted.real, self.predicted.imag],
            "excision_radii": list(self.excision_radii),
            "raw": [[v.real, v.imag] for v in self.raw],
            "error_bar": self.error_bar,
            "relative_error": self.relative_error,
        }


def _check_angular(psi, quad):
    need = 8 * (abs(psi.m) + 2)
    if isinstance(psi, Composite):
        need = max(8 * (abs(p.m) + 2) for _, p in psi.parts)
    if quad.angular_nodes < need:
        raise ValueError(f"angular_nodes must be >= {need} for this candidate")


def weak_residuals(psi, probes, quad=None, predicted=None):
    """One ResidualReport per probe; the radial grid is shared across probes."""
    quad = quad or QuadratureConfig()
    _check_angular(psi, quad)
    anomaly = psi.predicted_anomaly() if predicted is None else predicted
    preds = [pair_with_testfn(anomaly, phi) for phi in probes]
    r_cut = max(phi.r_cut() for phi in probes)
    width = quad.max_panel_width or min(phi.sigma_f for phi in probes)
    raw = [_excised_pairings(psi, probes, e, quad, r_cut, width) for e in quad.eps_list]
    terms = psi.correction_terms()
    reports = []
    for k, phi in enumerate(probes):
        vals = [row[k] for row in raw]
        ex = extrapolate(quad.eps_list, vals, terms, quad.extrapolation_order)
        allowed = quad.tolerance * max(abs(ex.value), 1.0)
        if ex.error > allowed:
            raise NonConvergent(
                f"{psi.name} vs {phi}: extrapolation spread {ex.error:.3g} exceeds {allowed:.3g}")
        pred = preds[k]
        rel = abs(ex.value - pred) / max(abs(pred), FLOOR)
        reports.append(ResidualReport(psi.name, str(phi), ex.value, pred,
                                      list(quad.eps_list), vals, ex.value, ex.error, rel))
    return reports


def weak_residual(psi, phi, quad=None, predicted=None):
    """Excised, extrapolated pairing of psi's Laplacian remainder with phi."""
    return weak_residuals(psi, [phi], quad, predicted)[0]


# -- coefficient recovery -----------------------------------------------------

def multi_indices(max_order):
    """All 2D multi-indices up to ``max_order``: ascending order, x first."""
    return [(i, n - i) for n in range(max_order + 1) for i in range(n, -1, -1)]


def default_basis(max_degree=3):
    return (monomial_basis(max_degree, Fraction(1, 2))
            + monomial_basis(max_degree, Fraction(7, 10)))


@dataclass
class MeasuredAnomaly:
    """Least-squares coefficients c_alpha of sum c_alpha d^alpha delta."""

    coefficients: dict
    errors: dict
    condition_number: float
    residual_norm: float
    reports: list

    def coefficient(self, alpha):
        return self.coefficients.get(tuple(alpha), 0j)

    def compare(self, expected):
        """{alpha: (measured, expected, error)}; relative for nonzero expectations."""
        exp = {a: complex(c) for a, c in expected.cartesian_coefficients().items()}
        out = {}
        for a, v in self.coefficients.items():
            e = exp.get(a, 0j)
            err = abs(v - e) / abs(e) if e != 0 else abs(v)
            out[a] = (v, e, err)
        for a, e in exp.items():
            if a not in out:
                out[a] = (0j, e, 1.0)
        return out

    def as_delta_terms(self, threshold=0.0):
        return {a: c for a, c in self.coefficients.items() if abs(c) > threshold}


def measure_coefficient(psi, basis=None, max_order=3, quad=None, max_condition=1e8):
    """Recover the Cartesian delta coefficients of psi's anomaly from pairings."""
    basis = default_basis() if basis is None else list(basis)
    alphas = multi_indices(max_order)
    if len(basis) < len(alphas):
        raise IllConditionedBasis(
            f"{len(basis)} probes cannot determine {len(alphas)} coefficients")
    M = np.array([[(-1) ** sum(a) * phi.origin_derivative(*a) for a in alphas]
                  for phi in basis])
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > max_condition:
        raise IllConditionedBasis(f"probe matrix condition number {cond:.3g}")
    reports = weak_residuals(psi, basis, quad)
    b = np.array([r.measured for r in reports])
    sol, *_ = np.linalg.lstsq(M, b, rcond=None)
    pinv = np.linalg.pinv(M)
    errs = np.abs(pinv) @ np.array([r.error_bar for r in reports])
    resid = float(np.linalg.norm(M @ sol - b))
    return MeasuredAnomaly({a: complex(c) for a, c in zip(alphas, sol)},
                           {a: float(e) for a, e in zip(alphas, errs)}, cond, resid, reports)


# -- regularised logarithm ------------------------------------------------------

def regularized_flux(alpha, eps, angular_nodes=64):
    """Outward flux of grad F_alpha = r_hat / (r + alpha) through the circle r = eps."""
    if alpha <= 0 or eps <= 0:
        raise ValueError("alpha and eps must be positive")
    th = _angles(angular_nodes)
    gx = np.cos(th) / (eps + alpha)
    gy = np.sin(th) / (eps + alpha)
    flux = (gx * np.cos(th) + gy * np.sin(th)) * eps * (2.0 * math.pi / angular_nodes)
    return math.fsum(flux)


def regularized_laplacian(alpha, r):
    """nabla^2 ln(r + alpha) = alpha / (r (r + alpha)^2) for r > 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    out = alpha / (r * (r + alpha) ** 2)
    return float(out) if out.ndim == 0 else out


def regularized_annulus_integral(alpha, eps, outer, nodes=32):
    """int_{eps < r < outer} nabla^2 F_alpha dA by graded Gauss-Legendre panels."""
    xg, wg = _gauss_legendre(nodes)
    edges = _panels(eps, outer, 2.0, max(outer, alpha))
    parts = []
    for a, b in zip(edges, edges[1:]):
        r = 0.5 * (b - a) * xg + 0.5 * (a + b)
        f = 2.0 * math.pi * r * regularized_laplacian(alpha, r)
        parts.append(float(np.dot(0.5 * (b - a) * wg, f)))
    return math.fsum(parts)
