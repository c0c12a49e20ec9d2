"""Radial eigenproblems: shooting, the circular well, and the Y0 pseudo-state.

Integration runs in t = ln r on the state (F, r F'), where F is either R or
u = R r^{(d-1)/2}; this keeps the start radius r0 = 1e-6 r_max cheap and
makes the Frobenius start exact to series order.
"""
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import kernels, special_fn
from .errors import IrregularPotential, NoBracket, StiffnessFailure
from .origin_classifier import (Branch, Dimension, PotentialForm, PotentialSpec,
                                RadialProblem, check_regular, classify, frobenius_series)
from .weak_verifier import CylinderY0, extrapolate, weak_residual
from .probes import TestFunction

START_FRACTION = 1e-6
SERIES_ORDER = 12


class Form(enum.Enum):
    R = "R"
    U = "u"


def _form_params(prob, form):
    """(c, q, wexp, p) for y1' = c y1 + (q + g r^2 (V - E)) y0 and F = r^p R."""
    d = prob.d
    if form is Form.R:
        return -(d - 2.0), float(prob.centrifugal), float(d), 0.0
    if prob.dimension is Dimension.TWO_D:
        return 1.0, prob.quantum_number ** 2 - 0.25, 1.0, 0.5
    return 1.0, float(prob.centrifugal), 1.0, 1.0


def _kernel_potential(pot, r_max):
    if pot.form is PotentialForm.WELL and r_max > pot.radius * (1 + 1e-12):
        raise ValueError("r_max beyond the well wall")
    terms = pot.power_terms()
    pc = [c for c, _ in terms]
    pk = [k for _, k in terms]
    sp = pot.spline()
    sx, sc = (None, None) if sp is None else sp
    return pc, pk, sx, sc


@dataclass
class RadialSolution:
    r: np.ndarray
    R: np.ndarray
    dR: np.ndarray
    energy: float
    nodes: int
    norm: float          # int_{r0}^{r_max} R^2 r^{d-1} dr
    end_value: float     # F(r_max)
    nsteps: int
    form: Form


def _run(prob, energy, r_max, form, sample_r=None, rtol=1e-12, series_order=SERIES_ORDER):
    if not check_regular(prob.potential):
        raise IrregularPotential(f"potential {prob.potential} is not regular at r = 0")
    c, q, wexp, p = _form_params(prob, form)
    r0 = START_FRACTION * r_max
    ser = frobenius_series(prob, energy, Branch.SMOOTH, order=series_order)
    R0 = float(np.real(ser.value(r0)))
    rdR0 = float(np.real(ser.r_derivative(r0)))
    y0 = r0 ** p * R0
    y1 = r0 ** p * (p * R0 + rdR0)
    pc, pk, sx, sc = _kernel_potential(prob.potential, r_max)
    st = None if sample_r is None else np.log(np.asarray(sample_r, dtype=float))
    y_end, nodes, samples, nsteps, status = kernels.integrate(
        c, q, prob.g, energy, wexp, math.log(r0), math.log(r_max), y0, y1,
        pc, pk, sx, sc, rtol=rtol, sample_t=st)
    if status:
        raise StiffnessFailure(
            f"integration stalled at E = {energy!r} ({'step underflow' if status == 1 else 'step budget'})")
    return y_end, nodes, samples, nsteps, p


def integrate_radial(prob, energy, r_max, branch=Branch.SMOOTH, r_eval=None,
                     form=Form.R, rtol=1e-12):
    """Outward solution of the acceptable branch, sampled at ``r_eval``.

    Starts from the Frobenius series at r0 = 1e-6 r_max with a0 = 1.
    """
    if branch is not Branch.SMOOTH:
        raise ValueError("outward integration starts on the acceptable branch only")
    if r_eval is None:
        r_eval = np.linspace(r_max / 200, r_max, 200)
    r_eval = np.asarray(r_eval, dtype=float)
    if np.any(np.diff(r_eval) <= 0) or r_eval[0] < START_FRACTION * r_max:
        raise ValueError("r_eval must be increasing and above the start radius")
    y_end, nodes, samples, nsteps, p = _run(prob, energy, r_max, form, r_eval, rtol)
    F, rdF = samples[:, 0], samples[:, 1]
    R = F / r_eval ** p
    dR = (rdF - p * F) / r_eval ** (p + 1)
    return RadialSolution(r_eval, R, dR, energy, nodes, float(y_end[2]),
                          float(y_end[0]), nsteps, form)


# -- spectra ------------------------------------------------------------------

@dataclass
class SpectrumResult:
    """Levels (n, E_n) with normalised R_n sampled on a shared grid."""

    problem: RadialProblem
    levels: list
    r: np.ndarray
    wavefunctions: list
    derivatives: list
    normalization: list
    residuals: list = field(default_factory=list)
    method: str = "shooting"
    form: Form = Form.R

    def __post_init__(self):
        es = [e for _, e in self.levels]
        if any(b <= a for a, b in zip(es, es[1:])):
            raise ValueError("energies must increase with n")

    @property
    def energies(self):
        return np.array([e for _, e in self.levels])

    def to_dict(self):
        p = self.problem
        return {
            "dimension": int(p.dimension),
            "quantum_number": p.quantum_number,
            "hbar": p.hbar,
            "mass": p.mass,
            "potential": str(p.potential),
            "method": self.method,
            "form": self.form.value,
            "levels": [{"n": n, "energy": e} for n, e in self.levels],
            "normalization": list(self.normalization),
            "max_residual": list(self.residuals),
        }

    def wavefunction_rows(self, index=0):
        """(r, Re R, Im R) rows for one level."""
        R = self.wavefunctions[index]
        return [(float(r), float(np.real(v)), float(np.imag(v))) for r, v in zip(self.r, R)]


def well_energy(x, a, hbar=1.0, mass=1.0):
    return hbar * hbar * x * x / (2.0 * mass * a * a)


def well_spectrum(a, m, count, hbar=1.0, mass=1.0, points=200):
    """Analytic circular-well levels from the zeros of J_|m|."""
    if a <= 0 or count < 1:
        raise ValueError("need a > 0 and count >= 1")
    am = abs(int(m))
    xs = special_fn.zeros(special_fn.J(am), count)
    r = np.linspace(a / points, a, points)
    prob = RadialProblem(Dimension.TWO_D, int(m), hbar, mass, PotentialSpec.well(a))
    levels, wfs, ders, norms, res = [], [], [], [], []
    for n, x in enumerate(xs, start=1):
        e = well_energy(x, a, hbar, mass)
        k = x / a
        scale = 1.0 / (a * abs(special_fn.besselj(am + 1, x)) / math.sqrt(2.0))
        R = scale * special_fn.besselj(am, k * r)
        dR = scale * k * special_fn.cyl_derivative(special_fn.J(am), k * r)
        d2R = scale * k * k * special_fn.cyl_second_derivative(special_fn.J(am), k * r)
        levels.append((n, float(e)))
        wfs.append(R)
        ders.append(dR)
        norms.append(1.0)
        res.append(_pointwise_residual(prob, e, r, R, dR, d2R))
    return SpectrumResult(prob, levels, r, wfs, ders, norms, res, method="analytic")


def _pointwise_residual(prob, energy, r, R, dR, d2R):
    d, q, g = prob.d, prob.centrifugal, prob.g
    V = _potential_values(prob, r)
    terms = [d2R, (d - 1) * dR / r, q * R / r ** 2, g * (V - energy) * R]
    total = terms[0] + terms[1] - terms[2] - terms[3]
    scale = np.max(np.abs(np.stack(terms)), axis=0)
    inner = slice(1, -1)
    return float(np.max(np.abs(total[inner]) / np.maximum(scale[inner], 1e-300)))


def pseudo_level_energy(a, n, hbar=1.0, mass=1.0):
    """hbar^2 y_n^2 / (2 mu a^2) with y_n the n-th zero of Y0."""
    return well_energy(special_fn.cyl_zero(special_fn.ZeroIndex(special_fn.Y(0), n)),
                       a, hbar, mass)


def _threads(count):
    env = os.environ.get("RADIAL_GATE_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, count))


def _energy_window(prob, r_max, levels):
    """[floor, cap] for the node search; the floor is lowered later if needed."""
    r = np.geomspace(1e-3 * r_max, r_max, 2000)
    v = _potential_values(prob, r)
    # Dirichlet box of radius r_max with V <= max V bounds the levels above
    order = abs(prob.quantum_number) if prob.dimension is Dimension.TWO_D \
        else prob.quantum_number + 1
    x = special_fn.zeros(special_fn.J(order), max(10, levels))[-1]
    cap = float(v.max()) + well_energy(x, r_max, prob.hbar, prob.mass)
    return float(v.min()), cap


class _Shooter:
    def __init__(self, prob, r_max, form, rtol):
        self.prob, self.r_max, self.form, self.rtol = prob, r_max, form, rtol

    def end(self, e):
        y_end, nodes, _, _, _ = _run(self.prob, e, self.r_max, self.form, None, self.rtol)
        return y_end[0], nodes

    def count(self, e):
        return self.end(e)[1]

    def level(self, n, lo, hi):
        """E_n: node bisection to isolate, then Brent on F(r_max)."""
        a, b = lo, hi
        ca, cb = self.count(a), self.count(b)
        drop = 0
        while ca >= n:
            if drop == 8:
                raise NoBracket(f"level {n}: {ca} nodes at the window floor {a!r}")
            a = b - 2.0 * (b - a)
            ca = self.count(a)
            drop += 1
        grow = 0
        while cb < n:
            if grow == 8:
                raise NoBracket(f"level {n}: only {cb} nodes at E = {b!r}")
            b = a + 2.0 * (b - a)
            cb = self.count(b)
            grow += 1
        for _ in range(200):
            if ca == n - 1 and cb == n:
                break
            mid = 0.5 * (a + b)
            cm = self.count(mid)
            if cm >= n:
                b, cb = mid, cm
            else:
                a, ca = mid, cm
        else:
            raise NoBracket(f"level {n}: node counting did not isolate a single level")
        fa, fb = self.end(a)[0], self.end(b)[0]
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb > 0:
            raise NoBracket(f"level {n}: no sign change of F(r_max) on [{a!r}, {b!r}]")
        tol = 1e-14 * max(abs(a), abs(b), 1e-300)
        return brentq(lambda e: self.end(e)[0], a, b, xtol=tol, rtol=4 * np.finfo(float).eps,
                      maxiter=200)


_STENCIL = (-2, -1, 1, 2)


def _checkpoints(prob, energy, q, r_max, n=100, base=1e-3):
    """Checkpoint abscissae in t and a stencil width scaled to the local rate."""
    r = np.linspace(r_max * 0.01, r_max * 0.99, n)
    v = _potential_values(prob, r)
    rate = np.sqrt(np.abs(q + prob.g * r * r * (v - energy)))
    return np.log(r), base / np.maximum(1.0, rate)


def _potential_values(prob, r):
    if prob.potential.form is PotentialForm.WELL:
        return np.zeros_like(r)
    return np.asarray(prob.potential(r), dtype=float)


def _outer_turning_point(prob, energy, r_max):
    """Largest r with V(r) < E, or None when no forbidden tail is worth treating."""
    if prob.potential.form is PotentialForm.WELL:
        return None
    r = np.linspace(0.01 * r_max, r_max, 4000)
    allowed = np.nonzero(_potential_values(prob, r) < energy)[0]
    if len(allowed) == 0:
        return None
    r_tp = r[min(allowed[-1] + 1, len(r) - 1)]
    return r_tp if r_tp < 0.9 * r_max else None


def _inward(prob, energy, form, t_max, t_match, sample_t, rtol):
    """Decaying tail from F(r_max) = 0 in to t_match.

    Outward integration through a forbidden region amplifies the growing
    solution; inward it decays instead. Returns samples (F, rF', int F^2 r^w dt
    from t to t_max) at ``sample_t`` and the same triple at t_match.
    """
    c, q, wexp, _ = _form_params(prob, form)
    g = prob.g
    pot = prob.potential

    def rhs(t, y):
        r = math.exp(t)
        v = float(pot(r))
        return [y[1], c * y[1] + (q + g * r * r * (v - energy)) * y[0],
                -y[0] * y[0] * math.exp(wexp * t)]

    ts = np.asarray(sample_t, dtype=float)[::-1]
    sol = solve_ivp(rhs, (t_max, t_match), [0.0, -1.0, 0.0], method="DOP853",
                    t_eval=np.append(ts, t_match), rtol=rtol, atol=1e-300,
                    first_step=1e-3 * (t_max - t_match))
    if sol.status != 0:
        raise StiffnessFailure(f"inward integration failed at E = {energy!r}: {sol.message}")
    y = sol.y.T
    return y[:-1][::-1], y[-1]


def shoot_spectrum(prob, r_max, count, form=Form.R, points=200, rtol=1e-12):
    """Lowest ``count`` levels with R(r_max) = 0, by shooting.

    Works for the circular well (r_max = a) and for confining potentials,
    where r_max must lie deep in the classically forbidden region. There the
    returned wavefunctions join the outward solution to an inward one at the
    outer turning point.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    classify(prob)
    if prob.potential.form is PotentialForm.WELL:
        r_max = prob.potential.radius if r_max is None else r_max
    lo, hi = _energy_window(prob, r_max, count)
    sh = _Shooter(prob, r_max, form, rtol)
    with ThreadPoolExecutor(_threads(count)) as pool:
        energies = list(pool.map(lambda n: sh.level(n, lo, hi), range(1, count + 1)))

    r = np.linspace(r_max / points, r_max, points)
    c, q, wexp, p = _form_params(prob, form)
    levels, wfs, ders, norms, res = [], [], [], [], []
    for n, e in enumerate(energies, start=1):
        tc, delta = _checkpoints(prob, e, q, r_max)
        grid_t = np.unique(np.concatenate([np.log(r), tc] + [tc + k * delta for k in _STENCIL]))
        r_tp = _outer_turning_point(prob, e, r_max)
        if r_tp is None:
            y_end, _, samples, _, _ = _run(prob, e, r_max, form, np.exp(grid_t), rtol)
            total = y_end[2]
        else:
            t_match = math.log(r_tp)
            inner = grid_t <= t_match
            y_m, _, s_out, _, _ = _run(prob, e, r_tp, form, np.exp(grid_t[inner]), rtol)
            s_in, at_m = _inward(prob, e, form, math.log(r_max), t_match, grid_t[~inner], rtol)
            k = y_m[0] / at_m[0]
            s_in = s_in * [k, k, k * k]
            # the outward y2 is cumulative from r0; the inward one runs to r_max
            s_in[:, 2] = y_m[2] + (at_m[2] * k * k - s_in[:, 2])
            samples = np.concatenate([s_out, s_in])
            total = y_m[2] + at_m[2] * k * k
        scale = 1.0 / math.sqrt(total)
        idx = np.searchsorted(grid_t, np.log(r))
        F, rdF = samples[idx, 0] * scale, samples[idx, 1] * scale
        levels.append((n, float(e)))
        wfs.append(F / r ** p)
        ders.append((rdF - p * F) / r ** (p + 1))
        norms.append(float(total * scale * scale))
        res.append(_checkpoint_residual(prob, e, c, q, grid_t, samples, tc, delta))
    return SpectrumResult(prob, levels, r, wfs, ders, norms, res, "shooting", form)


def _checkpoint_residual(prob, energy, c, q, grid_t, samples, tc, delta):
    """Max relative residual of the t-form ODE at checkpoints.

    Derivatives come from the five-point central stencil on separately
    integrated samples, so this checks the integrator rather than restating
    the ODE.
    """
    def at(shift):
        return samples[np.searchsorted(grid_t, tc + shift * delta)]

    s0 = at(0)
    sm2, sm1, sp1, sp2 = (at(k) for k in _STENCIL)
    d = (sm2 - 8.0 * sm1 + 8.0 * sp1 - sp2) / (12.0 * delta)[:, None]
    y0, y1 = s0[:, 0], s0[:, 1]
    d0, d1 = d[:, 0], d[:, 1]
    r = np.exp(tc)
    v = _potential_values(prob, r)
    pot = prob.g * r * r * (v - energy) * y0
    res0 = np.abs(d0 - y1) / np.maximum(np.abs(y1), np.abs(d0))
    scale1 = np.max(np.abs(np.stack([d1, c * y1, q * y0, pot])), axis=0)
    res1 = np.abs(d1 - c * y1 - q * y0 - pot) / scale1
    return float(max(res0.max(), res1.max()))


# -- the Y0 pseudo-state ------------------------------------------------------

def _graded_panels(lo, hi, finest, per_halving=1):
    edges = [hi]
    ratio = 0.5 ** (1.0 / per_halving)
    while edges[-1] * ratio > max(finest, lo):
        edges.append(edges[-1] * ratio)
    edges.append(max(finest, lo))
    return edges[::-1]


def _gl_integrate(f, edges, nodes=32):
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    parts = []
    for a, b in zip(edges, edges[1:]):
        x = 0.5 * (b - a) * xg + 0.5 * (a + b)
        parts.append(float(np.dot(0.5 * (b - a) * wg, f(x))))
    return math.fsum(parts)


def y0_zero(n):
    return special_fn.cyl_zero(special_fn.ZeroIndex(special_fn.Y(0), n))


def y0_norm(n=2, per_halving=1, nodes=32):
    """int_0^{y_n} x Y0(x)^2 dx with panels halving toward 0 down to 1e-30.

    The neglected piece below 1e-30 is of order 1e-60 ln^2.
    """
    xn = y0_zero(n)
    edges = _graded_panels(0.0, xn, 1e-30, per_halving)
    return _gl_integrate(lambda x: x * special_fn.bessely(0, x) ** 2, edges, nodes)


def kinetic_integral(eps, n=2, hbar=1.0, mass=1.0):
    """(hbar^2/2mu) int_{eps < x < y_n} |grad Y0|^2 dA, in units of the well."""
    xn = y0_zero(n)
    edges = _graded_panels(eps, xn, eps)
    val = _gl_integrate(lambda x: 2.0 * math.pi * x * special_fn.bessely(1, x) ** 2, edges)
    return hbar * hbar / (2.0 * mass) * val


def fig1_data(x_grid=None, points=500):
    """Rows (x, x Y0(x)^2) on (0, y_2], ending exactly at the second zero."""
    x2 = y0_zero(2)
    if x_grid is None:
        x_grid = x2 * np.arange(1, points + 1) / points
    x = np.asarray(x_grid, dtype=float)
    if np.any(x <= 0) or np.any(x > x2 * (1 + 1e-15)):
        raise ValueError("grid must lie in (0, x2]")
    return np.column_stack([x, x * special_fn.bessely(0, x) ** 2])


def green_defect(a=1.0, n=2, eps_list=None):
    """Boundary flux at r = a minus the excised classical interior integral.

    Both functions are J0(k r), Y0(k r) with k = y_n / a. Returns
    (value, error bar) after extrapolating eps -> 0.
    """
    k = y0_zero(n) / a
    J0, Y0 = special_fn.J(0), special_fn.Y(0)

    def lap(kind, r):
        return k * k * special_fn.cyl_second_derivative(kind, k * r) \
            + k * special_fn.cyl_derivative(kind, k * r) / r

    def integrand(r):
        j = special_fn.cyl_eval(J0, k * r)
        y = special_fn.cyl_eval(Y0, k * r)
        return 2.0 * math.pi * r * (j * lap(Y0, r) - y * lap(J0, r))

    ka = k * a
    boundary = 2.0 * math.pi * a * k * (
        special_fn.cyl_eval(J0, ka) * special_fn.cyl_derivative(Y0, ka)
        - special_fn.cyl_eval(Y0, ka) * special_fn.cyl_derivative(J0, ka))
    eps_list = eps_list or [a * 1e-2 * 0.5 ** j for j in range(8)]
    vals = [boundary - _gl_integrate(integrand, _graded_panels(e, a, e)) for e in eps_list]
    terms = [(2 * j, lg) for j in range(1, 4) for lg in (True, False)]
    ex = extrapolate(eps_list, vals, terms, 4)
    return ex.value.real, ex.error


@dataclass
class PseudoStateReport:
    zero_index: int
    radius: float
    energy: float
    norm_sq: float
    norm_sq_refined: float
    green_defect: float
    green_defect_error: float
    kinetic_eps: list
    kinetic_values: list
    kinetic_fit: tuple
    kinetic_fit_residual: float
    q_coefficient: float
    q_value: float   # Q = -(hbar^2 / 2 mu) * q_coefficient

    def __post_init__(self):
        if not (math.isfinite(self.norm_sq) and self.norm_sq > 0):
            raise ValueError("norm must be finite and positive")

    def to_dict(self):
        return {
            "zero_index": self.zero_index,
            "radius": self.radius,
            "energy": self.energy,
            "norm_sq": self.norm_sq,
            "norm_sq_refined": self.norm_sq_refined,
            "green_defect": self.green_defect,
            "green_defect_error": self.green_defect_error,
            "kinetic_fit": {"A": self.kinetic_fit[0], "B": self.kinetic_fit[1],
                            "max_relative_residual": self.kinetic_fit_residual},
            "kinetic": [{"eps": e, "value": v}
                        for e, v in zip(self.kinetic_eps, self.kinetic_values)],
            "q_coefficient": self.q_coefficient,
            "q_value": self.q_value,
        }


def fit_log_divergence(eps, values):
    """Least-squares (A, B) in value = A + B ln(1/eps); also max relative residual."""
    eps = np.asarray(eps, dtype=float)
    v = np.asarray(values, dtype=float)
    A = np.column_stack([np.ones_like(eps), np.log(1.0 / eps)])
    (a, b), *_ = np.linalg.lstsq(A, v, rcond=None)
    resid = float(np.max(np.abs(A @ [a, b] - v) / np.abs(v)))
    return (float(a), float(b)), resid


def pseudo_y0_report(a=1.0, n=2, hbar=1.0, mass=1.0, sigma=0.5):
    """Diagnostics of Y0(y_n r / a) as a would-be level of the circular well."""
    if n < 1:
        raise ValueError("zero index must be >= 1")
    energy = pseudo_level_energy(a, n, hbar, mass)
    norm = y0_norm(n)
    norm_fine = y0_norm(n, per_halving=2)
    gd, gd_err = green_defect(a, n)
    keps = list(np.logspace(-6, -3, 13))
    kvals = [kinetic_integral(e, n, hbar, mass) for e in keps]
    fit, fit_res = fit_log_divergence(keps, kvals)
    probe = TestFunction.gaussian(sigma)
    rep = weak_residual(CylinderY0(energy, hbar, mass), probe)
    qc = (rep.measured / probe.origin_derivative(0, 0)).real
    return PseudoStateReport(n, a, energy, norm, norm_fine, gd, gd_err, keps, kvals,
                             fit, fit_res, qc, -hbar * hbar / (2.0 * mass) * qc)


def normalization_check(m, branch, dimension=Dimension.TWO_D):
    """True iff int_0 |R|^2 r^{d-1} dr diverges at the origin for this branch."""
    dimension = Dimension(dimension)
    if branch is Branch.SMOOTH:
        return False
    if branch is Branch.LOG:
        if dimension is not Dimension.TWO_D or m != 0:
            raise ValueError("log branch exists only for 2D m = 0")
        return False  # r ln^2 r is integrable
    behav = classify(RadialProblem(dimension, m))
    s = behav.exponent(Branch.POWER)
    # integrand r^{2s + d - 1}
    return 2 * s + int(dimension) - 1 <= -1
