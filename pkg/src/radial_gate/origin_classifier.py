"""Behaviour of radial solutions at r = 0 for regular central potentials.

Covers the indicial (Frobenius) analysis of the 2D and 3D radial equations,
the acceptable/unacceptable catalogue per angular quantum number, the
Frobenius coefficients of each power branch, and the u = R r^{(d-1)/2}
rewriting with its effective potential.
"""
import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import IrregularPotential


class Dimension(enum.IntEnum):
    TWO_D = 2
    THREE_D = 3


class Branch(enum.Enum):
    """Which of the two independent radial solutions."""

    SMOOTH = "smooth"   # r^{+|m|} or r^l, finite at the origin
    POWER = "power"     # r^{-|m|} or r^{-(l+1)}
    LOG = "log"         # ln(kr), 2D with m = 0 only


class PotentialForm(enum.Enum):
    ZERO = "zero"
    WELL = "well"
    POWER = "power"
    COULOMB2D = "coulomb2d"
    TABULATED = "table"


@dataclass(frozen=True)
class PotentialSpec:
    """A central potential V(r).

    ``WELL`` is the infinite circular well: V = 0 for r < radius, infinite
    outside. ``COULOMB2D`` is V = -strength / r. ``POWER`` is
    coefficient * r**exponent. ``TABULATED`` interpolates (r, V) samples with
    a cubic spline.

    Pass ``validate=False`` to build a spec that violates the regularity
    invariant (only useful for exercising :func:`check_regular`).
    """

    form: PotentialForm
    radius: float | None = None
    coefficient: float | None = None
    exponent: float | None = None
    strength: float | None = None
    r_samples: tuple = ()
    v_samples: tuple = ()
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if not self.validate:
            return
        f = self.form
        if f is PotentialForm.WELL and not (self.radius and self.radius > 0):
            raise ValueError("well radius must be > 0")
        if f is PotentialForm.COULOMB2D and not (self.strength and self.strength > 0):
            raise ValueError("Coulomb strength Z must be > 0")
        if f is PotentialForm.POWER:
            if self.coefficient is None or self.exponent is None:
                raise ValueError("power potential needs c and k")
            if self.coefficient != 0 and self.exponent <= -2:
                raise IrregularPotential(
                    f"r^2 V(r) does not vanish at the origin for k = {self.exponent}")
        if f is PotentialForm.TABULATED:
            r = np.asarray(self.r_samples, dtype=float)
            v = np.asarray(self.v_samples, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 3:
                raise ValueError("tabulated potential needs >= 3 matching (r, V) samples")
            if np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise ValueError("tabulated r must be positive and strictly increasing")
            if not check_regular(self):
                raise IrregularPotential("tabulated potential fails the r^2 V -> 0 fit")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls(PotentialForm.ZERO)

    @classmethod
    def well(cls, a):
        return cls(PotentialForm.WELL, radius=float(a))

    @classmethod
    def power(cls, c, k, validate=True):
        return cls(PotentialForm.POWER, coefficient=float(c), exponent=float(k),
                   validate=validate)

    @classmethod
    def coulomb2d(cls, z):
        return cls(PotentialForm.COULOMB2D, strength=float(z))

    @classmethod
    def tabulated(cls, r, v, validate=True):
        return cls(PotentialForm.TABULATED, r_samples=tuple(map(float, r)),
                   v_samples=tuple(map(float, v)), validate=validate)

    @classmethod
    def from_csv(cls, path):
        rs, vs = [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                rs.append(float(row["r"]))
                vs.append(float(row["V"]))
        return cls.tabulated(rs, vs)

    @classmethod
    def parse(cls, text):
        """Parse ``zero``, ``well:a=1``, ``power:c=0.5,k=2``,
        ``coulomb2d:Z=1`` or ``table:<path>``."""
        text = text.strip()
        name, _, rest = text.partition(":")
        name = name.strip().lower()
        if name == "zero" and not rest:
            return cls.zero()
        if name == "table":
            if not rest:
                raise ValueError("table: needs a CSV path")
            return cls.from_csv(rest)
        params = {}
        for item in filter(None, rest.split(",")):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"bad potential parameter {item!r}")
            params[key.strip()] = float(val)
        wanted = {"well": {"a"}, "power": {"c", "k"}, "coulomb2d": {"Z"}}
        if name not in wanted:
            raise ValueError(f"unknown potential form {name!r}")
        if set(params) != wanted[name]:
            raise ValueError(f"{name} needs parameters {sorted(wanted[name])}, got {sorted(params)}")
        if name == "well":
            return cls.well(params["a"])
        if name == "power":
            return cls.power(params["c"], params["k"])
        return cls.coulomb2d(params["Z"])

    def __str__(self):
        f = self.form
        if f is PotentialForm.ZERO:
            return "zero"
        if f is PotentialForm.WELL:
            return f"well:a={self.radius:g}"
        if f is PotentialForm.POWER:
            return f"power:c={self.coefficient:g},k={self.exponent:g}"
        if f is PotentialForm.COULOMB2D:
            return f"coulomb2d:Z={self.strength:g}"
        return f"table:<{len(self.r_samples)} samples>"

    # -- evaluation --------------------------------------------------------

    def power_terms(self):
        """V inside its natural domain as a list of (c, k) with V = sum c r^k.

        Empty for the zero potential, the well interior and tables.
        """
        f = self.form
        if f is PotentialForm.POWER and self.coefficient != 0:
            return [(self.coefficient, self.exponent)]
        if f is PotentialForm.COULOMB2D:
            return [(-self.strength, -1.0)]
        return []

    def spline(self):
        """(breakpoints, coefficients) of the interpolating cubic, or None."""
        if self.form is not PotentialForm.TABULATED:
            return None
        from scipy.interpolate import CubicSpline

        cs = CubicSpline(np.asarray(self.r_samples), np.asarray(self.v_samples),
                         bc_type="natural")
        return np.asarray(cs.x), np.asarray(cs.c)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        f = self.form
        if f is PotentialForm.WELL:
            out = np.where(r < self.radius, 0.0, np.inf)
        elif f is PotentialForm.TABULATED:
            from scipy.interpolate import CubicSpline

            cs = CubicSpline(np.asarray(self.r_samples), np.asarray(self.v_samples),
                             bc_type="natural")
            lo, hi = self.r_samples[0], self.r_samples[-1]
            out = cs(np.clip(r, lo, hi))
        else:
            out = np.zeros_like(r)
            with np.errstate(divide="ignore"):
                for c, k in self.power_terms():
                    out = out + c * r ** k
        return float(out) if out.ndim == 0 else out

    @property
    def box_radius(self):
        return self.radius if self.form is PotentialForm.WELL else None


def check_regular(p):
    """True iff r^2 V(r) -> 0 as r -> 0.

    Built-in forms are decided analytically. Tables fit |V| ~ |c| r^k on the
    three innermost samples and require k > -2; samples that vanish or
    change sign there are treated as bounded, hence regular.
    """
    f = p.form
    if f in (PotentialForm.ZERO, PotentialForm.WELL, PotentialForm.COULOMB2D):
        return True
    if f is PotentialForm.POWER:
        return p.coefficient == 0 or p.exponent > -2
    r = np.asarray(p.r_samples[:3], dtype=float)
    v = np.asarray(p.v_samples[:3], dtype=float)
    if np.any(v == 0) or not (np.all(v > 0) or np.all(v < 0)):
        return True
    k = np.polyfit(np.log(r), np.log(np.abs(v)), 1)[0]
    return bool(k > -2.0 + 1e-6)


@dataclass(frozen=True)
class RadialProblem:
    """Radial equation setting: dimension, m (2D) or l (3D), hbar, mass, V."""

    dimension: Dimension
    quantum_number: int
    hbar: float = 1.0
    mass: float = 1.0
    potential: PotentialSpec = field(default_factory=PotentialSpec.zero)

    def __post_init__(self):
        object.__setattr__(self, "dimension", Dimension(self.dimension))
        if int(self.quantum_number) != self.quantum_number:
            raise ValueError("quantum number must be an integer")
        object.__setattr__(self, "quantum_number", int(self.quantum_number))
        if self.dimension is Dimension.THREE_D and self.quantum_number < 0:
            raise ValueError("3D requires l >= 0")
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError("hbar and mass must be positive")

    @property
    def d(self):
        return int(self.dimension)

    @property
    def centrifugal(self):
        """q with the r^-2 term of the radial equation equal to q hbar^2/(2 mu r^2)."""
        n = self.quantum_number
        return n * n if self.dimension is Dimension.TWO_D else n * (n + 1)

    @property
    def g(self):
        """2 mu / hbar^2, converting energies to inverse squared lengths."""
        return 2.0 * self.mass / self.hbar ** 2


@dataclass(frozen=True)
class OriginBehavior:
    dimension: Dimension
    quantum_number: int
    exponents: tuple            # (s_plus, s_minus or None)
    has_log_branch: bool
    acceptable_leading: str
    unacceptable_leading: str
    log_scale: float | None = None
    q_order: int = 0            # derivative order of the delta in the anomaly
    q_pattern: str = ""

    def __post_init__(self):
        s_plus, s_minus = self.exponents
        if s_plus < 0:
            raise ValueError("acceptable exponent must be >= 0")
        if not (self.has_log_branch or (s_minus is not None and s_minus < 0)):
            raise ValueError("singular branch must have a negative exponent or a log")
        if self.has_log_branch != (self.log_scale is not None):
            raise ValueError("log scale is present exactly for the log branch")

    @property
    def unacceptable_branch(self):
        return Branch.LOG if self.has_log_branch else Branch.POWER

    def is_acceptable(self, branch):
        return branch is Branch.SMOOTH

    def exponent(self, branch):
        if branch is Branch.SMOOTH:
            return self.exponents[0]
        if branch is Branch.POWER:
            if self.exponents[1] is None:
                raise ValueError("no power-law singular branch for 2D m = 0")
            return self.exponents[1]
        if not self.has_log_branch:
            raise ValueError("log branch exists only for 2D m = 0")
        return 0

    def as_dict(self):
        return {
            "dimension": int(self.dimension),
            "quantum_number": self.quantum_number,
            "exponents": list(self.exponents),
            "has_log_branch": self.has_log_branch,
            "log_scale": self.log_scale,
            "acceptable": self.acceptable_leading,
            "unacceptable": self.unacceptable_leading,
            "q_order": self.q_order,
            "q_pattern": self.q_pattern,
        }


def _power_str(s):
    return f"r^{s}"


def q_pattern(dimension, order):
    """Schematic delta term: delta, d_i delta, d_ij delta, ..."""
    delta = "δ⁽²⁾(r)" if Dimension(dimension) is Dimension.TWO_D else "δ⁽³⁾(r)"
    if order == 0:
        return delta
    idx = "ijklmnpq"[:order] if order <= 8 else f"^{order}"
    return f"∂_{idx} {delta}"


def classify(prob):
    """Frobenius exponents and acceptability verdict at the origin."""
    if not check_regular(prob.potential):
        raise IrregularPotential(f"potential {prob.potential} is not regular at r = 0")
    n = prob.quantum_number
    if prob.dimension is Dimension.TWO_D:
        m = abs(n)
        if m == 0:
            return OriginBehavior(prob.dimension, n, (0, None), True,
                                  _power_str(0), "ln kr", log_scale=1.0,
                                  q_order=0, q_pattern=q_pattern(2, 0))
        return OriginBehavior(prob.dimension, n, (m, -m), False,
                              _power_str(m), _power_str(-m),
                              q_order=m, q_pattern=q_pattern(2, m))
    return OriginBehavior(prob.dimension, n, (n, -(n + 1)), False,
                          _power_str(n), _power_str(-(n + 1)),
                          q_order=n, q_pattern=q_pattern(3, n))


def indicial_residual(prob, s):
    """Coefficient of the dominant r^{s-2} term after inserting r^s."""
    n = prob.quantum_number
    if prob.dimension is Dimension.TWO_D:
        return s * s - n * n
    return s * (s + 1) - n * (n + 1)


# -- Frobenius series -------------------------------------------------------

@dataclass(frozen=True)
class FrobeniusSeries:
    """R(r) = r^leading_exponent * sum_i coefficients[i] * r^offsets[i].

    Offsets are 0, 1, 2, ... for integer-power potentials; a power-law term
    r^k with non-integer k adds offsets on the lattice generated by k + 2.
    """

    leading_exponent: float
    offsets: tuple
    coefficients: tuple
    order: float
    truncated_at_resonance: bool = False

    def __post_init__(self):
        if not self.coefficients or self.coefficients[0] == 0:
            raise ValueError("a_0 must be nonzero")
        if self.offsets[0] != 0:
            raise ValueError("offsets start at 0")

    @property
    def a(self):
        """Coefficients indexed by integer offset (integer lattices only)."""
        out = {}
        for e, c in zip(self.offsets, self.coefficients):
            if float(e).is_integer():
                out[int(e)] = c
        return out

    def _terms(self):
        for e, c in zip(self.offsets, self.coefficients):
            yield self.leading_exponent + e, c

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return sum(c * r ** p for p, c in self._terms())

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        return sum(c * p * r ** (p - 1) for p, c in self._terms() if p != 0)

    def r_derivative(self, r):
        """r R'(r), exact termwise."""
        r = np.asarray(r, dtype=float)
        return sum(c * p * r ** p for p, c in self._terms())


def frobenius_series(prob, energy=0.0, branch=Branch.SMOOTH, order=12, a0=1.0):
    """Frobenius coefficients of the requested power branch.

    Inserting R = sum a_e r^{s+e} into the radial equation gives
    a_e [(s+e)(s+e+d-2) - q] = sum_j w_j a_{e-(j+2)}, with
    2 mu (V - E) / hbar^2 = sum_j w_j r^j. Tabulated potentials contribute
    no terms here (only the energy does); they enter through integration.

    For the singular branch the recurrence meets a resonance at
    e = s_plus - s_minus; if the right side is nonzero there a logarithm is
    needed, and the series is truncated just below it.
    """
    behav = classify(prob)
    if branch is Branch.LOG:
        raise ValueError("the log branch has no pure power series")
    s = behav.exponent(branch)
    d = prob.d
    q = prob.centrifugal
    g = prob.g
    weights = [(-g * energy, 0.0)] if energy != 0 else []
    weights += [(g * c, float(k)) for c, k in prob.potential.power_terms()]
    steps = sorted({k + 2.0 for _, k in weights})
    offsets = {0.0}
    frontier = [0.0]
    while frontier:
        nxt = []
        for e in frontier:
            for st in steps:
                f = round(e + st, 12)
                if f <= order + 1e-12 and f not in offsets:
                    offsets.add(f)
                    nxt.append(f)
        frontier = nxt
    offsets = sorted(offsets)
    coef = {0.0: complex(a0) if isinstance(a0, complex) else a0}
    truncated = False
    kept = [0.0]
    for e in offsets[1:]:
        rhs = 0.0
        for w, k in weights:
            prev = round(e - (k + 2.0), 12)
            if prev in coef:
                rhs += w * coef[prev]
        ind = (s + e) * (s + e + d - 2) - q
        if abs(ind) < 1e-12:
            if rhs != 0:
                truncated = True
                break
            coef[e] = 0.0
        else:
            coef[e] = rhs / ind
        kept.append(e)
    offs = tuple(int(e) if float(e).is_integer() else e for e in kept)
    return FrobeniusSeries(s, offs, tuple(coef[e] for e in kept),
                           float(kept[-1]), truncated)


# -- u-transform ------------------------------------------------------------

@dataclass(frozen=True)
class UTransform:
    """u = R sqrt(r) (2D) or u = R r (3D) and its 1D effective potential.

    ``centrifugal`` is the exact coefficient of hbar^2 / (2 mu r^2) in V_eff.
    """

    dimension: Dimension
    quantum_number: int
    hbar: float
    mass: float
    potential: PotentialSpec
    centrifugal: float

    @property
    def power(self):
        return 0.5 if self.dimension is Dimension.TWO_D else 1.0

    def v_eff(self, r):
        r = np.asarray(r, dtype=float)
        base = self.potential(r)
        return base + self.centrifugal * self.hbar ** 2 / (2.0 * self.mass * r * r)

    def to_u(self, r, R):
        return np.asarray(R) * np.asarray(r, dtype=float) ** self.power

    def from_u(self, r, u):
        return np.asarray(u) / np.asarray(r, dtype=float) ** self.power

    def u_vanishes_at_origin(self, branch, behavior=None):
        """Whether u -> 0 as r -> 0 on the given branch."""
        if branch is Branch.LOG:
            return True  # sqrt(r) ln(kr) -> 0
        if behavior is None:
            behavior = classify(RadialProblem(self.dimension, self.quantum_number,
                                              self.hbar, self.mass, self.potential))
        return behavior.exponent(branch) + self.power > 0

    def equivalence_exception(self, branch):
        """True where u(0) = 0 holds although R(0) diverges."""
        return (self.dimension is Dimension.TWO_D and branch is Branch.LOG)


def u_transform(prob):
    n = prob.quantum_number
    if prob.dimension is Dimension.TWO_D:
        cen = n * n - 0.25
    else:
        cen = float(n * (n + 1))
    return UTransform(prob.dimension, n, prob.hbar, prob.mass, prob.potential, cen)


def leading_branch_function(behavior, branch, k=None):
    """Leading behaviour as a callable of r (ln(k r) for the log branch)."""
    if branch is Branch.LOG:
        scale = behavior.log_scale if k is None else k
        return lambda r: np.log(scale * np.asarray(r, dtype=float))
    s = behavior.exponent(branch)
    return lambda r: np.asarray(r, dtype=float) ** s


def is_finite_at_origin(behavior, branch):
    if branch is Branch.LOG:
        return False
    return behavior.exponent(branch) >= 0

