"""Exact algebra of the delta-type terms in the Laplacian of singular 2D functions.

Coefficients are Gaussian rationals times an integer power of pi, so every
identity here is checked with exact equality.

Two term shapes are used:

* ``IteratedLaplacian(p, j, m)``  stands for r^j e^{i m phi} nabla^{2p} delta;
* ``CartesianDerivative((a, b))`` stands for d^a_x d^b_y delta.

Pairing with a probe uses <d^alpha delta, f> = (-1)^{|alpha|} d^alpha f(0)
and, for iterated forms, Wirtinger calculus: with z = x + iy,
r^j e^{i m phi} = z^a zbar^b (a = (j+m)/2, b = (j-m)/2) and
nabla^2 = 4 d_z d_zbar, so

    <z^a zbar^b nabla^{2p} delta, f>
        = 4^p p!/(p-a)! p!/(p-b)! d_z^{p-a} d_zbar^{p-b} f(0).
"""
import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (AcceptableBranch, DomainError, InsufficientDerivativeOrder,
                     UnreducibleWeight)
from .origin_classifier import Branch, Dimension, classify, q_pattern


def _frac(v):
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class ExactCoefficient:
    """(re + i im) * pi^pi_power with rational re, im."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)
    pi_power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))
        if self.re == 0 and self.im == 0:
            object.__setattr__(self, "pi_power", 0)

    @classmethod
    def of(cls, value, pi_power=0):
        """From an int, Fraction, float or complex (floats are taken exactly)."""
        if isinstance(value, ExactCoefficient):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag), pi_power)
        return cls(_frac(value), Fraction(0), pi_power)

    @property
    def is_zero(self):
        return self.re == 0 and self.im == 0

    def __add__(self, other):
        other = ExactCoefficient.of(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if other.pi_power != self.pi_power:
            raise ValueError("cannot add coefficients with different powers of pi")
        return ExactCoefficient(self.re + other.re, self.im + other.im, self.pi_power)

    def __neg__(self):
        return ExactCoefficient(-self.re, -self.im, self.pi_power)

    def __sub__(self, other):
        return self + (-ExactCoefficient.of(other))

    def __mul__(self, other):
        o = ExactCoefficient.of(other)
        return ExactCoefficient(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re,
                                self.pi_power + o.pi_power)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = ExactCoefficient(1)
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self):
        return ExactCoefficient(self.re, -self.im, self.pi_power)

    def __complex__(self):
        return complex(float(self.re), float(self.im)) * math.pi ** self.pi_power

    def __str__(self):
        def part(q):
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

        if self.is_zero:
            return "0"
        if self.im == 0:
            body = part(self.re)
        elif self.re == 0:
            body = f"{part(self.im)}i"
        else:
            body = f"({part(self.re)} + {part(self.im)}i)"
        return body + ("" if self.pi_power == 0 else
                       "π" if self.pi_power == 1 else f"π^{self.pi_power}")


PI = ExactCoefficient(1, 0, 1)


@dataclass(frozen=True, order=True)
class IteratedLaplacian:
    p: int
    j: int = 0
    m: int = 0

    def __post_init__(self):
        if self.p < 0 or self.j < 0:
            raise ValueError("p and j must be non-negative")

    @property
    def wirtinger(self):
        """(a, b) with r^j e^{i m phi} = z^a zbar^b, or None if not polynomial."""
        if abs(self.m) > self.j or (self.j - self.m) % 2:
            return None
        return (self.j + self.m) // 2, (self.j - self.m) // 2

    @property
    def order(self):
        return max(0, 2 * self.p - self.j)

    def __str__(self):
        w = ""
        if self.j:
            w += "r" if self.j == 1 else f"r^{self.j}"
        if self.m:
            w += f" e^{{{self.m}iφ}}" if w else f"e^{{{self.m}iφ}}"
        lap = "" if self.p == 0 else ("∇²" if self.p == 1 else f"∇^{2 * self.p}")
        return f"{w} {lap}δ".strip()


@dataclass(frozen=True, order=True)
class CartesianDerivative:
    alpha: tuple

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        if any(a < 0 for a in alpha):
            raise ValueError("multi-index entries must be non-negative")
        object.__setattr__(self, "alpha", alpha)

    @property
    def order(self):
        return sum(self.alpha)

    def __str__(self):
        if self.order == 0:
            return "δ"
        letters = "xyz"
        sub = "".join(letters[k] * a for k, a in enumerate(self.alpha))
        return f"∂_{sub}δ"


def _sort_key(item):
    form = item[0]
    if isinstance(form, IteratedLaplacian):
        return (0, form.p, form.j, form.m, 0)
    # ascending total order, x before y within an order
    return (1, form.order, tuple(-a for a in form.alpha), 0, 0)


class DeltaSum:
    """Normalised sum of coefficient * form terms.

    Terms with the same form are merged and zero terms dropped, so two equal
    sums compare equal term by term. ``hbar2_over_mu`` is the power of the
    symbolic factor hbar^2/mu multiplying every term (0 at Laplacian level,
    1 for a Schrödinger-level Q).
    """

    __slots__ = ("dimension", "terms", "hbar2_over_mu")

    def __init__(self, terms=(), dimension=2, hbar2_over_mu=0):
        merged = {}
        for coeff, form in terms:
            coeff = ExactCoefficient.of(coeff)
            merged[form] = merged[form] + coeff if form in merged else coeff
        items = sorted(((f, c) for f, c in merged.items() if not c.is_zero), key=_sort_key)
        self.dimension = int(dimension)
        self.terms = tuple((c, f) for f, c in items)
        self.hbar2_over_mu = int(hbar2_over_mu)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_empty(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, DeltaSum):
            return NotImplemented
        return (self.dimension, self.hbar2_over_mu, self.terms) == (
            other.dimension, other.hbar2_over_mu, other.terms)

    def __hash__(self):
        return hash((self.dimension, self.hbar2_over_mu, self.terms))

    def __add__(self, other):
        if self.hbar2_over_mu != other.hbar2_over_mu or self.dimension != other.dimension:
            raise ValueError("incompatible delta sums")
        return DeltaSum(self.terms + other.terms, self.dimension, self.hbar2_over_mu)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, factor, hbar2_over_mu=0):
        f = ExactCoefficient.of(factor)
        return DeltaSum(((c * f, form) for c, form in self.terms), self.dimension,
                        self.hbar2_over_mu + hbar2_over_mu)

    def conjugate(self):
        """Complex conjugate; the weight e^{imphi} becomes e^{-imphi}."""
        out = []
        for c, form in self.terms:
            if isinstance(form, IteratedLaplacian):
                form = IteratedLaplacian(form.p, form.j, -form.m)
            out.append((c.conjugate(), form))
        return DeltaSum(out, self.dimension, self.hbar2_over_mu)

    def coefficient(self, form):
        for c, f in self.terms:
            if f == form:
                return c
        return ExactCoefficient()

    def cartesian_coefficients(self):
        """{alpha: ExactCoefficient} for the Cartesian terms."""
        return {f.alpha: c for c, f in self.terms if isinstance(f, CartesianDerivative)}

    @property
    def max_order(self):
        return max((f.order for _, f in self.terms), default=0)

    def to_numeric(self, hbar=1.0, mass=1.0):
        """{form: complex} with hbar^2/mu substituted."""
        fac = (hbar * hbar / mass) ** self.hbar2_over_mu
        return {f: complex(c) * fac for c, f in self.terms}

    def __str__(self):
        if not self.terms:
            return "0"
        body = " + ".join(f"{c}·{f}" for c, f in self.terms)
        return body if self.hbar2_over_mu == 0 else f"(ħ²/μ)^{self.hbar2_over_mu}·({body})"

    __repr__ = __str__

    # -- serialisation -------------------------------------------------------

    def to_dict(self):
        terms = []
        for c, f in self.terms:
            t = {
                "coeff_re_num": c.re.numerator, "coeff_re_den": c.re.denominator,
                "coeff_im_num": c.im.numerator, "coeff_im_den": c.im.denominator,
                "pi_power": c.pi_power,
            }
            if isinstance(f, CartesianDerivative):
                t["multi_index"] = list(f.alpha)
            else:
                t["multi_index"] = None
                t["laplacian_power"] = f.p
                t["weight_j"] = f.j
                t["weight_m"] = f.m
            terms.append(t)
        return {"dimension": self.dimension, "hbar2_over_mu": self.hbar2_over_mu,
                "terms": terms}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        terms = []
        for t in data["terms"]:
            c = ExactCoefficient(Fraction(t["coeff_re_num"], t["coeff_re_den"]),
                                 Fraction(t["coeff_im_num"], t["coeff_im_den"]),
                                 t["pi_power"])
            if t.get("multi_index") is not None:
                f = CartesianDerivative(tuple(t["multi_index"]))
            else:
                f = IteratedLaplacian(t["laplacian_power"], t["weight_j"], t["weight_m"])
            terms.append((c, f))
        return cls(terms, data.get("dimension", 2), data.get("hbar2_over_mu", 0))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def cartesian(coeffs, pi_power=1, dimension=2):
    """DeltaSum from {alpha: complex-or-Fraction} times pi^pi_power."""
    return DeltaSum(((ExactCoefficient.of(v, pi_power) if not isinstance(v, ExactCoefficient)
                      else v, CartesianDerivative(a)) for a, v in coeffs.items()), dimension)


# -- Schwartz coefficients -----------------------------------------------------

@dataclass(frozen=True)
class AnomalyCoefficient:
    """C_p = -4 p pi / (2^{2p-1} (p!)^2) and chi_p (1 for p >= 1, else 0)."""

    p: int

    @property
    def chi(self):
        return 1 if self.p >= 1 else 0

    @property
    def c(self):
        if self.p < 1:
            return ExactCoefficient()
        p = self.p
        return ExactCoefficient(Fraction(-4 * p, 2 ** (2 * p - 1) * math.factorial(p) ** 2), 0, 1)

    @property
    def chi_c(self):
        return self.c if self.chi else ExactCoefficient()


def _as_int(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    if isinstance(v, int):
        return v
    return None


@dataclass(frozen=True)
class LaplacianResult:
    """nabla^2 of a power: classical coefficient * r^{classical_exponent} plus anomaly."""

    classical_coefficient: int
    classical_exponent: int
    anomaly: DeltaSum
    m: int = 0


def schwartz_laplacian(s):
    """nabla^2 r^s = s^2 r^{s-2} + chi_p C_p nabla^{2p} delta, p = -s/2."""
    s = int(s)
    p = Fraction(-s, 2)
    pi = _as_int(p)
    terms = []
    if pi is not None and pi >= 1:
        terms.append((AnomalyCoefficient(pi).c, IteratedLaplacian(pi)))
    return LaplacianResult(s * s, s - 2, DeltaSum(terms), 0)


def angular_coefficient(p, m):
    """(1 - |m|/2) chi_p C_p + (|m| / 8p^2) chi_{p-1} C_{p-1}."""
    am = abs(m)
    if p < 1:
        return ExactCoefficient()
    first = AnomalyCoefficient(p).chi_c * Fraction(2 - am, 2)
    second = AnomalyCoefficient(p - 1).chi_c * Fraction(am, 8 * p * p)
    return first + second


def angular_laplacian(s, m):
    """nabla^2 (r^s e^{i m phi}) split into classical and delta parts.

    The anomaly is c * r^{|m|} e^{i m phi} nabla^{2p} delta with
    p = -(s - |m|)/2; it is absent unless p is a positive integer.
    """
    s, m = int(s), int(m)
    p = _as_int(Fraction(-(s - abs(m)), 2))
    terms = []
    if p is not None and p >= 1:
        c = angular_coefficient(p, m)
        if not c.is_zero:
            terms.append((c, IteratedLaplacian(p, abs(m), m)))
    return LaplacianResult(s * s - m * m, s - 2, DeltaSum(terms), m)


# -- Cartesian reduction -------------------------------------------------------

def _laplacian_power_cartesian(p):
    """nabla^{2p} = sum_k C(p,k) d_x^{2k} d_y^{2(p-k)}."""
    return {(2 * k, 2 * (p - k)): Fraction(math.comb(p, k)) for k in range(p + 1)}


def _moment(ax, ay, alpha):
    """x^ax y^ay d^alpha delta = coefficient * d^{alpha - a} delta."""
    i, j = alpha
    if ax > i or ay > j:
        return None, 0
    c = ((-1) ** ax * math.perm(i, ax)) * ((-1) ** ay * math.perm(j, ay))
    return (i - ax, j - ay), c


def _reduce_term(coeff, form):
    if isinstance(form, CartesianDerivative):
        return [(coeff, form)]
    if form.wirtinger is None:
        raise UnreducibleWeight(
            f"weight r^{form.j} e^{{{form.m}iφ}} is not a polynomial in x, y")
    am = abs(form.m)
    p = form.p
    c = coeff
    # r^2 nabla^{2p} delta = 4 p^2 nabla^{2(p-1)} delta
    for _ in range((form.j - am) // 2):
        if p == 0:
            return []  # r^2 delta = 0
        c = c * (4 * p * p)
        p -= 1
    # (x + i sgn y)^{|m|} expanded binomially
    sgn = 1 if form.m >= 0 else -1
    out = []
    base = _laplacian_power_cartesian(p)
    for k in range(am + 1):
        # C(|m|, k) x^{|m|-k} (i sgn y)^k
        poly = ExactCoefficient(math.comb(am, k)) * ExactCoefficient(0, sgn) ** k
        for alpha, w in base.items():
            new_alpha, mc = _moment(am - k, k, alpha)
            if new_alpha is None or mc == 0:
                continue
            out.append((c * poly * (w * mc), CartesianDerivative(new_alpha)))
    return out


def reduce_to_cartesian(d):
    """Rewrite iterated-Laplacian terms as pure Cartesian derivatives of delta.

    Uses r^2 nabla^{2p} delta = 4 p^2 nabla^{2(p-1)} delta to strip the even
    part of the weight, then the moment rules
    x d_x^i d_y^j delta = -i d_x^{i-1} d_y^j delta (and the same in y) for the
    harmonic factor (x +- iy)^{|m|}.
    """
    if d.dimension != 2:
        raise DomainError("Cartesian reduction is implemented in 2D only")
    out = []
    for coeff, form in d.terms:
        out.extend(_reduce_term(coeff, form))
    return DeltaSum(out, d.dimension, d.hbar2_over_mu)


# -- Schrödinger-level terms ---------------------------------------------------

def laplacian_anomaly(m, a0=1, C=None):
    """Cartesian delta part of nabla^2 psi for the singular 2D branch.

    m = 0: psi ~ C ln(kr) gives 2 pi C delta.
    m != 0: psi ~ a0 e^{i m phi} r^{-|m|} gives a0 * reduced anomaly of the
    leading term; higher Frobenius terms carry none for |m| <= 3.
    """
    m = int(m)
    if m == 0:
        c = ExactCoefficient.of(1 if C is None else C)
        return DeltaSum([(c * PI * 2, CartesianDerivative((0, 0)))])
    res = angular_laplacian(-abs(m), m)
    return reduce_to_cartesian(res.anomaly).scale(ExactCoefficient.of(a0))


def q_term(prob, branch=None, a0=1, C=None, allow_acceptable=False):
    """Q in H psi = E psi + Q, as a multiple of hbar^2/mu.

    Q = -(hbar^2 / 2 mu) * A where A is the Laplacian-level anomaly; for the
    log branch Q = -(hbar^2 pi / mu) C delta.
    """
    behav = classify(prob)
    if branch is None:
        branch = behav.unacceptable_branch
    if branch is Branch.SMOOTH:
        if not allow_acceptable:
            raise AcceptableBranch("the acceptable branch has no anomalous term")
        return DeltaSum(dimension=prob.d, hbar2_over_mu=1)
    if prob.dimension is not Dimension.TWO_D:
        raise DomainError("Q coefficients are available in 2D only; see anomaly_pattern")
    if branch is not behav.unacceptable_branch:
        raise ValueError(f"{branch.value} branch does not exist for m = {prob.quantum_number}")
    if prob.quantum_number == 0 and C is None:
        C = 1
    a = laplacian_anomaly(prob.quantum_number, a0=a0, C=C)
    return a.scale(Fraction(-1, 2), hbar2_over_mu=1)


def to_laplacian_level(q):
    """Q * (-2 mu / hbar^2): undo the Schrödinger-level conversion."""
    if q.hbar2_over_mu != 1:
        raise ValueError("expected a Schrödinger-level term")
    return DeltaSum(((c * -2, f) for c, f in q.terms), q.dimension, 0)


def anomaly_pattern(prob):
    """(dimension, derivative order, schematic form) of Q for the singular branch."""
    behav = classify(prob)
    return int(prob.dimension), behav.q_order, q_pattern(prob.dimension, behav.q_order)


def _build_published():
    pi = 1
    h = Fraction(1, 2)
    q = Fraction(1, 4)
    out = {}
    for sgn in (1, -1):
        out[sgn * 1] = cartesian({(1, 0): 2, (0, 1): complex(0, 2 * sgn)}, pi)
        out[sgn * 2] = cartesian({(2, 0): -1, (0, 2): 1, (1, 1): complex(0, -2 * sgn)}, pi)
        out[sgn * 3] = DeltaSum([
            (ExactCoefficient(-q, 0, 1), CartesianDerivative((3, 0))),
            (ExactCoefficient(-h, 0, 1), CartesianDerivative((1, 2))),
            (ExactCoefficient(0, sgn * q, 1), CartesianDerivative((0, 3))),
            (ExactCoefficient(0, sgn * h, 1), CartesianDerivative((2, 1))),
        ])
    return out


# Laplacian-level closed forms (a0 = 1) as commonly quoted for |m| <= 3.
# The |m| = 3 entries disagree with laplacian_anomaly(+-3); see the README.
PUBLISHED_LAPLACIAN_ANOMALY = _build_published()


# -- pairing --------------------------------------------------------------------

def _wirtinger_to_cartesian(u, v):
    """d_z^u d_zbar^v = 2^{-(u+v)} (d_x - i d_y)^u (d_x + i d_y)^v as {alpha: coeff}."""
    out = {}
    for k1 in range(u + 1):
        c1 = ExactCoefficient(math.comb(u, k1)) * ExactCoefficient(0, -1) ** k1
        for k2 in range(v + 1):
            c2 = ExactCoefficient(math.comb(v, k2)) * ExactCoefficient(0, 1) ** k2
            alpha = (u - k1 + v - k2, k1 + k2)
            c = c1 * c2 * Fraction(1, 2 ** (u + v))
            out[alpha] = out[alpha] + c if alpha in out else c
    return out


def iterated_as_derivatives(form):
    """<form, f> = sum coeff * d^alpha f(0); returns {alpha: coeff} (exact)."""
    w = form.wirtinger
    if w is None:
        raise UnreducibleWeight(f"weight of {form} is not polynomial")
    a, b = w
    p = form.p
    if a > p or b > p:
        return {}
    pref = 4 ** p * Fraction(math.perm(p, a)) * math.perm(p, b)
    return {al: c * pref for al, c in _wirtinger_to_cartesian(p - a, p - b).items()}


def derivative_functional(d):
    """{alpha: ExactCoefficient} with <d, f> = sum coeff * d^alpha f(0)."""
    out = {}

    def add(al, c):
        out[al] = out[al] + c if al in out else c

    for coeff, form in d.terms:
        if isinstance(form, CartesianDerivative):
            add(form.alpha, coeff * (-1) ** form.order)
        else:
            for al, c in iterated_as_derivatives(form).items():
                add(al, coeff * c)
    return {k: v for k, v in out.items() if not v.is_zero}


def pair_with_testfn(d, phi, exact=False, hbar=1.0, mass=1.0):
    """<d, phi> for a probe phi.

    With ``exact=True`` returns an ExactCoefficient (the symbolic hbar^2/mu
    factor, if any, is left out); otherwise a complex number.
    """
    if d.dimension != 2:
        raise DomainError("pairing is implemented in 2D only")
    func = derivative_functional(d)
    need = max((sum(al) for al in func), default=0)
    if need > phi.max_order:
        raise InsufficientDerivativeOrder(
            f"{phi} provides order {phi.max_order}, pairing needs {need}")
    if exact:
        total = ExactCoefficient()
        for al, c in func.items():
            total = total + c * phi.exact_origin_derivative(*al)
        return total
    fac = (hbar * hbar / mass) ** d.hbar2_over_mu
    return fac * sum(complex(c) * phi.origin_derivative(*al) for al, c in func.items())
