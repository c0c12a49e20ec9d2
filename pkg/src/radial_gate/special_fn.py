"""Integer-order Bessel J_m and Neumann Y_m: values, first derivatives, zeros.

Evaluation is delegated to the active kernel backend (see ``kernels``).
Crossovers: power series for x <= 8, Miller backward recurrence up to
max(25, 1.5 m^2), Hankel asymptotics beyond.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError

EULER_GAMMA = kernels.EULER_GAMMA
SERIES_CROSSOVER = kernels.SERIES_MAX
ASYMPTOTIC_CROSSOVER = kernels.HANKEL_MIN


class Kind(enum.Enum):
    BESSEL_J = "J"
    NEUMANN_Y = "Y"


@dataclass(frozen=True)
class CylinderFunctionKind:
    """J_order or Y_order with a non-negative integer order.

    ``sign`` carries the (-1)^m factor produced when a negative order is
    folded with :meth:`make`.
    """

    kind: Kind
    order: int
    sign: int = 1

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 0:
            raise ValueError(f"order must be a non-negative integer, got {self.order!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def make(cls, kind, order):
        kind = Kind(kind) if not isinstance(kind, Kind) else kind
        order = int(order)
        if order < 0:
            return cls(kind, -order, -1 if order % 2 else 1)
        return cls(kind, order)

    def __str__(self):
        s = "-" if self.sign < 0 else ""
        return f"{s}{self.kind.value}_{self.order}"


def J(order):
    return CylinderFunctionKind.make(Kind.BESSEL_J, order)


def Y(order):
    return CylinderFunctionKind.make(Kind.NEUMANN_Y, order)


@dataclass(frozen=True)
class ZeroIndex:
    function: CylinderFunctionKind
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"zero index must be >= 1, got {self.n!r}")


def _check_domain(kind, x):
    x = np.asarray(x, dtype=float)
    if kind.kind is Kind.NEUMANN_Y and np.any(x <= 0):
        raise DomainError(f"{kind} diverges at x <= 0")
    if np.any(x < 0):
        raise DomainError(f"{kind} evaluated for x >= 0 only")
    return x


def cyl_eval(kind, x):
    """J_m(x) or Y_m(x). Scalars in, scalars out; arrays broadcast."""
    xa = _check_domain(kind, x)
    f = kernels.jn_array if kind.kind is Kind.BESSEL_J else kernels.yn_array
    out = kind.sign * f(kind.order, xa).reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


def cyl_derivative(kind, x):
    """d/dx of J_m or Y_m from the adjacent-order recurrence."""
    xa = _check_domain(kind, x)
    m = kind.order
    f = kernels.jn_array if kind.kind is Kind.BESSEL_J else kernels.yn_array
    if m == 0:
        d = -f(1, xa)
    else:
        d = 0.5 * (f(m - 1, xa) - f(m + 1, xa))
    out = kind.sign * d.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


def cyl_second_derivative(kind, x):
    """Second derivative, by applying the order recurrence twice."""
    xa = _check_domain(kind, x)
    m = kind.order
    f = kernels.jn_array if kind.kind is Kind.BESSEL_J else kernels.yn_array
    # f'' = (f_{m-2} - 2 f_m + f_{m+2}) / 4 with f_{-k} = (-1)^k f_k
    fm2 = f(m - 2, xa) if m >= 2 else (-1) ** (2 - m) * f(2 - m, xa)
    d2 = 0.25 * (fm2 - 2.0 * f(m, xa) + f(m + 2, xa))
    out = kind.sign * d2.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


def besselj(m, x):
    return cyl_eval(J(m), x)


def bessely(m, x):
    return cyl_eval(Y(m), x)


def mcmahon_estimate(kind, n):
    """Leading McMahon approximation to the n-th zero; a cheap sanity value."""
    mu = 4.0 * kind.order ** 2
    shift = 0.25 if kind.kind is Kind.BESSEL_J else 0.75
    beta = (n + 0.5 * kind.order - shift) * math.pi
    return beta - (mu - 1.0) / (8.0 * beta)


def _scalar(kind, x):
    return kind.sign * (kernels.jn(kind.order, x) if kind.kind is Kind.BESSEL_J
                        else kernels.yn(kind.order, x))


def zeros(kind, count, step=0.25):
    """First ``count`` positive zeros of J_m or Y_m in increasing order.

    Brackets come from a sign scan of width ``step`` (consecutive zeros are
    more than 2.4 apart for every integer order, so none is skipped); each
    is bisected to 1e-6 and finished with Newton steps.
    """
    if count < 1:
        return np.zeros(0)
    base = CylinderFunctionKind(kind.kind, kind.order)
    m = base.order
    # first positive zeros of J_m and Y_m both exceed m
    x = max(1e-3, 0.8 * m)
    found = []
    fx = _scalar(base, x)
    while len(found) < count:
        xn = x + step
        fn = _scalar(base, xn)
        if fx == 0.0:
            found.append(x)
        elif fx * fn < 0.0:
            found.append(_refine(base, x, xn, fx))
        x, fx = xn, fn
    return np.array(found[:count])


def _refine(kind, a, b, fa):
    while b - a > 1e-6:
        mid = 0.5 * (a + b)
        fm = _scalar(kind, mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (fa < 0.0):
            a, fa = mid, fm
        else:
            b = mid
    x = 0.5 * (a + b)
    lo, hi = a - 1e-6, b + 1e-6
    for _ in range(50):
        d = cyl_derivative(kind, x)
        dx = _scalar(kind, x) / d
        xn = x - dx
        if not lo < xn < hi:
            break
        x = xn
        if abs(dx) <= 1e-15 * x:
            break
    return x


def cyl_zero(idx):
    """The ``idx.n``-th positive zero of ``idx.function``."""
    return float(zeros(idx.function, idx.n)[-1])
