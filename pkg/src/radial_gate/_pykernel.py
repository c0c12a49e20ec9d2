"""Pure-Python hot kernels.

Mirrors ``_ckernel.pyx`` line for line so the two backends can be compared
directly. Keep the two files in sync.

Bessel regimes (integer order n >= 0):

* ``x <= SERIES_MAX``: ascending power series with Kahan summation.
* ``SERIES_MAX < x <= hankel_min(n)``: Miller backward recurrence for J,
  Neumann series for Y0/Y1.
* ``x > hankel_min(n)``: Hankel asymptotic expansion.

Y_n for n >= 2 always comes from forward recurrence on Y0, Y1.
"""
import math

EULER_GAMMA = 0.57721566490153286061
SERIES_MAX = 8.0
HANKEL_MIN = 25.0

_TWO_OVER_PI = 2.0 / math.pi


def hankel_min(n):
    return max(HANKEL_MIN, 1.5 * n * n)


# -- power series -----------------------------------------------------------

def _jn_series(n, x):
    q = 0.25 * x * x
    t = 1.0
    for k in range(1, n + 1):
        t *= 0.5 * x / k
    s = t
    c = 0.0
    k = 0
    while True:
        k += 1
        t *= -q / (k * (k + n))
        y = t - c
        u = s + y
        c = (u - s) - y
        s = u
        if abs(t) < 1e-17 * abs(s) and k > 2:
            break
        if k > 500:
            break
    return s


def _yn_series(n, x):
    # ascending series with the digamma sum; n in {0, 1}
    half = 0.5 * x
    q = half * half
    head = 0.0
    if n > 0:
        # -(1/pi) (x/2)^-n sum_{k<n} (n-k-1)!/k! q^k
        t = 0.0
        for k in range(n):
            t += math.factorial(n - k - 1) / math.factorial(k) * q ** k
        head = -t / (math.pi * half ** n)
    logpart = _TWO_OVER_PI * math.log(half) * _jn_series(n, x)
    # -(1/pi) (x/2)^n sum_k [psi(k+1) + psi(n+k+1)] (-q)^k / (k! (n+k)!)
    hk = 0.0
    hnk = 0.0
    for j in range(1, n + 1):
        hnk += 1.0 / j
    t = 1.0 / math.factorial(n)
    s = t * (hk + hnk - 2.0 * EULER_GAMMA)
    c = 0.0
    k = 0
    while True:
        k += 1
        hk += 1.0 / k
        hnk += 1.0 / (k + n)
        t *= -q / (k * (k + n))
        term = t * (hk + hnk - 2.0 * EULER_GAMMA)
        y = term - c
        u = s + y
        c = (u - s) - y
        s = u
        if abs(term) < 1e-17 * abs(s) and k > 2:
            break
        if k > 500:
            break
    return head + logpart - half ** n * s / math.pi


# -- Miller backward recurrence ---------------------------------------------

def _miller_j(nmax, x):
    """J_0..J_nmax at x by backward recurrence normalised with
    J0 + 2 sum J_2k = 1. Returns a list long enough for the Neumann sums."""
    top = max(nmax, int(x)) + 20 + int(math.sqrt(40.0 * max(nmax, x)))
    if top % 2:
        top += 1
    vals = [0.0] * (top + 2)
    jp1 = 0.0
    j = 1e-300
    vals[top] = j
    for k in range(top, 0, -1):
        jm1 = 2.0 * k / x * j - jp1
        jp1 = j
        j = jm1
        vals[k - 1] = j
        if abs(j) > 1e250:
            for i in range(k - 1, top + 1):
                vals[i] *= 1e-250
            j *= 1e-250
            jp1 *= 1e-250
    norm = vals[0]
    for k in range(2, top + 1, 2):
        norm += 2.0 * vals[k]
    inv = 1.0 / norm
    return [v * inv for v in vals]


def _y01_neumann(x, jv):
    lg = math.log(0.5 * x) + EULER_GAMMA
    s0 = 0.0
    s1 = 0.0
    kmax = (len(jv) - 3) // 2
    sign = -1.0
    for k in range(1, kmax + 1):
        s0 += sign * jv[2 * k] / k
        s1 += sign * (jv[2 * k - 1] - jv[2 * k + 1]) / k
        sign = -sign
    y0 = _TWO_OVER_PI * (lg * jv[0] - 2.0 * s0)
    y1 = _TWO_OVER_PI * (-jv[0] / x + lg * jv[1] + s1)
    return y0, y1


# -- Hankel asymptotics -----------------------------------------------------

def _hankel_pq(n, x):
    mu = 4.0 * n * n
    p = 1.0
    q = 0.0
    term = 1.0
    k = 0
    prev = math.inf
    while k < 200:
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        a = abs(term)
        if a > prev or a < 1e-17:
            break
        prev = a
        # k odd -> Q, k even -> P; signs alternate in pairs
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += -term if (k // 2) % 2 else term
    return p, q


def _hankel_jy(n, x):
    p, q = _hankel_pq(n, x)
    chi = x - (0.5 * n + 0.25) * math.pi
    amp = math.sqrt(_TWO_OVER_PI / x)
    c = math.cos(chi)
    s = math.sin(chi)
    return amp * (p * c - q * s), amp * (p * s + q * c)


# -- public scalar entry points ---------------------------------------------

def jn(n, x):
    """J_n(x) for integer n >= 0, real x >= 0."""
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x <= SERIES_MAX:
        return _jn_series(n, x)
    if x > hankel_min(n):
        return _hankel_jy(n, x)[0]
    return _miller_j(n, x)[n]


def _y01(x):
    if x <= SERIES_MAX:
        return _yn_series(0, x), _yn_series(1, x)
    if x > HANKEL_MIN:
        return _hankel_jy(0, x)[1], _hankel_jy(1, x)[1]
    return _y01_neumann(x, _miller_j(1, x))


def yn(n, x):
    """Y_n(x) for integer n >= 0, real x > 0."""
    y0, y1 = _y01(x)
    if n == 0:
        return y0
    for k in range(1, n):
        y0, y1 = y1, 2.0 * k / x * y1 - y0
    return y1


def jn_array(n, xs):
    return [jn(n, x) for x in xs]


def yn_array(n, xs):
    return [yn(n, x) for x in xs]


# -- radial ODE in t = ln r -------------------------------------------------
#
# y0 = F, y1 = r F', y2 = int F^2 r^wexp dt
# y0' = y1
# y1' = c*y1 + (q + g r^2 (V(r) - E)) y0

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (9017 / 3168, -355 / 33, 46732 / 5247,
                                49 / 176, -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)


def _potential(r, pc, pk, sx, sc):
    v = 0.0
    for i in range(len(pc)):
        v += pc[i] * r ** pk[i]
    ns = len(sx)
    if ns > 1:
        if r <= sx[0]:
            i = 0
            d = 0.0
        elif r >= sx[ns - 1]:
            i = ns - 2
            d = sx[ns - 1] - sx[i]
        else:
            lo, hi = 0, ns - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if sx[mid] <= r:
                    lo = mid
                else:
                    hi = mid
            i = lo
            d = r - sx[i]
        v += ((sc[0][i] * d + sc[1][i]) * d + sc[2][i]) * d + sc[3][i]
    return v


def _rhs(t, y0, y1, c, q, g, energy, wexp, pc, pk, sx, sc):
    r = math.exp(t)
    v = _potential(r, pc, pk, sx, sc)
    return y1, c * y1 + (q + g * r * r * (v - energy)) * y0, y0 * y0 * math.exp(wexp * t)


def integrate(c, q, g, energy, wexp, t0, t1, y0, y1, pc, pk, sx, sc,
              rtol, sample_t, max_steps=2_000_000):
    """Adaptive Dormand-Prince 5(4) from t0 to t1.

    Returns (y0, y1, y2, nodes, samples, nsteps, status). ``samples`` holds
    (y0, y1, y2) at each entry of ``sample_t`` (ascending, within [t0, t1]).
    status: 0 ok, 1 step underflow, 2 step budget exhausted.
    """
    args = (c, q, g, energy, wexp, pc, pk, sx, sc)
    y2 = 0.0
    t = t0
    span = t1 - t0
    h = span / 200.0
    hmin = 1e-14 * max(1.0, abs(t0), abs(t1))
    samples = []
    ns = len(sample_t)
    si = 0
    while si < ns and sample_t[si] <= t0:
        samples.append((y0, y1, y2))
        si += 1
    nodes = 0
    last_sign = 0
    if y0 > 0:
        last_sign = 1
    elif y0 < 0:
        last_sign = -1
    k1 = _rhs(t, y0, y1, *args)
    nsteps = 0
    status = 0
    while t < t1:
        if nsteps >= max_steps:
            status = 2
            break
        target = t1
        if si < ns and sample_t[si] < t1:
            target = sample_t[si]
        hit = False
        if t + h >= target:
            h = target - t
            hit = True
        k2 = _rhs(t + _C2 * h, y0 + h * _A21 * k1[0], y1 + h * _A21 * k1[1], *args)
        k3 = _rhs(t + _C3 * h,
                  y0 + h * (_A31 * k1[0] + _A32 * k2[0]),
                  y1 + h * (_A31 * k1[1] + _A32 * k2[1]), *args)
        k4 = _rhs(t + _C4 * h,
                  y0 + h * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0]),
                  y1 + h * (_A41 * k1[1] + _A42 * k2[1] + _A43 * k3[1]), *args)
        k5 = _rhs(t + _C5 * h,
                  y0 + h * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0]),
                  y1 + h * (_A51 * k1[1] + _A52 * k2[1] + _A53 * k3[1] + _A54 * k4[1]),
                  *args)
        k6 = _rhs(t + h,
                  y0 + h * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0] + _A64 * k4[0]
                            + _A65 * k5[0]),
                  y1 + h * (_A61 * k1[1] + _A62 * k2[1] + _A63 * k3[1] + _A64 * k4[1]
                            + _A65 * k5[1]), *args)
        n0 = y0 + h * (_B1 * k1[0] + _B3 * k3[0] + _B4 * k4[0] + _B5 * k5[0] + _B6 * k6[0])
        n1 = y1 + h * (_B1 * k1[1] + _B3 * k3[1] + _B4 * k4[1] + _B5 * k5[1] + _B6 * k6[1])
        n2 = y2 + h * (_B1 * k1[2] + _B3 * k3[2] + _B4 * k4[2] + _B5 * k5[2] + _B6 * k6[2])
        k7 = _rhs(t + h, n0, n1, *args)
        e0 = h * (_E1 * k1[0] + _E3 * k3[0] + _E4 * k4[0] + _E5 * k5[0] + _E6 * k6[0]
                  + _E7 * k7[0])
        e1 = h * (_E1 * k1[1] + _E3 * k3[1] + _E4 * k4[1] + _E5 * k5[1] + _E6 * k6[1]
                  + _E7 * k7[1])
        scale = rtol * max(abs(y0), abs(y1), abs(n0), abs(n1), 1e-300)
        err = max(abs(e0), abs(e1)) / scale
        nsteps += 1
        if err <= 1.0:
            t = target if hit else t + h
            y0, y1, y2 = n0, n1, n2
            k1 = k7
            if y0 > 0:
                sgn = 1
            elif y0 < 0:
                sgn = -1
            else:
                sgn = 0
            if sgn != 0:
                if last_sign != 0 and sgn != last_sign:
                    nodes += 1
                last_sign = sgn
            if hit and si < ns and target == sample_t[si]:
                samples.append((y0, y1, y2))
                si += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < hmin:
                status = 1
                break
    while si < ns:
        samples.append((y0, y1, y2))
        si += 1
    return y0, y1, y2, nodes, samples, nsteps, status
