# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Algorithmically identical to ``_pykernel.py``."""
from libc.stdlib cimport malloc, free
from libc.math cimport fabs, exp, log, sqrt, cos, sin, pow, M_PI, INFINITY
import numpy as np

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double SERIES_MAX = 8.0
cdef double HANKEL_MIN = 25.0
cdef double TWO_OVER_PI = 2.0 / M_PI


cdef inline double hankel_min(int n) nogil:
    cdef double v = 1.5 * n * n
    return v if v > HANKEL_MIN else HANKEL_MIN


cdef double _factorial(int n) nogil:
    cdef double f = 1.0
    cdef int i
    for i in range(2, n + 1):
        f *= i
    return f


cdef double _jn_series(int n, double x) nogil:
    cdef double q = 0.25 * x * x
    cdef double t = 1.0, s, c = 0.0, y, u
    cdef int k
    for k in range(1, n + 1):
        t *= 0.5 * x / k
    s = t
    k = 0
    while True:
        k += 1
        t *= -q / (k * (k + n))
        y = t - c
        u = s + y
        c = (u - s) - y
        s = u
        if fabs(t) < 1e-17 * fabs(s) and k > 2:
            break
        if k > 500:
            break
    return s


cdef double _yn_series(int n, double x) nogil:
    cdef double half = 0.5 * x
    cdef double q = half * half
    cdef double head = 0.0, t, logpart, hk = 0.0, hnk = 0.0, s, c = 0.0
    cdef double term, y, u
    cdef int k, j
    if n > 0:
        t = 0.0
        for k in range(n):
            t += _factorial(n - k - 1) / _factorial(k) * pow(q, k)
        head = -t / (M_PI * pow(half, n))
    logpart = TWO_OVER_PI * log(half) * _jn_series(n, x)
    for j in range(1, n + 1):
        hnk += 1.0 / j
    t = 1.0 / _factorial(n)
    s = t * (hk + hnk - 2.0 * EULER_GAMMA)
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
        if fabs(term) < 1e-17 * fabs(s) and k > 2:
            break
        if k > 500:
            break
    return head + logpart - pow(half, n) * s / M_PI


cdef int _miller_top(int nmax, double x) nogil:
    cdef double big = nmax if nmax > x else x
    cdef int base = nmax if nmax > <int>x else <int>x
    cdef int top = base + 20 + <int>sqrt(40.0 * big)
    if top % 2:
        top += 1
    return top


cdef void _miller_j(int nmax, double x, double* vals, int top) nogil:
    # vals must hold top + 2 entries
    cdef double jp1 = 0.0, j = 1e-300, jm1, norm, inv
    cdef int k, i
    for i in range(top + 2):
        vals[i] = 0.0
    vals[top] = j
    for k in range(top, 0, -1):
        jm1 = 2.0 * k / x * j - jp1
        jp1 = j
        j = jm1
        vals[k - 1] = j
        if fabs(j) > 1e250:
            for i in range(k - 1, top + 1):
                vals[i] *= 1e-250
            j *= 1e-250
            jp1 *= 1e-250
    norm = vals[0]
    for k in range(2, top + 1, 2):
        norm += 2.0 * vals[k]
    inv = 1.0 / norm
    for i in range(top + 2):
        vals[i] *= inv


cdef void _y01_neumann(double x, double* jv, int top, double* y0, double* y1) nogil:
    cdef double lg = log(0.5 * x) + EULER_GAMMA
    cdef double s0 = 0.0, s1 = 0.0, sign = -1.0
    cdef int kmax = (top - 1) // 2
    cdef int k
    for k in range(1, kmax + 1):
        s0 += sign * jv[2 * k] / k
        s1 += sign * (jv[2 * k - 1] - jv[2 * k + 1]) / k
        sign = -sign
    y0[0] = TWO_OVER_PI * (lg * jv[0] - 2.0 * s0)
    y1[0] = TWO_OVER_PI * (-jv[0] / x + lg * jv[1] + s1)


cdef void _hankel_jy(int n, double x, double* jout, double* yout) nogil:
    cdef double mu = 4.0 * n * n
    cdef double p = 1.0, q = 0.0, term = 1.0, a, prev = INFINITY
    cdef double chi, amp, c, s
    cdef int k = 0
    while k < 200:
        k += 1
        term *= (mu - (2 * k - 1) * (2 * k - 1)) / (k * 8.0 * x)
        a = fabs(term)
        if a > prev or a < 1e-17:
            break
        prev = a
        if k % 2:
            if (k // 2) % 2 == 0:
                q += term
            else:
                q -= term
        else:
            if (k // 2) % 2:
                p -= term
            else:
                p += term
    chi = x - (0.5 * n + 0.25) * M_PI
    amp = sqrt(TWO_OVER_PI / x)
    c = cos(chi)
    s = sin(chi)
    jout[0] = amp * (p * c - q * s)
    yout[0] = amp * (p * s + q * c)


cdef double _jn(int n, double x) nogil:
    cdef double jv, yv, r
    cdef int top
    cdef double* buf
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x <= SERIES_MAX:
        return _jn_series(n, x)
    if x > hankel_min(n):
        _hankel_jy(n, x, &jv, &yv)
        return jv
    top = _miller_top(n, x)
    buf = <double*>malloc((top + 2) * sizeof(double))
    _miller_j(n, x, buf, top)
    r = buf[n]
    free(buf)
    return r


cdef void _y01(double x, double* y0, double* y1) nogil:
    cdef double jv
    cdef int top
    cdef double buf[256]
    if x <= SERIES_MAX:
        y0[0] = _yn_series(0, x)
        y1[0] = _yn_series(1, x)
        return
    if x > HANKEL_MIN:
        _hankel_jy(0, x, &jv, y0)
        _hankel_jy(1, x, &jv, y1)
        return
    top = _miller_top(1, x)  # <= 58 for x <= HANKEL_MIN
    _miller_j(1, x, buf, top)
    _y01_neumann(x, buf, top, y0, y1)


cdef double _yn(int n, double x) nogil:
    cdef double y0, y1, tmp
    cdef int k
    _y01(x, &y0, &y1)
    if n == 0:
        return y0
    for k in range(1, n):
        tmp = 2.0 * k / x * y1 - y0
        y0 = y1
        y1 = tmp
    return y1


def jn(int n, double x):
    """J_n(x) for integer n >= 0, real x >= 0."""
    return _jn(n, x)


def yn(int n, double x):
    """Y_n(x) for integer n >= 0, real x > 0."""
    return _yn(n, x)


def jn_array(int n, double[:] xs):
    cdef Py_ssize_t i, m = xs.shape[0]
    out = np.empty(m)
    cdef double[:] ov = out
    with nogil:
        for i in range(m):
            ov[i] = _jn(n, xs[i])
    return out


def yn_array(int n, double[:] xs):
    cdef Py_ssize_t i, m = xs.shape[0]
    out = np.empty(m)
    cdef double[:] ov = out
    with nogil:
        for i in range(m):
            ov[i] = _yn(n, xs[i])
    return out


# -- radial ODE in t = ln r -------------------------------------------------

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247
cdef double A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40


cdef struct OdeParams:
    double c
    double q
    double g
    double energy
    double wexp


cdef double _potential(double r, double[:] pc, double[:] pk, double[:] sx,
                       double[:, :] sc) nogil:
    cdef double v = 0.0, d
    cdef Py_ssize_t i, ns = sx.shape[0], lo, hi, mid
    for i in range(pc.shape[0]):
        v += pc[i] * pow(r, pk[i])
    if ns > 1:
        if r <= sx[0]:
            i = 0
            d = 0.0
        elif r >= sx[ns - 1]:
            i = ns - 2
            d = sx[ns - 1] - sx[i]
        else:
            lo = 0
            hi = ns - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if sx[mid] <= r:
                    lo = mid
                else:
                    hi = mid
            i = lo
            d = r - sx[i]
        v += ((sc[0, i] * d + sc[1, i]) * d + sc[2, i]) * d + sc[3, i]
    return v


cdef inline void _rhs(double t, double y0, double y1, OdeParams* P,
                      double[:] pc, double[:] pk, double[:] sx, double[:, :] sc,
                      double* k) nogil:
    cdef double r = exp(t)
    cdef double v = _potential(r, pc, pk, sx, sc)
    k[0] = y1
    k[1] = P.c * y1 + (P.q + P.g * r * r * (v - P.energy)) * y0
    k[2] = y0 * y0 * exp(P.wexp * t)


def integrate(double c, double q, double g, double energy, double wexp,
              double t0, double t1, double y0, double y1,
              double[:] pc, double[:] pk, double[:] sx, double[:, :] sc,
              double rtol, double[:] sample_t, long max_steps=2000000):
    """Adaptive Dormand-Prince 5(4) from t0 to t1; see the Python twin."""
    cdef OdeParams P
    P.c = c
    P.q = q
    P.g = g
    P.energy = energy
    P.wexp = wexp
    cdef Py_ssize_t ns = sample_t.shape[0], si = 0
    samples = np.empty((ns, 3))
    cdef double[:, :] so = samples
    cdef double y2 = 0.0, t = t0, h = (t1 - t0) / 200.0
    cdef double hmin = 1e-14 * max(1.0, max(fabs(t0), fabs(t1)))
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double k5[3]
    cdef double k6[3]
    cdef double k7[3]
    cdef double target, n0, n1, n2, e0, e1, scale, err, fac
    cdef long nodes = 0, nsteps = 0
    cdef int status = 0, last_sign = 0, sgn, hit
    with nogil:
        while si < ns and sample_t[si] <= t0:
            so[si, 0] = y0
            so[si, 1] = y1
            so[si, 2] = y2
            si += 1
        if y0 > 0:
            last_sign = 1
        elif y0 < 0:
            last_sign = -1
        _rhs(t, y0, y1, &P, pc, pk, sx, sc, k1)
        while t < t1:
            if nsteps >= max_steps:
                status = 2
                break
            target = t1
            if si < ns and sample_t[si] < t1:
                target = sample_t[si]
            hit = 0
            if t + h >= target:
                h = target - t
                hit = 1
            _rhs(t + C2 * h, y0 + h * A21 * k1[0], y1 + h * A21 * k1[1],
                 &P, pc, pk, sx, sc, k2)
            _rhs(t + C3 * h,
                 y0 + h * (A31 * k1[0] + A32 * k2[0]),
                 y1 + h * (A31 * k1[1] + A32 * k2[1]), &P, pc, pk, sx, sc, k3)
            _rhs(t + C4 * h,
                 y0 + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
                 y1 + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
                 &P, pc, pk, sx, sc, k4)
            _rhs(t + C5 * h,
                 y0 + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
                 y1 + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
                 &P, pc, pk, sx, sc, k5)
            _rhs(t + h,
                 y0 + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0]
                           + A65 * k5[0]),
                 y1 + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1]
                           + A65 * k5[1]), &P, pc, pk, sx, sc, k6)
            n0 = y0 + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0])
            n1 = y1 + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1])
            n2 = y2 + h * (B1 * k1[2] + B3 * k3[2] + B4 * k4[2] + B5 * k5[2] + B6 * k6[2])
            _rhs(t + h, n0, n1, &P, pc, pk, sx, sc, k7)
            e0 = h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0]
                      + E7 * k7[0])
            e1 = h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1]
                      + E7 * k7[1])
            scale = max(max(fabs(y0), fabs(y1)), max(fabs(n0), fabs(n1)))
            scale = rtol * max(scale, 1e-300)
            err = max(fabs(e0), fabs(e1)) / scale
            nsteps += 1
            if err <= 1.0:
                if hit:
                    t = target
                else:
                    t = t + h
                y0 = n0
                y1 = n1
                y2 = n2
                k1[0] = k7[0]
                k1[1] = k7[1]
                k1[2] = k7[2]
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
                    so[si, 0] = y0
                    so[si, 1] = y1
                    so[si, 2] = y2
                    si += 1
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * pow(err, -0.2)))
                h *= fac
            else:
                h *= max(0.2, 0.9 * pow(err, -0.2))
                if h < hmin:
                    status = 1
                    break
        while si < ns:
            so[si, 0] = y0
            so[si, 1] = y1
            so[si, 2] = y2
            si += 1
    return y0, y1, y2, nodes, samples, nsteps, status
