"""Backend selection for the hot kernels.

The compiled ``_ckernel`` extension is used when it imports; otherwise the
pure-Python twin. Set ``RADIAL_GATE_PUREPY=1`` to force the fallback.
"""
import os

import numpy as np

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

_BACKENDS = {"python": _pykernel}
if _ckernel is not None:
    _BACKENDS["cython"] = _ckernel

if os.environ.get("RADIAL_GATE_PUREPY") or _ckernel is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

_active = _BACKENDS[BACKEND]

EULER_GAMMA = _pykernel.EULER_GAMMA
SERIES_MAX = _pykernel.SERIES_MAX
HANKEL_MIN = _pykernel.HANKEL_MIN


def available():
    return sorted(_BACKENDS)


def backend(name=None):
    """Kernel module by name; the active one when ``name`` is None."""
    if name is None:
        return _active
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available()}") from None


def jn(n, x, which=None):
    return backend(which).jn(int(n), float(x))


def yn(n, x, which=None):
    return backend(which).yn(int(n), float(x))


def jn_array(n, xs, which=None):
    xs = np.ascontiguousarray(xs, dtype=float).ravel()
    return np.asarray(backend(which).jn_array(int(n), xs), dtype=float)


def yn_array(n, xs, which=None):
    xs = np.ascontiguousarray(xs, dtype=float).ravel()
    return np.asarray(backend(which).yn_array(int(n), xs), dtype=float)


_EMPTY = np.zeros(0)
_EMPTY2 = np.zeros((4, 0))


def integrate(c, q, g, energy, wexp, t0, t1, y0, y1, pc=None, pk=None,
              sx=None, sc=None, rtol=1e-11, sample_t=None, which=None,
              max_steps=2_000_000):
    """Run the log-radius integrator on the chosen backend.

    Returns ``(y_end, nodes, samples, nsteps, status)`` where ``y_end`` is a
    length-3 array and ``samples`` an (n, 3) array.
    """
    pc = _EMPTY if pc is None else np.ascontiguousarray(pc, dtype=float)
    pk = _EMPTY if pk is None else np.ascontiguousarray(pk, dtype=float)
    sx = _EMPTY if sx is None else np.ascontiguousarray(sx, dtype=float)
    sc = _EMPTY2 if sc is None else np.ascontiguousarray(sc, dtype=float)
    st = _EMPTY if sample_t is None else np.ascontiguousarray(sample_t, dtype=float)
    mod = backend(which)
    if mod is _pykernel:
        # plain lists index much faster than numpy scalars in pure Python
        args = (pc.tolist(), pk.tolist(), sx.tolist(), sc.tolist(), rtol, st.tolist())
    else:
        args = (pc, pk, sx, sc, rtol, st)
    out = mod.integrate(float(c), float(q), float(g), float(energy), float(wexp),
                        float(t0), float(t1), float(y0), float(y1), *args,
                        max_steps=max_steps)
    a, b, n2, nodes, samples, nsteps, status = out
    samples = np.asarray(samples, dtype=float).reshape(-1, 3)
    return np.array([a, b, n2]), int(nodes), samples, int(nsteps), int(status)
