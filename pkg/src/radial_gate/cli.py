"""radial-gate command line."""
import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import anomaly_algebra as aa
from . import radial_solver as rs
from . import weak_verifier as wv
from .errors import RadialGateError, VerificationFailed
from .origin_classifier import (Dimension, FrobeniusSeries, PotentialSpec, RadialProblem,
                                classify, frobenius_series)
from .probes import TestFunction

EXIT_CODES = """exit codes:
  0  success
  1  unexpected library error
  2  invalid arguments
  3  irregular potential (r^2 V does not vanish at the origin)
  4  weak-form extrapolation did not converge
  5  no eigenvalue bracket in the energy window
  6  ODE step size underflow
  7  domain error (e.g. Y_m at x <= 0, reduction of a non-polynomial weight)
  8  ill-conditioned probe basis
  9  verification tolerance not met

On a nonzero exit, stderr carries one JSON line: {"error", "exit_code", "message"}.
"""


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- output --------------------------------------------------------------------

def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    return format(x, ".17g")


def dump_json(obj, indent=0):
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dump_json([obj.real, obj.imag], indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dump_json(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dump_json(v, indent + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dump_json(v, indent + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_num(v) for v in row))
    return "\n".join(lines) + "\n"


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, obj):
    _emit(args, dump_json(obj) + "\n")


# -- argument helpers -----------------------------------------------------------

def _eps_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad eps list {text!r}") from None
    return vals


def _problem(args):
    dim = Dimension(args.dim)
    if dim is Dimension.THREE_D:
        if args.m is not None:
            raise UsageError("use --l with --dim 3")
        n = 0 if args.l is None else args.l
    else:
        if args.l is not None:
            raise UsageError("use --m with --dim 2")
        n = 0 if args.m is None else args.m
    pot = PotentialSpec.parse(args.potential)
    return RadialProblem(dim, n, args.hbar, args.mass, pot)


def _quad(args):
    base = wv.QuadratureConfig.from_json(args.quad) if args.quad else wv.QuadratureConfig()
    if args.eps_list:
        base = base.with_eps(sorted(args.eps_list, reverse=True))
    return base


# -- commands -------------------------------------------------------------------

def cmd_classify(args):
    prob = _problem(args)
    behav = classify(prob)
    out = behav.as_dict()
    out["potential"] = str(prob.potential)
    _emit_json(args, out)
    return 0


def _m_for_case(case, m):
    k = int(case[1])
    if m is not None and m < 0:
        return -k
    return k


def cmd_verify_anomaly(args):
    quad = _quad(args)
    sigma = Fraction(args.sigma).limit_denominator(10**6)
    rows = []
    ok = True
    if args.case in ("log", "smooth"):
        if args.case == "log":
            psi = wv.LogBranch(1.0, 1.0)
            tol = args.tol if args.tol is not None else 1e-6
        else:
            m = args.m or 0
            prob = RadialProblem(2, m)
            psi = wv.SmoothBranch(m, frobenius_series(prob, energy=0.5))
            tol = args.tol if args.tol is not None else 1e-6
        probes = [TestFunction.gaussian(sigma * Fraction(k, 4)) for k in (2, 3, 4, 5, 6)]
        probes += [TestFunction.monomial_gaussian(i, j, sigma) for i, j in
                   ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))]
        for rep in wv.weak_residuals(psi, probes, quad):
            if args.case == "log" and rep.predicted != 0:
                passed = rep.relative_error <= tol
            else:
                passed = abs(rep.measured) <= tol
            ok &= passed
            rows.append({"probe": rep.probe, "measured": rep.measured,
                         "predicted": rep.predicted, "relative_error": rep.relative_error,
                         "error_bar": rep.error_bar, "pass": passed})
        result = {"case": args.case, "candidate": psi.name, "tolerance": tol, "rows": rows}
    else:
        m = _m_for_case(args.case, args.m)
        tol = args.tol if args.tol is not None else 1e-3
        psi = wv.PowerBranch(m, FrobeniusSeries(-abs(m), (0,), (1.0,), 0.0))
        if args.reference == "published":
            ref = aa.PUBLISHED_LAPLACIAN_ANOMALY[m]
        else:
            ref = aa.laplacian_anomaly(m)
        basis = wv.monomial_basis(3, sigma) + wv.monomial_basis(3, sigma * Fraction(7, 5))
        meas = wv.measure_coefficient(psi, basis, max_order=3, quad=quad)
        for alpha, (v, e, err) in sorted(meas.compare(ref).items(),
                                         key=lambda kv: (sum(kv[0]), -kv[0][0])):
            limit = tol if e != 0 else 1e-6
            passed = err <= limit
            ok &= passed
            rows.append({"multi_index": list(alpha), "measured": v, "predicted": e,
                         "error": err, "kind": "relative" if e != 0 else "absolute",
                         "pass": passed})
        result = {"case": args.case, "m": m, "reference": args.reference,
                  "tolerance": tol, "condition_number": meas.condition_number,
                  "residual_norm": meas.residual_norm,
                  "reference_terms": str(ref), "rows": rows}
    result["pass"] = ok
    if args.format == "csv":
        key = "probe" if args.case in ("log", "smooth") else "multi_index"
        header = [key, "measured_re", "measured_im", "predicted_re", "predicted_im", "error"]
        lines = [",".join(header)]
        for r in rows:
            label = r[key] if key == "probe" else "".join("x" * r[key][0] + "y" * r[key][1]) or "1"
            err = r.get("relative_error", r.get("error"))
            lines.append(",".join([f'"{label}"'] + [_num(v) for v in (
                r["measured"].real, r["measured"].imag, complex(r["predicted"]).real,
                complex(r["predicted"]).imag, err)]))
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit_json(args, result)
    if not ok:
        raise VerificationFailed(f"case {args.case}: tolerance {tol:g} not met")
    return 0


def _spectrum_out(args, res):
    if args.format == "csv":
        idx = args.level - 1
        if not 0 <= idx < len(res.levels):
            raise UsageError(f"--level must be in 1..{len(res.levels)}")
        _emit(args, dump_csv(["r", "Re R", "Im R"], res.wavefunction_rows(idx)))
    else:
        _emit_json(args, res.to_dict())
    return 0


def cmd_well(args):
    res = rs.well_spectrum(args.a, args.m or 0, args.levels, args.hbar, args.mass, args.points)
    return _spectrum_out(args, res)


def cmd_spectrum(args):
    prob = _problem(args)
    pot = prob.potential
    r_max = args.r_max
    if r_max is None:
        if pot.box_radius is None:
            raise UsageError("--r-max is required unless the potential is a well")
        r_max = pot.box_radius
    res = rs.shoot_spectrum(prob, r_max, args.levels, rs.Form(args.form), args.points)
    return _spectrum_out(args, res)


def cmd_pseudo_y0(args):
    rep = rs.pseudo_y0_report(args.a, args.n, args.hbar, args.mass, args.sigma)
    _emit_json(args, rep.to_dict())
    return 0


def cmd_fig1(args):
    data = rs.fig1_data(points=args.points)
    if args.format == "json":
        _emit_json(args, {"x": data[:, 0], "xY0sq": data[:, 1]})
    else:
        _emit(args, dump_csv(["x", "xY0sq"], data))
    return 0


def cmd_flux(args):
    if args.alpha <= 0 or args.eps <= 0:
        raise UsageError("--alpha and --eps must be positive")
    flux = wv.regularized_flux(args.alpha, args.eps)
    closed = 2.0 * math.pi * args.eps / (args.eps + args.alpha)
    _emit_json(args, {"alpha": args.alpha, "eps": args.eps, "flux": flux,
                      "closed_form": closed, "limit_alpha_to_zero": 2.0 * math.pi})
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="radial-gate",
                description="Origin behaviour, delta anomalies and spectra of 2D/3D radial problems.",
                epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt=("json",), default="json"):
        sp.add_argument("--hbar", type=float, default=1.0)
        sp.add_argument("--mass", type=float, default=1.0)
        sp.add_argument("--out", help="write here instead of stdout")
        sp.add_argument("--format", choices=fmt, default=default)

    def problem(sp):
        sp.add_argument("--dim", type=int, choices=(2, 3), default=2)
        sp.add_argument("--m", type=int)
        sp.add_argument("--l", type=int)
        sp.add_argument("--potential", default="zero",
                        help="zero | well:a=R | power:c=C,k=K | coulomb2d:Z=Z | table:PATH")

    sp = sub.add_parser("classify", help="Frobenius exponents and the Q pattern")
    problem(sp)
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("verify-anomaly", help="weak-form check of a delta anomaly")
    sp.add_argument("--case", required=True, choices=("log", "m1", "m2", "m3", "smooth"))
    sp.add_argument("--m", type=int, help="harmonic for --case smooth; sign for mK cases")
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--eps-list", type=_eps_list)
    sp.add_argument("--quad", help="QuadratureConfig as JSON text or file")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--reference", choices=("derived", "published"), default="derived")
    common(sp, ("json", "csv"))
    sp.set_defaults(func=cmd_verify_anomaly)

    sp = sub.add_parser("well", help="analytic circular-well spectrum")
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=0)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--level", type=int, default=1, help="wavefunction written by --format csv")
    common(sp, ("json", "csv"))
    sp.set_defaults(func=cmd_well)

    sp = sub.add_parser("spectrum", help="shooting eigenvalues for a potential")
    problem(sp)
    sp.add_argument("--a", type=float, help="shorthand for --potential well:a=A")
    sp.add_argument("--r-max", type=float)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--form", choices=("R", "u"), default="R")
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--level", type=int, default=1)
    common(sp, ("json", "csv"))
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("pseudo-y0", help="norm, Green defect and divergent kinetic term of Y0")
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--sigma", type=float, default=0.5)
    common(sp)
    sp.set_defaults(func=cmd_pseudo_y0)

    sp = sub.add_parser("fig1", help="x Y0(x)^2 on (0, x2]")
    sp.add_argument("--points", type=int, default=500)
    common(sp, ("csv", "json"), "csv")
    sp.set_defaults(func=cmd_fig1)

    sp = sub.add_parser("flux", help="Gauss flux of grad ln(r + alpha) through r = eps")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_flux)
    return p


def _fail(kind, code, message):
    line = json.dumps({"error": kind, "exit_code": code, "message": " ".join(str(message).split())})
    sys.stderr.write(line + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "a", None) is not None and args.command == "spectrum":
            args.potential = f"well:a={args.a}"
        return args.func(args)
    except RadialGateError as exc:
        return _fail(type(exc).__name__, exc.exit_code, exc)
    except (UsageError, ValueError, argparse.ArgumentTypeError, OSError) as exc:
        return _fail(type(exc).__name__, 2, exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(type(exc).__name__, 1, exc)


if __name__ == "__main__":
    sys.exit(main())
