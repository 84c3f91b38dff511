"""Command-line frontend.

Every report is ``{"command", "config", "result"}``; the config echoes all
resolved options.  Exit codes: 0 ok, 1 a requested check failed, 2 usage
error, 3 inadmissible parameters, 4 undetermined series.

CSV column orders (frozen):

  classify        series,kind,value,tail_bound,terms_used
  factorize-lu    n,s_tilde,r_tilde,x_tilde,y_tilde,lambda_hat,mu_hat
  factorize-ul    n,x,y,s,r,u,lambda_tilde,mu_tilde
  darboux         n,lambda,mu
  poly            n,x,value
  spectral-check  check,residual,tol,passed
  verify          check,residual,tol,passed
  simulate        quantity,mean,stderr,trials,seed,target,accepted
  presets         preset,params
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import checks, factor_lu, factor_ul, montecarlo
from .errors import BDError, Inadmissible, RuntimeCap, TooFewAccepted, UndeterminedSeries
from .examples import PRESETS, load_process_spec, make_preset
from .polynomials import associated, primary
from .process import classify

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INADMISSIBLE, EXIT_UNDETERMINED = 0, 1, 2, 3, 4

CSV_COLUMNS = {
    "classify": ["series", "kind", "value", "tail_bound", "terms_used"],
    "factorize-lu": ["n", "s_tilde", "r_tilde", "x_tilde", "y_tilde", "lambda_hat", "mu_hat"],
    "factorize-ul": ["n", "x", "y", "s", "r", "u", "lambda_tilde", "mu_tilde"],
    "darboux": ["n", "lambda", "mu"],
    "poly": ["n", "x", "value"],
    "spectral-check": ["check", "residual", "tol", "passed"],
    "verify": ["check", "residual", "tol", "passed"],
    "simulate": ["quantity", "mean", "stderr", "trials", "seed", "target", "accepted"],
    "presets": ["preset", "params"],
}


class UsageError(Exception):
    pass


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("process")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--mu", type=float)
    g.add_argument("--mu0", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--spec", help="process spec: JSON file path or inline JSON")
    p.add_argument("--N", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--format", choices=["json", "csv", "table"], default="json")
    p.add_argument("--json", action="store_true", help="structured JSON errors on stderr")
    return p


def _factor_args(p: argparse.ArgumentParser, choose: bool) -> None:
    if choose:
        m = p.add_mutually_exclusive_group()
        m.add_argument("--lu", dest="factor", action="store_const", const="lu")
        m.add_argument("--ul", dest="factor", action="store_const", const="ul")
    p.add_argument("--mu0-hat", type=float, default=0.0)
    p.add_argument("--x0", type=float)
    p.add_argument("--mu0-tilde", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parent = _parent()
    ap = argparse.ArgumentParser(prog="bdfactor", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[parent], help="series A, B and the regime")
    s = sub.add_parser("factorize-lu", parents=[parent], help="LU coefficient table")
    _factor_args(s, False)
    s.add_argument("--route", choices=["closed", "recursive"], default="closed")
    s = sub.add_parser("factorize-ul", parents=[parent], help="UL coefficient table")
    _factor_args(s, False)
    s.add_argument("--route", choices=["closed", "recursive"], default="closed")
    s = sub.add_parser("darboux", parents=[parent], help="rates of the Darboux-transformed process")
    _factor_args(s, True)
    s = sub.add_parser("poly", parents=[parent], help="evaluate polynomial families")
    _factor_args(s, True)
    s.add_argument("--x", default="0", help="comma-separated evaluation points")
    s.add_argument("--degree", type=int, default=10)
    s.add_argument("--kind", choices=["primary", "associated"], default="primary",
                   help="family of the original process (ignored with --lu/--ul)")
    s = sub.add_parser("spectral-check", parents=[parent], help="orthogonality against the spectral measure")
    _factor_args(s, True)
    s = sub.add_parser("verify", parents=[parent], help="reconstruction, row-sum and orthogonality suite")
    _factor_args(s, True)
    s = sub.add_parser("simulate", parents=[parent], help="Monte Carlo estimate")
    s.add_argument("--quantity", required=True, choices=[q.value for q in montecarlo.Quantity
                                                           if q is not montecarlo.Quantity.TRANSITION_PROB])
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--i", type=int, default=0)
    s.add_argument("--n", type=int, default=1)
    sub.add_parser("presets", parents=[parent], help="list presets")
    return ap


def _process(a):
    if a.spec is not None:
        if a.preset is not None:
            raise UsageError("give either --spec or --preset, not both")
        return load_process_spec(a.spec)
    if a.preset is None:
        raise UsageError("a process is required: --preset or --spec")
    params = {k: v for k, v in (("lambda", a.lam), ("mu", a.mu), ("mu0", a.mu0), ("beta", a.beta))
              if v is not None}
    return make_preset(a.preset, params)


def _config(a, p) -> dict:
    cfg = {k: v for k, v in vars(a).items() if k not in ("json",)}
    if p is not None:
        cfg["process"] = p.describe()
    return cfg


def _require_factor(a) -> str:
    if a.factor is None:
        raise UsageError("choose a factorization with --lu or --ul")
    if a.factor == "ul" and a.x0 is None:
        raise UsageError("--ul needs --x0")
    return a.factor


def _x0(a) -> float:
    if a.x0 is None:
        raise UsageError("--x0 is required")
    return a.x0


def _run_classify(a, p):
    c = classify(p, a.tol)
    rows = [dict(series=name, **{k: v.to_dict()[k] for k in ("kind", "value", "tail_bound", "terms_used")})
            for name, v in (("A", c.A), ("B", c.B))]
    return c.to_dict(), rows, True


def _run_lu(a, p):
    b = factor_lu.lu_bound(p, a.tol)
    if a.route == "closed":
        f = factor_lu.lu_factorize(p, a.mu0_hat, a.N, a.tol)
    else:
        f = factor_lu.lu_factorize_recursive(p, a.mu0_hat, a.N, at_bound=a.mu0_hat >= b.bound - b.slack)
    rows = f.table()
    return {"bound": b.bound, "route": f.route, "at_bound": f.at_bound, "table": rows}, rows, True


def _run_ul(a, p):
    rep = factor_ul.ul_admissibility(p, _x0(a), a.mu0_tilde, a.tol)
    if not rep.admissible:
        raise Inadmissible(rep.reason)
    if a.route == "closed":
        f = factor_ul.ul_factorize(p, a.x0, a.mu0_tilde, a.N, a.tol)
    else:
        f = factor_ul.ul_factorize_recursive(p, a.x0, a.mu0_tilde, a.N, report=rep)
    rows = f.table()
    return {"admissibility": rep.to_dict(), "route": f.route, "table": rows}, rows, True


def _factors(a, p):
    if _require_factor(a) == "lu":
        return factor_lu.lu_factorize(p, a.mu0_hat, a.N, a.tol)
    return factor_ul.ul_factorize(p, a.x0, a.mu0_tilde, a.N, a.tol)


def _run_darboux(a, p):
    f = _factors(a, p)
    lam, mu = f.darboux_rates()
    rows = [{"n": n, "lambda": float(lam[n]) if n < len(lam) else None, "mu": float(mu[n])}
            for n in range(len(mu))]
    return {"factorization": a.factor, "mu0_new": float(mu[0]), "rates": rows}, rows, True


def _run_poly(a, p):
    try:
        xs = np.array([float(v) for v in a.x.split(",")])
    except ValueError as e:
        raise UsageError(f"--x must be comma-separated numbers: {e}") from None
    if a.degree < 0:
        raise UsageError("--degree must be nonnegative")
    if a.factor is None:
        fam = primary(p) if a.kind == "primary" else associated(p)
        name = a.kind
    else:
        if a.degree > a.N:
            raise UsageError("--degree must not exceed --N for transformed families")
        f = _factors(a, p)
        fam = factor_lu.LUTransformedFamily(f) if a.factor == "lu" else factor_ul.ULTransformedFamily(f)
        name = f"{a.factor}_transformed"
    vals = fam.table(a.degree, xs)
    rows = [{"n": n, "x": float(x), "value": float(vals[n, k])}
            for n in range(a.degree + 1) for k, x in enumerate(xs)]
    return {"family": name, "values": rows}, rows, True


def _check_result(cs):
    rows = [c.to_dict() for c in cs]
    ok = all(c.passed for c in cs)
    return {"passed": ok, "checks": rows}, rows, ok


def _run_spectral(a, p):
    cs = checks.measure_checks(p)
    if a.factor == "lu":
        cs += [c for c in checks.lu_checks(p, a.mu0_hat, a.N) if c.name == "orthogonality"]
    elif a.factor == "ul":
        cs += [c for c in checks.ul_checks(p, _x0(a), a.mu0_tilde, a.N)
               if c.name in ("orthogonality", "geronimus_mass")]
    return _check_result(cs)


def _run_verify(a, p):
    if _require_factor(a) == "lu":
        return _check_result(checks.lu_checks(p, a.mu0_hat, a.N))
    return _check_result(checks.ul_checks(p, a.x0, a.mu0_tilde, a.N))


def _run_simulate(a, p):
    q = montecarlo.Quantity(a.quantity)
    mc = montecarlo
    if q is mc.Quantity.HITTING_MEAN:
        e = mc.estimate_hitting_mean(p, a.n, a.trials, a.seed)
    elif q is mc.Quantity.CONDITIONAL_HITTING:
        e = mc.estimate_conditional_hitting(p, a.n, a.trials, a.seed)
    elif q is mc.Quantity.ABSORPTION_PROB:
        e = mc.estimate_absorption_prob(p, a.i, a.n, a.trials, a.seed)
    elif q is mc.Quantity.OCCUPATION_TIME:
        e = mc.estimate_occupation_time(p, a.i, a.n, a.trials, a.seed)
    else:
        e = mc.estimate_extinction_prob(p, a.i, a.trials, a.seed)
    d = e.to_dict()
    return d, [d], True


def _run_presets(a, p):
    rows = [{"preset": k, "params": list(v[1])} for k, v in sorted(PRESETS.items())]
    return {"presets": rows}, rows, True


RUNNERS = {
    "classify": _run_classify,
    "factorize-lu": _run_lu,
    "factorize-ul": _run_ul,
    "darboux": _run_darboux,
    "poly": _run_poly,
    "spectral-check": _run_spectral,
    "verify": _run_verify,
    "simulate": _run_simulate,
    "presets": _run_presets,
}


def _render(cmd: str, cfg: dict, result, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_clean({"command": cmd, "config": cfg, "result": result}),
                          sort_keys=True, indent=2) + "\n"
    cols = CSV_COLUMNS[cmd]
    rows = _clean(rows)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# config " + json.dumps(_clean(cfg), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in cols])
        return buf.getvalue()
    cells = [cols] + [[_fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(cols))]
    lines = [f"# {cmd} " + json.dumps(_clean(cfg), sort_keys=True)]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _error(a_json: bool, code: int, exc: BaseException) -> int:
    if a_json:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        if isinstance(exc, Inadmissible):
            err["reason"] = type(exc).__name__ if type(exc) is not Inadmissible else exc.reason
            err["detail"] = exc.reason
        sys.stderr.write(json.dumps(_clean(err), sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"error ({type(exc).__name__}): {exc}\n")
    return code


def run(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if a.N < 2:
            raise UsageError("--N must be at least 2")
        p = None if a.command == "presets" else _process(a)
        result, rows, ok = RUNNERS[a.command](a, p)
    except UsageError as e:
        return _error(a.json, EXIT_USAGE, e)
    except Inadmissible as e:
        return _error(a.json, EXIT_INADMISSIBLE, e)
    except UndeterminedSeries as e:
        return _error(a.json, EXIT_UNDETERMINED, e)
    except (RuntimeCap, TooFewAccepted) as e:
        return _error(a.json, EXIT_FAILED, e)
    except (BDError, ValueError, OSError) as e:
        return _error(a.json, EXIT_USAGE, e)
    sys.stdout.write(_render(a.command, _config(a, p), result, rows, a.format))
    return EXIT_OK if ok else EXIT_FAILED


def main() -> None:
    sys.exit(run())
