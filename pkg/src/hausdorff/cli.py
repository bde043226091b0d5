"""Command-line interface: JSON kernels in, CSV reports out."""
from __future__ import annotations

import argparse
import ast
import csv
import json
import math
import operator
import sys
from typing import Callable

import numpy as np

from . import analysis
from .errors import DomainError, PreconditionError
from .holo_expr import parse_expr
from .kernels import CATALOG, SpaceParams, kernel_from_json, moment
from .operators import hausdorff_batch
from .quadrature import QuadSpec
from .spaces import bergman_norm, dirichlet_norm, hardy_norm, lp_weighted_norm, values_of

__all__ = ["main", "build_parser", "real_function"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# real expressions in x for the commutation experiment

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"exp": np.exp, "sqrt": np.sqrt, "abs": np.abs, "cos": np.cos, "sin": np.sin,
          "log": np.log, "tanh": np.tanh, "arctan": np.arctan}


def real_function(text: str) -> Callable:
    """Compile an arithmetic expression in ``x`` into a vectorized function."""
    try:
        tree = ast.parse(text, mode="eval").body
    except SyntaxError as exc:
        raise UsageError(f"cannot parse function {text!r}: {exc.msg}") from None

    def ev(node, x):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "x":
                return x
            if node.id == "pi":
                return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, x), ev(node.right, x))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand, x))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0], x))
        raise UsageError(f"unsupported element in function {text!r}")

    ev(tree, np.zeros(1))  # validate once

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(ev(tree, x), x.shape).astype(float)

    return g


# ---------------------------------------------------------------------------
# argument helpers


def _grid(text, default):
    if text is None:
        return list(default)
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None
    if not vals:
        raise UsageError("empty grid")
    return vals


def _kernel(args):
    if not args.kernel:
        raise UsageError("--kernel is required")
    try:
        return kernel_from_json(args.kernel)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--kernel is not valid JSON: {exc}") from None


def _function(args, default=None):
    text = args.function or default
    if text is None:
        raise UsageError("--function is required")
    return parse_expr(text)


def _space(args):
    if not args.space:
        raise UsageError("--space is required")
    return SpaceParams(args.space, args.p, args.alpha)


def _quad(args) -> QuadSpec:
    return QuadSpec(rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                    max_subdivisions=args.max_subdiv)


def _num(v) -> str:
    return repr(float(v))


def _write(path, header, rows):
    if not path:
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _short(v: float) -> str:
    return repr(float(f"{v:.12g}"))


# ---------------------------------------------------------------------------
# subcommands


def cmd_catalog(args) -> int:
    print(json.dumps(CATALOG, indent=2, sort_keys=True))
    _write(args.out, ["type", "field", "description"],
           [[t, k, v] for t, fields in sorted(CATALOG.items()) for k, v in sorted(fields.items())])
    return EXIT_OK


def cmd_moment(args) -> int:
    k, sp, q = _kernel(args), _space(args), _quad(args)
    res = moment(k, sp, q)
    _write(args.out, ["kernel", "space", "p", "alpha", "moment", "error", "diverged"],
           [[json.dumps(k.to_dict(), sort_keys=True), sp.space, _num(sp.p), _num(sp.alpha),
             _num(res.value), _num(res.error_estimate), int(res.diverged)]])
    if res.diverged:
        print(f"FAIL moment diverges: {res.note or 'non-integrable'}")
        return EXIT_FAIL
    print(_short(res.value))
    return EXIT_OK


def _space_norm(f, sp: SpaceParams, q: QuadSpec):
    if sp.space == "bergman":
        return bergman_norm(f, sp.p, sp.alpha, q)
    if sp.space == "hardy":
        return hardy_norm(f, sp.p, sp.alpha, q)
    if sp.space == "dirichlet":
        return dirichlet_norm(f, q)
    return lp_weighted_norm(lambda x: values_of(f, np.asarray(x) + 0j), sp.p, sp.alpha, q)


def cmd_norm(args) -> int:
    f, sp, q = _function(args), _space(args), _quad(args)
    res = _space_norm(f, sp, q)
    _write(args.out, ["function", "space", "p", "alpha", "norm", "error", "diverged"],
           [[f.to_text(), sp.space, _num(sp.p), _num(sp.alpha), _num(res.value),
             _num(res.error_estimate), int(res.diverged)]])
    if res.diverged:
        print(f"FAIL norm diverges: {res.note or 'non-integrable'}")
        return EXIT_FAIL
    print(_short(res.value))
    return EXIT_OK


def _points(args) -> np.ndarray:
    if args.points:
        try:
            z = np.array([complex(s.strip().replace(" ", "")) for s in args.points.split(",")])
        except ValueError:
            raise UsageError(f"bad --points {args.points!r}") from None
    else:
        rng = np.random.default_rng(args.seed)
        z = rng.uniform(-5, 5, 10) + 1j * rng.uniform(0.1, 5, 10)
    if np.any(z.imag <= 0):
        raise UsageError("--points must lie in the upper half-plane")
    return z


def cmd_apply(args) -> int:
    k, f, q = _kernel(args), _function(args), _quad(args)
    z = _points(args)
    res = hausdorff_batch(k, f, z, q)
    rows = [[_num(zz.real), _num(zz.imag), _num(v.real), _num(v.imag), _num(e), int(d)]
            for zz, v, e, d in zip(z, np.asarray(res.values, complex), res.errors, res.diverged)]
    _write(args.out, ["x", "y", "re", "im", "error", "diverged"], rows)
    if res.diverged.any():
        print(f"FAIL integral diverges at {int(res.diverged.sum())} of {z.size} points")
        return EXIT_FAIL
    print(f"OK {z.size} points, max error {float(res.errors.max()):.3g}")
    return EXIT_OK


def cmd_sharpness(args) -> int:
    k, sp, q = _kernel(args), _space(args), _quad(args)
    eps = _grid(args.eps_grid, analysis.DEFAULT_EPS_GRID)
    deltas = _grid(args.delta_grid, analysis.DEFAULT_DELTA_GRID)
    rep = analysis.sharpness_gap(k, sp, q, eps, deltas)
    b = rep.bounds
    if args.out:
        b.to_csv(args.out)
    if b.diverged:
        print(f"FAIL {rep.reason}; quotients "
              + ", ".join(f"{r.quotient:.6g}" for r in b.rows))
        return EXIT_FAIL
    tag = "PASS" if rep.passed else "FAIL"
    print(f"{tag} lower={b.lower:.10g} upper={b.upper:.10g} gap/upper={rep.relative_gap:.4g}"
          f" ({b.lower_route})")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_commute(args) -> int:
    k, q = _kernel(args), _quad(args)
    g = real_function(args.function or "1/(1+x**2)")
    res = analysis.commutation_residual(k, g, args.p, args.alpha, q)
    _write(args.out, ["p", "alpha", "residual"], [[_num(args.p), _num(args.alpha), _num(res)]])
    tag = "PASS" if res <= args.tolerance else "FAIL"
    print(f"{tag} relative residual {res:.4g}")
    return EXIT_OK if tag == "PASS" else EXIT_FAIL


def cmd_boundary(args) -> int:
    k, f, q = _kernel(args), _function(args), _quad(args)
    ys = _grid(args.y_grid, (1e-1, 1e-2, 1e-3, 1e-4))
    rep = analysis.boundary_compat_residual(k, f, args.p, args.alpha, ys, q)
    if args.out:
        rep.to_csv(args.out)
    flat = float(np.max(rep.residuals)) <= 1e-12 * max(rep.f_norm, 1.0)
    ok = (rep.decreasing or flat) and rep.final <= args.tolerance * rep.f_norm
    why = "" if rep.decreasing else " (non-monotone residuals)"
    print(f"{'PASS' if ok else 'FAIL'} final residual {rep.final:.4g} at y={rep.y_grid[-1]:g}{why}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_signlemma(args) -> int:
    eps = _grid(args.eps_grid, ()) if args.eps_grid else None
    rep = analysis.verify_sign_lemma(args.p, args.alpha, eps, args.grid_size)
    c = rep.constants
    rows = [[_num(e), _num(r), sum(1 for v in rep.violations if v[0] == e), "inside"]
            for e, r in rep.min_ratio.items()]
    rows += [[_num(e), "", 0, "outside lemma hypotheses"] for e in rep.outside]
    _write(args.out, ["eps", "min_ratio", "violations", "status"], rows)
    tag = "PASS" if rep.passed else "FAIL"
    print(f"{tag} part={c.part} sign={'+' if c.sign > 0 else '-'} eps_pa={c.eps_pa:.10g}"
          f" c_pa={c.c_pa:.10g} case={c.case_tag} violations={len(rep.violations)}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_muckenhoupt(args) -> int:
    qexp = args.p
    if args.interval:
        a, b = _grid(args.interval, ())[:2]
        intervals = [(a, b)]
    else:
        rng = np.random.default_rng(args.seed)
        n = args.count
        a = rng.uniform(-2.0, 2.0, n)
        intervals = list(zip(a, a + rng.uniform(0.01, 2.0, n)))
    results = [analysis.muckenhoupt_quotient(args.alpha, qexp, I) for I in intervals]
    _write(args.out, ["a", "b", "quotient", "diverged"],
           [[_num(I[0]), _num(I[1]), _num(r.value), int(r.diverged)]
            for I, r in zip(intervals, results)])
    bad = sum(r.diverged for r in results)
    if bad:
        print(f"FAIL divergent on {bad} of {len(results)} intervals (weight outside A_q)")
        return EXIT_FAIL
    print(f"PASS max quotient {max(r.value for r in results):.10g} over {len(results)} intervals")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kernel", help="kernel JSON descriptor")
    common.add_argument("--function", help="function expression")
    common.add_argument("--space", choices=["bergman", "hardy", "dirichlet", "reallp"])
    common.add_argument("--p", type=float, default=2.0)
    common.add_argument("--alpha", type=float, default=0.0)
    common.add_argument("--rel-tol", type=float, default=1e-9)
    common.add_argument("--abs-tol", type=float, default=1e-12)
    common.add_argument("--max-subdiv", type=int, default=2000)
    common.add_argument("--eps-grid", help="comma-separated eps values")
    common.add_argument("--delta-grid", help="comma-separated delta values")
    common.add_argument("--y-grid", help="comma-separated heights")
    common.add_argument("--out", help="CSV output path")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--points", help="comma-separated complex points, e.g. 1j,2+1j")
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--grid-size", type=int, default=10_000)
    common.add_argument("--interval", help="a,b for a single Muckenhoupt interval")
    common.add_argument("--count", type=int, default=100)

    parser = argparse.ArgumentParser(prog="hausdorff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in [("catalog", cmd_catalog), ("moment", cmd_moment), ("norm", cmd_norm),
                     ("apply", cmd_apply), ("sharpness", cmd_sharpness),
                     ("commute", cmd_commute), ("boundary", cmd_boundary),
                     ("signlemma", cmd_signlemma), ("muckenhoupt", cmd_muckenhoupt)]:
        sp = sub.add_parser(name, parents=[common])
        sp.set_defaults(func=fn)
    return parser


_DEFAULT_TOL = {"commute": 1e-3, "boundary": 1e-4}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.tolerance is None:
        args.tolerance = _DEFAULT_TOL.get(args.command, 0.0)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"FAIL precondition: {exc}")
        return EXIT_FAIL
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
