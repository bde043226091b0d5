"""Norms on weighted Bergman, Hardy, Dirichlet and real L^p spaces, plus traces.

Norm evaluators accept a :class:`HoloExpr` or any object exposing
``values(z)`` on arrays of points of the closed upper half-plane (for example
:class:`hausdorff.operators.HausdorffImage`).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .holo_expr import HoloExpr, Sector, differentiate, evaluate
from .quadrature import (IntegralResult, QuadSpec, _line_batch, integrate_halfplane,
                         integrate_line_weighted)

__all__ = [
    "WeightedBall",
    "BoundaryTrace",
    "PointwiseReport",
    "HardyProfile",
    "bergman_norm",
    "hardy_norm",
    "hardy_profile",
    "dirichlet_norm",
    "lp_weighted_norm",
    "weighted_ball_measure",
    "pointwise_bound_report",
    "boundary_trace",
    "default_y_grid",
    "values_of",
    "derivative_of",
]

CSV_COLUMNS = ("x", "y", "value_re", "value_im", "ratio")


def values_of(f, z) -> np.ndarray:
    """Values of ``f`` on an array of points with ``Im z >= 0``."""
    z = np.asarray(z, dtype=complex)
    if isinstance(f, HoloExpr):
        return evaluate(f, z)
    if hasattr(f, "values"):
        return np.asarray(f.values(z))
    return np.asarray(f(z), dtype=complex)


def derivative_of(f):
    """Complex derivative as another evaluable object."""
    if isinstance(f, HoloExpr):
        return differentiate(f)
    if hasattr(f, "derivative"):
        return f.derivative()
    raise DomainError(f"cannot differentiate object of type {type(f).__name__}")


def _has_boundary_values(f) -> bool:
    return isinstance(f, HoloExpr) or getattr(f, "closed", False)


def _root(res: IntegralResult, p: float) -> IntegralResult:
    v = max(float(np.real(res.value)), 0.0)
    n = v ** (1.0 / p)
    err = n * res.error_estimate / (p * v) if v > 0 else res.error_estimate ** (1.0 / p)
    return IntegralResult(n, err, res.diverged, res.evaluations, res.note)


def _check_p(p: float, allow_inf: bool):
    if not p >= 1 or (math.isinf(p) and not allow_inf):
        raise DomainError(f"p must lie in [1, {'inf' if allow_inf else 'inf)'}], got {p}")


# ---------------------------------------------------------------------------
# Bergman and Dirichlet


def bergman_norm(f, p: float, alpha: float, q: QuadSpec | None = None,
                 method: str = "sector") -> IntegralResult:
    """``(∬ |f|^p y^(alpha-1) dx dy)^(1/p)`` over the upper half-plane.

    ``method="sector"`` integrates in polar form over the sector ``(0, π)``;
    ``method="full"`` uses the iterated Cartesian rule.
    """
    q = q or QuadSpec()
    _check_p(p, allow_inf=False)
    if not alpha > 0:
        raise DomainError(f"the Bergman norm needs alpha > 0, got {alpha}")

    def F(x, y):
        x, y = np.broadcast_arrays(x, y)
        return np.abs(values_of(f, (x + 1j * y).ravel())).reshape(x.shape) ** p

    region = Sector(0.0, math.pi) if method == "sector" else "full"
    return _root(integrate_halfplane(F, alpha, region, q), p)


def dirichlet_norm(f, q: QuadSpec | None = None, method: str = "sector") -> IntegralResult:
    """``‖f'‖`` in ``A^2_1``; constants have norm zero."""
    return bergman_norm(derivative_of(f), 2.0, 1.0, q, method)


# ---------------------------------------------------------------------------
# Hardy


def default_y_grid(n: int = 21) -> np.ndarray:
    """Heights ``2^0, 2^-1, ..., 2^-(n-1)``."""
    return 2.0 ** -np.arange(n, dtype=float)


@dataclass
class HardyProfile:
    y_grid: np.ndarray
    line_norms: np.ndarray
    boundary_norm: float | None
    extrapolated: float
    value: float
    error_estimate: float
    diverged: bool
    note: str = ""


def hardy_profile(f, p: float, alpha: float, q: QuadSpec | None = None,
                  y_grid: Sequence[float] | None = None) -> HardyProfile:
    """Weighted line norms ``(∫ |f(x+iy)|^p |x|^alpha dx)^(1/p)`` over a height grid.

    The reported value is the maximum over the grid, together with the line
    norm on ``y = 0`` when ``f`` extends continuously to the real axis. The
    Richardson value ``2 N(y_min) - N(2 y_min)`` estimates the ``y → 0`` limit.
    """
    q = q or QuadSpec()
    _check_p(p, allow_inf=False)
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    ys = np.sort(np.asarray(default_y_grid() if y_grid is None else y_grid, dtype=float))[::-1]
    if np.any(ys <= 0):
        raise DomainError("the y-grid must be positive; y = 0 is handled separately")
    with_edge = _has_boundary_values(f)
    heights = np.append(ys, 0.0) if with_edge else ys

    def h(x):
        z = x[:, None] + 1j * heights[None, :]
        return np.abs(values_of(f, z.ravel())).reshape(z.shape) ** p

    res = _line_batch(h, alpha, q)
    with np.errstate(invalid="ignore"):
        norms = np.maximum(res.value.real, 0.0) ** (1.0 / p)
    rel_err = np.max(np.where(res.value != 0, res.error / np.abs(res.value), 0.0)) / p
    line = norms[:len(ys)]
    edge = float(norms[-1]) if with_edge else None
    extra = float(2 * line[-1] - line[-2]) if len(line) >= 2 else float(line[-1])
    value = float(np.max(norms))
    note = "; ".join(dict.fromkeys(res.notes))
    return HardyProfile(ys, line, edge, extra, value, float(rel_err * value),
                        bool(res.diverged.any()), note)


def _sup_lattice(f) -> float:
    xs = np.geomspace(1e-6, 1e6, 121)
    xs = np.concatenate([-xs[::-1], [0.0], xs])
    ys = np.concatenate([[0.0], np.geomspace(1e-8, 1e4, 61)])
    if not _has_boundary_values(f):
        ys = ys[1:]
    z = xs[:, None] + 1j * ys[None, :]
    return float(np.max(np.abs(values_of(f, z.ravel()))))


def hardy_norm(f, p: float, alpha: float, q: QuadSpec | None = None,
               y_grid: Sequence[float] | None = None) -> IntegralResult:
    """Norm in the power-weighted Hardy space (lattice sup of ``|f|`` for ``p = inf``)."""
    if math.isinf(p):
        return IntegralResult(_sup_lattice(f), 0.0, note="lattice-sampled supremum")
    prof = hardy_profile(f, p, alpha, q, y_grid)
    return IntegralResult(prof.value, prof.error_estimate, prof.diverged, 0, prof.note)


# ---------------------------------------------------------------------------
# real line


def lp_weighted_norm(g: Callable, p: float, alpha: float, q: QuadSpec | None = None,
                     breakpoints: Sequence[float] = (), x_max: float | None = None
                     ) -> IntegralResult:
    """``(∫ |g(x)|^p |x|^alpha dx)^(1/p)``; a lattice-sampled sup for ``p = inf``."""
    _check_p(p, allow_inf=True)
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    if math.isinf(p):
        xs = np.geomspace(1e-8, 1e8, 2001)
        pts = [b * f for b in breakpoints for f in (1 - 1e-12, 1 + 1e-12)]
        xs = np.concatenate([-xs, [0.0], xs, pts])
        return IntegralResult(float(np.max(np.abs(g(xs)))), 0.0,
                              note="lattice-sampled supremum")
    res = integrate_line_weighted(lambda x: np.abs(g(x)) ** p, alpha, q, breakpoints, x_max)
    return _root(res, p)


@dataclass(frozen=True)
class WeightedBall:
    x: float
    t: float
    alpha: float = 0.0

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"radius must be positive, got {self.t}")
        if not self.alpha > -1:
            raise DomainError(f"alpha must exceed -1, got {self.alpha}")


def weighted_ball_measure(b: WeightedBall) -> float:
    """``∫_{x-t}^{x+t} |u|^alpha du`` in closed form."""
    a1 = b.alpha + 1.0

    def prim(u):
        return math.copysign(abs(u) ** a1, u) / a1

    return prim(b.x + b.t) - prim(b.x - b.t)


# ---------------------------------------------------------------------------
# pointwise bounds


@dataclass
class PointwiseReport:
    space: str
    norm: float
    rows: list = field(default_factory=list)  # (x, y, value, ratio, derivative_ratio)

    @property
    def max_ratio(self) -> float:
        return max((r[3] for r in self.rows), default=0.0)

    @property
    def max_derivative_ratio(self) -> float:
        return max((r[4] for r in self.rows), default=0.0)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS + ("derivative_ratio",))
            for x, y, v, r, d in self.rows:
                w.writerow([repr(x), repr(y), repr(v.real), repr(v.imag), repr(r), repr(d)])


def pointwise_bound_report(f, p: float, alpha: float, space: str, samples,
                           q: QuadSpec | None = None, norm: float | None = None
                           ) -> PointwiseReport:
    """Ratios ``|f(z)| y^((1+α)/p)/‖f‖`` (Bergman) or ``|f(z)| w_α(B(x,y))^(1/p)/‖f‖`` (Hardy).

    Derivative ratios carry the extra factor ``y``. A divergent norm refuses the report.
    """
    space = space.lower()
    if space not in ("bergman", "hardy"):
        raise DomainError(f"pointwise bounds exist for bergman/hardy, not {space!r}")
    if norm is None:
        res = (bergman_norm if space == "bergman" else hardy_norm)(f, p, alpha, q)
        if res.diverged or not math.isfinite(res.value):
            raise PreconditionError("the norm of f diverges; no pointwise report")
        norm = float(res.value)
    if not norm > 0:
        raise PreconditionError("pointwise ratios need a non-zero norm")
    z = np.asarray(samples, dtype=complex).ravel()
    if np.any(z.imag <= 0):
        raise DomainError("sample points must lie in the upper half-plane")
    v = values_of(f, z)
    dv = values_of(derivative_of(f), z)
    rows = []
    for zi, vi, di in zip(z, v, dv):
        x, y = zi.real, zi.imag
        if space == "bergman":
            w = y ** ((1 + alpha) / p)
        else:
            w = weighted_ball_measure(WeightedBall(x, y, alpha)) ** (1.0 / p)
        rows.append((x, y, complex(vi), abs(vi) * w / norm, abs(di) * y * w / norm))
    return PointwiseReport(space, norm, rows)


# ---------------------------------------------------------------------------
# boundary traces


@dataclass
class BoundaryTrace:
    xs: np.ndarray
    values: np.ndarray
    y_grid: np.ndarray
    residuals: np.ndarray
    final_y: float
    method: str
    converged: bool

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for x, v in zip(self.xs, self.values):
                w.writerow([repr(float(x)), repr(0.0), repr(float(v.real)),
                            repr(float(v.imag)), ""])
            for y, r in zip(self.y_grid, self.residuals):
                w.writerow(["", repr(float(y)), "", "", repr(float(r))])


def _richardson(ys: np.ndarray, vals: np.ndarray) -> tuple:
    """Neville extrapolation to ``y = 0`` through the three smallest heights.

    ``vals`` has one row per abscissa and one column per height in ``ys``.
    """
    order = np.argsort(ys)[:3]
    y = ys[order]
    table = [vals[:, i] for i in order]
    for lev in range(1, len(y)):
        for i in range(len(y) - lev):
            table[i] = (y[i + lev] * table[i] - y[i] * table[i + 1]) / (y[i + lev] - y[i])
    return table[0], np.abs(table[0] - vals[:, order[0]])


def boundary_trace(f, xs, y_grid=None, p: float = 2.0, alpha: float = 0.0,
                   q: QuadSpec | None = None) -> BoundaryTrace:
    """Boundary values ``f*(x) = lim_{y→0} f(x+iy)`` with residuals ``‖f(·+iy) - f*‖``.

    Grammar expressions (and Hausdorff images of them) extend continuously to
    the axis and are evaluated there directly; other objects are extrapolated
    with a Richardson (Neville) table over ``y_grid``. Residuals are weighted
    ``L^p`` norms over the line for continuous extensions and trapezoid sums
    on ``xs`` otherwise.
    """
    q = q or QuadSpec()
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.sort(np.asarray([1e-1, 1e-2, 1e-3, 1e-4] if y_grid is None else y_grid,
                            dtype=float))[::-1]
    if _has_boundary_values(f):
        vals = values_of(f, xs + 0j)

        def h(x):
            z0 = values_of(f, x + 0j)
            z = x[:, None] + 1j * ys[None, :]
            diff = values_of(f, z.ravel()).reshape(z.shape) - z0[:, None]
            return np.abs(diff) ** p

        res = _line_batch(h, alpha, q)
        resid = np.maximum(res.value.real, 0.0) ** (1.0 / p)
        method = "continuous"
        converged = not res.diverged.any()
    else:
        z = xs[:, None] + 1j * ys[None, :]
        grid = values_of(f, z.ravel()).reshape(z.shape)
        vals, _ = _richardson(ys, grid)
        resid = np.array([_lattice_norm(grid[:, j] - vals, xs, p, alpha)
                          for j in range(ys.size)])
        method = "richardson"
        steps = np.abs(np.diff(grid, axis=1))
        converged = bool(np.all(steps[:, 1:] <= steps[:, :-1] + 1e-15))
    return BoundaryTrace(xs, np.asarray(vals), ys, resid, float(ys[-1]), method, converged)


def _lattice_norm(v: np.ndarray, xs: np.ndarray, p: float, alpha: float) -> float:
    if xs.size < 2:
        return float(np.abs(v).max(initial=0.0))
    w = np.zeros(xs.size)
    dx = np.diff(xs)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return float(np.sum(w * np.abs(v) ** p * np.abs(xs) ** alpha) ** (1.0 / p))
