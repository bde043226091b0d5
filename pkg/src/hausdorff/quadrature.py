"""Adaptive quadrature on rays, weighted lines, half-planes and sectors.

Everything is built on one vectorised Gauss-Kronrod (7, 15) engine. Integrands
take a 1-D array of abscissas and return either an array of the same length or
a 2-D array ``(len(x), B)`` holding a batch of ``B`` integrands that share the
panel subdivision. Final sums are compensated and taken over the panel list in
left-endpoint order, so results do not depend on refinement history.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError
from .holo_expr import Sector

__all__ = [
    "QuadSpec",
    "IntegralResult",
    "integrate_interval",
    "integrate_ray",
    "integrate_line_weighted",
    "integrate_halfplane",
    "principal_value",
    "neumaier_sum",
]

# Gauss-Kronrod 15-point nodes on [-1, 1] with the embedded 7-point Gauss rule.
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG7 = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
W_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
W_GAUSS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (x = +-0.949, +-0.741, +-0.405, 0).
W_GAUSS[[1, 3, 5]] = _WG7[:3]
W_GAUSS[7] = _WG7[3]
W_GAUSS[[9, 11, 13]] = _WG7[2::-1]

TAIL_PIECES = 3
RATIO_FLOOR = 1.0 - 1e-6
MAX_THETA_NODES = 2048


@dataclass(frozen=True)
class QuadSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    ray_substitution: str = "log"
    tail_cutoff: float = 1e8

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if self.ray_substitution not in ("log", "none"):
            raise DomainError(f"unknown ray substitution {self.ray_substitution!r}")
        if not self.tail_cutoff > 1:
            raise DomainError("tail_cutoff must exceed 1")

    def with_tol(self, rel_tol=None, abs_tol=None) -> "QuadSpec":
        return QuadSpec(rel_tol if rel_tol is not None else self.rel_tol,
                        abs_tol if abs_tol is not None else self.abs_tol,
                        self.max_subdivisions, self.ray_substitution, self.tail_cutoff)


@dataclass
class IntegralResult:
    """Outcome of one integral. When ``diverged`` the value is only a partial cap."""

    value: object
    error_estimate: float
    diverged: bool = False
    evaluations: int = 0
    note: str = ""

    def __float__(self):
        return float(np.real(self.value))


@dataclass
class _Batch:
    value: np.ndarray
    error: np.ndarray
    diverged: np.ndarray
    evaluations: int = 0
    notes: list = field(default_factory=list)

    def __add__(self, other: "_Batch") -> "_Batch":
        return _Batch(self.value + other.value, self.error + other.error,
                      self.diverged | other.diverged, self.evaluations + other.evaluations,
                      self.notes + other.notes)

    def scaled(self, c) -> "_Batch":
        return _Batch(self.value * c, self.error * abs(c), self.diverged,
                      self.evaluations, self.notes)

    def result(self, squeeze: bool) -> IntegralResult:
        note = "; ".join(dict.fromkeys(self.notes))
        if squeeze:
            return IntegralResult(_scalar(self.value[0]), float(self.error[0]),
                                  bool(self.diverged[0]), self.evaluations, note)
        return IntegralResult(self.value, float(np.max(self.error, initial=0.0)),
                              bool(np.any(self.diverged)), self.evaluations, note)


def _scalar(v):
    v = complex(v)
    return v.real if v.imag == 0 else v


def neumaier_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Compensated sum along ``axis`` in array order (real or complex)."""
    values = np.moveaxis(np.asarray(values), axis, 0)
    if np.iscomplexobj(values):
        return neumaier_sum(values.real) + 1j * neumaier_sum(values.imag)
    total = np.zeros(values.shape[1:])
    comp = np.zeros(values.shape[1:])
    for v in values:
        t = total + v
        big = np.abs(total) >= np.abs(v)
        comp += np.where(big, (total - t) + v, (v - t) + total)
        total = t
    return total + comp


# ---------------------------------------------------------------------------
# engine


def _as_batch(fx: np.ndarray, m: int) -> np.ndarray:
    fx = np.asarray(fx)
    if fx.ndim == 0:
        fx = np.full(m, fx)
    return fx.reshape(m, -1)


def _gk(f, a: np.ndarray, b: np.ndarray):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * NODES[None, :]
    fx = _as_batch(f(x.ravel()), x.size).reshape(len(a), 15, -1)
    bad = ~np.isfinite(fx)
    if bad.any():
        fx = np.where(bad, 0.0, fx)
    k = h[:, None] * np.einsum("pnb,n->pb", fx, W_KRONROD)
    g = h[:, None] * np.einsum("pnb,n->pb", fx, W_GAUSS)
    err = np.abs(k - g)
    err[bad.any(axis=1)] = np.inf
    return k, err, x.size


def _adaptive(f, edges: Sequence[float], q: QuadSpec, rel_tol=None, abs_tol=None) -> _Batch:
    """Adaptive G7K15 over the finite partition ``edges`` (sorted)."""
    rel = q.rel_tol if rel_tol is None else rel_tol
    atol = q.abs_tol if abs_tol is None else abs_tol
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1].copy(), edges[1:].copy()
    keep = b > a
    a, b = a[keep], b[keep]
    if a.size == 0:
        return _Batch(np.zeros(1), np.zeros(1), np.zeros(1, bool), 0)
    val, err, nev = _gk(f, a, b)
    exhausted = False
    while True:
        total = val.sum(axis=0)
        tol = np.maximum(rel * np.abs(total), atol)
        tot_err = err.sum(axis=0)
        open_ = tot_err > tol
        if not open_.any():
            break
        n = len(a)
        need = (err[:, open_] > tol[open_] / n).any(axis=1)
        need[np.argmax(np.max(np.where(np.isinf(err), 1e300, err)[:, open_] / tol[open_], axis=1))] = True
        idx = np.flatnonzero(need)
        room = q.max_subdivisions - n
        if room <= 0:
            exhausted = True
            break
        if idx.size > room:
            worst = np.argsort(-np.max(err[idx][:, open_] / tol[open_], axis=1), kind="stable")
            idx = np.sort(idx[worst[:room]])
        mid = 0.5 * (a[idx] + b[idx])
        na = np.concatenate([a[idx], mid])
        nb = np.concatenate([mid, b[idx]])
        v2, e2, ne = _gk(f, na, nb)
        nev += ne
        keep = np.ones(n, bool)
        keep[idx] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], v2])
        err = np.concatenate([err[keep], e2])
    order = np.argsort(a, kind="stable")
    value = neumaier_sum(val[order])
    error = err.sum(axis=0)
    diverged = np.zeros(value.shape, bool)
    notes = []
    if exhausted:
        unmet = error > np.maximum(rel * np.abs(value), atol)
        diverged |= unmet
        if unmet.any():
            notes.append("subdivision limit reached")
    return _Batch(value, error, diverged, nev, notes)


# ---------------------------------------------------------------------------
# rays and intervals


def _tail(pieces: np.ndarray, partial: np.ndarray, rel: float):
    """Geometric extrapolation of dyadic tail pieces ``pieces[k]`` (k = 0, 1, 2)."""
    mag = np.abs(pieces)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(mag[0] > 0, mag[1] / mag[0], 0.0)
        r2 = np.where(mag[1] > 0, mag[2] / mag[1], 0.0)
        big = (mag > rel * np.abs(partial)).all(axis=0)
        diverged = big & (r1 >= RATIO_FLOOR) & (r2 >= RATIO_FLOOR)
        rho2 = np.where(mag[1] > 0, pieces[2] / np.where(mag[1] > 0, pieces[1], 1), 0.0)
        rho1 = np.where(mag[0] > 0, pieces[1] / np.where(mag[0] > 0, pieces[0], 1), 0.0)
        ok2 = np.abs(rho2) < RATIO_FLOOR
        ok1 = np.abs(rho1) < RATIO_FLOOR
        ext2 = np.where(ok2, pieces[2] * rho2 / np.where(ok2, 1 - rho2, 1), 0.0)
        ext1 = np.where(ok1, pieces[2] * rho1 / np.where(ok1, 1 - rho1, 1), ext2)
    extra = np.where(diverged, 0.0, ext2)
    err = np.where(diverged, np.abs(pieces[2]), np.abs(ext2 - ext1))
    return extra, err, diverged


def _singular_segment(g, b: float, e: float, a: float, c: float):
    """Integrand on ``v in [0, 1]`` for ``[a, c]`` with ``|t - b|^e`` behaviour at ``b`` (= a or c)."""
    length = c - a
    k = 1.0 / (1.0 + e)
    sgn = 1.0 if b == a else -1.0

    def gv(v):
        w = v ** k
        with np.errstate(divide="ignore", invalid="ignore"):
            jac = np.where(v > 0, length * k * v ** (k - 1.0), 0.0)
        t = b + sgn * length * w
        t = np.where(v > 0, t, b + sgn * length * 1e-300)
        return _as_batch(g(t), v.size) * jac[:, None]

    return gv


def _ray_batch(g, q: QuadSpec, breakpoints=(), lower: float = 0.0, upper: float = math.inf,
               rel_tol=None, abs_tol=None, singularities=(), scale=(1.0, 1.0)) -> _Batch:
    """Batched ray integral.

    ``scale = (s_min, s_max)`` is the range of positions where the integrand
    has features besides ``t ~ 1``; the finite window is stretched to
    ``[s_min/C, s_max·C]`` so that the dyadic tails only see the asymptotic regime.
    """
    rel = q.rel_tol if rel_tol is None else rel_tol
    atol = q.abs_tol if abs_tol is None else abs_tol
    if not (0 <= lower < upper):
        raise DomainError(f"invalid ray [{lower}, {upper}]")
    C = q.tail_cutoff
    s_min, s_max = min(1.0, scale[0]), max(1.0, scale[1])
    lo = lower if lower > 0 else s_min / C
    hi = upper if math.isfinite(upper) else max(s_max * C, 2 * lo)
    if lower == 0 and lo >= hi:
        lo = hi / C
    cuts = sorted({lo, hi, *(b for b in breakpoints if lo < b < hi)})
    sing = {}
    for b, e in singularities:
        b, e = float(b), float(e)
        if lo <= b <= hi and e != 0:
            if not e > -1:
                raise DomainError(f"non-integrable endpoint exponent {e} at {b}")
            sing[b] = e
    special = {}
    for b, e in sing.items():
        i = cuts.index(b) if b in cuts else None
        if i is None:
            cuts = sorted(set(cuts) | {b})
            i = cuts.index(b)
        if b < hi:
            right = min(2.0 * b, cuts[i + 1])
            special[(b, right)] = (b, e)
        if b > lo:
            left = max(0.5 * b, cuts[i - 1])
            special[(left, b)] = (b, e)
    cuts = sorted(set(cuts) | {x for seg in special for x in seg})

    if q.ray_substitution == "log":
        def tail_f(u):
            t = np.exp(u)
            return _as_batch(g(t), u.size) * t[:, None]
        tail_edges = np.log
    else:
        def tail_f(t):
            return _as_batch(g(t), t.size)
        tail_edges = np.asarray

    def run(seg_cuts):
        edges = tail_edges(np.asarray(seg_cuts))
        if q.ray_substitution == "log":
            n0 = max(1, int(math.ceil((edges[-1] - edges[0]) / 2.0)))
            grid = np.concatenate([edges, np.linspace(edges[0], edges[-1], n0 + 1)])
        else:
            grid = np.concatenate([edges, np.geomspace(edges[0], edges[-1], 9)])
        return _adaptive(tail_f, np.unique(grid), q, rel, atol)

    out = None
    plain = [cuts[0]]
    for a, c in zip(cuts[:-1], cuts[1:]):
        if (a, c) in special:
            if len(plain) > 1:
                out = run(plain) if out is None else out + run(plain)
            b, e = special[(a, c)]
            part = _adaptive(_singular_segment(g, b, e, a, c), [0.0, 0.5, 1.0], q, rel, atol)
            out = part if out is None else out + part
            plain = [c]
        else:
            plain.append(c)
    if len(plain) > 1:
        out = run(plain) if out is None else out + run(plain)

    for side, on in (("lower", lower == 0), ("upper", not math.isfinite(upper))):
        if on:
            out = out + _tail_batch(tail_f, tail_edges, side, lo, hi, out.value, q, rel, atol)
    return out


def _dyadic_pieces(tail_f, tail_edges, side, start, q, rel, atol):
    pieces, nev = [], 0
    for k in range(TAIL_PIECES):
        if side == "upper":
            e = tail_edges(np.array([start * 2.0 ** k, start * 2.0 ** (k + 1)]))
        else:
            e = tail_edges(np.array([start * 2.0 ** -(k + 1), start * 2.0 ** -k]))
        # pieces are tightened because extrapolation amplifies their error
        pb = _adaptive(tail_f, e, q, rel * 1e-3, atol * 1e-3)
        pieces.append(pb.value)
        nev += pb.evaluations
    return np.array(pieces), nev


def _tail_batch(tail_f, tail_edges, side, lo, hi, partial, q, rel, atol) -> _Batch:
    start = hi if side == "upper" else lo
    pieces, nev = _dyadic_pieces(tail_f, tail_edges, side, start, q, rel, atol)
    extra, terr, div = _tail(pieces, partial + pieces.sum(axis=0), rel)
    if div.any():
        return _Batch(pieces.sum(axis=0) + extra, terr, div, nev,
                      [f"{side} tail does not decay"])
    tail = pieces.sum(axis=0) + extra
    if np.all(np.abs(tail) <= rel * np.abs(partial + tail)):
        return _Batch(tail, terr, div, nev)
    # Slow tail: integrate out to C^2 first so that lower-order terms of the
    # asymptotics have died out before extrapolating.
    C = q.tail_cutoff
    far = start * C if side == "upper" else start / C
    e = tail_edges(np.array(sorted([start, far])))
    n0 = max(1, int(math.ceil(abs(float(e[1] - e[0])) / 2.0)))
    mid = _adaptive(tail_f, np.linspace(e[0], e[1], n0 + 1), q, rel * 1e-2, atol * 1e-3)
    pieces, nev2 = _dyadic_pieces(tail_f, tail_edges, side, far, q, rel, atol)
    extra, terr, div = _tail(pieces, partial + mid.value + pieces.sum(axis=0), rel)
    return _Batch(mid.value + pieces.sum(axis=0) + extra, mid.error + terr, div,
                  nev + nev2 + mid.evaluations,
                  [f"{side} tail does not decay"] if div.any() else [])


def integrate_ray(g: Callable, q: QuadSpec | None = None, breakpoints: Sequence[float] = (),
                  lower: float = 0.0, upper: float = math.inf,
                  singularities: Sequence[tuple] = ()) -> IntegralResult:
    """Integrate ``g`` over ``(lower, upper)`` inside ``(0, inf)``.

    The default log substitution ``t = e^u`` is applied on ``[1/C, C]`` with
    ``C = q.tail_cutoff``; beyond that three dyadic pieces per side either
    certify geometric decay (and are extrapolated) or flag divergence.
    ``singularities`` lists ``(point, exponent)`` pairs where ``g`` behaves like
    ``|t - point|^exponent``; a power substitution removes them locally.
    """
    q = q or QuadSpec()
    out = _ray_batch(g, q, breakpoints, lower, upper, singularities=singularities)
    return out.result(squeeze=out.value.shape[0] == 1)


def integrate_interval(g: Callable, a: float, b: float, q: QuadSpec | None = None,
                       breakpoints: Sequence[float] = ()) -> IntegralResult:
    q = q or QuadSpec()
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integrate_interval needs finite limits")
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    edges = [a, *sorted(x for x in breakpoints if a < x < b), b]
    res = _adaptive(lambda x: _as_batch(g(x), x.size), edges, q)
    return res.scaled(sign).result(squeeze=res.value.shape[0] == 1)


# ---------------------------------------------------------------------------
# weighted line


def _line_batch(h, alpha: float, q: QuadSpec, breakpoints=(), x_max=None,
                rel_tol=None, abs_tol=None) -> _Batch:
    if not alpha > -1:
        raise DomainError(f"weight exponent must exceed -1, got {alpha}")
    a1 = 1.0 + alpha
    top = math.inf if x_max is None else float(x_max)
    total = None
    for sgn in (1.0, -1.0):
        bps = sorted({abs(b) for b in breakpoints if b * sgn > 0})
        inner_top = min(1.0, top)
        ub = [b ** a1 for b in bps if b < inner_top]

        def near(u, sgn=sgn):
            x = sgn * u ** (1.0 / a1)
            return _as_batch(h(x), u.size) / a1

        part = _adaptive(near, [0.0, *ub, inner_top ** a1], q, rel_tol, abs_tol)
        if top > 1:
            def far(x, sgn=sgn):
                return _as_batch(h(sgn * x), x.size) * (x ** alpha)[:, None]
            part = part + _ray_batch(far, q, [b for b in bps if b > 1], 1.0, top,
                                     rel_tol, abs_tol)
        total = part if total is None else total + part
    return total


def integrate_line_weighted(h: Callable, alpha: float, q: QuadSpec | None = None,
                            breakpoints: Sequence[float] = (), x_max: float | None = None
                            ) -> IntegralResult:
    """``∫ h(x) |x|^alpha dx`` over the real line (or ``|x| <= x_max``).

    Near the origin ``x = ±u^(1/(1+alpha))`` absorbs the weight exactly.
    """
    q = q or QuadSpec()
    out = _line_batch(h, alpha, q, breakpoints, x_max)
    return out.result(squeeze=out.value.shape[0] == 1)


# ---------------------------------------------------------------------------
# half-plane


def _theta_rule(lo: float, hi: float, alpha: float, n: int):
    """Nodes and weights for ``∫_lo^hi g(θ) sin(θ)^(alpha-1) dθ``."""
    e_lo = alpha - 1 if lo == 0.0 else 0.0
    e_hi = alpha - 1 if hi == math.pi else 0.0
    x, w = roots_jacobi(n, e_hi, e_lo)
    half = 0.5 * (hi - lo)
    th = lo + half * (1 + x)
    smooth = np.sin(th) ** (alpha - 1)
    if e_lo:
        smooth = smooth / th ** e_lo
    if e_hi:
        smooth = smooth / (math.pi - th) ** e_hi
    w = w * half ** (1 + e_lo + e_hi) * smooth
    return th, w


def integrate_halfplane(F: Callable, alpha: float, region="full", q: QuadSpec | None = None,
                        breakpoints: Sequence[float] = ()) -> IntegralResult:
    """``∬ F(x, y) y^(alpha-1) dx dy`` over the upper half-plane or a sector.

    ``F`` receives broadcastable arrays ``x, y`` and returns their broadcast
    shape. ``region`` is ``"full"`` (iterated: inner x, outer y) or a
    :class:`Sector`, integrated in polar form ``r^alpha sin(θ)^(alpha-1) dr dθ``
    with Gauss-Jacobi rules in θ. ``breakpoints`` apply to the outer variable.
    """
    q = q or QuadSpec()
    if not alpha > 0:
        raise DomainError(f"half-plane weight needs alpha > 0, got {alpha}")
    if isinstance(region, str) and region == "full":
        return _halfplane_full(F, alpha, q, breakpoints)
    if isinstance(region, Sector):
        return _halfplane_sector(F, alpha, region, q, breakpoints)
    raise DomainError(f"unknown region {region!r}")


def _halfplane_full(F, alpha, q, breakpoints):
    inner_rel = q.rel_tol * 0.1
    flags = []

    def outer(y):
        # x = (1+y)*xi keeps the inner x-scale comparable to the height.
        s = 1.0 + y[None, :]
        res = _line_batch(lambda xi: F(xi[:, None] * s, y[None, :]) * s,
                          0.0, q, rel_tol=inner_rel, abs_tol=q.abs_tol * 1e-3)
        if res.diverged.any():
            flags.append("inner integral diverged")
        w = y ** (alpha - 1)
        # second column carries the inner error budget through the outer rule
        return np.stack([res.value * w, res.error * w], axis=1)

    return _outer_result(_ray_batch(outer, q, breakpoints), flags)


def _outer_result(out: _Batch, flags) -> IntegralResult:
    value = _scalar(out.value[0])
    err = float(out.error[0] + abs(out.value[1]) + out.error[1])
    note = "; ".join(dict.fromkeys(out.notes + flags[:1]))
    return IntegralResult(value, err, bool(out.diverged[0]) or bool(flags),
                          out.evaluations, note)


def _halfplane_sector(F, alpha, sec: Sector, q, breakpoints):
    lo, hi = max(sec.a, 0.0), min(sec.b, math.pi)
    if hi <= lo:
        return IntegralResult(0.0, 0.0)
    rules = {}

    def rule(n):
        if n not in rules:
            rules[n] = _theta_rule(lo, hi, alpha, n)
        return rules[n]

    def theta_sum(r, n):
        th, w = rule(n)
        rr = r[:, None]
        return (F(rr * np.cos(th), rr * np.sin(th)) * w).sum(axis=1)

    def outer(r):
        n = 16
        out = theta_sum(r, n)
        err = np.zeros(r.size)
        todo = np.arange(r.size)
        while todo.size and n < MAX_THETA_NODES:
            n *= 2
            cur = theta_sum(r[todo], n)
            diff = np.abs(cur - out[todo])
            out[todo] = cur
            err[todo] = diff
            done = diff <= np.maximum(0.1 * q.rel_tol * np.abs(cur), q.abs_tol * 1e-3)
            todo = todo[~done]
        w = r ** alpha
        return np.stack([out * w, err * w], axis=1)

    lower = 1.0 if sec.truncated else 0.0
    return _outer_result(_ray_batch(outer, q, breakpoints, lower=lower), [])


# ---------------------------------------------------------------------------
# principal value


def principal_value(h: Callable, q: QuadSpec | None = None) -> IntegralResult:
    """``p.v. ∫ h(y)/y dy`` through the symmetric pairing ``∫_0^∞ (h(y) - h(-y))/y dy``."""
    q = q or QuadSpec()

    def paired(y):
        return (_as_batch(h(y), y.size) - _as_batch(h(-y), y.size)) / y[:, None]

    out = _ray_batch(paired, q)
    return out.result(squeeze=out.value.shape[0] == 1)
