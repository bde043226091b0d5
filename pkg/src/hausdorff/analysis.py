"""Experiment drivers: test families, sign constants, norm bounds, diagnostics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .holo_expr import HoloExpr, PowerShift, evaluate
from .kernels import (Kernel, SpaceParams, Truncated, is_nonnegative, moment, signed_moment)
from .operators import (HausdorffImage, hausdorff_batch, hausdorff_real_batch, hilbert_pv)
from .quadrature import IntegralResult, QuadSpec, _line_batch, _ray_batch
from .spaces import _lattice_norm, _root, bergman_norm, dirichlet_norm, values_of

__all__ = [
    "phi_eps",
    "f_eps",
    "SignLemmaConstants",
    "SignLemmaReport",
    "sign_lemma_constants",
    "verify_sign_lemma",
    "NormBounds",
    "space_norm",
    "tail_moment",
    "rayleigh_quotient",
    "estimate_operator_norm",
    "SharpnessReport",
    "sharpness_gap",
    "mechanism_residual",
    "commutation_residual",
    "MuckenhouptResult",
    "muckenhoupt_quotient",
    "reverse_holder_quotient",
    "CompatReport",
    "boundary_compat_residual",
    "DEFAULT_EPS_GRID",
    "DEFAULT_DELTA_GRID",
]

DEFAULT_EPS_GRID = tuple(2.0 ** -k for k in range(4, 11))
DEFAULT_DELTA_GRID = (1e-1, 1e-2, 1e-3)
SIGN_RETREAT = 0.99


def _sigma(p: float, alpha: float) -> float:
    return (1.0 + alpha) / p


# ---------------------------------------------------------------------------
# test families


def phi_eps(p: float, alpha: float, eps: float) -> HoloExpr:
    """``(z + εi)^(-((1+α)/p + ε))``."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    return PowerShift(_sigma(p, alpha) + eps, eps)


def f_eps(p: float, alpha: float, eps: float) -> HoloExpr:
    """``(z + i)^(-((1+α)/p + ε))``, the rescaled member ``ε^(σ+ε) Φ_ε(εz)``."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    return PowerShift(_sigma(p, alpha) + eps, 1.0)


# ---------------------------------------------------------------------------
# sign lemma


@dataclass(frozen=True)
class SignLemmaConstants:
    part: str  # "Re" or "Im"
    sign: int  # +1 or -1
    eps_pa: float
    c_pa: float
    case_tag: str
    k: int


def sign_lemma_constants(p: float, alpha: float) -> SignLemmaConstants:
    """Sector half-width, sign and lower ratio for ``Φ_ε`` near the imaginary axis.

    On ``π/2 - eps_pa < arg z < π/2`` and for ``ε < eps_pa`` the designated
    part of ``Φ_ε`` has the fixed sign and ``|part| >= c_pa |Φ_ε|``.
    """
    if not (p >= 1 and math.isfinite(p)):
        raise DomainError(f"p must lie in [1, inf), got {p}")
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    s = _sigma(p, alpha)
    half = s / 2.0
    if abs(half - round(half)) < 1e-12 and round(half) >= 1:
        n = int(round(half))
        eps = math.pi / (3.0 * s)
        if n % 2 == 0:
            return SignLemmaConstants("Re", +1, eps, 0.5, f"=4k (k={n // 2})", n // 2)
        return SignLemmaConstants("Re", -1, eps, 0.5, f"=4k+2 (k={n // 2})", n // 2)
    k = int(math.floor(s / 4.0))
    if s < 4 * k + 2:
        sup = min(math.pi / 2 - 2 * k * math.pi / s, 4 * k + 2 - s, math.pi / 2)
        sign, tag = -1, f"(4k,4k+2) (k={k})"
    else:
        sup = min(math.pi / 2 - (2 * k + 1) * math.pi / s, 4 * k + 4 - s)
        sign, tag = +1, f"(4k+2,4k+4) (k={k})"
    eps = SIGN_RETREAT * sup
    lo, hi = s * (math.pi / 2 - eps), (s + eps) * math.pi / 2
    c = min(abs(math.sin(lo)), abs(math.sin(hi)))
    return SignLemmaConstants("Im", sign, eps, c, tag, k)


@dataclass
class SignLemmaReport:
    constants: SignLemmaConstants
    samples: int
    min_ratio: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    outside: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _sector_samples(width: float, grid_size: int) -> np.ndarray:
    n_r = max(2, int(round(math.sqrt(grid_size))))
    n_t = max(1, grid_size // n_r)
    r = np.geomspace(1e-2, 1e2, n_r)
    th = math.pi / 2 - width + width * (np.arange(n_t) + 0.5) / n_t
    return (r[:, None] * np.exp(1j * th)[None, :]).ravel()


def verify_sign_lemma(p: float, alpha: float, eps_list: Sequence[float] | None = None,
                      grid_size: int = 10_000) -> SignLemmaReport:
    """Sample the sector and check the sign and ratio bound for each ``ε``."""
    c = sign_lemma_constants(p, alpha)
    if eps_list is None:
        eps_list = [c.eps_pa * f for f in (0.9, 0.5, 0.1, 0.01)]
    z = _sector_samples(c.eps_pa, grid_size)
    rep = SignLemmaReport(c, z.size)
    for eps in eps_list:
        if not eps < c.eps_pa:
            rep.outside.append(eps)
            continue
        v = evaluate(phi_eps(p, alpha, eps), z)
        part = v.real if c.part == "Re" else v.imag
        ratio = np.abs(part) / np.abs(v)
        bad = (c.sign * part <= 0) | (ratio < c.c_pa * (1 - 1e-9))
        rep.min_ratio[eps] = float(ratio.min())
        rep.violations.extend((eps, complex(zz)) for zz in z[bad])
    return rep


# ---------------------------------------------------------------------------
# norms and Rayleigh quotients


class _Boundary:
    """Boundary values of a half-plane function as a function of real ``x``."""

    def __init__(self, f):
        self.f = f

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return values_of(self.f, (x + 0j).ravel()).reshape(x.shape)


def _line_norm(f, p: float, alpha: float, q: QuadSpec, y: float = 0.0) -> IntegralResult:
    res = _line_batch(lambda x: np.abs(values_of(f, x + 1j * y)) ** p, alpha, q)
    return _root(res.result(squeeze=True), p)


def space_norm(f, sp: SpaceParams, q: QuadSpec | None = None) -> IntegralResult:
    """Norm of ``f`` for the Rayleigh quotients.

    Hardy norms use the boundary line ``y = 0``: for the ``f_ε`` family the
    line norms decrease in ``y``, so this is the supremum, and for images it
    is a lower bound of the supremum. Real ``L^p`` norms act on boundary values.
    """
    q = q or QuadSpec()
    if sp.space == "bergman":
        res = bergman_norm(f, sp.p, sp.alpha, q)
    elif sp.space == "dirichlet":
        res = dirichlet_norm(f, q)
    elif sp.space == "hardy":
        if math.isinf(sp.p):
            raise DomainError("Rayleigh quotients need finite p")
        res = _line_norm(f, sp.p, sp.alpha, q)
    else:
        if math.isinf(sp.p):
            raise DomainError("Rayleigh quotients need finite p")
        res = _line_norm(f, sp.p, sp.alpha, q)
    extra = getattr(f, "max_rel_error", 0.0) * float(res.value)
    res.error_estimate += extra
    res.diverged = res.diverged or bool(getattr(f, "diverged", False))
    return res


class _RealImage:
    """``𝓗_φ(f*)`` on the real line, extended to accept complex points with Im z = 0."""

    closed = True

    def __init__(self, k: Kernel, f, q: QuadSpec):
        self.kernel, self.f, self.q = k, f, q
        self.max_rel_error = 0.0
        self.diverged = False

    def values(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(z.imag != 0):
            raise DomainError("real images are only defined on the real axis")
        res = hausdorff_real_batch(self.kernel, _Boundary(self.f), z.real, self.q)
        vals = np.asarray(res.values, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(vals != 0, res.errors / np.abs(vals), 0.0)
        self.max_rel_error = max(self.max_rel_error, float(np.max(rel, initial=0.0)))
        self.diverged |= bool(res.diverged.any())
        return vals


def _image(k: Kernel, f: HoloExpr, sp: SpaceParams, q: QuadSpec):
    if sp.space == "reallp":
        return _RealImage(k, f, q)
    return HausdorffImage(k, f, q)


def tail_moment(k: Kernel, sp: SpaceParams, delta: float, q: QuadSpec | None = None
                ) -> IntegralResult:
    """``∫ over (0,δ) ∪ (1/δ,∞) of t^((1+α)/p - 1) |φ(t)| dt``."""
    q = q or QuadSpec()
    s = sp.sigma
    lo, hi = k.support()

    def g(t):
        return np.abs(k._eval(t)) * t ** (s - 1)

    total, err, div, notes = 0.0, 0.0, False, []
    for a, b in ((lo, min(hi, delta)), (max(lo, 1.0 / delta), hi)):
        if a < b:
            r = _ray_batch(g, q, k.breakpoints(), a, b, singularities=k.singularities())
            total += float(r.value[0].real)
            err += float(r.error[0])
            div |= bool(r.diverged[0])
            notes += r.notes
    return IntegralResult(total, err, div, 0, "; ".join(dict.fromkeys(notes)))


@dataclass
class RayleighRow:
    eps: float
    delta: float | None  # None for the untruncated kernel
    quotient: float
    tail: float
    certified: float
    error: float


def rayleigh_quotient(k: Kernel, sp: SpaceParams, eps: float, delta: float | None = None,
                      q: QuadSpec | None = None, f_norm: IntegralResult | None = None
                      ) -> RayleighRow:
    """``‖ℋ_{φ_δ} f_ε‖/‖f_ε‖`` and its certified form after subtracting the truncation tail."""
    q = q or QuadSpec()
    f = f_eps(sp.p, sp.alpha, eps)
    if f_norm is None:
        f_norm = space_norm(f, sp, q)
    kk = k if delta is None else Truncated(k, delta)
    num = space_norm(_image(kk, f, sp, q), sp, q)
    quot = float(num.value) / float(f_norm.value)
    lo = (float(num.value) - num.error_estimate) / (float(f_norm.value) + f_norm.error_estimate)
    err = quot - lo
    tail = 0.0
    if delta is not None:
        tm = tail_moment(k, sp, delta, q)
        tail = float(tm.value) + tm.error_estimate
    return RayleighRow(eps, delta, quot, tail, lo - tail, err)


@dataclass
class NormBounds:
    lower: float
    upper: float
    signed: float
    eps_used: list
    gap: float
    lower_route: str = ""
    upper_error: float = 0.0
    diverged: bool = False
    growing: bool = False
    rows: list = field(default_factory=list)
    note: str = ""

    @property
    def relative_gap(self) -> float:
        return self.gap / self.upper if self.upper else math.inf

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps", "delta", "quotient", "tail", "certified", "error"])
            for r in self.rows:
                w.writerow([repr(r.eps), "" if r.delta is None else repr(r.delta),
                            repr(r.quotient), repr(r.tail), repr(r.certified), repr(r.error)])


def estimate_operator_norm(k: Kernel, sp: SpaceParams,
                           eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
                           q: QuadSpec | None = None,
                           delta_grid: Sequence[float] = DEFAULT_DELTA_GRID,
                           direct: bool = True) -> NormBounds:
    """Two-sided operator-norm bounds.

    ``upper`` is the absolute moment. ``lower`` is the best certified Rayleigh
    quotient over the ``f_ε`` family: truncated kernels minus the moment of the
    discarded tails, and (with ``direct``) the untruncated kernel itself. When
    the moment diverges, ``δ = ε`` quotients are reported as growth evidence.
    """
    q = q or QuadSpec()
    up = moment(k, sp, q)
    sg = signed_moment(k, sp, q)
    eps_grid = sorted(eps_grid, reverse=True)
    if up.diverged:
        rows = []
        for eps in eps_grid:
            rows.append(rayleigh_quotient(k, sp, eps, eps, q))
        quots = [r.quotient for r in rows]
        growing = all(b > a for a, b in zip(quots, quots[1:]))
        return NormBounds(math.nan, math.inf, math.nan, list(eps_grid), math.inf,
                          "divergent moment", up.error_estimate, True, growing, rows,
                          up.note or "moment diverges")
    rows = []
    for eps in eps_grid:
        fn = space_norm(f_eps(sp.p, sp.alpha, eps), sp, q)
        for d in delta_grid:
            rows.append(rayleigh_quotient(k, sp, eps, d, q, fn))
        if direct:
            rows.append(rayleigh_quotient(k, sp, eps, None, q, fn))
    best = max(rows, key=lambda r: r.certified)
    route = "untruncated kernel" if best.delta is None else f"truncated delta={best.delta:g}"
    lower = best.certified
    upper = float(up.value)
    return NormBounds(lower, upper, float(sg.value), list(eps_grid), upper - lower,
                      route, up.error_estimate, False, False, rows)


@dataclass
class SharpnessReport:
    bounds: NormBounds
    relative_gap: float
    tolerance: float
    passed: bool
    reason: str


def sharpness_gap(k: Kernel, sp: SpaceParams, q: QuadSpec | None = None,
                  eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
                  delta_grid: Sequence[float] = DEFAULT_DELTA_GRID,
                  tolerance: float = 0.05) -> SharpnessReport:
    """Relative gap ``(upper - lower)/upper`` for a nonnegative kernel."""
    if not is_nonnegative(k):
        raise PreconditionError("sharpness needs a nonnegative kernel")
    b = estimate_operator_norm(k, sp, eps_grid, q, delta_grid)
    if b.diverged:
        reason = ("unbounded: moment diverges; quotients grow along the eps grid"
                  if b.growing else "moment diverges; quotients not monotone")
        return SharpnessReport(b, math.inf, tolerance, False, reason)
    rel = b.relative_gap
    ok = rel <= tolerance and b.lower <= b.upper * (1 + 1e-6)
    return SharpnessReport(b, rel, tolerance, ok, f"gap/upper = {rel:.4g} ({b.lower_route})")


class _Difference:
    closed = True

    def __init__(self, a, b, c):
        self.a, self.b, self.c = a, b, c
        self.max_rel_error = 0.0
        self.diverged = False

    def values(self, z):
        return values_of(self.a, z) - self.c * values_of(self.b, z)


def mechanism_residual(k: Kernel, sp: SpaceParams, eps: float, delta: float,
                       q: QuadSpec | None = None) -> float:
    """``‖ℋ_{φ_δ} f_ε - m_δ f_ε‖/‖f_ε‖`` with ``m_δ`` the signed moment of ``φ_δ``."""
    q = q or QuadSpec()
    kd = Truncated(k, delta)
    f = f_eps(sp.p, sp.alpha, eps)
    m = float(signed_moment(kd, sp, q).value)
    diff = _Difference(_image(kd, f, sp, q), f, m)
    return float(space_norm(diff, sp, q).value) / float(space_norm(f, sp, q).value)


# ---------------------------------------------------------------------------
# Hilbert commutation


def commutation_residual(k: Kernel, g: Callable, p: float, alpha: float,
                         q: QuadSpec | None = None, xs=None) -> float:
    """``‖H(𝓗_φ g) - 𝓗_φ(H g)‖ / ‖g‖`` in ``L^p_{|x|^α}`` over a lattice."""
    if not (1 < p < math.inf):
        raise PreconditionError(f"commutation needs 1 < p < inf, got {p}")
    if not (-1 < alpha < p - 1):
        raise PreconditionError(f"alpha = {alpha} lies outside the window (-1, p-1)")
    q = q or QuadSpec(rel_tol=1e-8)
    xs = np.linspace(-20.0, 20.0, 401) if xs is None else np.asarray(xs, dtype=float)

    def hg(x):
        return hausdorff_real_batch(k, g, x, q).values

    left = hilbert_pv(hg, xs, q).values

    def Hg(x):
        return hilbert_pv(g, x, q).values

    right = hausdorff_real_batch(k, Hg, xs, q).values
    num = _lattice_norm(left - right, xs, p, alpha)
    den = _lattice_norm(g(xs), xs, p, alpha)
    return num / den


# ---------------------------------------------------------------------------
# Muckenhoupt


@dataclass
class MuckenhouptResult:
    value: float
    diverged: bool
    note: str = ""


def _power_integral(beta: float, a: float, b: float) -> float:
    """``∫_a^b |x|^beta dx`` (``inf`` when it diverges at 0)."""
    if beta <= -1 and a <= 0 <= b:
        return math.inf
    b1 = beta + 1.0

    def prim(u):
        if b1 == 0:
            return math.copysign(math.log(abs(u)), u) if u != 0 else 0.0
        return math.copysign(abs(u) ** b1, u) / b1

    if b1 == 0:
        return abs(math.log(abs(b)) - math.log(abs(a)))
    return prim(b) - prim(a)


def muckenhoupt_quotient(alpha: float, qexp: float, interval: tuple) -> MuckenhouptResult:
    """``avg_I |x|^α · (avg_I |x|^(-α/(q-1)))^(q-1)`` from closed-form monomial integrals."""
    a, b = map(float, interval)
    if not b > a:
        raise DomainError("degenerate interval")
    if not qexp > 1:
        raise DomainError(f"the A_q exponent must exceed 1, got {qexp}")
    length = b - a
    first = _power_integral(alpha, a, b)
    dual = _power_integral(-alpha / (qexp - 1.0), a, b)
    if math.isinf(first) or math.isinf(dual):
        which = "weight" if math.isinf(first) else "dual weight"
        return MuckenhouptResult(math.inf, True, f"{which} not integrable at 0")
    return MuckenhouptResult((first / length) * (dual / length) ** (qexp - 1.0), False)


def reverse_holder_quotient(alpha: float, r: float, interval: tuple) -> MuckenhouptResult:
    """``(avg_I |x|^(αr))^(1/r) / avg_I |x|^α`` for a user-chosen exponent ``r > 1``."""
    a, b = map(float, interval)
    if not b > a:
        raise DomainError("degenerate interval")
    if not r > 1:
        raise DomainError(f"the reverse Hölder exponent must exceed 1, got {r}")
    length = b - a
    top = _power_integral(alpha * r, a, b)
    bottom = _power_integral(alpha, a, b)
    if math.isinf(top) or math.isinf(bottom):
        return MuckenhouptResult(math.inf, True, "power not integrable at 0")
    return MuckenhouptResult((top / length) ** (1.0 / r) / (bottom / length), False)


# ---------------------------------------------------------------------------
# boundary compatibility


@dataclass
class CompatReport:
    y_grid: np.ndarray
    residuals: np.ndarray
    decreasing: bool
    final: float
    f_norm: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y", "residual"])
            for y, r in zip(self.y_grid, self.residuals):
                w.writerow([repr(float(y)), repr(float(r))])


def boundary_compat_residual(k: Kernel, f: HoloExpr, p: float, alpha: float,
                             y_grid: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
                             q: QuadSpec | None = None) -> CompatReport:
    """``‖(ℋ_φ f)(·+iy) - 𝓗_φ(f*)‖`` in ``L^p_{|x|^α}`` for each height ``y``.

    The complex image runs through the compiled dilation kernel at height ``y``;
    the real image integrates the boundary function ``f*`` separately.
    """
    q = q or QuadSpec()
    ys = np.sort(np.asarray(y_grid, dtype=float))[::-1]
    trace = _Boundary(f)
    if math.isinf(p):
        xs = np.concatenate([-np.geomspace(1e-4, 1e4, 81)[::-1], [0.0],
                             np.geomspace(1e-4, 1e4, 81)])
        real = np.asarray(hausdorff_real_batch(k, trace, xs, q).values, dtype=complex)
        res = np.array([np.max(np.abs(hausdorff_batch(k, f, xs + 1j * y, q).values - real))
                        for y in ys])
        fn = float(np.max(np.abs(values_of(f, xs + 0j))))
    else:
        def h(x):
            real = np.asarray(hausdorff_real_batch(k, trace, x, q).values, dtype=complex)
            z = x[:, None] + 1j * ys[None, :]
            cplx = hausdorff_batch(k, f, z.ravel(), q).values.reshape(z.shape)
            return np.abs(cplx - real[:, None]) ** p

        out = _line_batch(h, alpha, q)
        res = np.maximum(out.value.real, 0.0) ** (1.0 / p)
        fn = float(_line_norm(f, p, alpha, q).value)
    dec = bool(np.all(np.diff(res) < 0))
    return CompatReport(ys, res, dec, float(res[-1]), fn)
