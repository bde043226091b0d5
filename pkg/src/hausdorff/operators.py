"""Hausdorff operators (complex and real), Hilbert transform, derivative identity."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._accel import dilated_eval
from .errors import DomainError
from .holo_expr import HoloExpr, differentiate
from .kernels import Kernel, Tilde
from .quadrature import IntegralResult, QuadSpec, _ray_batch

__all__ = [
    "HausdorffImage",
    "hausdorff_batch",
    "hausdorff_real_batch",
    "apply_complex",
    "apply_real",
    "hilbert_transform",
    "hilbert_pv",
    "hilbert_lattice",
    "derivative_identity",
    "derivative_identity_residual",
]

CHUNK = 1024
CAUCHY_NODES = 32


@dataclass
class BatchValues:
    values: np.ndarray
    errors: np.ndarray
    diverged: np.ndarray


def _kernel_ray(k: Kernel, g, q: QuadSpec, extra_breaks=(), scale=(1.0, 1.0)):
    lo, hi = k.support()
    return _ray_batch(g, q, list(k.breakpoints()) + list(extra_breaks), lo, hi,
                      singularities=k.singularities(), scale=scale)


def _scale_range(r: np.ndarray) -> tuple:
    """Feature positions ``t ~ |z|`` of ``f(z/t)`` for a chunk, ignoring ``z = 0``."""
    r = r[r > 0]
    if r.size == 0:
        return (1.0, 1.0)
    return (float(r.min()), float(r.max()))


def hausdorff_batch(k: Kernel, f: HoloExpr, z, q: QuadSpec | None = None) -> BatchValues:
    """``∫ f(z/t) φ(t)/t dt`` at every point of ``z`` (``Im z >= 0``)."""
    q = q or QuadSpec()
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    if np.any(z.imag < 0):
        raise DomainError("Hausdorff operator evaluated below the real axis")
    vals = np.empty(z.size, complex)
    errs = np.empty(z.size)
    div = np.empty(z.size, bool)
    # chunks of similar |z| share a ray window that covers both t ~ 1 and t ~ |z|
    order = np.argsort(np.abs(z), kind="stable")
    for s in range(0, z.size, CHUNK):
        sel = order[s:s + CHUNK]
        zc = z[sel]

        def g(t, zc=zc):
            return dilated_eval(f, zc, 1.0 / t) * (k._eval(t) / t)[:, None]

        res = _kernel_ray(k, g, q, scale=_scale_range(np.abs(zc)))
        vals[sel] = res.value
        errs[sel] = res.error
        div[sel] = res.diverged
    return BatchValues(vals.reshape(shape), errs.reshape(shape), div.reshape(shape))


def hausdorff_real_batch(k: Kernel, g: Callable, x, q: QuadSpec | None = None,
                         g_breakpoints: Sequence[float] = ()) -> BatchValues:
    """``∫ g(x/t) φ(t)/t dt`` for real ``x``.

    ``g_breakpoints`` are jump points ``b`` of ``g``; they become ``t = x/b``
    and force a per-point integration. At ``x = 0`` the value is
    ``g(0) ∫ φ(t)/t dt``.
    """
    q = q or QuadSpec()
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    vals = np.empty(x.size, dtype=complex)
    errs = np.empty(x.size)
    div = np.empty(x.size, bool)
    zero = x == 0
    if zero.any():
        res = _kernel_ray(k, lambda t: k._eval(t) / t, q)
        g0 = complex(np.asarray(g(np.array([0.0])))[0])
        vals[zero] = g0 * res.value[0]
        errs[zero] = abs(g0) * res.error[0]
        div[zero] = res.diverged[0]
    idx = np.flatnonzero(~zero)
    idx = idx[np.argsort(np.abs(x[idx]), kind="stable")]
    groups = [idx[i:i + 1] for i in range(idx.size)] if g_breakpoints else \
        [idx[i:i + CHUNK] for i in range(0, idx.size, CHUNK)]
    for sel in groups:
        xc = x[sel]
        breaks = [float(xc[0] / b) for b in g_breakpoints if b != 0 and xc[0] / b > 0] \
            if g_breakpoints else []

        def h(t, xc=xc):
            arg = xc[None, :] / t[:, None]
            return np.asarray(g(arg)) * (k._eval(t) / t)[:, None]

        res = _kernel_ray(k, h, q, breaks, scale=_scale_range(np.abs(xc)))
        vals[sel] = res.value
        errs[sel] = res.error
        div[sel] = res.diverged
    if np.all(vals.imag == 0):
        vals = vals.real
    return BatchValues(vals.reshape(shape), errs.reshape(shape), div.reshape(shape))


class HausdorffImage:
    """The function ``z ↦ (ℋ_φ f)(z)`` on the closed upper half-plane.

    Values are computed lazily by quadrature; the worst relative quadrature
    error and any divergence seen so far are tracked on the instance.
    """

    closed = True  # grammar inputs extend continuously to the real axis

    def __init__(self, k: Kernel, f: HoloExpr, q: QuadSpec | None = None):
        self.kernel = k
        self.f = f
        self.q = q or QuadSpec()
        self.max_rel_error = 0.0
        self.diverged = False

    def values(self, z) -> np.ndarray:
        res = hausdorff_batch(self.kernel, self.f, z, self.q)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(res.values != 0, res.errors / np.abs(res.values), 0.0)
        self.max_rel_error = max(self.max_rel_error, float(np.max(rel, initial=0.0)))
        self.diverged |= bool(res.diverged.any())
        return res.values

    def derivative(self) -> "HausdorffImage":
        """``(ℋ_φ f)'`` represented as ``ℋ_{φ̃}(f')``."""
        return HausdorffImage(Tilde(self.kernel), differentiate(self.f), self.q)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(z.imag <= 0):
            raise DomainError("evaluation point outside the upper half-plane")
        v = self.values(z)
        return complex(v) if v.ndim == 0 else v


def _single(res: BatchValues) -> IntegralResult:
    v = complex(res.values.ravel()[0])
    return IntegralResult(v.real if v.imag == 0 else v, float(res.errors.ravel()[0]),
                          bool(res.diverged.ravel()[0]))


def apply_complex(k: Kernel, f: HoloExpr, z: complex, q: QuadSpec | None = None
                  ) -> IntegralResult:
    """``(ℋ_φ f)(z) = ∫_0^∞ f(z/t) φ(t)/t dt`` for ``Im z > 0``."""
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"point {z} is not in the upper half-plane")
    return _single(hausdorff_batch(k, f, np.array([z]), q))


def apply_real(k: Kernel, g: Callable, x: float, q: QuadSpec | None = None,
               g_breakpoints: Sequence[float] = ()) -> IntegralResult:
    """``(𝓗_φ g)(x) = ∫_0^∞ g(x/t) φ(t)/t dt`` for real ``x``."""
    return _single(hausdorff_real_batch(k, g, np.array([float(x)]), q, g_breakpoints))


# ---------------------------------------------------------------------------
# Hilbert transform


def hilbert_pv(g: Callable, xs, q: QuadSpec | None = None) -> BatchValues:
    """``(1/π) p.v. ∫ g(x - y)/y dy`` through the symmetric pairing, per abscissa."""
    q = q or QuadSpec()
    xs = np.asarray(xs, dtype=float)
    shape = xs.shape
    xs = xs.ravel()
    vals, errs, div = [], [], []
    for s in range(0, xs.size, CHUNK):
        xc = xs[s:s + CHUNK]

        def paired(y, xc=xc):
            yy = y[:, None]
            return (np.asarray(g(xc[None, :] - yy)) - np.asarray(g(xc[None, :] + yy))) / yy

        res = _ray_batch(paired, q)
        vals.append(res.value)
        errs.append(res.error)
        div.append(res.diverged)
    v = np.concatenate(vals) / math.pi
    return BatchValues(v.reshape(shape), (np.concatenate(errs) / math.pi).reshape(shape),
                       np.concatenate(div).reshape(shape))


def hilbert_lattice(g: Callable, xs, h: float = 0.1, half_width: float = 1e4) -> np.ndarray:
    """Odd-offset lattice rule ``(2/π) Σ_{m odd} g(x - m h)/m`` truncated at ``|m h| <= half_width``."""
    xs = np.asarray(xs, dtype=float)
    shape = xs.shape
    xs = xs.ravel()
    m = np.arange(1, int(half_width / h) + 1, 2, dtype=float)
    out = np.empty(xs.size)
    block = max(1, 2_000_000 // m.size)
    for s in range(0, xs.size, block):
        xc = xs[s:s + block, None]
        diff = np.asarray(g(xc - m * h)) - np.asarray(g(xc + m * h))
        # pair ±m and sum from the smallest terms up
        out[s:s + block] = (diff / m)[:, ::-1].sum(axis=1)
    return (2.0 / math.pi * out).reshape(shape)


def hilbert_transform(g: Callable, xs, q: QuadSpec | None = None, method: str = "pv"):
    """Hilbert transform values at ``xs``; ``method`` is ``"pv"`` or ``"lattice"``."""
    if method == "pv":
        return hilbert_pv(g, xs, q).values
    if method == "lattice":
        return hilbert_lattice(g, xs)
    raise DomainError(f"unknown Hilbert method {method!r}")


# ---------------------------------------------------------------------------
# derivative identity


def derivative_identity(k: Kernel, f: HoloExpr, z: complex, q: QuadSpec | None = None,
                        nodes: int = CAUCHY_NODES) -> tuple:
    """Both sides of ``(ℋ_φ f)' = ℋ_{φ̃}(f')`` at ``z``.

    The left side differentiates the quadrature values of ``ℋ_φ f`` with the
    Cauchy integral on the circle of radius ``Im z / 2`` (trapezoid rule,
    ``nodes`` points), which avoids the cancellation of finite differences.
    """
    q = q or QuadSpec()
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"point {z} is not in the upper half-plane")
    r = 0.5 * z.imag
    w = np.exp(2j * math.pi * np.arange(nodes) / nodes)
    ring = hausdorff_batch(k, f, z + r * w, q)
    lhs = complex(np.mean(ring.values / w) / r)
    rhs = complex(hausdorff_batch(Tilde(k), differentiate(f), np.array([z]), q).values[0])
    return lhs, rhs


def derivative_identity_residual(k: Kernel, f: HoloExpr, z: complex,
                                 q: QuadSpec | None = None) -> float:
    lhs, rhs = derivative_identity(k, f, z, q)
    return abs(lhs - rhs)
