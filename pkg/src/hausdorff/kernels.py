"""Kernel descriptors on (0, ∞), moments, and truncation/tilde transforms."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass


import numpy as np

from .errors import DomainError
from .quadrature import IntegralResult, QuadSpec, integrate_ray

__all__ = [
    "Kernel",
    "Piecewise",
    "CesaroLike",
    "GeneralizedCesaro",
    "SA",
    "GeneralizedStieltjes",
    "Hardy",
    "UserExpr",
    "Truncated",
    "Tilde",
    "SpaceParams",
    "eval_kernel",
    "mellin",
    "moment",
    "signed_moment",
    "log_moment",
    "truncate",
    "tilde",
    "is_nonnegative",
    "kernel_from_json",
    "kernel_to_json",
    "CATALOG",
]

SPACES = ("bergman", "hardy", "dirichlet", "reallp")


@dataclass(frozen=True)
class SpaceParams:
    """Space tag with exponent ``p`` (``math.inf`` allowed for hardy/reallp) and weight ``alpha``."""

    space: str
    p: float = 2.0
    alpha: float = 0.0

    def __post_init__(self):
        space = self.space.lower()
        object.__setattr__(self, "space", space)
        if space not in SPACES:
            raise DomainError(f"unknown space {self.space!r}")
        if space == "dirichlet":
            object.__setattr__(self, "p", 2.0)
            object.__setattr__(self, "alpha", 1.0)
            return
        if not (self.p >= 1):
            raise DomainError(f"p must lie in [1, inf], got {self.p}")
        if space == "bergman":
            if math.isinf(self.p):
                raise DomainError("the Bergman space needs finite p")
            if not self.alpha > 0:
                raise DomainError(f"the Bergman space needs alpha > 0, got {self.alpha}")
        elif not self.alpha > -1:
            raise DomainError(f"alpha must exceed -1, got {self.alpha}")

    @property
    def sigma(self) -> float:
        """Mellin exponent ``(1 + alpha)/p`` of the moment; 0 for ``p = inf`` and Dirichlet."""
        if self.space == "dirichlet" or math.isinf(self.p):
            return 0.0
        return (1.0 + self.alpha) / self.p


# ---------------------------------------------------------------------------
# piecewise power/log expressions


@dataclass(frozen=True)
class Piecewise:
    """Sum over pieces of ``coef * t^power * (log t)^log_power`` on open intervals.

    ``pieces`` is a tuple of ``(lo, hi, terms)`` with ``terms`` a tuple of
    ``(coef, power, log_power)``. Overlapping pieces add up.
    """

    pieces: tuple

    def __post_init__(self):
        norm = []
        for lo, hi, terms in self.pieces:
            lo, hi = float(lo), float(hi)
            if not (0 <= lo < hi):
                raise DomainError(f"invalid piece interval ({lo}, {hi})")
            ts = tuple((float(c), float(pw), int(lp)) for c, pw, lp in terms)
            if any(lp < 0 for _, _, lp in ts):
                raise DomainError("log powers must be non-negative integers")
            norm.append((lo, hi, ts))
        object.__setattr__(self, "pieces", tuple(norm))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for lo, hi, terms in self.pieces:
                inside = (t > lo) & (t < hi)
                if not inside.any():
                    continue
                ti = np.where(inside, t, 1.0)
                lt = np.log(ti)
                acc = np.zeros(t.shape)
                for c, pw, lp in terms:
                    acc = acc + c * ti ** pw * lt ** lp
                out = out + np.where(inside, acc, 0.0)
        return out

    def endpoints(self) -> list:
        pts = set()
        for lo, hi, _ in self.pieces:
            pts.update(x for x in (lo, hi) if 0 < x < math.inf)
        return sorted(pts)

    def support(self) -> tuple:
        if not self.pieces:
            return (1.0, 1.0)
        return (min(p[0] for p in self.pieces), max(p[1] for p in self.pieces))

    def to_list(self) -> list:
        return [{"interval": [lo, _enc(hi)], "terms": [list(t) for t in terms]}
                for lo, hi, terms in self.pieces]

    @classmethod
    def from_list(cls, items) -> "Piecewise":
        pieces = []
        for it in items:
            lo, hi = it["interval"]
            pieces.append((float(lo), _dec(hi), tuple(tuple(t) for t in it["terms"])))
        return cls(tuple(pieces))


def _enc(x: float):
    return "inf" if math.isinf(x) else x


def _dec(x) -> float:
    return math.inf if x is None or x == "inf" else float(x)


# ---------------------------------------------------------------------------
# kernels


class Kernel:
    """Base class: a measurable function on (0, ∞)."""

    def __call__(self, t):
        return eval_kernel(self, t)

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support(self) -> tuple:
        """Interval outside which the kernel vanishes."""
        return (0.0, math.inf)

    def breakpoints(self) -> list:
        """Points in (0, ∞) where the kernel jumps or is singular."""
        return []

    def singularities(self) -> list:
        """``(point, exponent)`` pairs where the kernel behaves like ``|t - point|^exponent``."""
        return []

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class CesaroLike(Kernel):
    """``t^(-nu)`` on ``(1, ∞)``."""

    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"nu must be positive, got {self.nu}")

    def _eval(self, t):
        return np.where(t > 1, t ** -self.nu, 0.0)

    def support(self):
        return (1.0, math.inf)

    def breakpoints(self):
        return [1.0]

    def to_dict(self):
        return {"type": "cesaro_like", "nu": self.nu}


@dataclass(frozen=True)
class GeneralizedCesaro(Kernel):
    """``beta (t-1)^(beta-1) / t^beta`` on ``(1, ∞)``."""

    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    def _eval(self, t):
        b = self.beta
        with np.errstate(divide="ignore", invalid="ignore"):
            val = b * np.abs(t - 1) ** (b - 1) * t ** -b
        return np.where(t > 1, val, 0.0)

    def support(self):
        return (1.0, math.inf)

    def breakpoints(self):
        return [1.0]

    def singularities(self):
        return [] if self.beta == 1 else [(1.0, self.beta - 1.0)]

    def to_dict(self):
        return {"type": "generalized_cesaro", "beta": self.beta}


@dataclass(frozen=True)
class SA(Kernel):
    """``a(1/t)/t`` for a piecewise expression ``a``."""

    a: Piecewise

    def _eval(self, t):
        return self.a(1.0 / t) / t

    def support(self):
        lo, hi = self.a.support()
        return (0.0 if math.isinf(hi) else 1.0 / hi, math.inf if lo == 0 else 1.0 / lo)

    def breakpoints(self):
        return sorted(1.0 / x for x in self.a.endpoints())

    def to_dict(self):
        return {"type": "sa", "a": self.a.to_list()}


@dataclass(frozen=True)
class GeneralizedStieltjes(Kernel):
    """``t^(beta-1) / (1+t)^mu``, the kernel of ``S_a`` with ``a(t) = t^(mu-beta)/(t+1)^mu``."""

    beta: float
    mu: float

    def _eval(self, t):
        return t ** (self.beta - 1) * (1.0 + t) ** -self.mu

    def to_dict(self):
        return {"type": "stieltjes", "beta": self.beta, "mu": self.mu}


@dataclass(frozen=True)
class Hardy(Kernel):
    """``1/t`` on ``(1, ∞)``: the classical averaging operator ``(1/x)∫_0^x f``."""

    def _eval(self, t):
        return np.where(t > 1, 1.0 / t, 0.0)

    def support(self):
        return (1.0, math.inf)

    def breakpoints(self):
        return [1.0]

    def to_dict(self):
        return {"type": "hardy"}


@dataclass(frozen=True)
class UserExpr(Kernel):
    pieces: Piecewise

    def _eval(self, t):
        return self.pieces(t)

    def support(self):
        return self.pieces.support()

    def breakpoints(self):
        return self.pieces.endpoints()

    def to_dict(self):
        return {"type": "user", "pieces": self.pieces.to_list()}


@dataclass(frozen=True)
class Truncated(Kernel):
    """``inner`` restricted to ``(delta, 1/delta)``."""

    inner: Kernel
    delta: float

    def __post_init__(self):
        if not (0 < self.delta < 1):
            raise DomainError(f"truncation delta must lie in (0, 1), got {self.delta}")

    def _eval(self, t):
        d = self.delta
        return np.where((t > d) & (t < 1.0 / d), self.inner._eval(t), 0.0)

    def support(self):
        lo, hi = self.inner.support()
        return (max(lo, self.delta), min(hi, 1.0 / self.delta))

    def breakpoints(self):
        lo, hi = self.support()
        pts = [x for x in self.inner.breakpoints() if lo < x < hi]
        return sorted(set(pts + [x for x in (lo, hi) if 0 < x < math.inf]))

    def singularities(self):
        lo, hi = self.support()
        return [(b, e) for b, e in self.inner.singularities() if lo <= b <= hi]

    def to_dict(self):
        return {"type": "truncate", "delta": self.delta, "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class Tilde(Kernel):
    """``inner(t)/t``."""

    inner: Kernel

    def _eval(self, t):
        return self.inner._eval(t) / t

    def support(self):
        return self.inner.support()

    def breakpoints(self):
        return self.inner.breakpoints()

    def singularities(self):
        return self.inner.singularities()

    def to_dict(self):
        return {"type": "tilde", "inner": self.inner.to_dict()}


def eval_kernel(k: Kernel, t):
    """Kernel value at ``t > 0`` (scalar or array)."""
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("kernels are defined for t > 0 only")
    out = np.asarray(k._eval(arr), dtype=float)
    return float(out) if out.ndim == 0 else out


def truncate(k: Kernel, delta: float) -> Kernel:
    return Truncated(k, delta)


def tilde(k: Kernel) -> Kernel:
    return Tilde(k)


def is_nonnegative(k: Kernel, n: int = 4001) -> bool:
    """Sampling check of ``k >= 0`` on a log grid spanning ``[1e-8, 1e8]``."""
    t = np.geomspace(1e-8, 1e8, n)
    t = np.union1d(t, np.array([b * f for b in k.breakpoints() for f in (1 - 1e-9, 1 + 1e-9)]))
    v = k._eval(t)
    return bool(np.all(v[np.isfinite(v)] >= 0))


# ---------------------------------------------------------------------------
# moments


def _ray(k: Kernel, g, q: QuadSpec) -> IntegralResult:
    lo, hi = k.support()
    return integrate_ray(g, q, breakpoints=k.breakpoints(), lower=lo, upper=hi,
                         singularities=k.singularities())


def mellin(k: Kernel, s, q: QuadSpec | None = None, absolute: bool = False) -> IntegralResult:
    """``∫_0^∞ t^(s-1) φ(t) dt`` (``|φ|`` when ``absolute``); ``s`` may be complex."""
    q = q or QuadSpec()
    s = complex(s)
    if s.imag == 0:
        s = s.real

    def g(t):
        v = k._eval(t)
        return (np.abs(v) if absolute else v) * t ** (s - 1)

    return _ray(k, g, q)


def moment(k: Kernel, sp: SpaceParams, q: QuadSpec | None = None) -> IntegralResult:
    """Absolute moment ``∫ t^((1+α)/p - 1) |φ(t)| dt``; ``diverged`` flags non-integrability."""
    return mellin(k, sp.sigma, q, absolute=True)


def signed_moment(k: Kernel, sp: SpaceParams, q: QuadSpec | None = None) -> IntegralResult:
    return mellin(k, sp.sigma, q, absolute=False)


def log_moment(k: Kernel, q: QuadSpec | None = None) -> tuple:
    """``(∫ |log t| |φ|/t dt, ∫ |φ|/t dt)`` as two results."""
    q = q or QuadSpec()
    lg = _ray(k, lambda t: np.abs(np.log(t)) * np.abs(k._eval(t)) / t, q)
    return lg, mellin(k, 0.0, q, absolute=True)


# ---------------------------------------------------------------------------
# JSON


def kernel_from_json(obj) -> Kernel:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError("kernel descriptor must be an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "cesaro_like":
            return CesaroLike(float(obj["nu"]))
        if kind == "generalized_cesaro":
            return GeneralizedCesaro(float(obj["beta"]))
        if kind == "stieltjes":
            return GeneralizedStieltjes(float(obj["beta"]), float(obj["mu"]))
        if kind == "hardy":
            return Hardy()
        if kind == "truncate":
            return Truncated(kernel_from_json(obj["inner"]), float(obj["delta"]))
        if kind == "tilde":
            return Tilde(kernel_from_json(obj["inner"]))
        if kind == "user":
            return UserExpr(Piecewise.from_list(obj["pieces"]))
        if kind == "sa":
            return SA(Piecewise.from_list(obj["a"]))
    except KeyError as exc:
        raise DomainError(f"kernel {kind!r} is missing field {exc}") from None
    raise DomainError(f"unknown kernel type {kind!r}")


def kernel_to_json(k: Kernel) -> str:
    return json.dumps(k.to_dict(), sort_keys=True)


CATALOG = {
    "cesaro_like": {"nu": "real > 0", "kernel": "t^-nu on (1, inf)"},
    "generalized_cesaro": {"beta": "real > 0", "kernel": "beta (t-1)^(beta-1) t^-beta on (1, inf)"},
    "stieltjes": {"beta": "real", "mu": "real", "kernel": "t^(beta-1) (1+t)^-mu"},
    "hardy": {"kernel": "1/t on (1, inf)"},
    "sa": {"a": "pieces", "kernel": "a(1/t)/t"},
    "user": {"pieces": "[{interval: [lo, hi], terms: [[coef, power, log_power], ...]}]",
             "kernel": "sum of coef t^power (log t)^log_power on each interval"},
    "truncate": {"delta": "real in (0, 1)", "inner": "kernel", "kernel": "inner on (delta, 1/delta)"},
    "tilde": {"inner": "kernel", "kernel": "inner(t)/t"},
}
