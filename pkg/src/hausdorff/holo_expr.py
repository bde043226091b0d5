"""Closed expression grammar for holomorphic functions on the upper half-plane.

Every node is continuous on the closed half-plane ``Im z >= 0``: the only
singular building block is ``(z + c i)^(-s)`` with ``c > 0``, whose base stays
in the open upper half-plane, so the principal logarithm never meets its cut.
Dilations and derivatives stay inside the grammar, which keeps the inner
integrand ``f(z/t)`` of a Hausdorff operator exact.
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "HoloExpr",
    "Const",
    "PowerShift",
    "Sum",
    "Product",
    "Scale",
    "Dilate",
    "Sector",
    "eval_expr",
    "evaluate",
    "differentiate",
    "dilate",
    "in_sector",
    "parse_expr",
]


class HoloExpr:
    """Base class of the grammar. Instances are immutable."""

    def __call__(self, z):
        return eval_expr(self, z)

    def derivative(self) -> "HoloExpr":
        return differentiate(self)

    def dilate(self, lam: float) -> "HoloExpr":
        return dilate(self, lam)

    def to_text(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_text()

    def __add__(self, other):
        return Sum((self, _coerce(other)))

    def __radd__(self, other):
        return Sum((_coerce(other), self))

    def __mul__(self, other):
        if isinstance(other, HoloExpr):
            return Product((self, other))
        return Scale(complex(other), self)

    def __rmul__(self, other):
        return Scale(complex(other), self)

    def __neg__(self):
        return Scale(-1.0, self)

    def __sub__(self, other):
        return Sum((self, -_coerce(other)))


def _coerce(value) -> HoloExpr:
    if isinstance(value, HoloExpr):
        return value
    return Const(complex(value))


@dataclass(frozen=True, eq=True)
class Const(HoloExpr):
    c: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))

    def to_text(self) -> str:
        return f"const({_num(self.c.real)},{_num(self.c.imag)})"


@dataclass(frozen=True, eq=True)
class PowerShift(HoloExpr):
    """``z -> (z + c i)^(-s)`` on the principal branch, ``c > 0``."""

    s: complex
    c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        if not self.c > 0:
            raise DomainError(f"PowerShift needs a positive shift, got c={self.c}")
        object.__setattr__(self, "c", float(self.c))

    def to_text(self) -> str:
        return f"pshift({_num(self.s.real)},{_num(self.s.imag)},{_num(self.c)})"


@dataclass(frozen=True, eq=True)
class Sum(HoloExpr):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(_coerce(t) for t in self.terms))

    def to_text(self) -> str:
        return "sum(" + ",".join(t.to_text() for t in self.terms) + ")"


@dataclass(frozen=True, eq=True)
class Product(HoloExpr):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(_coerce(t) for t in self.factors))

    def to_text(self) -> str:
        return "prod(" + ",".join(t.to_text() for t in self.factors) + ")"


@dataclass(frozen=True, eq=True)
class Scale(HoloExpr):
    a: complex
    inner: HoloExpr

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))

    def to_text(self) -> str:
        return f"scale({_num(self.a.real)},{_num(self.a.imag)},{self.inner.to_text()})"


@dataclass(frozen=True, eq=True)
class Dilate(HoloExpr):
    """``z -> inner(lam * z)``."""

    lam: float
    inner: HoloExpr

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"dilation factor must be positive, got {self.lam}")
        object.__setattr__(self, "lam", float(self.lam))

    def to_text(self) -> str:
        return f"dilate({_num(self.lam)},{self.inner.to_text()})"


def _num(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: HoloExpr, z, *, closed: bool = True):
    """Vectorised evaluation on arrays of points.

    With ``closed=True`` (the default) points on the real axis are accepted and
    receive the continuous extension of ``e``.
    """
    z = np.asarray(z, dtype=complex)
    bad = z.imag < 0 if closed else z.imag <= 0
    if np.any(bad):
        raise DomainError("evaluation point outside the upper half-plane")
    return _eval(e, z, 1.0)


def _eval(e: HoloExpr, z: np.ndarray, lam: float):
    if isinstance(e, Const):
        return np.full(z.shape, e.c, dtype=complex)
    if isinstance(e, PowerShift):
        w = lam * z + 1j * e.c
        if e.s.imag == 0.0:
            s = e.s.real
            return np.abs(w) ** (-s) * np.exp(-1j * s * np.angle(w))
        return np.exp(-e.s * np.log(w))
    if isinstance(e, Sum):
        out = np.zeros(z.shape, dtype=complex)
        for t in e.terms:
            out = out + _eval(t, z, lam)
        return out
    if isinstance(e, Product):
        out = np.ones(z.shape, dtype=complex)
        for t in e.factors:
            out = out * _eval(t, z, lam)
        return out
    if isinstance(e, Scale):
        return e.a * _eval(e.inner, z, lam)
    if isinstance(e, Dilate):
        return _eval(e.inner, z, lam * e.lam)
    raise TypeError(f"unknown expression node {type(e).__name__}")


def eval_expr(e: HoloExpr, z):
    """Evaluate ``e`` at ``z`` with ``Im z > 0`` (scalar or array)."""
    if np.ndim(z) == 0:
        z = complex(z)
        if not z.imag > 0:
            raise DomainError(f"point {z} is not in the upper half-plane")
        return complex(_eval_scalar(e, z))
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("evaluation point outside the upper half-plane")
    return _eval(e, z, 1.0)


def _eval_scalar(e: HoloExpr, z: complex) -> complex:
    if isinstance(e, Const):
        return e.c
    if isinstance(e, PowerShift):
        return cmath.exp(-e.s * cmath.log(z + 1j * e.c))
    if isinstance(e, Sum):
        return sum((_eval_scalar(t, z) for t in e.terms), 0j)
    if isinstance(e, Product):
        out = 1 + 0j
        for t in e.factors:
            out *= _eval_scalar(t, z)
        return out
    if isinstance(e, Scale):
        return e.a * _eval_scalar(e.inner, z)
    if isinstance(e, Dilate):
        return _eval_scalar(e.inner, e.lam * z)
    raise TypeError(f"unknown expression node {type(e).__name__}")


# ---------------------------------------------------------------------------
# symbolic operations


def _is_zero(e: HoloExpr) -> bool:
    return isinstance(e, Const) and e.c == 0


def _sum(terms: Sequence[HoloExpr]) -> HoloExpr:
    terms = [t for t in terms if not _is_zero(t)]
    if not terms:
        return Const(0)
    if len(terms) == 1:
        return terms[0]
    return Sum(tuple(terms))


def _scale(a: complex, e: HoloExpr) -> HoloExpr:
    if a == 0 or _is_zero(e):
        return Const(0)
    if a == 1:
        return e
    if isinstance(e, Scale):
        return _scale(a * e.a, e.inner)
    if isinstance(e, Const):
        return Const(a * e.c)
    return Scale(a, e)


def differentiate(e: HoloExpr) -> HoloExpr:
    """Exact complex derivative, built structurally."""
    if isinstance(e, Const):
        return Const(0)
    if isinstance(e, PowerShift):
        return _scale(-e.s, PowerShift(e.s + 1, e.c))
    if isinstance(e, Sum):
        return _sum([differentiate(t) for t in e.terms])
    if isinstance(e, Product):
        fs = e.factors
        terms = []
        for i, fi in enumerate(fs):
            di = differentiate(fi)
            if _is_zero(di):
                continue
            others = fs[:i] + (di,) + fs[i + 1:]
            terms.append(Product(others))
        return _sum(terms)
    if isinstance(e, Scale):
        return _scale(e.a, differentiate(e.inner))
    if isinstance(e, Dilate):
        inner = differentiate(e.inner)
        if _is_zero(inner):
            return Const(0)
        return _scale(e.lam, Dilate(e.lam, inner))
    raise TypeError(f"unknown expression node {type(e).__name__}")


def dilate(e: HoloExpr, lam: float) -> HoloExpr:
    """Return the expression ``z -> e(lam * z)``."""
    if not lam > 0:
        raise DomainError(f"dilation factor must be positive, got {lam}")
    if lam == 1:
        return e
    if isinstance(e, Dilate):
        return Dilate(lam * e.lam, e.inner)
    return Dilate(lam, e)


# ---------------------------------------------------------------------------
# sectors


@dataclass(frozen=True)
class Sector:
    """Open angular region ``a < arg z < b``, optionally cut to ``|z| >= 1``."""

    a: float
    b: float
    truncated: bool = False

    def __post_init__(self):
        if not (-math.pi <= self.a < self.b <= math.pi):
            raise DomainError(f"invalid sector angles a={self.a}, b={self.b}")

    def contains(self, z) -> bool:
        return in_sector(self, z)


def in_sector(sec: Sector, z) -> bool:
    z = complex(z)
    if z == 0:
        return False
    th = cmath.phase(z)
    if not (sec.a < th < sec.b):
        return False
    return not sec.truncated or abs(z) >= 1


# ---------------------------------------------------------------------------
# textual form

_TOKEN = re.compile(r"\s*(?:([A-Za-z_]+)|([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf|nan)|(.))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        pos = m.end()
        word, num, sym = m.groups()
        if word is not None and num is None:
            out.append(("name", word))
        elif num is not None:
            out.append(("num", float(num)))
        elif sym is not None and not sym.isspace():
            out.append(("sym", sym))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            raise DomainError(f"expected {value or kind} at token {self.i}, got {tok[1]!r}")
        self.i += 1
        return tok[1]

    def number(self) -> float:
        tok = self.peek()
        if tok[0] == "num":
            self.i += 1
            return tok[1]
        raise DomainError(f"expected a number at token {self.i}, got {tok[1]!r}")

    def expr(self) -> HoloExpr:
        name = self.take("name").lower()
        self.take("sym", "(")
        if name == "const":
            re_, im_ = self.number(), self._comma_number()
            node = Const(complex(re_, im_))
        elif name == "pshift":
            s_re, s_im, c = self.number(), self._comma_number(), self._comma_number()
            node = PowerShift(complex(s_re, s_im), c)
        elif name in ("sum", "prod"):
            items = [self.expr()]
            while self.peek() == ("sym", ","):
                self.i += 1
                items.append(self.expr())
            node = Sum(tuple(items)) if name == "sum" else Product(tuple(items))
        elif name == "scale":
            re_, im_ = self.number(), self._comma_number()
            self.take("sym", ",")
            node = Scale(complex(re_, im_), self.expr())
        elif name == "dilate":
            lam = self.number()
            self.take("sym", ",")
            node = Dilate(lam, self.expr())
        else:
            raise DomainError(f"unknown constructor {name!r}")
        self.take("sym", ")")
        return node

    def _comma_number(self) -> float:
        self.take("sym", ",")
        return self.number()


def parse_expr(text: str) -> HoloExpr:
    """Parse the textual form, e.g. ``scale(-1,0,pshift(1,0,1))``."""
    p = _Parser(text)
    node = p.expr()
    if p.i != len(p.toks):
        raise DomainError(f"trailing input after expression: {text!r}")
    return node
