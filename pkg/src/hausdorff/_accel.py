"""Hot kernel dispatch: evaluate ``f(scale_j * z_i)`` over whole grids.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementation below is selected. Setting ``HAUSDORFF_PURE_PYTHON=1``
forces the fallback.
"""
from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

from .holo_expr import Const, Dilate, HoloExpr, PowerShift, Product, Scale, Sum, evaluate

OP_CONST, OP_PSHIFT, OP_SUM, OP_PROD, OP_SCALE = range(5)
MAX_STACK = 64

_compiled = None
if os.environ.get("HAUSDORFF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


@lru_cache(maxsize=256)
def compile_program(e: HoloExpr):
    """Flatten ``e`` into a postfix program ``(ops, params, depth)``."""
    ops: list[int] = []
    prm: list[tuple] = []

    def emit(node, lam, depth):
        if isinstance(node, Const):
            ops.append(OP_CONST)
            prm.append((node.c.real, node.c.imag, 0.0, 0.0))
            return depth + 1
        if isinstance(node, PowerShift):
            ops.append(OP_PSHIFT)
            prm.append((node.s.real, node.s.imag, node.c, lam))
            return depth + 1
        if isinstance(node, (Sum, Product)):
            items = node.terms if isinstance(node, Sum) else node.factors
            peak = depth
            d = depth
            for it in items:
                peak = max(peak, emit(it, lam, d))
                d += 1
            ops.append(OP_SUM if isinstance(node, Sum) else OP_PROD)
            prm.append((float(len(items)), 0.0, 0.0, 0.0))
            return max(peak, d)
        if isinstance(node, Scale):
            peak = emit(node.inner, lam, depth)
            ops.append(OP_SCALE)
            prm.append((node.a.real, node.a.imag, 0.0, 0.0))
            return peak
        if isinstance(node, Dilate):
            return emit(node.inner, lam * node.lam, depth)
        raise TypeError(f"unknown expression node {type(node).__name__}")

    depth = emit(e, 1.0, 0)
    return (np.asarray(ops, dtype=np.intc),
            np.ascontiguousarray(np.asarray(prm, dtype=float).reshape(-1, 4)),
            depth)


def dilated_eval_python(e: HoloExpr, z: np.ndarray, scales: np.ndarray) -> np.ndarray:
    return evaluate(e, scales[:, None] * z[None, :])


def dilated_eval(e: HoloExpr, z, scales, backend: str | None = None) -> np.ndarray:
    """Matrix ``out[j, i] = e(scales[j] * z[i])`` for ``Im z >= 0``, ``scales > 0``."""
    z = np.ascontiguousarray(np.asarray(z, dtype=complex).ravel())
    scales = np.ascontiguousarray(np.asarray(scales, dtype=float).ravel())
    backend = backend or BACKEND
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled backend is not available")
        ops, prm, depth = compile_program(e)
        if depth <= MAX_STACK:
            return _compiled.dilated_eval(ops, prm, depth, np.ascontiguousarray(z.real),
                                          np.ascontiguousarray(z.imag), scales)
    return dilated_eval_python(e, z, scales)
