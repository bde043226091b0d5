"""Compare the compiled dilation kernel with the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Each case evaluates
``f(z / t)`` over a grid of points and dilations, the inner loop of every
Hausdorff-operator quadrature, and then a full operator application.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from hausdorff import _accel
from hausdorff.holo_expr import PowerShift, Product, Sum
from hausdorff.kernels import CesaroLike
from hausdorff.operators import hausdorff_batch

CASES = {
    "pshift": PowerShift(1.5, 1.0),
    "sum": Sum((PowerShift(1.0, 1.0), PowerShift(2.0, 0.5))),
    "product": Product((PowerShift(1.0, 1.0), PowerShift(0.5 + 0.25j, 2.0))),
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def run(n_points=1024, n_scales=512, repeat=5, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-10, 10, n_points) + 1j * rng.uniform(1e-3, 10, n_points)
    scales = np.geomspace(1e-6, 1e6, n_scales)
    backends = ["python"] + (["compiled"] if _accel._compiled is not None else [])
    rows = []
    for name, f in CASES.items():
        ref = None
        for b in backends:
            t, out = best_of(lambda: _accel.dilated_eval(f, z, scales, backend=b), repeat)
            ref = out if ref is None else ref
            rows.append((name, b, t, float(np.max(np.abs(out - ref)))))
    pts = z[:256]
    for b in backends:
        saved = _accel.BACKEND
        _accel.BACKEND = b
        try:
            t, _ = best_of(lambda: hausdorff_batch(CesaroLike(2.0), CASES["sum"], pts), 1)
        finally:
            _accel.BACKEND = saved
        rows.append(("operator", b, t, 0.0))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=1024)
    ap.add_argument("--scales", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    print(f"{'case':<10}{'backend':<10}{'seconds':>10}{'max diff':>12}")
    for name, b, t, d in run(a.points, a.scales, a.repeat):
        print(f"{name:<10}{b:<10}{t:>10.4f}{d:>12.2e}")


if __name__ == "__main__":
    main()
