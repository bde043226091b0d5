"""Acceptance criteria, one test per criterion. Tolerances are pinned below."""
import math
import time

import numpy as np

from hausdorff import (CesaroLike, GeneralizedCesaro, GeneralizedStieltjes, Hardy, PowerShift,
                       Scale, SpaceParams, bergman_norm, derivative_identity, dirichlet_norm,
                       hardy_norm, log_moment, moment)
from hausdorff.analysis import (_image, boundary_compat_residual, commutation_residual, f_eps,
                                muckenhoupt_quotient, phi_eps, sharpness_gap, sign_lemma_constants,
                                space_norm, verify_sign_lemma)

SQPI = math.sqrt(math.pi)

NORM_TOL = 1e-6
MOMENT_TOL = 1e-8
UPPER_SLACK = 1e-6
SHARP_TOL = 0.05
DERIV_TOL = 1e-7
COMPAT_TOL = 1e-4
COMMUTE_TOL = 1e-3
BAND = 4.0
EPS_GRID = tuple(2.0 ** -k for k in range(4, 11))


def rel(a, b):
    return abs(a - b) / abs(b)


def test_closed_form_norms(criterion):
    t0 = time.perf_counter()
    errs = [rel(bergman_norm(PowerShift(2, 1), 2, 1).value, SQPI / 2),
            rel(hardy_norm(PowerShift(1, 1), 2, 0).value, SQPI),
            rel(dirichlet_norm(Scale(-1, PowerShift(1, 1))).value, SQPI / 2)]
    ok = max(errs) <= NORM_TOL
    assert criterion(1, "closed-form norms", ok,
                     f"max rel error {max(errs):.2e} <= {NORM_TOL:g} "
                     f"({time.perf_counter() - t0:.1f} s)")


def test_moment_oracles(criterion):
    lg, m = log_moment(CesaroLike(2))
    errs = [rel(moment(CesaroLike(2), SpaceParams("bergman", 2, 1)).value, 1.0),
            rel(moment(GeneralizedCesaro(1), SpaceParams("hardy", 2, 0)).value, 2.0),
            rel(lg.value, 0.25), rel(m.value, 0.5)]
    ok = max(errs) <= MOMENT_TOL
    assert criterion(2, "moment oracles", ok, f"max rel error {max(errs):.2e} <= {MOMENT_TOL:g}")


UPPER_TRIPLES = [
    (CesaroLike(2), PowerShift(2, 1), SpaceParams("bergman", 2, 1)),
    (GeneralizedStieltjes(0.5, 1.5), PowerShift(2, 1), SpaceParams("bergman", 2, 1)),
    (GeneralizedCesaro(1), PowerShift(1, 1), SpaceParams("hardy", 2, 0)),
    (Hardy(), PowerShift(1.5, 1), SpaceParams("hardy", 2, 0.5)),
    (CesaroLike(3), PowerShift(1, 1), SpaceParams("reallp", 2, 0.5)),
    (CesaroLike(2), PowerShift(1, 1), SpaceParams("dirichlet", 2, 1)),
]


def test_upper_bound(criterion):
    t0 = time.perf_counter()
    worst, ok = -math.inf, True
    for k, f, sp in UPPER_TRIPLES:
        m = moment(k, sp)
        fn = space_norm(f, sp)
        img = space_norm(_image(k, f, sp, None), sp)
        bound = m.value * fn.value * (1 + UPPER_SLACK) + 2 * img.error_estimate
        ok &= img.value <= bound and not m.diverged
        worst = max(worst, img.value / (m.value * fn.value))
    assert criterion(3, "upper bound", ok,
                     f"{len(UPPER_TRIPLES)} triples, max |Hf|/(moment |f|) = {worst:.6f} "
                     f"({time.perf_counter() - t0:.1f} s)")


def test_sharpness(criterion):
    t0 = time.perf_counter()
    reps = [sharpness_gap(GeneralizedCesaro(1), SpaceParams("hardy", 2, 0), eps_grid=EPS_GRID,
                          tolerance=SHARP_TOL),
            sharpness_gap(CesaroLike(2), SpaceParams("bergman", 2, 1), eps_grid=EPS_GRID,
                          tolerance=SHARP_TOL)]
    ok = all(r.passed for r in reps)
    gaps = ", ".join(f"{r.relative_gap:.2e}" for r in reps)
    assert criterion(4, "sharpness", ok, f"gap/upper = {gaps} <= {SHARP_TOL:g} "
                     f"({time.perf_counter() - t0:.0f} s)")


def test_derivative_identity(criterion):
    rng = np.random.default_rng(2024)
    z = rng.uniform(-3, 3, 10) + 1j * rng.uniform(0.2, 3, 10)
    pairs = [(CesaroLike(2), PowerShift(1, 1)), (GeneralizedCesaro(0.5), PowerShift(1.5, 1)),
             (GeneralizedStieltjes(0.5, 1.5), PowerShift(2, 1))]
    worst = max(abs(a - b) / abs(b) for k, f in pairs
                for a, b in (derivative_identity(k, f, zz) for zz in z))
    ok = worst <= DERIV_TOL
    assert criterion(5, "derivative identity", ok,
                     f"max rel residual {worst:.2e} <= {DERIV_TOL:g} over 3 pairs x 10 points")


def test_boundary_compatibility(criterion):
    t0 = time.perf_counter()
    rep = boundary_compat_residual(CesaroLike(2), PowerShift(1, 1), 2, 0)
    ok = rep.decreasing and rep.final <= COMPAT_TOL * rep.f_norm
    seq = ", ".join(f"{r:.2e}" for r in rep.residuals)
    assert criterion(6, "boundary compatibility", ok,
                     f"residuals {seq}; final/|f| = {rep.final / rep.f_norm:.2e} <= {COMPAT_TOL:g} "
                     f"({time.perf_counter() - t0:.1f} s)")


def test_hilbert_commutation(criterion):
    t0 = time.perf_counter()
    g = lambda x: 1 / (1 + np.asarray(x) ** 2)  # noqa: E731
    res = [commutation_residual(CesaroLike(2), g, 2, a) for a in (0.0, 0.5)]
    ok = max(res) <= COMMUTE_TOL
    assert criterion(7, "Hilbert commutation", ok,
                     f"residuals {res[0]:.2e}, {res[1]:.2e} <= {COMMUTE_TOL:g} "
                     f"({time.perf_counter() - t0:.1f} s)")


def test_sign_lemma(criterion):
    pairs = [(2, 1), (1, 1), (1, 3), (2, 0.5), (3, 2)]
    reps = [verify_sign_lemma(p, a) for p, a in pairs]
    viol = sum(len(r.violations) for r in reps)
    c11, c13 = sign_lemma_constants(1, 1), sign_lemma_constants(1, 3)
    exact = (abs(c11.eps_pa - math.pi / 6) < 1e-15 and abs(c13.eps_pa - math.pi / 12) < 1e-15
             and c11.c_pa == 0.5 and c13.c_pa == 0.5)
    ok = viol == 0 and exact and all(r.samples == 10_000 for r in reps)
    assert criterion(8, "sign lemma", ok,
                     f"{viol} violations over 5 pairs x 10^4 samples; eps(1,1)=pi/6, "
                     f"eps(1,3)=pi/12, C=1/2 exact: {exact}")


def test_asymptotic_band(criterion):
    comp_phi = [bergman_norm(phi_eps(2, 1, e), 2, 1).value * e ** (0.5 + e) for e in EPS_GRID]
    comp_f = [bergman_norm(f_eps(2, 1, e), 2, 1).value * e ** 0.5 for e in EPS_GRID]
    ratios = [max(v) / min(v) for v in (comp_phi, comp_f)]
    ok = max(ratios) <= BAND
    assert criterion(9, "asymptotic band", ok,
                     f"max/min = {ratios[0]:.4f} (Phi_eps), {ratios[1]:.4f} (f_eps) <= {BAND:g}")


def test_muckenhoupt(criterion):
    rng = np.random.default_rng(7)
    a = rng.uniform(-5, 5, 100)
    b = a + rng.uniform(0.01, 5, 100)
    vals = [muckenhoupt_quotient(0.5, 2, I) for I in zip(a, b)]
    finite = all(not r.diverged and math.isfinite(r.value) for r in vals)
    exact = abs(muckenhoupt_quotient(0.5, 2, (0.0, 1.0)).value - 4 / 3) < 1e-14
    touching = [(0.0, 1.0), (-1.0, 0.0), (-0.5, 2.0), (-3.0, 3.0)]
    flagged = all(muckenhoupt_quotient(1.0, 2, I).diverged for I in touching)
    ok = finite and exact and flagged
    assert criterion(10, "Muckenhoupt window", ok,
                     f"alpha=0.5 finite on 100 intervals (max {max(r.value for r in vals):.4f}), "
                     f"4/3 on (0,1): {exact}; alpha=1 flagged on {len(touching)} intervals at 0")


def test_divergence_honesty(criterion):
    sp = SpaceParams("bergman", 1, 1)
    m = moment(CesaroLike(1), sp)
    rep = sharpness_gap(CesaroLike(1), sp, eps_grid=(0.25, 0.0625, 0.015625))
    b = rep.bounds
    ok = m.diverged and b.diverged and b.growing and not rep.passed and math.isinf(b.upper)
    quots = ", ".join(f"{r.quotient:.3g}" for r in b.rows)
    assert criterion(11, "divergence honesty", ok,
                     f"moment diverged={m.diverged}; quotients grow: {quots}")
