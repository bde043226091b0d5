import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hausdorff import (CesaroLike, Const, DomainError, GeneralizedCesaro, GeneralizedStieltjes,
                       Hardy, HausdorffImage,
                       Piecewise, PowerShift, PreconditionError, SpaceParams, Truncated,
                       UserExpr, dirichlet_norm, evaluate, log_moment)
from hausdorff.analysis import (boundary_compat_residual, commutation_residual,
                                estimate_operator_norm, f_eps, mechanism_residual,
                                muckenhoupt_quotient, phi_eps, rayleigh_quotient,
                                reverse_holder_quotient, sharpness_gap, sign_lemma_constants,
                                tail_moment, verify_sign_lemma)

HARDY2 = SpaceParams("hardy", 2, 0)


class TestFamilies:
    def test_f_eps_value(self):
        eps = 0.125
        assert abs(evaluate(f_eps(2, 1, eps), 1j) - (2j) ** -(1 + eps)) < 1e-15

    @pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
    def test_rescaling(self, eps):
        p, alpha = 2, 1
        s = (1 + alpha) / p
        z = np.array([1j, 0.3 + 2j, -4 + 0.1j])
        lhs = evaluate(phi_eps(p, alpha, eps), z)
        rhs = eps ** -(s + eps) * evaluate(f_eps(p, alpha, eps), z / eps)
        assert np.allclose(lhs, rhs, rtol=1e-13, atol=0)

    def test_rejects_eps(self):
        with pytest.raises(DomainError):
            phi_eps(2, 1, 0.0)


class TestSignLemma:
    @pytest.mark.parametrize("p,alpha,part,sign,eps_pa", [
        (1, 1, "Re", -1, math.pi / 6),
        (1, 3, "Re", +1, math.pi / 12),
        (3, 2, "Im", -1, 0.99),
        (2, 1, "Im", -1, 0.99),
    ])
    def test_constants(self, p, alpha, part, sign, eps_pa):
        c = sign_lemma_constants(p, alpha)
        assert (c.part, c.sign) == (part, sign)
        assert abs(c.eps_pa - eps_pa) < 1e-12

    def test_even_ratio(self):
        assert sign_lemma_constants(1, 1).c_pa == 0.5
        assert sign_lemma_constants(1, 3).k == 1

    def test_fractional(self):
        c = sign_lemma_constants(2, 0.5)  # σ = 0.75
        assert c.part == "Im" and c.sign == -1
        assert abs(c.eps_pa - 0.99 * 1.25) < 1e-12
        lo, hi = 0.75 * (math.pi / 2 - c.eps_pa), (0.75 + c.eps_pa) * math.pi / 2
        assert c.c_pa == min(abs(math.sin(lo)), abs(math.sin(hi)))

    @pytest.mark.parametrize("p,alpha", [(1, 1), (1, 3), (2, 0.5), (3, 2), (2, 1), (1, 0.5)])
    def test_verified(self, p, alpha):
        rep = verify_sign_lemma(p, alpha)
        assert rep.passed and rep.samples == 10000 and not rep.outside
        assert min(rep.min_ratio.values()) >= rep.constants.c_pa * (1 - 1e-9)

    def test_outside_reported(self):
        c = sign_lemma_constants(2, 1)
        rep = verify_sign_lemma(2, 1, [c.eps_pa * 0.5, c.eps_pa * 2])
        assert rep.outside == [c.eps_pa * 2] and len(rep.min_ratio) == 1

    def test_ratio_two_ways(self):
        c = sign_lemma_constants(2, 0.5)
        eps = c.eps_pa / 2
        th = math.pi / 2 - c.eps_pa / 3
        z = 2.0 * cmath.exp(1j * th)
        v = complex(evaluate(phi_eps(2, 0.5, eps), z))
        # argument of (z + εi)^-s is -s·arg(z + εi)
        arg = -(0.75 + eps) * cmath.phase(z + 1j * eps)
        assert abs(abs(v.imag) / abs(v) - abs(math.sin(arg))) < 1e-12
        assert c.sign * v.imag > 0

    def test_rejects(self):
        with pytest.raises(DomainError):
            sign_lemma_constants(math.inf, 1)
        with pytest.raises(DomainError):
            sign_lemma_constants(2, -1)


class TestNormBounds:
    def test_hardy_gc(self):
        b = estimate_operator_norm(GeneralizedCesaro(1), HARDY2)
        assert abs(b.upper - 2) <= 2e-8 and b.signed == b.upper
        assert 1.9 <= b.lower <= b.upper
        assert not b.diverged and b.relative_gap < 1e-3
        assert len(b.rows) == 7 * 4

    def test_truncated_route_alone(self):
        b = estimate_operator_norm(GeneralizedCesaro(1), HARDY2, direct=False)
        assert b.lower_route.startswith("truncated") and b.lower < b.upper

    def test_rayleigh_monotone_in_eps(self):
        rows = [rayleigh_quotient(GeneralizedCesaro(1), HARDY2, e) for e in (0.25, 0.0625, 0.015625)]
        q = [r.quotient for r in rows]
        assert q[0] < q[1] < q[2] < 2

    def test_tail_moment(self):
        # ∫ over (0,δ) ∪ (1/δ,∞) of t^-1/2 · 1/t dt for the kernel 1/t on t > 1
        sp = SpaceParams("hardy", 2, 0)
        tm = tail_moment(GeneralizedCesaro(1), sp, 0.01)
        assert abs(tm.value - 2 * 0.1) < 1e-10

    def test_divergent_evidence(self):
        b = estimate_operator_norm(CesaroLike(1), SpaceParams("bergman", 1, 1),
                                   eps_grid=(0.25, 0.0625, 0.015625))
        assert b.diverged and b.growing and b.upper == math.inf
        q = [r.quotient for r in b.rows]
        assert q[-1] > 10 * q[0]

    def test_csv(self, tmp_path):
        b = estimate_operator_norm(GeneralizedCesaro(1), HARDY2, eps_grid=(0.25,))
        b.to_csv(tmp_path / "b.csv")
        lines = (tmp_path / "b.csv").read_text().splitlines()
        assert lines[0] == "eps,delta,quotient,tail,certified,error" and len(lines) == 5


class TestSharpness:
    def test_hardy(self):
        r = sharpness_gap(GeneralizedCesaro(1), HARDY2)
        assert r.passed and r.relative_gap < 1e-3

    def test_hardy_kernel_on_lines(self):
        r = sharpness_gap(Hardy(), SpaceParams("reallp", 2, 0))
        assert r.passed and abs(r.bounds.upper - 2) < 2e-8

    def test_negative_kernel(self):
        neg = UserExpr(Piecewise(((1.0, 2.0, ((-1.0, 0.0, 0),)),)))
        with pytest.raises(PreconditionError):
            sharpness_gap(neg, HARDY2)


class TestMechanism:
    def test_hardy_decreasing(self):
        r = [mechanism_residual(GeneralizedCesaro(1), HARDY2, 2.0 ** -k, 0.1) for k in (2, 4, 6)]
        assert r[0] > r[1] > r[2]
        assert r[2] < 0.15


class TestCommutation:
    def test_preconditions(self):
        g = lambda x: 1 / (1 + x ** 2)  # noqa: E731
        with pytest.raises(PreconditionError):
            commutation_residual(CesaroLike(2), g, 1, 0)
        with pytest.raises(PreconditionError):
            commutation_residual(CesaroLike(2), g, 2, 1.5)

    def test_small_lattice(self):
        g = lambda x: 1 / (1 + x ** 2)  # noqa: E731
        xs = np.linspace(-5, 5, 21)
        assert commutation_residual(CesaroLike(2), g, 2, 0, xs=xs) < 1e-6

    def test_truncated(self):
        g = lambda x: 1 / (1 + x ** 2)  # noqa: E731
        xs = np.linspace(-5, 5, 21)
        assert commutation_residual(Truncated(CesaroLike(2), 0.1), g, 2, 0.5, xs=xs) < 1e-6


class TestMuckenhoupt:
    def test_unweighted(self):
        r = muckenhoupt_quotient(0.0, 2, (-3.0, 7.0))
        assert r.value == pytest.approx(1.0, rel=1e-14) and not r.diverged

    def test_example(self):
        # (avg x^(1/2))(avg x^(-1/2)) on (0,1) = (2/3)(2)
        assert muckenhoupt_quotient(0.5, 2, (0.0, 1.0)).value == pytest.approx(4 / 3, rel=1e-14)

    def test_divergent(self):
        r = muckenhoupt_quotient(1.5, 2, (-1.0, 1.0))
        assert r.diverged and r.value == math.inf

    def test_bounded_on_random_intervals(self):
        rng = np.random.default_rng(5)
        for alpha, qexp in ((0.5, 2), (-0.5, 2), (1.0, 3)):
            vals = []
            for _ in range(100):
                a, b = np.sort(rng.uniform(-10, 10, 2))
                vals.append(muckenhoupt_quotient(alpha, qexp, (a, b)).value)
            assert 1 - 1e-12 <= min(vals) and max(vals) < 10

    def test_reverse_holder(self):
        # α = 1, r = 2 on (0,1): sqrt(1/3) / (1/2)
        r = reverse_holder_quotient(1.0, 2.0, (0.0, 1.0))
        assert r.value == pytest.approx(2 / math.sqrt(3), rel=1e-14)
        assert reverse_holder_quotient(-0.75, 2.0, (-1.0, 1.0)).diverged

    def test_invalid(self):
        with pytest.raises(DomainError):
            muckenhoupt_quotient(0.5, 1, (0, 1))
        with pytest.raises(DomainError):
            reverse_holder_quotient(0.5, 2, (1, 1))


class TestBoundaryCompat:
    def test_decreasing(self):
        rep = boundary_compat_residual(CesaroLike(2), PowerShift(1, 1), 2, 0)
        assert rep.decreasing and rep.final < 1e-4 * rep.f_norm
        assert rep.f_norm == pytest.approx(math.sqrt(math.pi), rel=1e-9)

    def test_constant_sup(self):
        rep = boundary_compat_residual(CesaroLike(2), Const(1), math.inf, 0)
        assert np.max(rep.residuals) <= 1e-15


class TestDirichletBound:
    @pytest.mark.parametrize("k", [CesaroLike(2), GeneralizedStieltjes(1.5, 2.5)],
                             ids=lambda k: type(k).__name__)
    def test_bound(self, k):
        f = PowerShift(1, 1)
        lhs = dirichlet_norm(HausdorffImage(k, f)).value
        rhs = log_moment(k)[1].value * dirichlet_norm(f).value
        assert lhs <= rhs * (1 + 1e-6)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(-0.9, 2.0), a=st.floats(-10, 10), w=st.floats(0.01, 10))
def test_muckenhoupt_at_least_one(alpha, a, w):
    # Hölder: avg(w)·avg(w^-1) >= 1
    r = muckenhoupt_quotient(alpha, 2, (a, a + w))
    assert r.diverged or r.value >= 1 - 1e-9
