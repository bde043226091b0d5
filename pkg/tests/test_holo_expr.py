import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hausdorff import (Const, Dilate, DomainError, PowerShift, Product, Scale, Sector, Sum,
                       differentiate, dilate, eval_expr, evaluate, in_sector, parse_expr)

RNG = np.random.default_rng(7)
POINTS = RNG.uniform(-3, 3, 50) + 1j * RNG.uniform(0.05, 3, 50)

CATALOG = [
    Const(2 - 1j),
    PowerShift(1, 1),
    PowerShift(2.5, 0.3),
    PowerShift(0.5 + 0.75j, 2.0),
    Sum((PowerShift(1, 1), Const(3))),
    Product((PowerShift(1, 1), PowerShift(0.5, 2))),
    Scale(1j, PowerShift(1.5, 0.5)),
    Dilate(2.0, PowerShift(1, 1)),
    Dilate(0.5, Product((Dilate(3.0, PowerShift(2, 1)), Sum((PowerShift(1, 0.2), Const(1)))))),
]


class TestEvaluate:
    def test_const(self):
        assert eval_expr(Const(1), 1 + 1j) == 1

    def test_pshift_at_i(self):
        assert abs(eval_expr(PowerShift(1, 1), 1j) - (-0.5j)) < 1e-15

    def test_pshift_square(self):
        assert abs(eval_expr(PowerShift(2, 1), 1 + 1j) - (-3 - 4j) / 25) < 1e-15

    def test_rejects_lower_half_plane(self):
        with pytest.raises(DomainError):
            eval_expr(PowerShift(1, 1), 1.0)
        with pytest.raises(DomainError):
            evaluate(PowerShift(1, 1), np.array([1 - 1j]))

    def test_closed_evaluation_on_axis(self):
        x = np.array([-2.0, 0.0, 1.5])
        v = evaluate(PowerShift(1, 1), x + 0j)
        assert np.allclose(v, 1 / (x + 1j), rtol=1e-15)

    def test_vector_matches_scalar(self):
        for e in CATALOG:
            vec = evaluate(e, POINTS)
            sca = np.array([eval_expr(e, z) for z in POINTS])
            assert np.allclose(vec, sca, rtol=1e-12, atol=0)

    def test_principal_branch(self):
        z = 0.3 + 0.7j
        s = 0.5 + 0.75j
        want = cmath.exp(-s * cmath.log(z + 2j))
        assert abs(eval_expr(PowerShift(s, 2.0), z) - want) < 1e-14

    def test_finite_everywhere(self):
        z = np.concatenate([POINTS, [1e-12j, 1e12 + 1e-3j, -1e8 + 1j]])
        for e in CATALOG:
            assert np.all(np.isfinite(evaluate(e, z)))

    def test_operators_build_grammar(self):
        f = PowerShift(1, 1)
        g = 2 * f + 1 - f * f
        z = 0.5 + 0.5j
        a = eval_expr(f, z)
        assert abs(eval_expr(g, z) - (2 * a + 1 - a * a)) < 1e-14

    def test_bad_shift(self):
        with pytest.raises(DomainError):
            PowerShift(1, 0.0)


class TestDifferentiate:
    def test_const(self):
        assert differentiate(Const(3 + 1j)) == Const(0)

    def test_pshift_rule(self):
        assert differentiate(PowerShift(1, 1)) == Scale(-1, PowerShift(2, 1))
        assert abs(eval_expr(differentiate(PowerShift(1, 1)), 1j) - 0.25) < 1e-15

    def test_pshift_finite_difference(self):
        h = 1e-6
        f = PowerShift(1, 1)
        fd = (eval_expr(f, 1j + h) - eval_expr(f, 1j - h)) / (2 * h)
        assert abs(fd - eval_expr(differentiate(f), 1j)) < 1e-8

    def test_dilate_chain_rule(self):
        e = PowerShift(1.5, 0.5)
        lam, z = 3.0, 0.2 + 0.4j
        got = eval_expr(differentiate(Dilate(lam, e)), z)
        assert abs(got - lam * eval_expr(differentiate(e), lam * z)) < 1e-13

    @pytest.mark.parametrize("e", CATALOG, ids=lambda e: type(e).__name__)
    def test_central_differences(self, e):
        d = differentiate(e)
        for z in POINTS:
            h = z.imag * 1e-5
            fd = (eval_expr(e, z + h) - eval_expr(e, z - h)) / (2 * h)
            ex = eval_expr(d, z)
            assert abs(fd - ex) <= 1e-6 * max(abs(ex), 1.0)


class TestDilate:
    def test_identity(self):
        e = PowerShift(2, 1)
        assert np.array_equal(evaluate(dilate(e, 1), POINTS), evaluate(e, POINTS))

    def test_value(self):
        assert abs(eval_expr(dilate(PowerShift(1, 1), 2), 1j) - (-1j / 3)) < 1e-15

    def test_composition(self):
        e = Product((PowerShift(1, 1), PowerShift(0.5, 2)))
        grid = RNG.uniform(-4, 4, 100) + 1j * RNG.uniform(0.01, 4, 100)
        a = evaluate(dilate(dilate(e, 2), 3), grid)
        b = evaluate(dilate(e, 6), grid)
        c = evaluate(Dilate(2, Dilate(3, e)), grid)
        assert np.allclose(a, b, rtol=1e-14) and np.allclose(b, c, rtol=1e-14)

    def test_exact_law(self):
        e = PowerShift(0.5 + 0.25j, 1.5)
        assert np.allclose(evaluate(dilate(e, 0.3), POINTS), evaluate(e, 0.3 * POINTS), rtol=1e-15)

    def test_bad_lambda(self):
        with pytest.raises(DomainError):
            dilate(PowerShift(1, 1), 0.0)


class TestSector:
    def test_examples(self):
        assert in_sector(Sector(0, math.pi), 1 + 1j)
        s = Sector(math.pi / 2 - 0.1, math.pi / 2, truncated=True)
        assert not in_sector(s, 0.5j)
        assert in_sector(s, 2 * cmath.exp(1j * (math.pi / 2 - 0.05)))

    def test_open_boundary(self):
        s = Sector(0, math.pi / 2)
        assert not in_sector(s, 1j) and not in_sector(s, 1.0) and not in_sector(s, 0)

    def test_invalid(self):
        with pytest.raises(DomainError):
            Sector(1.0, 0.5)


class TestPolarDecomposition:
    @pytest.mark.parametrize("p,alpha,eps", [(2, 1, 0.1), (1, 1, 0.01), (3, 2, 0.5)])
    def test_modulus_and_phase(self, p, alpha, eps):
        s = (1 + alpha) / p + eps
        v = evaluate(PowerShift(s, eps), POINTS)
        w = POINTS + 1j * eps
        mod = np.abs(w) ** (-s)
        assert np.allclose(np.abs(v), mod, rtol=1e-12)
        rebuilt = mod * (np.cos(s * np.angle(w)) - 1j * np.sin(s * np.angle(w)))
        assert np.max(np.abs(rebuilt - v) / np.abs(v)) <= 1e-12


class TestText:
    @pytest.mark.parametrize("e", CATALOG, ids=lambda e: type(e).__name__)
    def test_roundtrip(self, e):
        assert parse_expr(e.to_text()) == e

    def test_grammar(self):
        e = parse_expr("sum(pshift(1,0,1), scale(2,0,const(1,0)))")
        assert abs(eval_expr(e, 1j) - (-0.5j + 2)) < 1e-15

    def test_parse_error(self):
        with pytest.raises(DomainError):
            parse_expr("pshift(1,0")


finite = st.floats(-5, 5, allow_nan=False)
upper = st.builds(complex, finite, st.floats(0.01, 5))


@settings(max_examples=60, deadline=None)
@given(s=st.floats(0.1, 4), c=st.floats(0.05, 5), lam=st.floats(0.01, 100), z=upper)
def test_dilation_property(s, c, lam, z):
    e = PowerShift(s, c)
    assert abs(eval_expr(dilate(e, lam), z) - eval_expr(e, lam * z)) <= 1e-12 * abs(eval_expr(e, lam * z))


@settings(max_examples=60, deadline=None)
@given(s=st.floats(0.1, 4), c=st.floats(0.05, 5), z=upper)
def test_derivative_property(s, c, z):
    e = Product((PowerShift(s, c), Sum((PowerShift(1, 1), Const(1)))))
    h = z.imag * 1e-5
    fd = (eval_expr(e, z + h) - eval_expr(e, z - h)) / (2 * h)
    ex = eval_expr(differentiate(e), z)
    assert abs(fd - ex) <= 1e-6 * max(abs(ex), 1.0)
