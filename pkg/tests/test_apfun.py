import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slrot.apfun import (CoefficientTriple, FrequencyBase, FrequencyModule, TrigPolynomial,
                         certify_positive, constant_triple, evaluate, fourier_coefficient,
                         hull_min, mean_value, module_of, numeric_mean, shift)
from slrot.errors import AmbiguousFrequency, BaseMismatch, PositivityError

SQRT2 = math.sqrt(2.0)
B1 = FrequencyBase((1.0,))
B2 = FrequencyBase((1.0, SQRT2))


def test_base_rejects_nonpositive():
    with pytest.raises(ValueError):
        FrequencyBase((1.0, -2.0))
    with pytest.raises(ValueError):
        FrequencyBase(())


def test_base_warns_on_rational_ratio():
    with pytest.warns(UserWarning):
        FrequencyBase((1.0, 1.5))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        FrequencyBase((1.0, SQRT2))


def test_evaluate_matches_direct_formula():
    f = TrigPolynomial(B2, 0.5, (((1, 0), 1.0, -2.0), ((1, -1), 0.25, 0.75)))
    xs = np.linspace(-3, 7, 41)
    om2 = 1 - SQRT2
    direct = 0.5 + np.cos(xs) - 2 * np.sin(xs) + 0.25 * np.cos(om2 * xs) + 0.75 * np.sin(om2 * xs)
    assert np.allclose(evaluate(f, xs), direct, atol=1e-14)
    assert isinstance(evaluate(f, 0.3), float)
    assert f.scalar_fn()(1.7) == pytest.approx(float(evaluate(f, 1.7)), abs=1e-14)


def test_negative_k_is_canonicalised():
    f = TrigPolynomial(B1, 0.0, (((-2,), 1.0, 1.0),))
    assert f.terms == (((2,), 1.0, -1.0),)
    assert evaluate(f, 0.4) == pytest.approx(math.cos(0.8) - math.sin(0.8))


def test_duplicate_and_bad_terms():
    with pytest.raises(ValueError):
        TrigPolynomial(B1, 0.0, (((1,), 1.0, 0.0), ((-1,), 0.0, 1.0)))
    with pytest.raises(ValueError):
        TrigPolynomial(B1, 0.0, (((0,), 1.0, 0.0),))
    with pytest.raises(ValueError):
        TrigPolynomial(B1, 0.0, (((1, 1), 1.0, 0.0),))


def test_fourier_coefficients_of_cosine():
    f = TrigPolynomial(B1, 0.0, (((1,), 2.0, 0.0),))
    assert fourier_coefficient(f, 1.0) == pytest.approx(1.0)
    assert fourier_coefficient(f, -1.0) == pytest.approx(1.0)
    assert fourier_coefficient(f, 0.5) == 0
    assert mean_value(f) == 0.0


def test_fourier_coefficient_of_sine_and_constant():
    f = TrigPolynomial(B2, 3.0, (((0, 1), 0.0, 1.0),))
    assert fourier_coefficient(f, SQRT2) == pytest.approx(-0.5j)
    assert fourier_coefficient(f, -SQRT2) == pytest.approx(0.5j)
    assert fourier_coefficient(f, 0.0) == 3.0


def test_fourier_coefficient_ambiguous():
    f = TrigPolynomial(B2, 0.0, (((1, 0), 1.0, 0.0), ((0, 1), 1.0, 0.0)))
    with pytest.raises(AmbiguousFrequency):
        fourier_coefficient(f, 1.2, tol=0.5)


def test_fourier_coefficient_against_quadrature():
    f = TrigPolynomial(B2, 0.3, (((1, 0), 0.7, -0.2), ((1, 1), -0.4, 0.9)))
    T = 4000.0
    xs = np.linspace(0, T, 400_001)
    for lam in (1.0, 1 + SQRT2, -(1 + SQRT2)):
        num = np.trapezoid(evaluate(f, xs) * np.exp(-1j * lam * xs), xs) / T
        assert abs(num - fourier_coefficient(f, lam)) < 2e-3


def test_mean_value_against_quadrature():
    f = TrigPolynomial(B2, -1.25, (((1, 0), 3.0, 1.0), ((0, 1), -2.0, 0.5)))
    assert numeric_mean(f, 5000.0) == pytest.approx(mean_value(f), abs=2e-3)


@settings(max_examples=40, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-5, 5), st.floats(-5, 5))
def test_shift_property(t, x, a, b):
    f = TrigPolynomial(B2, 0.5, (((1, 0), a, b), ((1, -2), b, a)))
    assert evaluate(shift(f, t), x) == pytest.approx(evaluate(f, x + t), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_shift_composes(s, t):
    f = TrigPolynomial(B1, 0.0, (((1,), 1.0, 0.5), ((3,), -0.2, 0.1)))
    g1, g2 = shift(shift(f, s), t), shift(f, s + t)
    xs = np.linspace(0, 5, 11)
    assert np.allclose(evaluate(g1, xs), evaluate(g2, xs), atol=1e-10)


def test_shift_preserves_mean_and_amplitudes():
    f = TrigPolynomial(B2, 1.0, (((1, 1), 0.3, 0.4),))
    g = shift(f, 2.7)
    assert mean_value(g) == mean_value(f)
    assert math.hypot(*g.terms[0][1:]) == pytest.approx(0.5)


def test_hull_min_simple():
    f = TrigPolynomial(B1, 2.0, (((1,), -1.0, 0.0),))
    m = hull_min(f)
    assert 0.9 < m <= 1.0


def test_hull_min_torus_is_below_true_min():
    # 3 + cos(phi1) + cos(phi2): true hull minimum 1 at (pi, pi)
    f = TrigPolynomial(B2, 3.0, (((1, 0), 1.0, 0.0), ((0, 1), 1.0, 0.0)))
    m = hull_min(f, 64)
    assert 0.8 < m <= 1.0


def test_hull_min_monotone_in_grid():
    f = TrigPolynomial(B2, 2.2, (((1, 0), 1.0, 0.3), ((1, 1), 0.4, -0.6)))
    bounds = [hull_min(f, g) for g in (16, 32, 64, 128)]
    assert all(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:]))


def test_hull_sees_torus_not_just_the_line():
    # cos x + cos(sqrt2 x) never reaches -2 on the line but does on the torus
    f = TrigPolynomial(B2, 1.9, (((1, 0), 1.0, 0.0), ((0, 1), 1.0, 0.0)))
    with pytest.raises(PositivityError):
        certify_positive(f, "w")


def test_certify_rejects_touching_zero():
    f = TrigPolynomial(B1, 1.0, (((1,), 1.0, 0.0),))
    with pytest.raises(PositivityError) as exc:
        certify_positive(f, "w")
    assert exc.value.section == "w"


def test_module_of_examples(fig1, fig2, free_v):
    m1 = module_of(fig1)
    assert m1.rank == 1 and m1.contains((3,)) and m1.contains((-1,))
    m2 = module_of(fig2)
    assert m2.rank == 2 and m2.contains((1, 1)) and m2.contains((2, -7))
    assert module_of(free_v).is_trivial
    assert module_of(free_v).contains((0,)) and not module_of(free_v).contains((1,))


def test_module_sublattice():
    base = FrequencyBase((1.0, SQRT2))
    m = FrequencyModule(base, frozenset({(2, 0), (1, 1)}))
    assert m.contains((3, 1)) and m.contains((0, 2))
    assert not m.contains((1, 0))
    assert m.value_of((1, 1)) == pytest.approx(1 + SQRT2)


def test_triple_validation():
    r = TrigPolynomial.const(B1, 1.0)
    with pytest.raises(BaseMismatch):
        CoefficientTriple.certified(r, TrigPolynomial.const(B2, 0.0), r)
    with pytest.raises(PositivityError):
        constant_triple(1.0, 0.0, -1.0)


def test_triple_shift_and_frequencies(fig2):
    assert fig2.max_frequency() == pytest.approx(SQRT2)
    assert fig2.min_generator() == 1.0
    s = fig2.shift(1.3)
    assert evaluate(s.q, 0.2) == pytest.approx(evaluate(fig2.q, 1.5))
    assert s.hull_floor_r == fig2.hull_floor_r
