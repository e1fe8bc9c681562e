import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diamag.fields import (FIELD_PRESETS, POTENTIAL_PRESETS, ProfileError, constant_field,
                           coulomb_potential, dominates, eval_field, exponential_field,
                           fact4_field, field_from_config, gauge_a2, gaussian_field,
                           oscillator_potential, piecewise_linear_field, poincare_flux,
                           poincare_vector_potential, potential_below, potential_from_config,
                           sine_field, zero_potential)

finite = st.floats(-8.0, 8.0, allow_nan=False)


def test_constant_gauge_and_flux():
    f = constant_field(2.0)
    assert gauge_a2(f, 1.5) == pytest.approx(3.0, abs=1e-14)
    assert poincare_flux(f, 3.0) == pytest.approx(9.0, abs=1e-14)
    a = poincare_vector_potential(f, (0.4, -1.0))
    # b (-x2, x1) / 2
    assert np.allclose(a, [1.0, 0.4], atol=1e-14)


def test_fact4_antiderivative():
    f = fact4_field(1.0, 1.0)
    assert gauge_a2(f, 3.0) == pytest.approx(3.0 + 9.0, rel=1e-14)
    assert f.bounds == (1.0, math.inf)


def test_sine_antiderivative_oracle():
    f = sine_field()
    # 2x + 1 - cos x at x = pi / 2
    assert gauge_a2(f, math.pi / 2) == pytest.approx(math.pi + 1.0, rel=1e-14)
    assert f.bounds == (1.0, 3.0)


def test_gaussian_flux_closed_form():
    f = gaussian_field(2.0)
    # int_0^1 s 2 e^{-s^2} ds = 1 - e^{-1}
    assert poincare_flux(f, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-13)


def test_exponential_flux_matches_quadrature():
    from scipy.integrate import quad
    f = exponential_field(1.5, 0.7)
    ref = quad(lambda s: s * 1.5 * math.exp(-s / 0.7), 0, 2.3)[0]
    assert poincare_flux(f, 2.3) == pytest.approx(ref, rel=1e-12)


def test_piecewise_linear_integrals_exact():
    f = piecewise_linear_field([-1.0, 0.0, 2.0], [1.0, 3.0, 1.0])
    # trapezoids: int_0^2 = 4, int_{-1}^0 = 2, constant 1 beyond the ends
    assert gauge_a2(f, 2.0) == pytest.approx(4.0, abs=1e-13)
    assert gauge_a2(f, -1.0) == pytest.approx(-2.0, abs=1e-13)
    assert gauge_a2(f, 3.0) == pytest.approx(5.0, abs=1e-13)


def test_numerical_antiderivative_without_closed_form():
    f = sine_field()
    g = f.__class__("x1", f.b, name="nameless")
    xs = np.array([-4.0, -0.3, 0.0, 1.7, 5.5])
    assert np.allclose(gauge_a2(g, xs), gauge_a2(f, xs), atol=1e-9)


def test_radial_rejects_negative_radius():
    with pytest.raises(ProfileError):
        gaussian_field(1.0)(-0.5)
    with pytest.raises(ProfileError):
        gauge_a2(gaussian_field(1.0), 1.0)


def test_eval_field_accepts_points_and_scalars():
    f = gaussian_field(1.0)
    assert eval_field(f, (3.0, 4.0)) == pytest.approx(math.exp(-25.0))
    assert eval_field(sine_field(), (0.0, 100.0)) == pytest.approx(2.0)
    assert eval_field(f, 0.0) == pytest.approx(1.0)


def test_domination():
    grid = np.linspace(-5, 5, 101)
    assert dominates(sine_field(), constant_field(3.0), grid)
    res = dominates(constant_field(3.5), sine_field(), grid)
    assert not res and res.margin < 0
    assert dominates(constant_field(1.0), fact4_field(1.0, 1.0), grid)
    with pytest.raises(ProfileError):
        dominates(gaussian_field(1.0), sine_field(), grid)


def test_potential_ordering():
    grid = np.linspace(-5, 5, 101)
    assert potential_below(zero_potential(), oscillator_potential(1.0, "x1"), grid)
    assert not potential_below(oscillator_potential(1.0, "x1"), zero_potential(), grid)
    assert coulomb_potential(1.0, 0.5).lower_bound == -2.0


def test_config_round_trip():
    f = field_from_config({"preset": "fact4", "b": 1.0, "lambda": 2.0})
    assert f.params == {"b": 1.0, "lambda": 2.0}
    v = potential_from_config({"preset": "coulomb", "g": 1.0, "lambda": 1.0})
    assert v.name == "coulomb"
    assert potential_from_config(None).name == "zero"
    with pytest.raises(ProfileError):
        field_from_config({"preset": "nope"})
    with pytest.raises(ProfileError):
        field_from_config({"b": 1.0})
    with pytest.raises(ProfileError):
        field_from_config({"preset": "constant", "c": 1.0})
    assert {"constant", "fact4", "sine", "gaussian"} <= set(FIELD_PRESETS)
    assert {"zero", "oscillator", "coulomb"} <= set(POTENTIAL_PRESETS)


def test_scaled_keeps_closed_forms():
    f = sine_field().scaled(-2.0)
    assert gauge_a2(f, 1.0) == pytest.approx(-2.0 * gauge_a2(sine_field(), 1.0))
    assert f.bounds == (2.0, 6.0)


@given(finite, finite)
def test_antiderivative_additivity(a, b):
    # a2(b) - a2(a) = int_a^b b, checked against quadrature
    from scipy.integrate import quad
    f = sine_field()
    ref = quad(f.b, a, b, epsabs=1e-12)[0]
    assert gauge_a2(f, b) - gauge_a2(f, a) == pytest.approx(ref, abs=1e-9)


@given(st.floats(0.0, 6.0), st.floats(0.1, 4.0))
def test_constant_dominated_by_fact4(x, lam):
    f, fh = constant_field(1.0), fact4_field(1.0, lam)
    assert dominates(f, fh, [x, -x])


@settings(max_examples=30)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_poincare_potential_curl_matches_field(x1, x2):
    # curl a = b by central differences
    f = gaussian_field(1.5)
    h = 1e-4
    ax = lambda p: poincare_vector_potential(f, p)
    curl = ((ax((x1 + h, x2))[1] - ax((x1 - h, x2))[1])
            - (ax((x1, x2 + h))[0] - ax((x1, x2 - h))[0])) / (2 * h)
    assert curl == pytest.approx(eval_field(f, (x1, x2)), abs=1e-6)
