import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diamag import exact
from diamag.bridge_mc import (BridgePath, block_rng, mc_kernel, mc_kernels, path_functionals,
                              path_mean, path_variance, sample_bridge, sample_bridges,
                              variance_comparison)
from diamag.fields import (ProfileError, constant_field, fact4_field, gaussian_field,
                           oscillator_potential, sine_field)


def test_bridge_endpoints_and_shape():
    w = sample_bridges(0.3, -1.0, 2.0, 16, 5, block_rng(1, 0))
    assert w.values.shape == (5, 17)
    assert np.all(w.values[:, 0] == 0.3) and np.all(w.values[:, -1] == -1.0)
    assert w.beta == 2.0


def test_bridge_midpoint_statistics():
    n, beta, x1, y1 = 100_000, 2.0, 0.4, 1.2
    w = sample_bridges(x1, y1, beta, 64, n, block_rng(7, 0))
    mid = w.values[:, 32]
    se_mean = math.sqrt(beta / 4 / n)
    assert abs(mid.mean() - 0.5 * (x1 + y1)) < 4 * se_mean
    # variance of the sample variance of a Gaussian is 2 s^4 / (n - 1)
    var = beta / 4
    assert abs(mid.var(ddof=1) - var) < 4 * var * math.sqrt(2 / (n - 1))


def test_bridge_covariance():
    n, beta = 200_000, 1.0
    w = sample_bridges(0.0, 0.0, beta, 8, n, block_rng(3, 0)).values
    t, s = 0.25, 0.75
    cov = np.mean(w[:, 2] * w[:, 6])
    assert cov == pytest.approx(min(t, s) - t * s / beta, abs=0.005)


def test_bridge_replay_bit_identical():
    a = sample_bridge(0.0, 1.0, 1.0, 32, block_rng(11, 2))
    b = sample_bridge(0.0, 1.0, 1.0, 32, block_rng(11, 2))
    assert np.array_equal(a.values, b.values)


def test_bridge_rejects_bad_input():
    with pytest.raises(ValueError):
        sample_bridge(0, 0, 1.0, 1, block_rng(0, 0))
    with pytest.raises(ValueError):
        sample_bridge(0, 0, 0.0, 8, block_rng(0, 0))


def test_path_functionals_straight_line():
    t = np.linspace(0.0, 1.0, 1025)
    w = BridgePath(t, t.copy())
    assert path_mean(lambda s: s, w) == pytest.approx(0.5, abs=1e-12)
    assert path_variance(lambda s: s, w) == pytest.approx(1 / 12, abs=1e-6)
    assert path_mean(lambda s: 3.0 + 0 * s, w) == pytest.approx(3.0)
    assert path_variance(lambda s: 3.0 + 0 * s, w) == 0.0


def test_mc_free_kernel_exact():
    est = mc_kernel(constant_field(0.0), None, 1.0, (0.2, 0.1), (-0.3, 0.4), n_samples=1000)
    assert est.value == pytest.approx(float(exact.free_kernel(1.0, (0.2, 0.1), (-0.3, 0.4))),
                                      rel=1e-14)
    assert est.std_error == pytest.approx(0.0, abs=1e-18)


def test_mc_landau_diagonal():
    est = mc_kernel(constant_field(2.0), None, 1.0, (0, 0), (0, 0), n_samples=200_000,
                    n_steps=128, seed=5)
    ref = exact.landau_diagonal(2.0, 1.0)
    assert abs(est.value - ref) < 3 * est.std_error
    assert est.value.imag == 0.0 and est.value.real > 0


def test_mc_offdiagonal_matches_mehler():
    x, y = (0.3, 0.5), (-0.2, -0.1)
    est = mc_kernel(constant_field(1.0), None, 1.0, x, y, n_samples=100_000, n_steps=128, seed=2)
    ref = complex(exact.symmetric_to_asymmetric(
        exact.mehler_kernel(exact.MehlerParams(1.0, 0.0, 1.0), x, y), 1.0, x, y))
    assert abs(est.value.real - ref.real) < 4 * est.std_error_re
    assert abs(est.value.imag - ref.imag) < 4 * est.std_error_im


def test_worker_and_block_reproducibility():
    args = (sine_field(), None, 1.0, (0.1, 0.0), (0.5, 0.2))
    a = mc_kernel(*args, n_samples=10_000, n_steps=32, seed=4, workers=1)
    b = mc_kernel(*args, n_samples=10_000, n_steps=32, seed=4, workers=4)
    assert a.value == b.value and a.std_error == b.std_error
    assert a.rng_scheme == "pcg64-block-seedsequence-v1"


def test_richardson_scheme_agrees():
    args = (constant_field(2.0), None, 1.0, (0, 0), (0, 0))
    r = mc_kernel(*args, n_samples=50_000, n_steps=64, seed=1, scheme="richardson")
    assert abs(r.value - exact.landau_diagonal(2.0, 1.0)) < 4 * r.std_error
    with pytest.raises(ValueError):
        mc_kernel(*args, n_samples=100, n_steps=63, scheme="richardson")


def test_mc_rejects_radial_and_bad_beta():
    with pytest.raises(ProfileError):
        mc_kernel(gaussian_field(1.0), None, 1.0, (0, 0), (0, 0), n_samples=10)
    with pytest.raises(ValueError):
        mc_kernel(constant_field(1.0), None, 0.0, (0, 0), (0, 0), n_samples=10)


def test_crn_triangle_inequality_is_exact():
    # with common bridges |mean(z_hat)| <= mean(z at dx2 = 0) exactly
    x, y = (0.2, 1.0), (-0.4, -0.5)
    hat, low = mc_kernels([(fact4_field(1.0, 1.0), None), (constant_field(1.0), None, 0.0)],
                          1.0, x, y, n_samples=20_000, n_steps=64, seed=9)
    assert abs(hat.value) <= abs(low.value)


def test_variance_comparison_cases():
    w = sample_bridges(0.0, 1.0, 1.0, 64, 2000, block_rng(0, 0))
    assert np.allclose(variance_comparison(sine_field(), sine_field(), w), 0.0)
    assert np.all(variance_comparison(constant_field(0.0), sine_field(), w) >= 0)
    with pytest.raises(ProfileError):
        variance_comparison(constant_field(4.0), sine_field(), w)


def test_potential_functional_mean():
    w = sample_bridges(0.0, 0.0, 1.0, 64, 10, block_rng(0, 0))
    pf = path_functionals(oscillator_potential(1.0, "x1"), w)
    assert np.all(pf.mean >= 0) and np.all(pf.variance >= 0)


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 4.0), st.integers(0, 2**31))
def test_pathwise_variance_nonnegative(x1, y1, beta, seed):
    w = sample_bridges(x1, y1, beta, 64, 500, block_rng(seed, 0))
    assert np.all(path_variance(lambda s: s, w) >= 0)
    diff = variance_comparison(sine_field(), constant_field(3.0), w)
    assert np.all(diff >= -1e-12)


@settings(max_examples=10, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2), st.integers(0, 1000))
def test_integrand_modulus_domination(x1, y1, d, seed):
    # |z_hat| <= z pathwise when |b| <= bhat and the potentials agree
    from diamag.bridge_mc import path_integrands
    from diamag.fields import zero_potential
    w = sample_bridges(x1, y1, 1.0, 32, 200, block_rng(seed, 0))
    zh = path_integrands(fact4_field(1.0, 1.0), zero_potential(), 1.0, d, w)
    z = path_integrands(constant_field(1.0), zero_potential(), 1.0, 0.0, w)
    assert np.all(np.abs(zh) <= z.real * (1 + 1e-12))


def test_time_step_convergence():
    # 64 -> 128 -> 256 steps move the estimate by less than the combined error
    args = (sine_field(), None, 1.0, (0.0, 0.0), (0.5, 0.5))
    ests = [mc_kernel(*args, n_steps=n, n_samples=1_000_000, seed=12) for n in (64, 128, 256)]
    for a, b in zip(ests, ests[1:]):
        assert abs(a.value - b.value) < math.hypot(a.std_error, b.std_error)
