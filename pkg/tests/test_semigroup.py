import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from levysmooth.grid import GridSpec
from levysmooth.levy_model import LevyModel, StableMeasure, levy_symbol
from levysmooth.paths import RngSeed
from levysmooth.semigroup import (BoxLeakageWarning, cauchy_density, heat_bump_oracle,
                                  semigroup_fourier, semigroup_mc, semigroup_square, sine_oracle,
                                  wrapped_cauchy_density)
from levysmooth.testfunctions import Constant, GaussianBump, Indicator, Sine, Squared

GRID = GridSpec(16.0, 4096, 1)


def cauchy_indicator(x, scale, a=0.0, b=1.0):
    """``P(x + C in [a, b])`` for a Cauchy variable of the given scale."""
    return (np.arctan((b - x) / scale) - np.arctan((a - x) / scale)) / math.pi


def test_time_zero_is_identity(truncated):
    f = GRID.sample(GaussianBump())
    assert np.max(np.abs(semigroup_fourier(truncated, f, 0.0).values - f.values)) < 1e-10


def test_heat_semigroup_bump():
    m = LevyModel(None, drift=(0.7,), gaussian=1.0)
    u = semigroup_fourier(m, GRID.sample(GaussianBump(width=1.0)), 0.5)
    orc = heat_bump_oracle(GRID.axis(), 0.5, 1.0, 1.0, 0.7)
    assert np.max(np.abs(u.values - orc)) < 1e-6


def test_heat_oracle_by_quadrature():
    # independent check of the closed form: convolution with the normal density
    x, t = 0.4, 0.5
    dens = lambda y: np.exp(-(y - 0.7 * t) ** 2 / (2 * t)) / math.sqrt(2 * math.pi * t)
    orc = integrate.quad(lambda y: np.exp(-(x + y) ** 2 / 2) * dens(y), -20, 20, epsabs=1e-13)[0]
    assert heat_bump_oracle(np.array([x]), t, 1.0, 1.0, 0.7)[0] == pytest.approx(orc, abs=1e-12)


def test_cauchy_convolution(cauchy):
    t = 0.5
    scale = math.pi * t
    u = semigroup_fourier(cauchy, GRID.sample(GaussianBump(width=1.0)), t)
    xs = GRID.axis()[::256]
    # the grid semigroup acts on the torus, so the oracle uses the wrapped density
    orc = [integrate.quad(lambda y: np.exp(-0.5 * y ** 2) * wrapped_cauchy_density(y - x, scale, 32.0),
                          -16, 16, points=[0.0], limit=400, epsabs=1e-13)[0] for x in xs]
    assert np.max(np.abs(u.values[::256] - orc)) < 1e-4


def test_wrapped_cauchy_sums_images():
    x, s, p = np.array([0.3, 5.0]), 1.2, 10.0
    K = 20000
    direct = sum(cauchy_density(x + k * p, s) for k in range(-K, K + 1))
    direct += 2 * s / (math.pi * p ** 2) / (K + 0.5)  # images beyond |k| = K
    assert np.allclose(wrapped_cauchy_density(x, s, p), direct, rtol=1e-6)
    assert integrate.quad(lambda y: wrapped_cauchy_density(y, s, p), -5, 5)[0] == pytest.approx(1.0)


@pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
def test_sine_is_eigenfunction(truncated, t):
    g = GridSpec(5 * math.pi, 4096, 1)
    u = semigroup_fourier(truncated, g.sample(Sine()), t)
    assert np.max(np.abs(u.values - sine_oracle(truncated, g.axis(), t))) < 1e-12


@settings(max_examples=15, deadline=None)
@given(c=st.floats(-5, 5), t=st.floats(0.0, 3.0))
def test_constants_preserved(truncated, c, t):
    u = semigroup_fourier(truncated, GRID.sample(Constant(value=c)), t)
    assert np.max(np.abs(u.values - c)) <= 1e-12 * max(1.0, abs(c))


def test_semigroup_property(truncated):
    f = GRID.sample(GaussianBump())
    a = semigroup_fourier(truncated, semigroup_fourier(truncated, f, 0.3), 0.4)
    b = semigroup_fourier(truncated, f, 0.7)
    assert np.max(np.abs(a.values - b.values)) < 1e-13


def test_leakage_warning(cauchy):
    with pytest.warns(BoxLeakageWarning):
        semigroup_fourier(cauchy, GRID.sample(Sine()), 10.0, leakage_tol=0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        semigroup_fourier(cauchy, GRID.sample(Sine()), 1e-3, leakage_tol=0.01)


def test_mc_constant_exact(truncated):
    est, se = semigroup_mc(truncated, Constant(value=2.5), np.array([0.3, 1.0]), 0.5, 1000,
                           RngSeed(3), eps_cut=1e-2)
    assert np.all(est == 2.5) and np.all(se == 0.0)


def test_mc_sine_cauchy(cauchy):
    xs = np.array([0.0, math.pi / 2])
    est, se = semigroup_mc(cauchy, Sine(), xs, 1.0, 100_000, RngSeed(21), eps_cut=1e-2)
    target = np.exp(-levy_symbol(cauchy, 1.0).real) * np.sin(xs)
    assert np.exp(-math.pi) == pytest.approx(target[1])
    assert np.all(np.abs(est - target) <= 3 * se)


def test_mc_agrees_with_fourier(truncated):
    xs = np.linspace(-3, 3, 20)
    g = GridSpec(5 * math.pi, 4096, 1)
    det = semigroup_fourier(truncated, g.sample(GaussianBump()), 0.5).interpolate(xs)
    est, se = semigroup_mc(truncated, GaussianBump(), xs, 0.5, 50_000, RngSeed(8), eps_cut=1e-2)
    assert np.all(np.abs(est - det) <= 3 * se)


def test_square_of_indicator(cauchy):
    xs = np.array([0.0, 0.5, 2.0])
    t = 0.5
    exact = cauchy_indicator(xs, math.pi * t)
    est, se = semigroup_square(cauchy, Indicator(), xs, t, backend="mc", n_paths=100_000,
                               rng=RngSeed(12), eps_cut=1e-3)
    assert np.all(np.abs(est - exact) <= 3 * se)
    det, _ = semigroup_square(cauchy, Indicator(), xs, t, grid=GridSpec(16.0, 16384, 1))
    # torus images and the sampled jump of the indicator limit the grid accuracy
    assert np.max(np.abs(det - exact)) < 2e-3


def test_square_backends_agree_for_sine_squared(truncated):
    x = np.array([0.0])
    det, _ = semigroup_square(truncated, Sine(), x, 0.5, grid=GridSpec(5 * math.pi, 1024, 1))
    # sin^2 = (1 - cos 2x)/2 and cos 2x is an eigenfunction
    exact = 0.5 * (1 - math.exp(-0.5 * levy_symbol(truncated, 2.0).real))
    assert det[0] == pytest.approx(exact, abs=1e-12)
    est, se = semigroup_square(truncated, Sine(), x, 0.5, backend="mc", n_paths=50_000,
                               rng=RngSeed(2), eps_cut=1e-2)
    assert abs(est[0] - exact) <= 3 * se[0]


def test_squared_wrapper():
    f = Squared(base=Sine())
    x = np.linspace(-1, 1, 5)
    assert np.allclose(f(x), np.sin(x) ** 2)
