import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from levysmooth.exceptions import ConfigError
from levysmooth.grid import GridFunction, GridSpec, trig_modes
from levysmooth.testfunctions import (Constant, GaussianBump, Indicator, LogModulus, Sine,
                                      make_test_function, upper_gamma)


def test_grid_axis_and_spacing():
    g = GridSpec(4.0, 64, 1)
    x = g.axis()
    assert x.size == 64
    assert g.spacing == pytest.approx(8.0 / 64)
    assert x[0] == pytest.approx(-4.0)
    assert np.allclose(np.diff(x), g.spacing)


@settings(max_examples=20, deadline=None)
@given(k=st.integers(0, 20), x=st.floats(-3.0, 3.0))
def test_interpolation_exact_for_resolved_modes(k, x):
    g = GridSpec(math.pi, 64, 1)
    f = g.sample(lambda y: np.cos(k * y) + 0.5 * np.sin(k * y))
    val = f.interpolate(np.array([x]))[0]
    assert val == pytest.approx(np.cos(k * x) + 0.5 * np.sin(k * x), abs=1e-11)


def test_shift_is_periodic():
    g = GridSpec(math.pi, 32, 1).sample(Sine())
    s = g.shifted(3)
    assert np.allclose(s.values, np.roll(g.values, -3))
    assert np.allclose(g.shifted(32).values, g.values)


def test_trig_modes_real_reconstruction():
    g = GridSpec(4.0, 16, 1).sample(lambda y: np.cos(np.pi / 0.5 * y) + 0.2)
    tm = trig_modes(g)
    x = g.axis()
    rec = np.real(np.exp(1j * np.outer(x + 4.0, tm.freqs)) @ tm.coeffs)
    assert np.allclose(rec, g.values, atol=1e-12)


def test_csv_round_trip(tmp_path):
    g = GridSpec(3.0, 16, 1).sample(GaussianBump())
    p = tmp_path / "g.csv"
    g.save_csv(p)
    back = GridFunction.from_csv(p)
    assert back.half_width == g.half_width
    assert np.array_equal(back.values, g.values)


def test_two_dimensional_sampling():
    g = GridSpec(2.0, 8, 2)
    f = g.sample(lambda p: p[..., 0] + 10 * p[..., 1])
    assert f.values.shape == (8, 8)
    assert f.values[1, 0] - f.values[0, 0] == pytest.approx(g.spacing)


@pytest.mark.parametrize("fid, sup", [("constant", 1.0), ("sin", 1.0), ("indicator", 1.0),
                                      ("log-modulus", 1.0), ("bump", 1.0)])
def test_make_test_function(fid, sup):
    f = make_test_function(fid)
    assert f.sup_norm == sup
    assert np.all(np.abs(f(np.linspace(-3, 3, 101))) <= sup + 1e-15)


@pytest.mark.parametrize("spec", ["cosh", {"id": "sin", "amp": 2}, {"id": "grid"}])
def test_make_test_function_rejects(spec):
    with pytest.raises(ConfigError):
        make_test_function(spec)


def test_indicator_squares_to_itself():
    f = Indicator(a=-0.5, b=1.0)
    x = np.linspace(-2, 2, 41)
    assert np.array_equal(f.squared()(x), f(x))


def test_log_modulus_shape():
    f = LogModulus(alpha=2.0)
    assert f(np.array([0.0]))[0] == 0.0
    assert f(np.array([0.25]))[0] == pytest.approx(0.5)
    assert f(np.array([0.7]))[0] == 1.0
    with pytest.raises(ConfigError):
        LogModulus(alpha=1.0)


@pytest.mark.parametrize("s", [-2.5, -1.0, -0.3, 0.0, 0.5, 2.0])
@pytest.mark.parametrize("u", [0.05, 1.0, 7.0])
def test_upper_gamma_quadrature(s, u):
    orc = integrate.quad(lambda v: v ** (s - 1) * np.exp(-v), u, np.inf, epsrel=1e-12)[0]
    assert float(upper_gamma(s, u)) == pytest.approx(orc, rel=1e-9)


@pytest.mark.parametrize("alpha", [1.25, 2.0, 3.0])
@pytest.mark.parametrize("power", [1, 2])
@pytest.mark.parametrize("x", [0.01, 0.3, 0.5, 0.8, -0.2])
def test_log_modulus_antiderivative(alpha, power, x):
    f = LogModulus(alpha=alpha)
    pts = [p for p in (0.5,) if min(0, x) < p < max(0, x)]
    orc = integrate.quad(lambda y: f(np.array([y]))[0] ** power, 0, x, points=pts or None,
                         epsabs=1e-13, limit=400)[0]
    assert float(f.antiderivative(x, power)) == pytest.approx(orc, abs=1e-9)


def test_constant_and_sine_bounds():
    assert Constant(value=-2.0).sup_norm == 2.0
    assert Sine(frequency=3.0).lipschitz == 3.0
