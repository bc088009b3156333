import math

import numpy as np
import pytest

from levysmooth.estimators import (curvature_bound, dual_norm_sup, eps_bias_bound, gamma_field,
                                   qweight_dictionary, smoothing_lhs, smoothing_lhs_iterated,
                                   weight_estimate_AqPtf)
from levysmooth.grid import GridSpec
from levysmooth.levy_model import levy_symbol, make_qweight
from levysmooth.nonlocal_ops import apply_Aq_grid
from levysmooth.paths import RngSeed
from levysmooth.semigroup import semigroup_fourier, semigroup_square
from levysmooth.testfunctions import Constant, Indicator, Sine

BOX = GridSpec(5 * math.pi, 4096, 1)
# smoothing_lhs for the Cauchy model, f = 1_[0,1], t = 0.5, x = 0 on GridSpec(16, 4096)
CAUCHY_INDICATOR_GOLDEN = 0.03312708431808402


def test_smoothing_lhs_constant_is_zero(truncated):
    assert smoothing_lhs(truncated, Constant(value=3.0), 0.2, 1.0, grid=BOX) == 0.0


def test_smoothing_lhs_backends_agree(truncated):
    xs = np.array([-0.5, 0.0, 0.3, 1.0])
    a = smoothing_lhs(truncated, Sine(), xs, 0.5, grid=GridSpec(8.0, 512, 1))
    b = smoothing_lhs(truncated, Sine(), xs, 0.5, grid=GridSpec(8.0, 512, 1), backend="quadrature")
    assert np.allclose(a, b, rtol=1e-6)


def test_sine_gamma_identity(truncated):
    # for g = A sin, int |g(x+y) - g(x)|^2 dnu = A^2 [psi(1) + (psi(2)/2 - psi(1)) cos 2x]
    t = 0.5
    amp = math.exp(-t * levy_symbol(truncated, 1.0).real)
    p1, p2 = levy_symbol(truncated, 1.0).real, levy_symbol(truncated, 2.0).real
    xs = np.linspace(-2, 2, 9)
    exact = amp ** 2 * (p1 + (p2 / 2 - p1) * np.cos(2 * xs))
    assert np.allclose(smoothing_lhs(truncated, Sine(), xs, t, grid=BOX), exact, atol=1e-12)


def test_smoothing_lhs_decreases_in_time(truncated):
    xs = np.array([0.0, 1.0])
    early = smoothing_lhs(truncated, Sine(), xs, 5.0, grid=BOX)
    late = smoothing_lhs(truncated, Sine(), xs, 50.0, grid=BOX)
    assert np.all(late < early)
    assert np.all(late < 1e-30)


def test_cauchy_indicator_golden(cauchy):
    grid = GridSpec(16.0, 4096, 1)
    val = smoothing_lhs(cauchy, Indicator(), 0.0, 0.5, grid=grid)
    pf2, _ = semigroup_square(cauchy, Indicator(), np.array([0.0]), 0.5, grid=grid)
    assert val == pytest.approx(CAUCHY_INDICATOR_GOLDEN, rel=1e-9)
    assert val <= pf2[0] / 0.5 * 1.05


def test_gamma_field_nonnegative(truncated):
    g = semigroup_fourier(truncated, BOX.sample(Indicator()), 0.1)
    assert np.all(gamma_field(truncated, g).values >= -1e-14)


def test_iterated_n1_is_smoothing_lhs(truncated):
    gg = GridSpec(5 * math.pi, 256, 1)
    xs = np.array([0.0, 0.7])
    a = smoothing_lhs_iterated(truncated, Sine(), xs, 1.0, n=1, grid=gg)
    b = smoothing_lhs(truncated, Sine(), xs, 1.0, grid=gg)
    assert np.allclose(a, b, rtol=1e-12)


def test_iterated_constant_is_zero(truncated):
    gg = GridSpec(5 * math.pi, 256, 1)
    assert np.all(smoothing_lhs_iterated(truncated, Constant(), np.array([0.3]), 1.0, n=2,
                                         grid=gg) == 0.0)


def test_iterated_second_order_bound(truncated):
    gg = GridSpec(5 * math.pi, 256, 1)
    xs = np.array([0.0, 0.7])
    four = smoothing_lhs_iterated(truncated, Sine(), xs, 1.0, n=2, grid=gg)
    quad = smoothing_lhs_iterated(truncated, Sine(), xs, 1.0, n=2, grid=gg, backend="quadrature")
    assert np.allclose(four, quad, rtol=1e-6)
    assert np.all(four <= (2 / 1.0) ** 2 * 1.05)


def test_weight_estimator_trivial_cases(truncated, q_beta1):
    e = weight_estimate_AqPtf(truncated, make_qweight(truncated.measure, "zero"), Sine(), 0.3, 0.5,
                              2000, RngSeed(4))
    assert e.estimate == 0.0 and e.se == 0.0
    c = weight_estimate_AqPtf(truncated, q_beta1, Constant(value=2.0), 0.3, 0.5, 20_000, RngSeed(4),
                              eps_cut=1e-2)
    assert abs(c.estimate) <= 3 * c.se
    assert c.pf2 == 4.0


def test_weight_estimator_matches_fourier(truncated, q_beta1):
    xs = np.array([0.0, 0.7])
    det = apply_Aq_grid(q_beta1, semigroup_fourier(truncated, BOX.sample(Sine()), 0.5)).interpolate(xs)
    ests = weight_estimate_AqPtf(truncated, q_beta1, Sine(), xs, 0.5, 100_000, RngSeed(4), eps_cut=1e-2)
    for e, d in zip(ests, det):
        assert abs(e.estimate - d) <= 3 * e.se + e.bias_bound
        # the smoothing estimate itself
        assert e.estimate ** 2 <= e.pf2 * q_beta1.l2nu_norm_sq / 0.5


def test_eps_bias_bound_scaling(q_beta1):
    # 1/2 * curvature * int_{|y|<eps} |y|^3 |y|^{-5/2} dy = curvature * eps^{3/2} * 2/3
    assert eps_bias_bound(q_beta1, 1e-2, 1.0) == pytest.approx(2 / 3 * 1e-3, rel=1e-9)
    assert eps_bias_bound(q_beta1, 1e-2, 2.0) == pytest.approx(2 * eps_bias_bound(q_beta1, 1e-2, 1.0))


def test_curvature_bound_sine(truncated):
    assert curvature_bound(truncated, Sine(), 0.5) == pytest.approx(1.0)


def test_dual_norm_dominated_by_smoothing(truncated):
    # sup over unit-norm q of |A_q g|^2 cannot exceed int |g(x+y) - g(x)|^2 dnu
    g = semigroup_fourier(truncated, GridSpec(5 * math.pi, 512, 1).sample(Sine()), 0.5)
    dic = qweight_dictionary(truncated.measure, 8)
    dual = dual_norm_sup(truncated, g, np.array([0.7]), dic)[0]
    full = smoothing_lhs(truncated, g, 0.7, 0.0)
    assert 0 < dual <= full * (1 + 1e-9)
