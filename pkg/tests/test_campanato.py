import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from levysmooth.campanato import (R0, _paired_generic, _paired_indicator, ball_average_field,
                                  campanato_seminorm, chaining_bound_check, chaining_prediction,
                                  dyadic_radii, lemma_constant, overlap_check,
                                  semigroup_modulus_check, two_radius_check)
from levysmooth.exceptions import ConfigError
from levysmooth.levy_model import LevyModel, LogStableMeasure
from levysmooth.paths import RngSeed
from levysmooth.testfunctions import Constant, Indicator, LogModulus

# log-Campanato seminorm of LogModulus(alpha=2) on (-1/2, 1/2), r = 2^-3..2^-12, spacing 2^-16
LOGMOD_SEMINORM = 3.409198365404825
RADII = dyadic_radii(3, 12)


@pytest.fixture(scope="module")
def logmod_field():
    return ball_average_field(LogModulus(alpha=2.0), (-0.5, 0.5), RADII)


def test_dyadic_radii():
    r = dyadic_radii(3, 5)
    assert np.array_equal(r, [0.125, 0.0625, 0.03125])
    assert R0 == r[0]
    with pytest.raises(ConfigError):
        dyadic_radii(5, 3)


def test_constant_has_zero_seminorm():
    assert campanato_seminorm(Constant(value=3.0), alpha=2.0, radii=RADII, spacing=2 ** -12) == 0.0
    rep = chaining_bound_check(Constant(value=3.0), 2.0, radii=RADII, spacing=2 ** -12)
    assert rep.rows[-1].lhs == 0.0 and rep.passed


def test_linear_function_closed_form():
    # mean-square oscillation of x over B_r is r^2/3, exact for piecewise-linear integration
    fld = ball_average_field(lambda x: x, (-1.0, 1.0), RADII, spacing=2 ** -12)
    assert np.allclose(fld.mean_square.max(axis=1), RADII ** 2 / 3, rtol=1e-9)
    per = fld.seminorm_per_radius(2.0)
    assert np.allclose(per, np.abs(np.log2(RADII)) ** 4 * 2 * RADII ** 2 / 3, rtol=1e-9)
    # |log2 r|^4 r^2 is increasing on the dyadic family, so the sup sits at the largest radius
    assert int(np.argmax(per)) == 0


def test_logmod_seminorm_golden(logmod_field):
    assert logmod_field.seminorm(2.0) == pytest.approx(LOGMOD_SEMINORM, rel=1e-10)


def test_logmod_ball_by_quadrature(logmod_field):
    f = LogModulus(alpha=2.0)
    r = 2.0 ** -6
    g = lambda y, p: f(np.array([y]))[0] ** p
    m1 = integrate.quad(g, -r, r, args=(1,), points=[0.0], epsabs=1e-15)[0] / (2 * r)
    m2 = integrate.quad(g, -r, r, args=(2,), points=[0.0], epsabs=1e-15)[0] / (2 * r)
    i = int(np.argmin(np.abs(logmod_field.x)))
    j = int(np.flatnonzero(RADII == r)[0])
    assert logmod_field.averages[j, i] == pytest.approx(m1, rel=1e-9)
    assert logmod_field.mean_square[j, i] == pytest.approx(m2 - m1 ** 2, rel=1e-7)


def test_exact_and_sampled_integration_agree():
    f = LogModulus(alpha=2.0)
    exact = ball_average_field(f, (-0.5, 0.5), dyadic_radii(3, 6), spacing=2 ** -16)
    sampled = ball_average_field(lambda x: f(x), (-0.5, 0.5), dyadic_radii(3, 6), spacing=2 ** -16)
    # piecewise-linear error is concentrated at the log singularity
    assert np.max(np.abs(exact.averages - sampled.averages)) < 1e-4


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=64, max_size=64))
def test_averages_are_contractive(vals):
    v = np.asarray(vals)
    fld = ball_average_field(v, (0.0, 63.0), radii=[1.0, 2.0, 4.0])
    assert np.all(fld.averages <= v.max() + 1e-12)
    assert np.all(fld.averages >= v.min() - 1e-12)
    assert np.all(fld.mean_square >= 0)


def test_radius_must_fit_grid():
    with pytest.raises(ConfigError):
        ball_average_field(np.sin, (-0.5, 0.5), radii=[0.1], spacing=2 ** -10)
    with pytest.raises(ConfigError):
        ball_average_field(np.sin, (-0.5, 0.5), radii=[1.0], spacing=2 ** -10)


def test_lemma_constant():
    assert lemma_constant(8.0) == 2.0


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("m", [3, 7, 12])
def test_chaining_prediction_series(alpha, m):
    direct = sum(j ** -alpha for j in range(m, 200_000)) + 200_000 ** (1 - alpha) / (alpha - 1)
    expect = (1 + math.sqrt(2)) * 0.7 * direct * m ** (alpha - 1)
    assert chaining_prediction(0.7, alpha, m) == pytest.approx(expect, rel=1e-6)


def test_chaining_step_factor():
    # the two-radius constant for consecutive dyadic radii is 1 + (r_k / r_{k+1})^{1/2} = 1 + 2^{1/2}
    assert chaining_prediction(1.0, 2.0, 5) / (5 * sum(j ** -2.0 for j in range(5, 10 ** 6))) == \
        pytest.approx(1 + 2 ** 0.5, rel=1e-5)


def test_sine_chaining_coarsest_radius():
    fld = ball_average_field(np.sin, (-0.5, 0.5), RADII)
    rep = chaining_bound_check(np.sin, 2.0, field=fld, label="sin")
    per = [r.lhs for r in rep.rows if r.check == "chaining"]
    assert int(np.argmax(per)) == 0
    assert rep.passed


def test_logmod_chaining_rows(logmod_field):
    rep = chaining_bound_check(LogModulus(alpha=2.0), 2.0, field=logmod_field)
    rows = [r for r in rep.rows if r.check == "chaining"]
    assert len(rows) == RADII.size
    assert all(r.passed for r in rows)
    top = rep.rows[-1]
    assert top.check == "chaining-sup"
    assert top.note == f"ratio={top.rhs / top.lhs!r}"


def test_two_radius_and_overlap(logmod_field):
    w2, ok2 = two_radius_check(logmod_field, 2.0)
    wo, oko = overlap_check(logmod_field, 2.0)
    assert ok2 and oko
    assert 0 < w2 <= 1.05 and 0 < wo <= 1.05


def test_paired_counts_match_direct_average():
    rng = np.random.default_rng(3)
    L = np.sort(rng.standard_cauchy(20_000))
    f = Indicator(a=0.0, b=1.0)
    x = np.linspace(-2, 2, 17)
    for r in (2.0 ** -3, 0.5, 1.5):
        m1, s1 = _paired_indicator(L, f, x, r)
        m2, s2 = _paired_generic(L, f, x, r)
        assert np.allclose(m1, m2, atol=1e-14)
        assert np.allclose(s1, s2, rtol=1e-9, atol=1e-15)


def test_modulus_rejects_non_log_stable(truncated):
    with pytest.raises(ConfigError):
        semigroup_modulus_check(truncated, Indicator(), 1.0, n_paths=10, rng=RngSeed(1))


def test_modulus_constant_is_zero():
    model = LevyModel(LogStableMeasure(2.0, 1))
    ends = np.linspace(-1, 1, 101)
    rep, res = semigroup_modulus_check(model, Constant(), 1.0, n_paths=101, rng=RngSeed(1),
                                       endpoints=ends, radii=dyadic_radii(3, 5))
    assert np.all(res.omega == 0.0)
    assert not res.inconclusive.any()


def test_modulus_small_run_structure():
    model = LevyModel(LogStableMeasure(2.0, 1))
    rep, res = semigroup_modulus_check(model, Indicator(), 1.0, n_paths=20_000, rng=RngSeed(5),
                                       eps_cut=2.0 ** -6, radii=dyadic_radii(3, 6))
    checks = [r.check for r in rep.rows]
    assert checks.count("log-campanato") == 4 and checks.count("modulus") == 4
    assert checks[-1] == "modulus-exponent"
    assert np.all(np.diff(res.omega) <= 0)  # smaller shift, smaller increment
    assert all(r.passed for r in rep.rows if r.check == "log-campanato")
    buf = io.StringIO()
    res.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[:2] == ["# levysmooth modulus v1", "r,omega,se,fit,residual,inconclusive"]
    assert len(lines) == 6
