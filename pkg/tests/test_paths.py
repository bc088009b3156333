import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from levysmooth.exceptions import ConfigError
from levysmooth.levy_model import LevyModel, StableMeasure, make_qweight
from levysmooth.paths import (RngSeed, compensated_integral, endpoint_summary_csv, read_path_dump,
                              sample_batch, sample_endpoints, sample_path, sample_paths,
                              write_path_dump)


def test_pure_gaussian_has_no_jumps():
    m = LevyModel(gaussian=1.0, drift=(0.5,))
    paths = sample_paths(m, 1.0, 5, RngSeed(2), eps_cut=1e-2)
    assert all(p.jumps.size == 0 for p in paths)
    ends = sample_endpoints(m, 2.0, 50_000, RngSeed(1)).ravel()
    # N(m t, t Q): mean 1, variance 2
    se_mean = np.sqrt(2.0 / ends.size)
    assert abs(ends.mean() - 1.0) < 4 * se_mean
    assert ends.var() == pytest.approx(2.0, rel=0.03)


def test_cauchy_endpoints_ks(cauchy):
    # scale of the Cauchy law at t=1 is psi(1) = stable_constant(1, 1) = pi
    ends = sample_endpoints(cauchy, 1.0, 100_000, RngSeed(5), backend="cms").ravel()
    ks = stats.kstest(ends, stats.cauchy(scale=np.pi).cdf).statistic
    assert ks < 0.01


def test_truncated_jumps_bounded(truncated):
    paths = sample_paths(truncated, 1.0, 300, RngSeed(2), eps_cut=1e-2)
    big = max(np.abs(p.jumps).max() for p in paths if p.jumps.size)
    assert big <= 1.0
    assert min(np.abs(p.jumps).min() for p in paths if p.jumps.size) >= 1e-2


def test_zero_weight_gives_zero(truncated):
    q0 = make_qweight(truncated.measure, "zero")
    p = sample_path(truncated, 0.5, 1e-2, RngSeed(1))
    assert compensated_integral(p, q0) == 0.0


def test_compensated_integral_is_mean_zero(truncated, q_beta1):
    b = sample_batch(truncated, 0.5, 100_000, RngSeed(11), 1e-2, weights=(q_beta1,))
    w = b.weights[:, 0]
    assert abs(w.mean()) < 3 * w.std(ddof=1) / np.sqrt(w.size)


def test_single_path_matches_batch_weight(truncated, q_beta1):
    p = sample_path(truncated, 0.5, 1e-2, RngSeed(4))
    # compensated integral over the recorded jumps, by hand
    jumps = np.abs(p.jumps.ravel())
    comp = 0.5 * q_beta1.integrate(r_min=1e-2)
    assert compensated_integral(p, q_beta1) == pytest.approx(jumps.sum() - comp, abs=1e-12)


def test_weight_groups_replay(truncated, q_beta1):
    """Changing the weight group must not change the sampled jumps."""
    q2 = make_qweight(truncated.measure, "beta_power", beta=1.2)
    a = sample_batch(truncated, 0.5, 2000, RngSeed(7), 1e-3, weights=(q_beta1, q2))
    b = sample_batch(truncated, 0.5, 2000, RngSeed(7), 1e-3, weights=(q2,))
    c = sample_batch(truncated, 0.5, 2000, RngSeed(7), 1e-3)
    assert np.array_equal(a.endpoints, b.endpoints)
    assert np.allclose(a.weights[:, 1], b.weights[:, 0], rtol=0, atol=1e-12)
    # weighted batches invert the jump law directly (relative accuracy 1e-6)
    assert np.allclose(a.endpoints, c.endpoints, rtol=0, atol=1e-5)


@pytest.mark.parametrize("threads", [1, 2, 4])
def test_thread_count_does_not_change_draws(truncated, threads):
    ref = sample_batch(truncated, 0.5, 3000, RngSeed(3), 1e-2, threads=1)
    other = sample_batch(truncated, 0.5, 3000, RngSeed(3), 1e-2, threads=threads)
    assert np.array_equal(ref.endpoints, other.endpoints)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), stream=st.integers(0, 50))
def test_seed_reproducible(truncated, seed, stream):
    a = sample_endpoints(truncated, 0.3, 64, RngSeed(seed, stream), 1e-2)
    b = sample_endpoints(truncated, 0.3, 64, RngSeed(seed, stream), 1e-2)
    assert np.array_equal(a, b)


def test_streams_differ(truncated):
    a = sample_endpoints(truncated, 0.3, 64, RngSeed(1, 0), 1e-2)
    b = sample_endpoints(truncated, 0.3, 64, RngSeed(1, 1), 1e-2)
    assert not np.array_equal(a, b)


@pytest.mark.parametrize("seed", [-1, 1.5, "x", True])
def test_bad_seed(seed):
    with pytest.raises(ConfigError):
        RngSeed(seed)


def test_path_dump_round_trip(truncated):
    p = sample_path(truncated, 0.5, 1e-2, RngSeed(1))
    buf = io.BytesIO()
    write_path_dump(p, buf)
    buf.seek(0)
    back = read_path_dump(buf)
    assert np.array_equal(p.jumps, back.jumps)
    assert np.array_equal(p.times, back.times)
    assert np.array_equal(p.endpoint(), back.endpoint())


def test_endpoint_summary_header(truncated):
    ends = sample_endpoints(truncated, 0.5, 500, RngSeed(1), 1e-2)
    buf = io.StringIO()
    endpoint_summary_csv(ends, buf)
    assert buf.getvalue().startswith("# levysmooth endpoint-summary v1\n")
