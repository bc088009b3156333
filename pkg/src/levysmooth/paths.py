"""Path simulation for Levy processes with radial jump measures.

Jumps with ``|y| >= eps_cut`` form a compound Poisson process.  Radii are
drawn from a tabulated inverse CDF (log-spaced knots, guide table lookup)
and directions uniformly; jumps below ``eps_cut`` are replaced by a centred
Gaussian with the same covariance ``Sigma(eps) = (M2(eps)/d) I``, which is
added to the Brownian part.

Random streams
--------------
Paths are generated in blocks of :data:`BLOCK_SIZE`.  Block ``b`` of
stream ``s`` under seed ``k`` uses
``Generator(PCG64(SeedSequence(k, spawn_key=(s, b))))``, and inside a block
every path consumes, in order: its Poisson count, one uniform per jump (plus
``d`` normals per jump when ``d >= 2``), then ``d`` normals for the Gaussian
part.  The block layout does not depend on the thread count, so results are
bit-identical for any number of workers.  Jump times are only materialized
on request, from the separate stream ``spawn_key=(s, b, 1)``.
"""

from __future__ import annotations

import io
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .exceptions import ConfigError, SamplerError
from .levy_model import LevyModel, StableMeasure, ZeroMeasure, stable_constant
from .quadrature import gauss_legendre, sphere_area

__all__ = [
    "BLOCK_SIZE", "RngSeed", "JumpPath", "PathBatch", "JumpTable", "default_eps_cut",
    "jump_table", "direct_table", "sample_batch", "sample_path", "sample_paths", "compensated_integral",
    "compensator", "cms_symmetric_stable", "sample_endpoints", "write_path_dump",
    "read_path_dump", "endpoint_summary_csv", "thread_count",
]

BLOCK_SIZE = 4096
#: Guard on the expected number of jumps per path.
MAX_JUMPS_PER_PATH = 5e6
_TAIL_EPS = 1e-15
_U64 = 2 ** 64


def thread_count(threads=None):
    """Worker count: explicit argument, else ``LEVYSMOOTH_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("LEVYSMOOTH_THREADS", "1")
        try:
            threads = int(env)
        except ValueError as exc:
            raise ConfigError(f"LEVYSMOOTH_THREADS must be an integer, got {env!r}") from exc
    return max(1, int(threads))


@dataclass(frozen=True)
class RngSeed:
    """Seed and stream identifier, both unsigned 64-bit integers."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < _U64:
                raise ConfigError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self, block=0, sub=None):
        key = (int(self.stream), int(block)) if sub is None else (int(self.stream), int(block), int(sub))
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(self.seed), spawn_key=key)))

    def child(self, stream):
        return RngSeed(self.seed, stream)


def default_eps_cut(measure):
    """Default truncation radius for a measure (see module docs)."""
    if isinstance(measure, StableMeasure):
        return 1e-3 if measure.alpha <= 1.5 else 1e-2
    if isinstance(measure, ZeroMeasure):
        return 1.0
    if measure.kind == "log_stable":
        return 2.0 ** -6
    return 1e-3


# ---------------------------------------------------------------------------
# Inverse CDF tables


@dataclass(frozen=True, eq=False)
class JumpTable:
    """Radial inverse CDF of ``nu`` restricted to ``|y| >= eps`` and normalized.

    ``cdf`` is evaluated at ``knots``; between knots the CDF is linear in
    ``r``.  Mass beyond ``knots[-1]`` (unbounded support) is sampled from an
    exact Pareto tail with exponent ``tail_power``.
    """

    eps_cut: float
    rate: float
    knots: np.ndarray
    cdf: np.ndarray
    slope: np.ndarray
    guide: np.ndarray
    tail_power: float

    @property
    def cdf_end(self):
        return float(self.cdf[-1])

    @property
    def r_end(self):
        return float(self.knots[-1])

    def quantile(self, u):
        """Radius for uniforms ``u`` (vectorized, for tests)."""
        u = np.asarray(u, dtype=float)
        k = np.clip(np.searchsorted(self.cdf, u, side="right") - 1, 0, self.knots.size - 2)
        r = self.knots[k] + (u - self.cdf[k]) * self.slope[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = self.r_end * ((1 - u) / (1 - self.cdf_end)) ** (-1 / self.tail_power)
        return np.where(u < self.cdf_end, r, tail)

    def interval_values(self, profile):
        """One-sided values of a radial profile at both ends of each interval."""
        a, b = self.knots[:-1], self.knots[1:]
        lo = np.asarray(profile(a * (1 + 1e-13)), dtype=float)
        hi = np.asarray(profile(b * (1 - 1e-13)), dtype=float)
        dc = np.diff(self.cdf)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(dc > 0, (hi - lo) / dc, 0.0)
        return lo, s


def direct_table(table, weights=(), rtol=1e-6):
    """Uniform-in-``u`` quantile table used for the bulk of the draws.

    Row ``j`` holds ``r(j/G)``, its forward difference, and the same pair for
    every weight profile, so a draw costs one table row.  Cells are accepted
    while linear interpolation in ``u`` reproduces the knot-table quantile
    (and the weights) at the cell midpoint to relative accuracy ``rtol``;
    draws above the first rejected cell use the knot table.

    Returns
    -------
    direct : ndarray, shape (G, 2 + 2 * n_q)
    u_split : float
    """
    g = table.guide.size
    u = np.arange(g + 1) / g
    u_end = np.minimum(u, np.nextafter(table.cdf_end, 0))
    r = table.quantile(u_end)
    cols = [r[:-1], np.diff(r)]
    mid = (np.arange(g) + 0.5) / g
    r_mid = table.quantile(np.minimum(mid, table.cdf_end))
    ok = np.abs(0.5 * (r[:-1] + r[1:]) - r_mid) <= rtol * r_mid
    for q in weights:
        qv = np.asarray(q.radial(r), dtype=float)
        qm = np.asarray(q.radial(r_mid), dtype=float)
        scale = max(float(np.max(np.abs(qv))), 1e-300)
        ok &= np.abs(0.5 * (qv[:-1] + qv[1:]) - qm) <= rtol * np.maximum(np.abs(qm), 1e-3 * scale)
        cols += [qv[:-1], np.diff(qv)]
    ok &= u[1:] < table.cdf_end
    bad = np.flatnonzero(~ok)
    u_split = (bad[0] if bad.size else g) / g
    return np.ascontiguousarray(np.column_stack(cols)), float(u_split)


def _tail_power(measure):
    if isinstance(measure, StableMeasure):
        return measure.alpha
    ends = getattr(measure, "_ends", None)
    if ends is not None:
        return -(ends[5] + measure.dimension)
    return 1.0


@lru_cache(maxsize=64)
def jump_table(measure, eps_cut, breakpoints=(), n_knots=4096):
    """Build the inverse CDF table for ``nu`` on ``|y| >= eps_cut``.

    At least ``n_knots`` log-spaced knots are used, and at least 256 per
    decade; the knot set also contains every requested breakpoint so that
    weights with jumps are tabulated exactly.
    """
    rate = measure.mass(eps_cut, math.inf)
    if not rate > 0:
        return None
    if math.isfinite(measure.support):
        r_end = measure.support
    else:
        r_end = 2 * eps_cut
        while measure.mass(r_end, math.inf) > _TAIL_EPS * rate:
            r_end *= 2.0
    decades = math.log10(r_end / eps_cut)
    m = max(n_knots, int(math.ceil(256 * decades)))
    knots = np.geomspace(eps_cut, r_end, m + 1)
    extra = [b for b in breakpoints if eps_cut < b < r_end]
    if extra:
        knots = np.unique(np.concatenate([knots, extra]))
    a, b = knots[:-1], knots[1:]
    x, w = gauss_legendre(16)
    rr = a[:, None] + (b - a)[:, None] * x[None, :]
    dens = measure.density(rr) * rr ** (measure.dimension - 1) * sphere_area(measure.dimension)
    masses = (b - a) * (dens @ w)
    body = masses.sum()
    tail = measure.mass(r_end, math.inf)
    total = body + tail
    cdf = np.r_[0.0, np.cumsum(masses)] / total
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(masses > 0, (b - a) / (masses / total), 0.0)
    g = 8 * (knots.size - 1)
    guide = np.searchsorted(cdf, np.arange(g) / g, side="right") - 1
    guide = np.clip(guide, 0, knots.size - 2).astype(np.int32)
    return JumpTable(eps_cut, total, knots, cdf, slope, guide, _tail_power(measure))


# ---------------------------------------------------------------------------
# Kernels


@numba.njit(nogil=True, cache=True)
def _kernel_1d(rng, n_paths, mean, direct, u_split, cdf, knots, slope, guide, cdf_end, r_end, inv_p,
               qs, qslope, counts, jsum, wsum, gauss, rec, tail_path, tail_r):
    # at most two weights, kept in scalar accumulators for speed
    g_direct = direct.shape[0]
    g = guide.size
    n_q = qs.shape[0]
    record = rec.shape[0] > 0
    off = 0
    ntail = 0
    overflow = False
    for p in range(n_paths):
        c = rng.poisson(mean)
        counts[p] = c
        acc = 0.0
        w0 = 0.0
        w1 = 0.0
        for i in range(c):
            u = 2.0 * rng.random()
            neg = u >= 1.0
            if neg:
                u -= 1.0
            if u < u_split:
                x = u * g_direct
                j = int(x)
                f = x - j
                r = direct[j, 0] + f * direct[j, 1]
                if n_q > 0:
                    w0 += direct[j, 2] + f * direct[j, 3]
                    if n_q > 1:
                        w1 += direct[j, 4] + f * direct[j, 5]
            elif u < cdf_end:
                k = guide[int(u * g)]
                while cdf[k + 1] <= u:
                    k += 1
                du = u - cdf[k]
                r = knots[k] + du * slope[k]
                if n_q > 0:
                    w0 += qs[0, k] + du * qslope[0, k]
                    if n_q > 1:
                        w1 += qs[1, k] + du * qslope[1, k]
            else:
                r = r_end * ((1.0 - u) / (1.0 - cdf_end)) ** (-inv_p)
                if ntail < tail_r.size:
                    tail_path[ntail] = p
                    tail_r[ntail] = r
                ntail += 1
            y = -r if neg else r
            acc += y
            if record:
                if off + i < rec.shape[0]:
                    rec[off + i, 0] = y
                else:
                    overflow = True
        off += c
        jsum[p, 0] = acc
        if n_q > 0:
            wsum[p, 0] = w0
            if n_q > 1:
                wsum[p, 1] = w1
        gauss[p, 0] = rng.standard_normal()
    return ntail, off, overflow


@numba.njit(nogil=True, cache=True)
def _kernel_nd(rng, n_paths, mean, direct, u_split, cdf, knots, slope, guide, cdf_end, r_end, inv_p,
               qs, qslope, counts, jsum, wsum, gauss, rec, tail_path, tail_r):
    g_direct = direct.shape[0]
    g = guide.size
    n_q = qs.shape[0]
    d = jsum.shape[1]
    record = rec.shape[0] > 0
    direction = np.empty(d)
    off = 0
    ntail = 0
    overflow = False
    for p in range(n_paths):
        c = rng.poisson(mean)
        counts[p] = c
        for i in range(c):
            u = rng.random()
            if u < u_split:
                x = u * g_direct
                j = int(x)
                f = x - j
                r = direct[j, 0] + f * direct[j, 1]
                for a in range(n_q):
                    wsum[p, a] += direct[j, 2 + 2 * a] + f * direct[j, 3 + 2 * a]
            elif u < cdf_end:
                k = guide[int(u * g)]
                while cdf[k + 1] <= u:
                    k += 1
                du = u - cdf[k]
                r = knots[k] + du * slope[k]
                for a in range(n_q):
                    wsum[p, a] += qs[a, k] + du * qslope[a, k]
            else:
                r = r_end * ((1.0 - u) / (1.0 - cdf_end)) ** (-inv_p)
                if ntail < tail_r.size:
                    tail_path[ntail] = p
                    tail_r[ntail] = r
                ntail += 1
            nrm = 0.0
            for a in range(d):
                direction[a] = rng.standard_normal()
                nrm += direction[a] * direction[a]
            nrm = r / np.sqrt(nrm)
            for a in range(d):
                y = direction[a] * nrm
                jsum[p, a] += y
                if record:
                    if off + i < rec.shape[0]:
                        rec[off + i, a] = y
                    else:
                        overflow = True
        off += c
        for a in range(d):
            gauss[p, a] = rng.standard_normal()
    return ntail, off, overflow


# ---------------------------------------------------------------------------
# Batches


@dataclass(frozen=True, eq=False)
class PathBatch:
    """Endpoint decomposition of ``n`` sampled paths at horizon ``t``.

    Attributes
    ----------
    jump_sum : ndarray, shape (n, d)
        Sum of the jumps with ``|y| >= eps_cut``.
    gaussian : ndarray, shape (n, d)
        Brownian increment plus the Gaussian small-jump replacement.
    drift_part : ndarray, shape (d,)
    counts : ndarray, shape (n,)
        Number of jumps per path.
    weights : ndarray, shape (n, n_q)
        Compensated integrals ``W = sum_i q(y_i) - t int_{|y|>=eps} q dnu``,
        one column per requested weight.
    """

    t: float
    eps_cut: float
    seed: RngSeed
    jump_sum: np.ndarray
    gaussian: np.ndarray
    drift_part: np.ndarray
    counts: np.ndarray
    weights: np.ndarray

    @property
    def n_paths(self):
        return self.counts.size

    @property
    def endpoints(self):
        return self.drift_part + self.gaussian + self.jump_sum

    @property
    def antithetic_endpoints(self):
        """Endpoints with the Gaussian part reflected (same jumps, same ``W``)."""
        return self.drift_part - self.gaussian + self.jump_sum

    def endpoints_1d(self, antithetic=False):
        e = self.antithetic_endpoints if antithetic else self.endpoints
        return e[:, 0]


def _gaussian_root(model, eps_cut, table):
    d = model.dimension
    small = model.measure.second_moment(eps_cut) / d if table is not None else 0.0
    cov = model.Q + small * np.eye(d)
    vals, vecs = np.linalg.eigh(cov)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def _validate(model, t, eps_cut):
    if not isinstance(model, LevyModel):
        raise ConfigError("model must be a LevyModel")
    if not t > 0:
        raise ConfigError(f"horizon t must be positive, got {t}")
    if eps_cut is None:
        eps_cut = default_eps_cut(model.measure)
    eps_cut = float(eps_cut)
    if not 0 < eps_cut <= 1 and not isinstance(model.measure, ZeroMeasure):
        raise ConfigError(f"eps_cut must lie in (0, 1], got {eps_cut}")
    return eps_cut


def _q_tables(table, weights):
    if table is None or not weights:
        m = 0 if table is None else table.knots.size - 1
        return np.zeros((len(weights), m)), np.zeros((len(weights), m))
    lo, sl = zip(*(table.interval_values(q.radial) for q in weights))
    return np.ascontiguousarray(lo), np.ascontiguousarray(sl)


def _direct(table, weights):
    if table is None:
        return np.zeros((1, 2)), 0.0
    return direct_table(table, weights)


@lru_cache(maxsize=256)
def compensator(q, eps_cut):
    """``int_{|y| >= eps_cut} q dnu`` (cached per weight object)."""
    return q.integrate(r_min=eps_cut)


def _run_block(args):
    (seed, block, n, mean, table, direct, u_split, qs, qsl, d, record_cap) = args
    rng = seed.generator(block)
    counts = np.zeros(n, dtype=np.int64)
    jsum = np.zeros((n, d))
    wsum = np.zeros((n, qs.shape[0]))
    gauss = np.zeros((n, d))
    tail_path = np.zeros(64 + int(n * mean * 1e-9), dtype=np.int64)
    tail_r = np.zeros(tail_path.size)
    rec = np.zeros((record_cap, d))
    if table is None:
        # no jumps: only the Gaussian draws
        for p in range(n):
            gauss[p] = rng.standard_normal(d)
        return counts, jsum, wsum, gauss, rec[:0], tail_path[:0], tail_r[:0]
    common = (table.cdf, table.knots, table.slope, table.guide, table.cdf_end, table.r_end,
              1.0 / table.tail_power)
    if d > 1:
        ntail, njumps, overflow = _kernel_nd(rng, n, mean, direct, u_split, *common, qs, qsl,
                                             counts, jsum, wsum, gauss, rec, tail_path, tail_r)
    else:
        # the 1-d kernel carries two weights per pass; further weights replay the same stream
        n_q = qs.shape[0]
        for g0 in range(0, max(n_q, 1), 2):
            grp = list(range(g0, min(g0 + 2, n_q)))
            cols = [0, 1] + [c for a in grp for c in (2 + 2 * a, 3 + 2 * a)]
            ws = np.zeros((n, len(grp)))
            if g0 > 0:
                rng = seed.generator(block)
                counts, jsum, gauss = counts.copy(), jsum.copy(), gauss.copy()
                rec = np.zeros((0, 1))
            ntail, nj, ovf = _kernel_1d(rng, n, mean, np.ascontiguousarray(direct[:, cols]),
                                        u_split, *common, qs[grp], qsl[grp], counts, jsum, ws,
                                        gauss, rec, tail_path, tail_r)
            wsum[:, grp] = ws
            if g0 == 0:
                njumps, overflow, rec0 = nj, ovf, rec
        rec = rec0
    if ntail > tail_r.size:
        raise SamplerError("tail-jump buffer overflow; increase eps_cut")
    if overflow:
        return None
    return counts, jsum, wsum, gauss, rec[:njumps], tail_path[:ntail], tail_r[:ntail]


def _prepare(model, t, eps_cut, weights):
    eps_cut = _validate(model, t, eps_cut)
    measure = model.measure
    bps = tuple(sorted({b for q in weights for b in q.breakpoints} | {q.r_min for q in weights}
                       | {q.r_max for q in weights if math.isfinite(q.r_max)}))
    table = None if isinstance(measure, ZeroMeasure) else jump_table(measure, eps_cut, bps)
    mean = 0.0 if table is None else table.rate * t
    if mean > MAX_JUMPS_PER_PATH:
        raise SamplerError(f"expected {mean:.3g} jumps per path; increase eps_cut (now {eps_cut:g})")
    for q in weights:
        if q.measure != measure:
            raise ConfigError("weight and model use different Levy measures")
    return eps_cut, table, mean


def sample_batch(model, t, n_paths, rng, eps_cut=None, weights=(), *, threads=None):
    """Sample ``n_paths`` endpoints and compensated weight integrals.

    Parameters
    ----------
    model : LevyModel
    t : float
    n_paths : int
    rng : RngSeed
    eps_cut : float, optional
        Small-jump radius; defaults to :func:`default_eps_cut`.
    weights : sequence of QWeight
        Weights ``q`` whose compensated integrals are accumulated.
    threads : int, optional
        Worker threads (default from ``LEVYSMOOTH_THREADS``).

    Returns
    -------
    PathBatch
    """
    weights = tuple(weights)
    eps_cut, table, mean = _prepare(model, t, eps_cut, weights)
    d = model.dimension
    qs, qsl = _q_tables(table, weights)
    direct, u_split = _direct(table, weights)
    n_paths = int(n_paths)
    if n_paths < 1:
        raise ConfigError("n_paths must be positive")
    jobs = [(rng, b, min(BLOCK_SIZE, n_paths - b * BLOCK_SIZE), mean, table, direct, u_split, qs, qsl,
             d, 0)
            for b in range(-(-n_paths // BLOCK_SIZE))]
    nthreads = thread_count(threads)
    if nthreads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(j) for j in jobs]
    counts = np.concatenate([p[0] for p in parts])
    jsum = np.concatenate([p[1] for p in parts])
    wsum = np.concatenate([p[2] for p in parts])
    z = np.concatenate([p[3] for p in parts])
    for b, p in enumerate(parts):
        if p[5].size:
            idx = p[5] + b * BLOCK_SIZE
            for j, q in enumerate(weights):
                np.add.at(wsum[:, j], idx, q.radial(p[6]))
    root = _gaussian_root(model, eps_cut, table)
    gauss = math.sqrt(t) * z @ root.T
    comp = np.array([t * compensator(q, eps_cut) for q in weights])
    return PathBatch(float(t), eps_cut, rng, jsum, gauss, t * model.m, counts,
                     wsum - comp[None, :] if weights else wsum)


# ---------------------------------------------------------------------------
# Individual paths


@dataclass(frozen=True, eq=False)
class JumpPath:
    """One trajectory on ``[0, t]``.

    Attributes
    ----------
    t : float
    times : ndarray, shape (n,)
        Strictly increasing jump times in ``(0, t]``.
    jumps : ndarray, shape (n, d)
        Jumps, all with ``|y| >= epsilon_cut``.
    brownian_increment : ndarray, shape (d,)
        ``W_Q(t)`` plus the Gaussian small-jump replacement.
    drift_part : ndarray, shape (d,)
    epsilon_cut : float
    centering : ndarray, shape (d,)
        ``int_{eps <= |y| <= 1} y nu(dy)``; zero for the symmetric measures
        used here.
    """

    t: float
    times: np.ndarray
    jumps: np.ndarray
    brownian_increment: np.ndarray
    drift_part: np.ndarray
    epsilon_cut: float
    centering: np.ndarray

    @property
    def events(self):
        return list(zip(self.times.tolist(), [tuple(y) for y in self.jumps.tolist()]))

    def endpoint(self):
        return (self.drift_part + self.brownian_increment + self.jumps.sum(axis=0)
                - self.t * self.centering)

    def position(self, s):
        """Pathwise position at time ``s`` with the Gaussian part interpolated linearly.

        Only the jump part is exact; the Brownian bridge is not resampled.
        """
        frac = s / self.t
        k = np.searchsorted(self.times, s, side="right")
        return (frac * (self.drift_part + self.brownian_increment) + self.jumps[:k].sum(axis=0)
                - s * self.centering)

    def to_bytes(self):
        buf = io.BytesIO()
        write_path_dump(self, buf)
        return buf.getvalue()


def sample_paths(model, t, n_paths, rng, eps_cut=None):
    """Materialize the first ``n_paths`` paths of ``sample_batch(model, t, ., rng)``."""
    eps_cut, table, mean = _prepare(model, t, eps_cut, ())
    direct, u_split = _direct(table, ())
    d = model.dimension
    n_paths = int(n_paths)
    out = []
    for b in range(-(-n_paths // BLOCK_SIZE)):
        n = min(BLOCK_SIZE, n_paths - b * BLOCK_SIZE)
        cap = int(n * mean + 10 * math.sqrt(n * mean + 1) + 64)
        while True:
            res = _run_block((rng, b, n, mean, table, direct, u_split, np.zeros((0, 0)),
                              np.zeros((0, 0)), d, cap))
            if res is not None:
                break
            cap *= 2
        counts, jsum, _, z, rec, _, _ = res
        times_rng = rng.generator(b, 1)
        root = _gaussian_root(model, eps_cut, table)
        offs = np.r_[0, np.cumsum(counts)]
        for p in range(n):
            # jump sizes are independent of the (exchangeable) jump times
            times = t - np.sort(t * times_rng.random(counts[p]))[::-1]
            out.append(JumpPath(float(t), times, rec[offs[p]:offs[p + 1]].copy(),
                                math.sqrt(t) * root @ z[p], t * model.m, eps_cut, np.zeros(d)))
    return out


def sample_path(model, t, eps_cut, rng):
    """The first path of the batch ``(model, t, eps_cut, rng)``."""
    return sample_paths(model, t, 1, rng, eps_cut)[0]


def compensated_integral(path, q):
    """``sum_i q(y_i) - t int_{|y| >= eps_cut} q dnu`` along one path.

    Discarding the jumps below ``eps_cut`` biases the compensated integral of
    ``q`` toward that of ``q 1_{|y| >= eps_cut}``: the variance is
    ``t int_{|y|>=eps} q^2 dnu``, which tends to ``t ||q||^2_{L^2(nu)}`` as
    ``eps_cut -> 0``.
    """
    if q.l2nu_norm_sq == 0.0:
        return 0.0
    vals = q(path.jumps[:, 0] if path.jumps.shape[1] == 1 else path.jumps)
    return float(np.sum(vals) - path.t * compensator(q, path.epsilon_cut))


# ---------------------------------------------------------------------------
# Exact stable increments


def cms_symmetric_stable(gen, alpha, scale, size):
    """Chambers-Mallows-Stuck draws with characteristic function ``exp(-|scale xi|^alpha)``.

    Parameters
    ----------
    gen : numpy.random.Generator
    alpha : float in (0, 2]
    scale : float
    size : int or tuple
    """
    v = np.pi * (gen.random(size) - 0.5)
    w = gen.standard_exponential(size)
    if alpha == 1.0:
        return scale * np.tan(v)
    x = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
         * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
    return scale * x


def sample_endpoints(model, t, n_paths, rng, eps_cut=None, backend="jumps", *, threads=None):
    """Endpoints ``L_t`` of ``n_paths`` paths, shape ``(n, d)``.

    ``backend="cms"`` draws exact increments for an untruncated stable
    measure in ``d = 1`` (with any drift and Gaussian part).
    """
    if backend == "jumps":
        return sample_batch(model, t, n_paths, rng, eps_cut, threads=threads).endpoints
    if backend != "cms":
        raise ConfigError(f"unknown backend {backend!r}")
    mu = model.measure
    if not (isinstance(mu, StableMeasure) and mu.is_stable and model.dimension == 1):
        raise ConfigError("CMS backend needs an untruncated stable measure in d = 1")
    sigma = (t * stable_constant(1, mu.alpha)) ** (1.0 / mu.alpha)
    out = np.empty((int(n_paths), 1))
    for b in range(-(-int(n_paths) // BLOCK_SIZE)):
        gen = rng.generator(b)
        sl = slice(b * BLOCK_SIZE, min((b + 1) * BLOCK_SIZE, int(n_paths)))
        n = sl.stop - sl.start
        x = cms_symmetric_stable(gen, mu.alpha, sigma, n)
        x = x + math.sqrt(t * model.Q[0, 0]) * gen.standard_normal(n)
        out[sl, 0] = x + t * model.m[0]
    return out


# ---------------------------------------------------------------------------
# Dumps

_MAGIC = b"LVSPATH\0"
_VERSION = 1


def write_path_dump(path, fh):
    """Binary little-endian dump: magic, version, d, n, then float64 fields."""
    d = path.jumps.shape[1]
    n = path.times.size
    fh.write(_MAGIC)
    fh.write(struct.pack("<IIQ", _VERSION, d, n))
    fh.write(struct.pack("<dd", path.t, path.epsilon_cut))
    for arr in (path.drift_part, path.brownian_increment, path.centering, path.times, path.jumps):
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_path_dump(fh):
    """Inverse of :func:`write_path_dump`."""
    if fh.read(8) != _MAGIC:
        raise ConfigError("not a path dump")
    version, d, n = struct.unpack("<IIQ", fh.read(16))
    if version != _VERSION:
        raise ConfigError(f"unsupported path dump version {version}")
    t, eps = struct.unpack("<dd", fh.read(16))
    take = lambda k: np.frombuffer(fh.read(8 * k), dtype="<f8").astype(float)
    drift, brown, cent = take(d), take(d), take(d)
    times = take(n)
    jumps = take(n * d).reshape(n, d)
    return JumpPath(t, times, jumps, brown, drift, eps, cent)


def endpoint_summary_csv(endpoints, fh, header="# levysmooth endpoint-summary v1"):
    """Write per-coordinate endpoint statistics as CSV."""
    e = np.asarray(endpoints, dtype=float)
    e = e.reshape(e.shape[0], -1)
    fh.write(header + "\n")
    fh.write("coordinate,n,mean,std,q01,q25,median,q75,q99\n")
    for j in range(e.shape[1]):
        c = e[:, j]
        qs = np.quantile(c, [0.01, 0.25, 0.5, 0.75, 0.99])
        row = [j, c.size, c.mean(), c.std(ddof=1) if c.size > 1 else 0.0, *qs]
        fh.write(",".join(str(x) if isinstance(x, (int, np.integer)) else repr(float(x)) for x in row) + "\n")
