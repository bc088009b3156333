"""Nonlocal operators: ``A_q``, fractional Laplacians and iterated differences.

Pointwise integrals ``int [f(x+y) - f(x)] k(y) nu(dy)`` with radial ``k`` are
symmetrized to ``int [f(x+y) + f(x-y) - 2 f(x)]/2 k(y) nu(dy)``, evaluated by
dyadic quadrature on ``|y| >= delta`` and completed inside ``delta`` by the
second-order Taylor term ``Delta f(x)/(2d) int_{|y|<delta} |y|^2 k dnu``.
Evaluating ``f(x+y) - f(x)`` for ``|y|`` near machine precision would
otherwise amplify rounding errors by the singular weight.

Grid versions act as Fourier multipliers: ``A_q`` multiplies by
``-psi_q(xi)`` with ``psi_q(xi) = int (1 - cos<xi, y>) q(y) nu(dy)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy import integrate

from .exceptions import ConfigError
from .grid import GridFunction
from .levy_model import QWeight, StableMeasure, integrate_profile, stable_constant
from .quadrature import one_minus_lambda, radial_rule, sphere_directions
from .semigroup import apply_multiplier

__all__ = ["DifferenceStencil", "iterated_difference", "apply_Aq", "apply_Aq_grid",
           "weighted_symbol", "frac_laplacian_singular", "frac_laplacian_spectral",
           "singular_to_spectral_ratio", "aq_sup_bound"]

#: Inner radius below which the Taylor term replaces quadrature.
DEFAULT_DELTA = 1e-4


@dataclass(frozen=True)
class DifferenceStencil:
    """Offsets ``y_1, ..., y_n`` of the iterated difference ``nabla^n``."""

    offsets: tuple

    def __post_init__(self):
        offs = tuple(np.atleast_1d(np.asarray(y, dtype=float)) for y in self.offsets)
        if not offs:
            raise ConfigError("a stencil needs at least one offset")
        if len({o.shape for o in offs}) != 1:
            raise ConfigError("stencil offsets must share one dimension")
        if not all(np.all(np.isfinite(o)) for o in offs):
            raise ConfigError("stencil offsets must be finite")
        object.__setattr__(self, "offsets", tuple(tuple(float(v) for v in o) for o in offs))

    @property
    def order(self):
        return len(self.offsets)

    @property
    def dimension(self):
        return len(self.offsets[0])


def iterated_difference(stencil, f, x):
    """``sum_{S} (-1)^{n-|S|} f(x + sum_{i in S} y_i)`` over subsets ``S``.

    ``x`` may be a single point or an array of points (leading axes).
    """
    d = stencil.dimension
    x = np.asarray(x, dtype=float)
    ys = np.array(stencil.offsets)
    n = stencil.order
    total = 0.0
    for k in range(n + 1):
        for sub in combinations(range(n), k):
            shift = ys[list(sub)].sum(axis=0) if sub else np.zeros(d)
            pt = x + (shift[0] if d == 1 else shift)
            total = total + (-1) ** (n - k) * np.asarray(f(pt), dtype=float)
    return total


# ---------------------------------------------------------------------------
# Pointwise quadrature


def _as_callable(f):
    if isinstance(f, GridFunction):
        return lambda pts: f.interpolate(pts)
    return f


def _laplacian_fd(f, x, d, h):
    """Central-difference Laplacian of ``f`` at ``x`` with step ``h``."""
    fx = float(np.asarray(f(x)))
    total = 0.0
    for a in range(d):
        e = np.zeros(d)
        e[a] = h
        up = x + (e[0] if d == 1 else e)
        dn = x - (e[0] if d == 1 else e)
        total += float(np.asarray(f(up))) + float(np.asarray(f(dn))) - 2 * fx
    return total / h ** 2


def _symmetric_integral(measure, kernel, f, x, *, delta, r_max, breakpoints, n_angles, bandwidth,
                        k_out):
    d = measure.dimension
    x = np.asarray(x, dtype=float)
    if d == 1:
        x = float(x)
    f = _as_callable(f)
    fx = float(np.asarray(f(x)))
    rule = radial_rule(measure, float(delta), float(r_max), k_out=k_out, n_gl=16,
                       bandwidth=float(bandwidth), breakpoints=tuple(breakpoints))
    if rule.size == 0:
        outer = 0.0
    else:
        if d == 1:
            r = rule.r
            vals = 0.5 * (np.asarray(f(x + r), dtype=float) + np.asarray(f(x - r), dtype=float)) - fx
        else:
            if d > 2:
                raise ConfigError("pointwise nonlocal operators support d <= 2")
            dirs = sphere_directions(d, n_angles)
            pts = x[None, None, :] + rule.r[:, None, None] * dirs[None, :, :]
            vals = np.asarray(f(pts.reshape(-1, d)), dtype=float).reshape(rule.size, -1).mean(axis=1) - fx
        outer = rule.integrate(vals * kernel(rule.r), inner_tail=False)
    # Taylor completion inside delta
    lap = _laplacian_fd(f, x, d, delta)
    m2 = integrate_profile(measure, lambda r: r ** 2 * kernel(r), 0.0, min(delta, r_max))
    return outer + lap / (2 * d) * m2


def apply_Aq(q, f, x, measure=None, *, delta=DEFAULT_DELTA, n_angles=64, bandwidth=0.0, k_out=12):
    """``A_q f(x) = int [f(x+y) - f(x)] q(y) nu(dy)``.

    Parameters
    ----------
    q : QWeight
    f : callable or GridFunction
    x : float or array_like of shape (d,)
    measure : LevyMeasure, optional
        Must equal ``q.measure`` when given.
    delta : float
        Radius of the Taylor-completed inner ball.
    bandwidth : float
        Largest angular frequency of ``f`` (refines oscillatory panels).
    k_out : int
        For unbounded ``q`` support, quadrature stops at ``2^k_out``; beyond
        it the integrand is replaced by its average on the last annulus.

    Returns
    -------
    float
    """
    if measure is not None and measure != q.measure:
        raise ConfigError("q is defined for a different Levy measure")
    if q.l2nu_norm_sq == 0 and q.label == "zero":
        return 0.0
    if isinstance(f, GridFunction) and bandwidth == 0:
        bandwidth = math.pi / f.spacing
    bps = tuple(b for b in q.breakpoints if b > delta) + ((q.r_min,) if q.r_min > delta else ())
    val = _symmetric_integral(q.measure, q.radial, f, x, delta=max(delta, 0.0), r_max=q.r_max,
                              breakpoints=bps, n_angles=n_angles, bandwidth=bandwidth, k_out=k_out)
    return float(val)


# ---------------------------------------------------------------------------
# Fourier versions


def weighted_symbol(q, kappa):
    """``psi_q(kappa) = int (1 - Lambda_d(kappa |y|)) q(y) nu(dy)`` for ``kappa >= 0``.

    Unbounded weights are supported in d=1 only (oscillatory tail by
    ``scipy.integrate.quad`` with a cosine weight).
    """
    kappa = np.asarray(kappa, dtype=float)
    uk, inv = np.unique(np.abs(kappa).ravel(), return_inverse=True)
    return _weighted_symbol_cached(q, tuple(uk))[inv].reshape(kappa.shape)


@lru_cache(maxsize=32)
def _weighted_symbol_cached(q, kappas):
    k = np.array(kappas)
    measure = q.measure
    d = measure.dimension
    out = np.zeros(k.size)
    if q.label == "zero" or k.size == 0 or k.max() == 0:
        return out
    r_in = min(q.r_max, measure.support, 1.0 if math.isinf(q.r_max) else q.r_max)
    rule = radial_rule(measure, q.r_min, r_in, bandwidth=float(k.max()),
                       breakpoints=tuple(b for b in q.breakpoints if q.r_min < b < r_in))
    qr = q.radial(rule.r)
    step = max(1, 4_000_000 // max(rule.size, 1))
    for i in range(0, k.size, step):
        kc = k[i:i + step]
        out[i:i + step] = rule.integrate(one_minus_lambda(d, np.outer(rule.r, kc)) * qr[:, None],
                                         outer_tail=False)
    hi = min(q.r_max, measure.support)
    if hi > r_in:
        if d != 1:
            raise ConfigError("weights beyond the unit ball need d = 1 for the Fourier symbol")
        mass = q.integrate(r_min=r_in)
        rho = lambda r: float(measure.density(np.array([r]))[0] * q.radial(np.array([r]))[0])
        for j, kk in enumerate(k):
            if kk == 0:
                continue
            if math.isinf(hi):
                val, _ = integrate.quad(rho, r_in, math.inf, weight="cos", wvar=kk, limlst=200)
            else:
                val, _ = integrate.quad(rho, r_in, hi, weight="cos", wvar=kk,
                                        limit=max(200, int(kk * (hi - r_in))))
            out[j] += mass - 2.0 * val
    return out


def apply_Aq_grid(q, g):
    """``A_q`` on a periodic grid function (multiplier ``-psi_q``)."""
    if g.dimension != q.measure.dimension:
        raise ConfigError("grid and weight dimensions differ")
    xi = g.spec.frequencies()
    kappa = np.abs(xi) if g.dimension == 1 else np.linalg.norm(xi, axis=-1)
    return g.with_values(apply_multiplier(g.values, -weighted_symbol(q, kappa)),
                         label=f"A_q {g.label}")


def frac_laplacian_spectral(s, f):
    """``(-Delta)^s f`` with the multiplier ``|xi|^{2s}``, ``0 < s <= 1``."""
    if not 0 < s <= 1:
        raise ConfigError(f"spectral exponent s must lie in (0, 1], got {s}")
    if not isinstance(f, GridFunction):
        raise ConfigError("frac_laplacian_spectral needs a GridFunction")
    xi = f.spec.frequencies()
    kappa = np.abs(xi) if f.dimension == 1 else np.linalg.norm(xi, axis=-1)
    return f.with_values(apply_multiplier(f.values, kappa ** (2 * s)),
                         label=f"(-D)^{s:g} {f.label}")


def singular_to_spectral_ratio(s, d=1):
    """Ratio of :func:`frac_laplacian_singular` to :func:`frac_laplacian_spectral`.

    The un-normalized singular integral equals ``-c(d, 2s)`` times the
    spectral form, with ``c`` from :func:`~levysmooth.levy_model.stable_constant`.
    """
    return -stable_constant(d, 2 * s)


def frac_laplacian_singular(s, f, x, d=1, *, delta=DEFAULT_DELTA, bandwidth=0.0, k_out=12,
                            n_angles=64):
    """``int (f(x+y) - f(x)) |y|^{-d-2s} dy`` without normalizing constant.

    Parameters
    ----------
    s : float in (0, 1)
        Half the singularity order, ``sigma = 2 s``.
    f : callable or GridFunction
    x : float or array_like
    d : int
    bandwidth : float
        Largest angular frequency of ``f``.

    Notes
    -----
    The integrand is symmetrized, which is exact for the even kernel and
    makes the integral absolutely convergent for ``sigma >= 1``.
    """
    if not 0 < s < 1:
        raise ConfigError(f"singular exponent s must lie in (0, 1), got {s}")
    measure = StableMeasure(2 * s, d)
    if isinstance(f, GridFunction) and bandwidth == 0:
        bandwidth = math.pi / f.spacing
    one = lambda r: np.ones_like(np.asarray(r, dtype=float))
    return float(_symmetric_integral(measure, one, f, x, delta=delta, r_max=math.inf,
                                     breakpoints=(), n_angles=n_angles, bandwidth=bandwidth,
                                     k_out=k_out))


def aq_sup_bound(q, sup_f, lip_f):
    """Bound ``2|f| (nu(|y|>=1) int_{>=1} q^2)^{1/2} + |Df| (int_{<1}|y|^2 int_{<1} q^2)^{1/2}``."""
    mu = q.measure
    far = mu.mass(1.0, math.inf)
    q_far = q.norm_sq(1.0) if q.r_max > 1 else 0.0
    near_m2 = mu.second_moment(1.0)
    q_near = integrate_profile(mu, lambda r: q.radial(r) ** 2, q.r_min, min(1.0, q.r_max),
                               breakpoints=q.breakpoints)
    return 2 * sup_f * math.sqrt(far * q_far) + lip_f * math.sqrt(near_m2 * q_near)
