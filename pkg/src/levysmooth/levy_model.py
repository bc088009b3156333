"""Levy triplets, their symbols and integrals against the Levy measure.

Conventions
-----------
* Stable-type densities are un-normalized: ``nu(dy) = |y|^{-d-alpha} dy``
  (optionally cut at ``|y| < K``).  The symbol of the untruncated measure is
  then ``c(d, alpha) |xi|^alpha`` with :func:`stable_constant`.
* The symbol is the characteristic exponent, ``E exp(i<xi, L_t>) =
  exp(-t psi(xi))``, so

      psi(xi) = -i<xi, m> + <Q xi, xi>/2
                - int [exp(i<xi, y>) - 1 - i<xi, y> 1_{|y|<=1}] nu(dy).

  For the rotation invariant measures used here the jump part is real and
  equals ``int (1 - Lambda_d(|xi||y|)) nu(dy)``.
* Logarithms in :class:`LogStableMeasure` are base 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate, interpolate, special

from .exceptions import ConfigError, DivergenceError, InadmissibleWeightError, QuadratureError
from .quadrature import one_minus_lambda, radial_rule, sphere_area, sphere_directions

__all__ = [
    "LevyMeasure", "ZeroMeasure", "StableMeasure", "LogStableMeasure", "TabulatedMeasure",
    "LevyModel", "QWeight", "stable_constant", "levy_symbol", "jump_symbol",
    "nu_integrate", "integrate_profile", "make_qweight", "levy_condition",
    "measure_from_dict", "model_from_dict", "load_model", "save_model",
]


@lru_cache(maxsize=None)
def stable_constant(d, alpha):
    """``int (1 - cos y_1) |y|^{-d-alpha} dy`` in closed form.

    Equals ``pi^{d/2} Gamma(1 - alpha/2) / (alpha 2^{alpha-1} Gamma((d+alpha)/2))``;
    ``stable_constant(1, 1) == pi``.
    """
    if not 0 < alpha < 2:
        raise ConfigError(f"stable index must lie in (0, 2), got {alpha}")
    return (math.pi ** (d / 2) * math.gamma(1 - alpha / 2)
            / (alpha * 2 ** (alpha - 1) * math.gamma((d + alpha) / 2)))


def _check_dimension(d):
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < 1:
        raise ConfigError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


class LevyMeasure:
    """Base class for radial, absolutely continuous Levy measures.

    Subclasses provide the radial density ``rho`` (so ``nu(dy) = rho(|y|) dy``),
    the outer support radius and closed or numerical forms of

    * ``mass(a, b) = nu(a <= |y| < b)``
    * ``second_moment(a) = int_{|y| < a} |y|^2 nu(dy)``
    """

    kind = "abstract"
    dimension: int

    @property
    def support(self):
        return math.inf

    def density(self, r):
        raise NotImplementedError

    def mass(self, a, b=math.inf):
        raise NotImplementedError

    def second_moment(self, a):
        raise NotImplementedError

    def tail_mass(self, radius):
        return self.mass(radius, math.inf)

    @property
    def surface(self):
        return sphere_area(self.dimension)

    @property
    def is_stable(self):
        return False

    def to_dict(self):
        raise NotImplementedError

    @property
    def label(self):
        return self.kind


@dataclass(frozen=True)
class ZeroMeasure(LevyMeasure):
    """The null measure (pure Gaussian or deterministic models)."""

    dimension: int = 1
    kind = "none"

    def __post_init__(self):
        _check_dimension(self.dimension)

    @property
    def support(self):
        return 0.0

    def density(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def mass(self, a, b=math.inf):
        return 0.0

    def second_moment(self, a):
        return 0.0

    def to_dict(self):
        return {"kind": "none", "dimension": self.dimension}


@dataclass(frozen=True)
class StableMeasure(LevyMeasure):
    """``|y|^{-d-alpha} 1_{|y| < K}`` with ``K = inf`` allowed."""

    alpha: float
    dimension: int = 1
    K: float = math.inf

    def __post_init__(self):
        _check_dimension(self.dimension)
        if not 0 < self.alpha < 2:
            raise ConfigError(f"stable index must lie in (0, 2), got {self.alpha}")
        if not self.K > 0:
            raise ConfigError(f"truncation radius K must be positive, got {self.K}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "K", float(self.K))

    @property
    def kind(self):
        return "stable" if math.isinf(self.K) else "truncated_stable"

    @property
    def is_stable(self):
        return math.isinf(self.K)

    @property
    def support(self):
        return self.K

    def density(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            out = r ** (-self.dimension - self.alpha)
        return np.where((r > 0) & (r < self.K), out, 0.0)

    def mass(self, a, b=math.inf):
        b = min(b, self.K)
        if not a < b:
            return 0.0
        if a <= 0:
            return math.inf
        inv_b = 0.0 if math.isinf(b) else b ** -self.alpha
        return self.surface * (a ** -self.alpha - inv_b) / self.alpha

    def second_moment(self, a):
        a = min(a, self.K)
        return self.surface * a ** (2 - self.alpha) / (2 - self.alpha)

    def to_dict(self):
        out = {"kind": self.kind, "alpha": self.alpha, "dimension": self.dimension}
        if math.isfinite(self.K):
            out["K"] = self.K
        return out

    @property
    def label(self):
        k = "" if math.isinf(self.K) else f",K={self.K:g}"
        return f"{self.kind}(alpha={self.alpha:g}{k},d={self.dimension})"


@dataclass(frozen=True)
class LogStableMeasure(LevyMeasure):
    """``|log2 |y||^{2 alpha} |y|^{-d}`` on the unit ball, ``alpha > 1``."""

    alpha: float
    dimension: int = 1

    kind = "log_stable"

    def __post_init__(self):
        _check_dimension(self.dimension)
        if not self.alpha > 1:
            raise ConfigError(f"log-stable exponent must exceed 1, got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def support(self):
        return 1.0

    def density(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r > 0) & (r < 1)
        rr = np.where(inside, r, 0.5)
        return np.where(inside, np.abs(np.log2(rr)) ** (2 * self.alpha) * rr ** -self.dimension, 0.0)

    def mass(self, a, b=math.inf):
        b = min(b, 1.0)
        if not a < b:
            return 0.0
        if a <= 0:
            return math.inf
        p = 2 * self.alpha + 1
        sa, sb = -math.log2(a), -math.log2(b)
        return self.surface * math.log(2) * (sa ** p - sb ** p) / p

    def second_moment(self, a):
        a = min(a, 1.0)
        if a <= 0:
            return 0.0
        p = 2 * self.alpha + 1
        lam = 2 * math.log(2)
        return (self.surface * math.log(2) * math.gamma(p) * special.gammaincc(p, -lam * math.log2(a))
                / lam ** p)

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "dimension": self.dimension}

    @property
    def label(self):
        return f"log_stable(alpha={self.alpha:g},d={self.dimension})"


@dataclass(frozen=True)
class TabulatedMeasure(LevyMeasure):
    """Radial density given by samples, interpolated in log-log coordinates.

    Between samples the density is a monotone cubic (PCHIP) in ``log r``
    versus ``log rho``; beyond the first and last sample it continues as a
    power law with the slope of the two end samples.

    Parameters
    ----------
    radii, values : tuple of float
        Strictly increasing positive radii and positive density values.
    dimension : int
    cutoff : float
        The density vanishes for ``|y| >= cutoff``.
    """

    radii: tuple
    values: tuple
    dimension: int = 1
    cutoff: float = math.inf

    kind = "tabulated"

    def __post_init__(self):
        _check_dimension(self.dimension)
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.size < 2 or r.shape != v.shape:
            raise ConfigError("tabulated measure needs matching 1-D radii/values with >= 2 samples")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ConfigError("tabulated radii must be positive and strictly increasing")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ConfigError("tabulated density values must be positive and finite")
        object.__setattr__(self, "radii", tuple(float(x) for x in r))
        object.__setattr__(self, "values", tuple(float(x) for x in v))
        object.__setattr__(self, "cutoff", float(self.cutoff))
        lr, lv = np.log(r), np.log(v)
        p0 = (lv[1] - lv[0]) / (lr[1] - lr[0])
        p1 = (lv[-1] - lv[-2]) / (lr[-1] - lr[-2])
        d = self.dimension
        if p0 + d + 2 <= 0:
            raise ConfigError("tabulated density violates int |y|^2 nu(dy) < inf near 0")
        if math.isinf(self.cutoff) and p1 + d >= 0:
            raise ConfigError("tabulated density has infinite mass outside the unit ball")
        object.__setattr__(self, "_pchip", interpolate.PchipInterpolator(lr, lv, extrapolate=False))
        object.__setattr__(self, "_ends", (float(r[0]), float(v[0]), p0, float(r[-1]), float(v[-1]), p1))

    @property
    def support(self):
        return self.cutoff

    def density(self, r):
        r = np.asarray(r, dtype=float)
        r0, v0, p0, r1, v1, p1 = self._ends
        rr = np.clip(r, r0, r1)
        out = np.exp(self._pchip(np.log(rr)))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(r < r0, v0 * (r / r0) ** p0, out)
            out = np.where(r > r1, v1 * (r / r1) ** p1, out)
        return np.where((r > 0) & (r < self.cutoff), out, 0.0)

    def _radial(self, h, a, b):
        """``|S| int_a^b h(r) rho(r) r^{d-1} dr`` for ``0 < a < b < inf``."""
        rule = radial_rule(self, a, b, breakpoints=tuple(x for x in self.radii if a < x < b))
        return rule.integrate(h(rule.r), inner_tail=False, outer_tail=False)

    def mass(self, a, b=math.inf):
        b = min(b, self.cutoff)
        if not a < b:
            return 0.0
        if a <= 0:
            return math.inf
        r0, v0, p0, r1, v1, p1 = self._ends
        d = self.dimension
        tail = 0.0
        if math.isinf(b):
            c = max(a, r1)
            tail = self.surface * v1 * r1 ** -p1 * c ** (p1 + d) / -(p1 + d)
            b = c
        body = self._radial(np.ones_like, a, b) if a < b else 0.0
        return body + tail

    def second_moment(self, a):
        a = min(a, self.cutoff)
        r0, v0, p0, r1, v1, p1 = self._ends
        d = self.dimension
        e = min(a, r0)
        inner = self.surface * v0 * r0 ** -p0 * e ** (p0 + d + 2) / (p0 + d + 2)
        if a > r0:
            inner += self._radial(lambda r: r * r, r0, a)
        return inner

    def to_dict(self):
        out = {"kind": self.kind, "dimension": self.dimension,
               "radii": list(self.radii), "density": list(self.values)}
        if math.isfinite(self.cutoff):
            out["K"] = self.cutoff
        return out

    @property
    def label(self):
        return f"tabulated(n={len(self.radii)},d={self.dimension})"


def levy_condition(measure):
    """``int min(1, |y|^2) nu(dy)``; finite for every valid descriptor."""
    return measure.second_moment(1.0) + measure.mass(1.0, math.inf)


# ---------------------------------------------------------------------------
# Models and symbols


@dataclass(frozen=True)
class LevyModel:
    """Generating triplet ``(m, Q, nu)``.

    Parameters
    ----------
    measure : LevyMeasure, optional
        Jump measure; ``None`` means no jumps.
    drift : sequence of float, optional
    gaussian : float or (d, d) array_like, optional
        Covariance ``Q``.  A scalar ``s`` means ``s * I``.
    dimension : int, optional
        Needed only when neither ``measure`` nor ``drift`` fixes it.

    Notes
    -----
    Instances are immutable and hashable, so derived tables can be cached.
    """

    measure: LevyMeasure | None = None
    drift: tuple | None = None
    gaussian: tuple | float | None = None
    dimension: int | None = None

    def __post_init__(self):
        dims = set()
        if self.dimension is not None:
            dims.add(_check_dimension(self.dimension))
        if self.measure is not None:
            dims.add(self.measure.dimension)
        if self.drift is not None:
            dims.add(np.atleast_1d(np.asarray(self.drift, dtype=float)).size)
        if self.gaussian is not None and np.ndim(self.gaussian) == 2:
            dims.add(np.shape(self.gaussian)[0])
        if len(dims) > 1:
            raise ConfigError(f"inconsistent dimensions {sorted(dims)} across drift, Q and measure")
        d = dims.pop() if dims else 1
        measure = self.measure if self.measure is not None else ZeroMeasure(d)
        m = np.zeros(d) if self.drift is None else np.atleast_1d(np.asarray(self.drift, dtype=float))
        if self.gaussian is None:
            Q = np.zeros((d, d))
        elif np.ndim(self.gaussian) == 0:
            Q = float(self.gaussian) * np.eye(d)
        else:
            Q = np.asarray(self.gaussian, dtype=float)
        if Q.shape != (d, d):
            raise ConfigError(f"gaussian covariance must be {d}x{d}, got shape {Q.shape}")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(m))):
            raise ConfigError("drift and covariance must be finite")
        if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-12:
            raise ConfigError("gaussian covariance must be symmetric")
        if d and np.linalg.eigvalsh(0.5 * (Q + Q.T)).min() < -1e-12:
            raise ConfigError("gaussian covariance must be positive semidefinite")
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "drift", tuple(float(x) for x in m))
        object.__setattr__(self, "gaussian", tuple(tuple(float(x) for x in row) for row in Q))
        object.__setattr__(self, "dimension", d)

    @property
    def m(self):
        return np.array(self.drift)

    @property
    def Q(self):
        return np.array(self.gaussian)

    @property
    def is_symmetric(self):
        return not any(self.drift)

    @property
    def label(self):
        parts = [self.measure.label]
        if any(self.drift):
            parts.append("drift=" + ",".join(f"{x:g}" for x in self.drift))
        if np.any(self.Q):
            parts.append("Q")
        return "+".join(parts)

    def symbol(self, xi):
        return levy_symbol(self, xi)

    def to_dict(self):
        out = self.measure.to_dict()
        out["dimension"] = self.dimension
        if any(self.drift):
            out["drift"] = list(self.drift)
        if np.any(self.Q):
            out["gaussian"] = [list(row) for row in self.gaussian]
        return out


def _as_xi(xi, d):
    xi = np.asarray(xi, dtype=float)
    if d == 1:
        if xi.ndim >= 1 and xi.shape[-1] == 1 and xi.ndim > 1:
            xi = xi[..., 0]
        return xi[..., None]
    if xi.shape[-1] != d:
        raise ConfigError(f"frequency vectors must have trailing dimension {d}")
    return xi


def levy_symbol(model, xi):
    """Characteristic exponent ``psi(xi)`` of ``model``.

    Parameters
    ----------
    model : LevyModel
    xi : array_like
        For ``d = 1`` any array of scalars; otherwise shape ``(..., d)``.

    Returns
    -------
    complex or ndarray of complex
    """
    d = model.dimension
    x = _as_xi(xi, d)
    kappa = np.sqrt(np.sum(x * x, axis=-1))
    quad = 0.5 * np.einsum("...i,ij,...j->...", x, model.Q, x)
    lin = x @ model.m
    out = jump_symbol(model.measure, kappa) + quad - 1j * lin
    return complex(out) if np.ndim(out) == 0 else out


def jump_symbol(measure, kappa, closed_form=True):
    """Jump part ``int (1 - Lambda_d(kappa |y|)) nu(dy)`` at radii ``kappa >= 0``."""
    kappa = np.asarray(kappa, dtype=float)
    if isinstance(measure, ZeroMeasure):
        return np.zeros_like(kappa)
    if closed_form and measure.is_stable:
        return stable_constant(measure.dimension, measure.alpha) * np.abs(kappa) ** measure.alpha
    uk, inv = np.unique(np.abs(kappa).ravel(), return_inverse=True)
    vals = _jump_symbol_numeric(measure, uk)
    return vals[inv].reshape(kappa.shape)


def _jump_symbol_numeric(measure, kap):
    d = measure.dimension
    out = np.zeros(kap.size)
    pos = kap > 0
    k = kap[pos]
    if k.size == 0:
        return out
    R = min(measure.support, 1.0) if math.isinf(measure.support) else measure.support
    rule = radial_rule(measure, 0.0, R, bandwidth=float(k.max()))
    res = np.empty(k.size)
    step = max(1, 4_000_000 // max(rule.size, 1))
    for i in range(0, k.size, step):
        kc = k[i:i + step]
        vals = one_minus_lambda(d, np.outer(rule.r, kc))
        res[i:i + step] = rule.w @ vals
    res += k ** 2 / (2 * d) * measure.second_moment(rule.inner_edge)
    if math.isinf(measure.support):
        res += measure.mass(R, math.inf) - _oscillatory_tail(measure, k, R)
    out[pos] = res
    return out


def _oscillatory_tail(measure, kap, R):
    """``int_{|y| >= R} Lambda_d(kappa |y|) nu(dy)`` for unbounded support."""
    d = measure.dimension
    rho = lambda r: float(measure.density(np.array([r]))[0])
    out = np.empty(kap.size)
    for i, k in enumerate(kap):
        if d == 1:
            val, err = integrate.quad(rho, R, math.inf, weight="cos", wvar=k, limlst=200)
            out[i] = 2.0 * val
        else:
            # truncate where the remaining mass is negligible
            hi = R
            while measure.mass(hi, math.inf) > 1e-13 * max(measure.mass(R, math.inf), 1e-300):
                hi *= 2.0
            rule = radial_rule(measure, R, hi, bandwidth=k, k_out=0)
            out[i] = rule.integrate(1.0 - one_minus_lambda(d, k * rule.r), outer_tail=False)
    return out


# ---------------------------------------------------------------------------
# Integration against nu


def integrate_profile(measure, h, r_min=0.0, r_max=math.inf, *, breakpoints=(), k_max=60, n_gl=16,
                      bandwidth=0.0):
    """``int_{r_min <= |y| < r_max} h(|y|) nu(dy)`` for a radial integrand.

    ``h`` maps an array of radii to an array of values.  Raises
    :class:`DivergenceError` when the annulus sums fail to decay.
    """
    rule = radial_rule(measure, float(r_min), float(r_max), k_max=k_max, n_gl=n_gl,
                       bandwidth=float(bandwidth), breakpoints=tuple(breakpoints))
    if rule.size == 0:
        return 0.0
    return rule.integrate(np.asarray(h(rule.r), dtype=float))


def nu_integrate(measure, g, *, r_min=0.0, r_max=math.inf, radial=False, breakpoints=(),
                 n_angles=64, k_max=60, n_gl=16, bandwidth=0.0):
    """``int g(y) nu(dy)`` over ``r_min <= |y| < r_max``.

    Parameters
    ----------
    measure : LevyMeasure
    g : callable
        Vectorized integrand.  For ``d = 1`` it receives a 1-D array of
        points; for ``d >= 2`` an array of shape ``(n, d)``.
    radial : bool
        Declare ``g`` radial; required for ``d >= 3``.
    breakpoints : sequence of float
        Radii where ``g`` is not smooth.
    n_angles : int
        Angular nodes in ``d = 2``.
    bandwidth : float
        Angular frequency bound for oscillatory ``g``.

    Returns
    -------
    float

    Raises
    ------
    DivergenceError
        The integral does not converge at 0 or overflows.
    """
    d = measure.dimension
    rule = radial_rule(measure, float(r_min), float(r_max), k_max=k_max, n_gl=n_gl,
                       bandwidth=float(bandwidth), breakpoints=tuple(breakpoints))
    if rule.size == 0:
        return 0.0
    if radial:
        pts = rule.r[:, None] * np.eye(d)[0]
        vals = np.asarray(g(pts[:, 0] if d == 1 else pts), dtype=float)
    else:
        if d > 2:
            raise ValueError("non-radial integrands are only supported for d <= 2")
        dirs = sphere_directions(d, n_angles)
        pts = rule.r[:, None, None] * dirs[None, :, :]
        flat = pts.reshape(-1, d)
        vals = np.asarray(g(flat[:, 0] if d == 1 else flat), dtype=float)
        vals = vals.reshape(rule.size, dirs.shape[0]).mean(axis=1)
    return rule.integrate(vals)


# ---------------------------------------------------------------------------
# Weights q


@dataclass(frozen=True, eq=False)
class QWeight:
    """Radial weight ``q`` with cached ``||q||^2_{L^2(nu)}``.

    Attributes
    ----------
    measure : LevyMeasure
    profile : callable
        ``r -> q(r)`` for ``r > 0``.
    l2nu_norm_sq : float
    label : str
    r_min, r_max : float
        ``q`` vanishes outside ``r_min <= |y| < r_max``.
    breakpoints : tuple of float
        Radii where ``q`` is not smooth.
    """

    measure: LevyMeasure
    profile: Callable
    l2nu_norm_sq: float
    label: str = "q"
    r_min: float = 0.0
    r_max: float = math.inf
    breakpoints: tuple = field(default=())

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r >= self.r_min) & (r < self.r_max)
        return np.where(inside, self.profile(np.where(inside, r, 1.0)), 0.0)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        r = np.abs(y) if self.measure.dimension == 1 else np.linalg.norm(y, axis=-1)
        return self.radial(r)

    def integrate(self, h=None, r_min=None):
        """``int q(y) h(|y|) nu(dy)`` (``h = 1`` by default)."""
        lo = self.r_min if r_min is None else max(r_min, self.r_min)
        fn = (lambda r: self.radial(r)) if h is None else (lambda r: self.radial(r) * h(r))
        return integrate_profile(self.measure, fn, lo, self.r_max, breakpoints=self.breakpoints)

    def inner(self, other, r_min=0.0):
        """``int q phi 1_{|y| >= r_min} dnu`` for another weight ``phi``."""
        lo = max(r_min, self.r_min, other.r_min)
        hi = min(self.r_max, other.r_max)
        bps = tuple(sorted(set(self.breakpoints) | set(other.breakpoints)))
        return integrate_profile(self.measure, lambda r: self.radial(r) * other.radial(r), lo, hi,
                                 breakpoints=bps)

    def norm_sq(self, r_min=0.0, **kw):
        """Recompute ``int_{|y| >= r_min} q^2 dnu`` by quadrature."""
        lo = max(r_min, self.r_min)
        return integrate_profile(self.measure, lambda r: self.radial(r) ** 2, lo, self.r_max,
                                 breakpoints=self.breakpoints, **kw)

    def restricted(self, r_min):
        """The weight ``q 1_{|y| >= r_min}``."""
        lo = max(r_min, self.r_min)
        return QWeight(self.measure, self.profile, self.norm_sq(lo), f"{self.label}|>={r_min:g}",
                       lo, self.r_max, self.breakpoints)

    def scaled(self, c):
        prof = self.profile
        return QWeight(self.measure, lambda r: c * prof(r), c * c * self.l2nu_norm_sq,
                       f"{c:g}*{self.label}", self.r_min, self.r_max, self.breakpoints)


def make_qweight(measure, kind="beta_power", **params):
    """Construct a built-in :class:`QWeight`.

    Parameters
    ----------
    measure : LevyMeasure
    kind : {"beta_power", "annulus", "zero", "custom"}
        * ``beta_power``: ``|y|^beta`` on the unit ball.  Outside the ball
          ``outer="zero"`` (default) gives 0 and ``outer="power"`` gives
          ``|y|^{-outer_power}`` (default power 1).
        * ``annulus``: indicator of ``r_min <= |y| < r_max``.
        * ``zero``: ``q = 0``.
        * ``custom``: radial ``profile`` callable, optional ``breakpoints``,
          ``r_min``, ``r_max`` and ``label``.

    Raises
    ------
    InadmissibleWeightError
        If ``int q^2 dnu`` diverges.
    """
    if kind == "zero":
        return QWeight(measure, lambda r: np.zeros_like(r), 0.0, "zero")
    if kind == "beta_power":
        beta = float(params.pop("beta"))
        outer = params.pop("outer", "zero")
        p = float(params.pop("outer_power", 1.0))
        if beta <= 0:
            raise InadmissibleWeightError("beta must be positive")
        if outer == "zero":
            prof = lambda r: np.asarray(r, dtype=float) ** beta
            r_max, label = 1.0, f"|y|^{beta:g}"
        elif outer == "power":
            prof = lambda r: np.where(np.asarray(r) <= 1, np.asarray(r, dtype=float) ** beta,
                                      np.asarray(r, dtype=float) ** -p)
            r_max, label = math.inf, f"|y|^{beta:g}|out^-{p:g}"
        else:
            raise ConfigError(f"unknown outer branch {outer!r}")
        spec = dict(profile=prof, label=label, r_max=r_max, breakpoints=(1.0,))
    elif kind == "annulus":
        lo, hi = float(params.pop("r_min")), float(params.pop("r_max"))
        if not 0 < lo < hi:
            raise InadmissibleWeightError("annulus needs 0 < r_min < r_max")
        spec = dict(profile=lambda r: np.ones_like(np.asarray(r, dtype=float)),
                    label=f"1[{lo:g},{hi:g})", r_min=lo, r_max=hi)
    elif kind == "custom":
        spec = dict(profile=params.pop("profile"), label=params.pop("label", "custom"),
                    r_min=float(params.pop("r_min", 0.0)), r_max=float(params.pop("r_max", math.inf)),
                    breakpoints=tuple(params.pop("breakpoints", ())))
    else:
        raise ConfigError(f"unknown q kind {kind!r}")
    if params:
        raise ConfigError(f"unexpected q parameters {sorted(params)}")
    q = QWeight(measure, l2nu_norm_sq=0.0, **spec)
    try:
        norm = q.norm_sq()
    except (DivergenceError, QuadratureError) as exc:
        raise InadmissibleWeightError(f"q = {q.label} is not in L^2(nu): {exc}") from exc
    return QWeight(measure, l2nu_norm_sq=norm, **spec)


# ---------------------------------------------------------------------------
# Configuration I/O

_MODEL_KEYS = {"kind", "alpha", "K", "dimension", "drift", "gaussian", "radii", "density"}


def measure_from_dict(spec):
    """Build a measure from a mapping with keys ``kind, alpha, K, dimension``.

    Tabulated measures additionally take ``radii`` and ``density`` lists.
    """
    spec = dict(spec)
    unknown = set(spec) - _MODEL_KEYS
    if unknown:
        raise ConfigError(f"unknown model keys {sorted(unknown)}")
    kind = spec.get("kind")
    d = spec.get("dimension", 1)
    try:
        if kind == "stable":
            if "K" in spec:
                raise ConfigError("use kind 'truncated_stable' for a finite K")
            return StableMeasure(float(spec["alpha"]), d)
        if kind == "truncated_stable":
            return StableMeasure(float(spec["alpha"]), d, float(spec["K"]))
        if kind == "log_stable":
            return LogStableMeasure(float(spec["alpha"]), d)
        if kind == "tabulated":
            return TabulatedMeasure(tuple(spec["radii"]), tuple(spec["density"]), d,
                                    float(spec.get("K", math.inf)))
        if kind in ("none", "gaussian"):
            return ZeroMeasure(d)
    except KeyError as exc:
        raise ConfigError(f"model kind {kind!r} requires key {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid model specification: {exc}") from exc
    raise ConfigError(f"unknown model kind {kind!r}")


def model_from_dict(spec):
    """Inverse of :meth:`LevyModel.to_dict`."""
    if not isinstance(spec, dict):
        raise ConfigError("model specification must be a mapping")
    measure = measure_from_dict(spec)
    try:
        return LevyModel(measure, spec.get("drift"), spec.get("gaussian"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid model specification: {exc}") from exc


def load_model(path):
    """Read a JSON model file."""
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(spec)


def save_model(model, path):
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")
