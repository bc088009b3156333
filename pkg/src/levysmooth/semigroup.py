"""Transition semigroup ``P_t f(x) = E f(x + L_t)``.

Two backends:

* Fourier: on a periodic grid the coefficients of ``f`` are multiplied by
  ``exp(-t psi(xi_k))``.  With ``f(x) = sum c_k exp(i xi_k x)`` this is exact
  for the process wrapped onto the torus ``[-R, R)^d``; the drift term
  ``-i<xi, m>`` of ``psi`` makes ``P_t f(x) = f(x + t m)`` for a pure drift.
* Monte Carlo: sample endpoints with :mod:`levysmooth.paths` and average.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np

from .exceptions import ConfigError
from .grid import GridFunction, GridSpec, default_grid
from .levy_model import LevyModel, levy_symbol
from .paths import sample_batch

__all__ = ["BoxLeakageWarning", "grid_symbol", "semigroup_fourier", "semigroup_grid",
           "semigroup_mc", "semigroup_square", "box_leakage", "heat_bump_oracle",
           "cauchy_density", "wrapped_cauchy_density", "sine_oracle", "mc_mean"]


class BoxLeakageWarning(UserWarning):
    """Probability mass may wrap around the periodic box."""


@lru_cache(maxsize=64)
def grid_symbol(model, spec):
    """``psi`` at the FFT frequencies of ``spec`` (complex, shape ``spec.shape``)."""
    if model.dimension != spec.dimension:
        raise ConfigError(f"model dimension {model.dimension} does not match grid dimension "
                          f"{spec.dimension}")
    psi = np.asarray(levy_symbol(model, spec.frequencies()), dtype=complex)
    psi = psi.reshape(spec.shape)
    psi.setflags(write=False)
    return psi


def box_leakage(model, t, half_width):
    """Rough probability that ``|L_t| > R/2``.

    Uses ``t nu(|y| > R/2)`` for the jumps, a Gaussian tail bound for ``Q``
    and the drift displacement.  Only used to warn about wrap-around.
    """
    r = 0.5 * half_width
    jumps = t * model.measure.mass(r, math.inf)
    q = float(np.max(np.linalg.eigvalsh(model.Q))) if model.dimension else 0.0
    gauss = 0.0
    if q > 0:
        z = max(r - t * float(np.linalg.norm(model.m)), 0.0) / math.sqrt(t * q)
        gauss = model.dimension * math.erfc(z / math.sqrt(2))
    drift = 1.0 if t * float(np.linalg.norm(model.m)) > r else 0.0
    return min(1.0, jumps + gauss + drift)


def semigroup_fourier(model, f, t, *, leakage_tol=None):
    """Apply ``P_t`` to a grid function.

    Parameters
    ----------
    model : LevyModel
    f : GridFunction
    t : float
        Time, ``t >= 0``.
    leakage_tol : float, optional
        Emit :class:`BoxLeakageWarning` when :func:`box_leakage` exceeds it.

    Returns
    -------
    GridFunction
    """
    if not isinstance(f, GridFunction):
        raise ConfigError("semigroup_fourier needs a GridFunction")
    t = float(t)
    if not t >= 0:
        raise ConfigError(f"time must be non-negative, got {t}")
    psi = grid_symbol(model, f.spec)
    if t == 0:
        return f.with_values(f.values)
    if leakage_tol is not None and box_leakage(model, t, f.half_width) > leakage_tol:
        warnings.warn(f"box half-width {f.half_width} may be too small for {model.label} "
                      f"at t={t}", BoxLeakageWarning, stacklevel=2)
    return f.with_values(apply_multiplier(f.values, np.exp(-t * psi)))


def apply_multiplier(values, mult):
    """``Re ifft(mult * fft(values))``; taking the real part averages the
    multiplier over the two signs of the Nyquist frequency."""
    return np.fft.ifftn(np.fft.fftn(values) * mult).real


def semigroup_grid(model, f, t, grid=None):
    """Sample ``f`` on ``grid`` (default grid for the model dimension) and apply ``P_t``."""
    grid = grid or default_grid(model.dimension)
    return semigroup_fourier(model, grid.sample(f), t)


def mc_mean(values, pair=None):
    """Sample mean and standard error; exact for constant samples.

    ``pair`` holds antithetic partners; pairs are averaged before the
    variance is taken.
    """
    v = np.asarray(values, dtype=float)
    if pair is not None:
        v = 0.5 * (v + np.asarray(pair, dtype=float))
    n = v.shape[0]
    if n < 2:
        raise ConfigError("need at least two samples for a standard error")
    flat = np.all(v == v[:1], axis=0)
    est = np.where(flat, v[0], v.mean(axis=0))
    se = np.where(flat, 0.0, v.std(axis=0, ddof=1) / math.sqrt(n))
    return est, se


def _shifted_points(x, endpoints, d):
    x = np.asarray(x, dtype=float)
    if d == 1:
        xs = np.atleast_1d(x)
        return xs[None, :] + endpoints[:, :1], x.ndim == 0
    xs = np.atleast_2d(x)
    return xs[None, :, :] + endpoints[:, None, :], x.ndim == 1


def semigroup_mc(model, f, x, t, n_paths, rng, eps_cut=None, *, antithetic=False, threads=None,
                 batch=None):
    """Monte Carlo ``P_t f(x)`` with its standard error.

    Parameters
    ----------
    model : LevyModel
    f : callable
        Vectorized bounded function.
    x : float or array_like
        One point or an array of points (common random numbers across them).
    t : float
    n_paths : int
    rng : RngSeed
    antithetic : bool
        Pair each path with its Gaussian reflection.
    batch : PathBatch, optional
        Reuse already sampled paths (``n_paths``, ``rng`` are then ignored).

    Returns
    -------
    estimate, standard_error : float or ndarray
    """
    if batch is None:
        if int(n_paths) < 100:
            raise ConfigError("semigroup_mc needs at least 100 paths")
        batch = sample_batch(model, t, n_paths, rng, eps_cut, threads=threads)
    d = model.dimension
    pts, scalar = _shifted_points(x, batch.endpoints, d)
    vals = f(pts)
    pair = f(_shifted_points(x, batch.antithetic_endpoints, d)[0]) if antithetic else None
    est, se = mc_mean(vals, pair)
    if scalar:
        return float(est[0]), float(se[0])
    return est, se


def semigroup_square(model, f, x, t, backend="fourier", *, grid=None, n_paths=10_000, rng=None,
                     eps_cut=None, batch=None):
    """``P_t(f^2)(x)`` by either backend.

    The Fourier backend returns ``(value, 0.0)`` evaluated by trigonometric
    interpolation of the grid result; the MC backend returns ``(estimate, se)``.
    """
    sq = f.squared() if hasattr(f, "squared") else (lambda y: f(y) ** 2)
    if backend == "mc":
        return semigroup_mc(model, sq, x, t, n_paths, rng, eps_cut, batch=batch)
    if backend != "fourier":
        raise ConfigError(f"unknown backend {backend!r}")
    g = semigroup_grid(model, sq, t, grid)
    x = np.asarray(x, dtype=float)
    val = g.interpolate(x.reshape(-1) if model.dimension == 1 else x.reshape(-1, model.dimension))
    if x.ndim == 0 or (model.dimension > 1 and x.ndim == 1):
        return float(val[0]), 0.0
    return val, np.zeros_like(val)


# ---------------------------------------------------------------------------
# Closed-form oracles


def heat_bump_oracle(x, t, width, variance=1.0, drift=0.0):
    """``P_t`` of ``exp(-x^2/(2 w^2))`` for ``L_t = t m + sqrt(q) B_t`` in d=1."""
    s2 = width ** 2 + variance * t
    return width / math.sqrt(s2) * np.exp(-0.5 * (np.asarray(x) + drift * t) ** 2 / s2)


def cauchy_density(x, scale):
    """Density ``s / (pi (s^2 + x^2))``; ``L_t`` of the un-normalized Cauchy
    measure ``|y|^{-2}`` has scale ``pi t``."""
    x = np.asarray(x, dtype=float)
    return scale / (math.pi * (scale ** 2 + x ** 2))


def wrapped_cauchy_density(x, scale, period):
    """Cauchy density wrapped onto a circle of length ``period``."""
    a = 2 * math.pi * scale / period
    th = 2 * math.pi * np.asarray(x, dtype=float) / period
    return np.sinh(a) / (period * (np.cosh(a) - np.cos(th)))


def sine_oracle(model, x, t, frequency=1.0, phase=0.0):
    """``P_t sin(w x + phase) = Im[exp(i(w x + phase)) exp(-t psi(w))]`` (d=1)."""
    psi = complex(levy_symbol(model, frequency))
    return np.imag(np.exp(1j * (frequency * np.asarray(x, dtype=float) + phase)) * np.exp(-t * psi))
