"""Perturbed stable dynamics ``dX = b(X-) dY + dZ`` with independent stable ``Y, Z``.

``Z`` is the ``alpha``-stable process of the un-normalized measure
``|y|^{-1-alpha} dy`` (symbol ``c_alpha |xi|^alpha``) and ``Y`` the
``beta``-stable one.  The generator is

    L f = -c_alpha (-Delta)^{alpha/2} f - c_beta |b|^beta (-Delta)^{beta/2} f

in spectral notation, so the semigroup solves the Volterra equation

    u(t) = P0_t f - int_0^t P0_{t-s} [c_beta |b|^beta (-Delta)^{beta/2} u(s)] ds.

:func:`duhamel_solve` runs Picard iteration on this equation.  Each sweep
uses exponential time differencing: in Fourier space the kernel
``exp(-lambda (t - s))`` is integrated exactly against the piecewise linear
interpolant of the perturbation term, which keeps stiff high modes stable
and avoids an explicit quadrature of the ``(t-s)^{-1/2}`` singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

from .exceptions import ConfigError, ConvergenceError
from .grid import GridFunction
from .levy_model import LevyModel, StableMeasure, stable_constant
from .nonlocal_ops import frac_laplacian_spectral
from .paths import BLOCK_SIZE, RngSeed, cms_symmetric_stable
from .semigroup import mc_mean, semigroup_fourier

__all__ = ["PerturbedSystem", "TimeGrid", "DuhamelResult", "duhamel_solve", "t0_proxy",
           "kernel_l1_norm", "frac_gradient_profile", "GradientProfile", "euler_mc_semigroup",
           "EulerResult", "bump_coefficient"]


@dataclass(frozen=True, eq=False)
class PerturbedSystem:
    """Parameters of ``dX = b(X-) dY + dZ`` in d=1.

    Parameters
    ----------
    alpha : float
        Index of ``Z``.
    beta : float
        Index of ``Y``; the bound checker requires ``0 < beta < alpha/2``.
    b : callable
        Smooth bounded coefficient.
    b_sup : float
        ``sup |b|``.
    strict : bool
        Enforce ``beta < alpha/2``; otherwise only ``beta < alpha``.
    """

    alpha: float
    beta: float
    b: Callable
    b_sup: float
    label: str = "b"
    strict: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ConfigError("alpha must lie in (0, 2)")
        upper = self.alpha / 2 if self.strict else self.alpha
        if not 0 < self.beta < upper:
            raise ConfigError(f"beta must lie in (0, {upper:g}) for this system")
        if not (math.isfinite(self.b_sup) and self.b_sup >= 0):
            raise ConfigError("b_sup must be finite and non-negative")

    @property
    def dimension(self):
        return 1

    @property
    def free_model(self):
        return LevyModel(StableMeasure(self.alpha, 1))

    @property
    def c_alpha(self):
        return stable_constant(1, self.alpha)

    @property
    def c_beta(self):
        return stable_constant(1, self.beta)

    def b_on(self, x):
        vals = np.asarray(self.b(np.asarray(x, dtype=float)), dtype=float)
        return np.broadcast_to(vals, np.shape(x)).copy()

    def check_b_sup(self, x):
        sup = float(np.max(np.abs(self.b_on(x)))) if np.size(x) else 0.0
        if sup > self.b_sup * (1 + 1e-12) + 1e-300:
            raise ConfigError(f"sampled sup|b| = {sup:g} exceeds declared b_sup = {self.b_sup:g}")
        return sup


def bump_coefficient(amplitude=0.3):
    """``b(x) = amplitude (1 + cos x) / 2``, with ``sup|b| = amplitude``."""
    return (lambda x: amplitude * 0.5 * (1.0 + np.cos(x))), abs(amplitude)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes ``s_j = j t_max / n_steps``."""

    t_max: float
    n_steps: int

    def __post_init__(self):
        if not self.t_max > 0:
            raise ConfigError("t_max must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 8:
            raise ConfigError("n_steps must be an integer >= 8")

    @property
    def step(self):
        return self.t_max / self.n_steps

    @property
    def nodes(self):
        return self.step * np.arange(self.n_steps + 1)


@dataclass(frozen=True, eq=False)
class DuhamelResult:
    """Solution slices and Picard diagnostics.

    Attributes
    ----------
    times : ndarray
    slices : list of GridFunction
    iterations : list of int
        Picard iterations per horizon segment.
    differences : list of list of float
        Successive sup-norm changes per segment.
    segments : list of (float, float)
    """

    times: np.ndarray
    slices: list
    iterations: list
    differences: list
    segments: list

    @property
    def contraction_factors(self):
        out = []
        for diffs in self.differences:
            d = np.asarray(diffs)
            with np.errstate(divide="ignore", invalid="ignore"):
                out.append(list(d[1:] / d[:-1]) if d.size > 1 else [])
        return out

    def at(self, t):
        j = int(np.argmin(np.abs(self.times - t)))
        if not math.isclose(self.times[j], t, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigError(f"t={t} is not a node of the time grid")
        return self.slices[j]


def _phi(z):
    """``phi1 = (1 - e^{-z})/z`` and ``phi2 = (1 - (1+z) e^{-z})/z^2``."""
    small = z < 1e-4
    zs = np.where(small, 1.0, z)
    phi1 = np.where(small, 1 - z / 2 + z * z / 6, -np.expm1(-zs) / zs)
    phi2 = np.where(small, 0.5 - z / 3 + z * z / 8, (-np.expm1(-zs) - zs * np.exp(-zs)) / zs ** 2)
    return phi1, phi2


def _perturbation(system, spec, bb):
    xi = np.abs(spec.frequencies())
    mult = xi ** system.beta
    coef = system.c_beta * np.abs(bb) ** system.beta

    def apply(u_hat):
        # u_hat: (m, n) Fourier coefficients -> Fourier coefficients of c|b|^beta (-D)^{beta/2} u
        phys = np.fft.ifft(u_hat * mult, axis=-1).real
        return np.fft.fft(coef * phys, axis=-1)

    return apply


def _segment(system, u0, spec, dt, n, tol, max_iter, bb):
    lam = system.c_alpha * np.abs(spec.frequencies()) ** system.alpha
    z = lam * dt
    phi1, phi2 = _phi(z)
    wa = dt * phi2                 # weight of v_{j-1}
    wb = dt * (phi1 - phi2)        # weight of v_j
    decay = np.exp(-z)
    pert = _perturbation(system, spec, bb)
    u0_hat = np.fft.fft(u0)
    free = u0_hat[None, :] * np.exp(-lam[None, :] * dt * np.arange(n + 1)[:, None])
    cur = free.copy()
    diffs = []
    for it in range(1, max_iter + 1):
        v = pert(cur)
        acc = np.zeros_like(u0_hat)
        new = np.empty_like(cur)
        new[0] = u0_hat
        for j in range(1, n + 1):
            acc = decay * acc + wa * v[j - 1] + wb * v[j]
            new[j] = free[j] - acc
        diff = float(np.max(np.abs(np.fft.ifft(new - cur, axis=-1).real)))
        diffs.append(diff)
        cur = new
        if not math.isfinite(diff) or (len(diffs) > 3 and diff > 10 * diffs[0]):
            return None, diffs
        if diff < tol:
            return np.fft.ifft(cur, axis=-1).real, diffs
    return None, diffs


def duhamel_solve(system, f, grid, *, tol=1e-7, max_iter=50, max_splits=6):
    """Picard iteration for the Duhamel equation of ``system``.

    Parameters
    ----------
    system : PerturbedSystem
    f : GridFunction
        Initial datum (d=1).
    grid : TimeGrid
    tol : float
        Stop when the sup-norm change between iterates drops below ``tol``.
    max_iter : int
        Iteration cap per segment.
    max_splits : int
        A segment whose iteration does not converge is halved and solved
        piecewise, restarting from the solution at the midpoint.

    Returns
    -------
    DuhamelResult

    Raises
    ------
    ConvergenceError
        If a segment still fails after ``max_splits`` halvings.
    """
    if not isinstance(f, GridFunction) or f.dimension != 1:
        raise ConfigError("duhamel_solve needs a 1-d GridFunction")
    spec = f.spec
    bb = system.b_on(spec.axis())
    system.check_b_sup(spec.axis())
    dt = grid.step
    slices = [f.values]
    iterations, differences, segments = [], [], []

    def solve(u0, start, n, depth):
        if not np.any(bb) or n == 0:
            vals = [semigroup_fourier(system.free_model, f.with_values(u0), k * dt).values
                    for k in range(1, n + 1)]
            iterations.append(0)
            differences.append([])
            segments.append((start * dt, (start + n) * dt))
            return vals
        sol, diffs = _segment(system, u0, spec, dt, n, tol, max_iter, bb)
        if sol is not None:
            iterations.append(len(diffs))
            differences.append(diffs)
            segments.append((start * dt, (start + n) * dt))
            return list(sol[1:])
        if depth >= max_splits or n < 2:
            raise ConvergenceError(
                f"Picard iteration failed on [{start * dt:g}, {(start + n) * dt:g}]",
                {"differences": diffs, "factors": list(np.divide(diffs[1:], diffs[:-1]))})
        h = n // 2
        first = solve(u0, start, h, depth + 1)
        second = solve(first[-1], start + h, n - h, depth + 1)
        return first + second

    slices += solve(f.values, 0, grid.n_steps, 0)
    gfs = [f.with_values(v, label=f"P_{k * dt:g} {f.label}") for k, v in enumerate(slices)]
    return DuhamelResult(grid.nodes, gfs, iterations, differences, segments)


# ---------------------------------------------------------------------------
# Constants of the two-regime bound


@lru_cache(maxsize=32)
def kernel_l1_norm(alpha, beta, r_max=None):
    """``|| (-Delta)^{beta/2} p_1 ||_{L^1}`` for the density ``p_1`` of ``Z_1``.

    ``K(x) = (1/pi) int_0^inf xi^beta exp(-c xi^alpha) cos(xi x) dxi`` is
    evaluated by quadrature on ``|x| <= r_max``; beyond it the asymptotic
    ``|K(x)| ~ |x|^{-1-beta} / c_beta`` contributes ``2 r_max^{-beta} / (beta c_beta)``.
    """
    c = stable_constant(1, alpha)
    cb = stable_constant(1, beta)
    if r_max is None:
        r_max = 2.0 ** 12
    kern = lambda xi: xi ** beta * math.exp(-c * xi ** alpha)
    hi_xi = (40.0 / c) ** (1 / alpha)

    def K(x):
        if x == 0:
            return integrate.quad(kern, 0, hi_xi, limit=200)[0] / math.pi
        val = integrate.quad(kern, 0, math.inf, weight="cos", wvar=x, limlst=200)[0]
        return val / math.pi

    # geometric grid in |x| with uniform refinement near 0
    xs = np.concatenate([np.linspace(0, 1, 401), np.geomspace(1, r_max, 1200)[1:]])
    ks = np.abs(np.array([K(x) for x in xs]))
    body = 2 * integrate.trapezoid(ks, xs)
    tail = 2 * r_max ** (-beta) / (beta * cb)
    return float(body + tail)


def t0_proxy(system):
    """``t0`` with ``C pi t0^{1/2} c_beta ||b||^beta = 1/2`` (capped at 1).

    ``C`` bounds ``||(-Delta)^{beta/2} P0_t||_{inf->inf} <= C t^{-1/2}`` for
    ``t <= 1``: by scaling ``C = ||K_1||_{L^1}`` from :func:`kernel_l1_norm`.
    ``pi = B(1/2, 1/2) = sup_t int_0^t s^{-1/2} (t-s)^{-1/2} ds``.

    Returns
    -------
    t0 : float
    C : float
    """
    C = float(kernel_l1_norm(system.alpha, system.beta))
    bb = system.c_beta * system.b_sup ** system.beta
    if bb == 0:
        return 1.0, C
    t0 = (1.0 / (2 * C * math.pi * bb)) ** 2
    return min(t0, 1.0), C


# ---------------------------------------------------------------------------
# Profiles


@dataclass(frozen=True)
class GradientProfile:
    """``(t, ||(-Delta)^{beta/2} P_t f||_inf)`` pairs with dyadic-window slopes."""

    times: np.ndarray
    norms: np.ndarray

    def slopes(self):
        """Least-squares log-log slope over each dyadic window ``[t, 2t]`` of the samples."""
        t, v = self.times, self.norms
        keep = (t > 0) & (v > 0)
        t, v = t[keep], v[keep]
        out = np.full(t.size, np.nan)
        for i, ti in enumerate(t):
            sel = (t >= ti) & (t <= 2 * ti * (1 + 1e-12))
            if sel.sum() >= 2:
                out[i] = np.polyfit(np.log(t[sel]), np.log(v[sel]), 1)[0]
        return out

    def fitted_slope(self, t_lo, t_hi):
        sel = (self.times >= t_lo * (1 - 1e-12)) & (self.times <= t_hi * (1 + 1e-12)) & (self.norms > 0)
        if sel.sum() < 2:
            raise ConfigError("need at least two samples in the fitting window")
        return float(np.polyfit(np.log(self.times[sel]), np.log(self.norms[sel]), 1)[0])

    def to_csv(self, fh):
        fh.write("# levysmooth gradient-profile v1\n")
        fh.write("t,sup_norm,window_slope\n")
        slopes = self.slopes()
        j = 0
        for t, v in zip(self.times, self.norms):
            s = ""
            if t > 0 and v > 0:
                s = "" if np.isnan(slopes[j]) else repr(float(slopes[j]))
                j += 1
            fh.write(f"{float(t)!r},{float(v)!r},{s}\n")


def frac_gradient_profile(system, f, grid=None, *, result=None, times=None, s=None):
    """``||(-Delta)^{s} P_t f||_inf`` along a Duhamel solution or the free semigroup.

    Parameters
    ----------
    system : PerturbedSystem or LevyModel
        With a :class:`~levysmooth.levy_model.LevyModel` the free semigroup is
        evaluated at ``times`` and ``s`` must be given.
    f : GridFunction
    grid : TimeGrid, optional
        Solved with :func:`duhamel_solve` unless ``result`` is supplied.
    s : float, optional
        Spectral half-exponent; defaults to ``beta/2``.
    """
    if isinstance(system, LevyModel):
        if times is None or s is None:
            raise ConfigError("free profiles need explicit times and exponent")
        ts = np.asarray(times, dtype=float)
        norms = [frac_laplacian_spectral(s, semigroup_fourier(system, f, t)).sup_norm() for t in ts]
        return GradientProfile(ts, np.array(norms))
    s = system.beta / 2 if s is None else s
    if result is None:
        result = duhamel_solve(system, f, grid)
    norms = [frac_laplacian_spectral(s, g).sup_norm() for g in result.slices]
    return GradientProfile(np.asarray(result.times), np.array(norms))


# ---------------------------------------------------------------------------
# Euler scheme


@dataclass(frozen=True)
class EulerResult:
    estimate: object
    se: object
    n_paths: int
    n_steps: int
    coarse: bool

    def __iter__(self):
        return iter((self.estimate, self.se))


#: Step sizes above this trigger the ``coarse`` flag of :class:`EulerResult`.
EULER_MAX_STEP = 0.01


def euler_mc_semigroup(system, f, x, t, n_paths, n_steps, rng):
    """Euler scheme ``X_{k+1} = X_k + b(X_k) dY_k + dZ_k`` and ``E f(X_n)``.

    Increments are exact stable draws (Chambers-Mallows-Stuck) with scales
    ``(c dt)^{1/index}``; ``Y`` and ``Z`` are independent.  Paths are
    processed in blocks with one generator per block.

    Returns
    -------
    EulerResult
        Unpacks as ``(estimate, se)``; ``coarse`` flags ``dt > EULER_MAX_STEP``.
    """
    if not isinstance(rng, RngSeed):
        raise ConfigError("rng must be an RngSeed")
    n_paths, n_steps = int(n_paths), int(n_steps)
    if n_steps < 1 or n_paths < 2:
        raise ConfigError("need n_steps >= 1 and n_paths >= 2")
    dt = t / n_steps
    sz = (system.c_alpha * dt) ** (1 / system.alpha)
    sy = (system.c_beta * dt) ** (1 / system.beta)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.empty((n_paths, xs.size))
    for blk in range(-(-n_paths // BLOCK_SIZE)):
        lo = blk * BLOCK_SIZE
        m = min(BLOCK_SIZE, n_paths - lo)
        gen = rng.generator(blk)
        X = np.repeat(xs[None, :], m, axis=0)
        for _ in range(n_steps):
            dy = cms_symmetric_stable(gen, system.beta, sy, (m, 1))
            dz = cms_symmetric_stable(gen, system.alpha, sz, (m, 1))
            X = X + system.b_on(X) * dy + dz
        vals[lo:lo + m] = f(X)
    est, se = mc_mean(vals)
    if np.ndim(x) == 0:
        est, se = float(est[0]), float(se[0])
    return EulerResult(est, se, n_paths, n_steps, dt > EULER_MAX_STEP)
