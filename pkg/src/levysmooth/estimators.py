"""Weight estimator for ``A_q P_t f`` and quadratures of the smoothing functionals.

Weight estimator
----------------
For the compensated integral ``W = int_0^t int q(y) N~(dy, ds)`` one has
``E[f(x + L_t) W] = t A_q P_t f(x)``.  The sampler only sees jumps with
``|y| >= eps``, so the estimator targets ``A_{q_eps} P_t f`` with
``q_eps = q 1_{|y| >= eps}``.  The difference is bounded by

    |A_q g - A_{q_eps} g| <= 1/2 sup|D^2 g| int_{|y|<eps} |y|^2 q dnu,

which is reported as ``bias_bound``.

Smoothing functionals
---------------------
``Gamma(g)(x) = int |g(x+y) - g(x)|^2 nu(dy)`` equals ``L(g^2) - 2 g L g``
for the jump generator ``L``.  On the periodic grid both terms are Fourier
multipliers; ``g^2`` is formed on a grid of twice the resolution so the
product is represented without aliasing.  The iterated version uses

    int int |nabla_{y1,y2} g(x)|^2 nu(dy1) nu(dy2)
        = sum_{k,l} c_k conj(c_l) e^{i(xi_k - xi_l)x} K(xi_k, xi_l)^2,

with ``K(a, b) = psi(a) + psi(b) - psi(a - b)`` and ``psi`` the jump symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .grid import GridFunction, GridSpec, default_grid, trig_modes
from .levy_model import QWeight, integrate_profile, jump_symbol, make_qweight
from .paths import sample_batch
from .quadrature import gauss_legendre, radial_rule
from .semigroup import apply_multiplier, mc_mean, semigroup_fourier

__all__ = ["WeightEstimate", "weight_estimate_AqPtf", "eps_bias_bound", "curvature_bound",
           "gamma_field", "smoothing_lhs", "smoothing_lhs_iterated", "qweight_dictionary",
           "dual_norm_sup"]


@dataclass(frozen=True)
class WeightEstimate:
    """Result of :func:`weight_estimate_AqPtf`; unpacks as ``(estimate, se)``.

    Attributes
    ----------
    estimate, se : float
        Estimate of ``A_{q_eps} P_t f(x)`` and its standard error.
    bias_bound : float
        Bound on ``|A_q P_t f(x) - A_{q_eps} P_t f(x)|``.
    pf2, pf2_se : float
        ``P_t f^2(x)`` from the same paths.
    """

    estimate: float
    se: float
    bias_bound: float
    pf2: float
    pf2_se: float
    x: float
    t: float
    n_paths: int
    eps_cut: float
    extra: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.estimate, self.se))


def eps_bias_bound(q, eps_cut, curvature):
    """``1/2 * curvature * int_{|y|<eps} |y|^2 q dnu``."""
    if not math.isfinite(curvature):
        return math.inf
    if eps_cut <= q.r_min:
        return 0.0
    m2 = integrate_profile(q.measure, lambda r: r ** 2 * q.radial(r), 0.0, min(eps_cut, q.r_max),
                           breakpoints=tuple(b for b in q.breakpoints if b < eps_cut))
    return 0.5 * curvature * m2


def curvature_bound(model, f, t, grid=None):
    """``sup |D^2 P_t f|`` from the analytic bound of ``f`` or the Fourier grid.

    ``P_t`` commutes with derivatives and is a contraction, so a finite
    ``f.second_derivative_bound`` is used directly.
    """
    bound = getattr(f, "second_derivative_bound", math.inf)
    if math.isfinite(bound):
        return float(bound)
    grid = grid or default_grid(model.dimension)
    g = semigroup_fourier(model, grid.sample(f), t)
    xi = grid.frequencies()
    if grid.dimension == 1:
        return float(np.max(np.abs(apply_multiplier(g.values, -xi ** 2))))
    best = 0.0
    for a in range(2):
        for b in range(2):
            best = max(best, float(np.max(np.abs(apply_multiplier(g.values,
                                                                   -xi[..., a] * xi[..., b])))))
    return 2.0 * best


def weight_estimate_AqPtf(model, q, f, x, t, n_paths, rng, eps_cut=None, *, antithetic=True,
                          batch=None, curvature=None, threads=None):
    """Monte Carlo estimate of ``A_q P_t f(x)`` by the weight identity.

    Parameters
    ----------
    model : LevyModel
    q : QWeight
    f : callable
    x : float or array_like
        Points share the same paths (common random numbers).
    t : float
    n_paths : int
    rng : RngSeed
    eps_cut : float, optional
    antithetic : bool
        Also evaluate ``f`` at the endpoint with reflected Gaussian part; the
        weight is unchanged by the reflection.
    batch : PathBatch, optional
        Pre-sampled paths carrying ``W`` for ``q`` in column 0.
    curvature : float, optional
        ``sup |D^2 P_t f|`` for the bias bound; see :func:`curvature_bound`.

    Returns
    -------
    WeightEstimate or list of WeightEstimate
    """
    if q.label == "zero":
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        zero = [WeightEstimate(0.0, 0.0, 0.0, math.nan, math.nan, float(v), float(t), 0,
                               math.nan) for v in xs]
        return zero[0] if np.ndim(x) == 0 else zero
    if batch is None:
        batch = sample_batch(model, t, n_paths, rng, eps_cut, weights=(q,), threads=threads)
    W = batch.weights[:, 0]
    d = model.dimension
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0 if d == 1 else xs.ndim == 1
    xs = xs.reshape(-1) if d == 1 else xs.reshape(-1, d)

    def at(ends):
        return f(xs[None, :] + ends[:, :1]) if d == 1 else f(xs[None, :, :] + ends[:, None, :])

    fx = at(batch.endpoints)
    fa = at(batch.antithetic_endpoints) if antithetic else None
    est, se = mc_mean(fx * W[:, None] / batch.t, None if fa is None else fa * W[:, None] / batch.t)
    p2, p2se = mc_mean(fx ** 2, None if fa is None else fa ** 2)
    curv = curvature_bound(model, f, t) if curvature is None else curvature
    bias = eps_bias_bound(q, batch.eps_cut, curv)
    out = [WeightEstimate(float(est[i]), float(se[i]), bias, float(p2[i]), float(p2se[i]),
                          float(xs[i]) if d == 1 else tuple(xs[i]), float(t), batch.n_paths,
                          batch.eps_cut) for i in range(len(est))]
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# Carre du champ on the grid


def _upsample_axis(v, axis):
    v = np.moveaxis(v, axis, 0)
    n = v.shape[0]
    half = n // 2
    c = np.fft.fft(v, axis=0)
    big = np.zeros((2 * n,) + v.shape[1:], dtype=complex)
    big[:half] = c[:half]
    big[2 * n - half + 1:] = c[half + 1:]
    # the Nyquist bin is shared between +n/2 and -n/2 on the finer grid
    big[half] = 0.5 * c[half]
    big[2 * n - half] = 0.5 * c[half]
    return np.moveaxis(2.0 * np.fft.ifft(big, axis=0).real, 0, axis)


def _upsample(g):
    """Exact trigonometric interpolation of ``g`` onto ``2n`` points per axis."""
    v = g.values
    for axis in range(g.dimension):
        v = _upsample_axis(v, axis)
    return GridFunction(v, g.half_width, g.label)


def _jump_multiplier(model, spec):
    xi = spec.frequencies()
    kappa = np.abs(xi) if spec.dimension == 1 else np.linalg.norm(xi, axis=-1)
    return jump_symbol(model.measure, kappa)


def gamma_field(model, g):
    """``Gamma(g) = int |g(. + y) - g|^2 nu(dy)`` on the doubled grid.

    Parameters
    ----------
    model : LevyModel
        Only the jump measure enters.
    g : GridFunction

    Returns
    -------
    GridFunction
        Values on the grid with ``2n`` points per axis (same box).
    """
    big = _upsample(g)
    psi = _jump_multiplier(model, big.spec)
    v = big.values
    lg2 = apply_multiplier(v * v, -psi)
    lg = apply_multiplier(v, -psi)
    return big.with_values(np.maximum(lg2 - 2 * v * lg, 0.0), label=f"Gamma({g.label})")


def _coerce_grid_result(model, f, t, grid):
    if isinstance(f, GridFunction):
        return semigroup_fourier(model, f, t)
    grid = grid or default_grid(model.dimension)
    return semigroup_fourier(model, grid.sample(f), t)


def smoothing_lhs(model, f, x, t, backend="fourier", *, grid=None, delta=1e-4, k_far=None):
    """``int |P_t f(x+y) - P_t f(x)|^2 nu(dy)``.

    Parameters
    ----------
    model : LevyModel
    f : callable or GridFunction
        Sampled on ``grid`` (default grid) when callable.
    x : float or array_like
    t : float
    backend : {"fourier", "quadrature"}
        ``fourier`` evaluates the carre du champ on the periodic grid (exact
        for the torus) and interpolates; ``quadrature`` integrates the
        squared increments of the trigonometric interpolant against ``nu``
        (d=1), completing ``|y| < delta`` with ``(g')^2 int_{|y|<delta} y^2 dnu``.
        Beyond ``2^k_far`` the integrand is replaced by its average on the
        last annulus, which is the periodic mean for a periodic ``g``.

    Returns
    -------
    float or ndarray
    """
    g = _coerce_grid_result(model, f, t, grid)
    x = np.asarray(x, dtype=float)
    d = model.dimension
    pts = x.reshape(-1) if d == 1 else x.reshape(-1, d)
    scalar = x.ndim == 0 if d == 1 else x.ndim == 1
    if backend == "fourier":
        gam = gamma_field(model, g)
        val = gam.interpolate(pts)
    elif backend == "quadrature":
        if d != 1:
            raise ConfigError("the quadrature backend of smoothing_lhs is implemented for d = 1")
        val = _gamma_quadrature(model, g, pts, delta, k_far)
    else:
        raise ConfigError(f"unknown backend {backend!r}")
    val = np.maximum(val, 0.0)
    return float(val[0]) if scalar else val


def _gamma_quadrature(model, g, pts, delta, k_far):
    mu = model.measure
    modes = trig_modes(g, rtol=1e-15)
    dmodes = _derivative(modes, 1)
    if k_far is None:
        k_far = int(math.ceil(math.log2(g.half_width))) + 6
    rule = radial_rule(mu, delta, math.inf, k_out=k_far, n_gl=16,
                       bandwidth=float(np.max(np.abs(modes.freqs))) if modes.freqs.size else 0.0)
    m2 = mu.second_moment(delta)
    out = np.empty(pts.size)
    for i, x in enumerate(pts):
        gx = modes(np.array([x]))[0]
        if rule.size:
            vals = 0.5 * ((modes(x + rule.r) - gx) ** 2 + (modes(x - rule.r) - gx) ** 2)
            outer = rule.integrate(vals, inner_tail=False)
        else:
            outer = 0.0
        out[i] = outer + dmodes(np.array([x]))[0] ** 2 * m2
    return out


def _derivative(modes, order):
    from .grid import TrigModes

    return TrigModes(modes.freqs, modes.coeffs * (1j * modes.freqs[:, 0]) ** order, modes.half_width)


def smoothing_lhs_iterated(model, f, x, t, n=2, backend="fourier", *, grid=None, n_panels=64,
                           n_gl=8, delta=2.0 ** -24, rtol=1e-14):
    """``int...int |nabla^n_{y_1..y_n} P_t f(x)|^2 nu(dy_1)...nu(dy_n)`` for ``n <= 2``.

    Parameters
    ----------
    backend : {"fourier", "quadrature"}
        ``fourier`` sums ``K(xi_k, xi_l)^n`` over the retained modes;
        ``quadrature`` (d=1, n=2, finite support) uses a tensor rule with
        ``n_panels`` geometric panels of ``n_gl`` Gauss nodes per variable
        on ``[delta, support]`` and Taylor terms inside ``delta``.
    rtol : float
        Fourier modes below ``rtol * max|c|`` are dropped.
    """
    if n not in (1, 2):
        raise ConfigError("iterated smoothing is implemented for n = 1 and n = 2")
    g = _coerce_grid_result(model, f, t, grid)
    x = np.asarray(x, dtype=float)
    d = model.dimension
    pts = x.reshape(-1) if d == 1 else x.reshape(-1, d)
    scalar = x.ndim == 0 if d == 1 else x.ndim == 1
    if backend == "fourier":
        val = _iterated_fourier(model, g, pts, n, rtol)
    elif backend == "quadrature":
        if n == 1:
            return smoothing_lhs(model, g, x, 0.0, backend="quadrature")
        val = _iterated_quadrature(model, g, pts, n_panels, n_gl, delta)
    else:
        raise ConfigError(f"unknown backend {backend!r}")
    val = np.maximum(val, 0.0)
    return float(val[0]) if scalar else val


def _iterated_fourier(model, g, pts, n, rtol):
    modes = trig_modes(g, rtol=rtol)
    k = modes.freqs
    c = modes.coeffs
    d = k.shape[1]
    norm = lambda v: np.abs(v[..., 0]) if d == 1 else np.linalg.norm(v, axis=-1)
    psi = jump_symbol(model.measure, norm(k))
    out = np.empty(pts.shape[0])
    step = max(1, 4_000_000 // max(c.size, 1))
    P = pts.reshape(pts.shape[0], d)
    for i, x in enumerate(P):
        ph = c * np.exp(1j * ((x + modes.half_width) @ k.T))
        total = 0.0
        for j in range(0, c.size, step):
            kd = k[j:j + step, None, :] - k[None, :, :]
            K = psi[j:j + step, None] + psi[None, :] - jump_symbol(model.measure, norm(kd))
            total += np.real(ph[j:j + step] @ (K ** n) @ np.conj(ph))
        out[i] = total
    return out


def _iterated_quadrature(model, g, pts, n_panels, n_gl, delta):
    mu = model.measure
    if model.dimension != 1:
        raise ConfigError("tensor quadrature is implemented for d = 1")
    top = mu.support
    if not math.isfinite(top):
        raise ConfigError("tensor quadrature needs a measure with bounded support; "
                          "use the fourier backend")
    edges = np.geomspace(delta, top, n_panels + 1)
    xg, wg = gauss_legendre(n_gl)
    r = (edges[:-1, None] + np.diff(edges)[:, None] * xg[None, :]).ravel()
    w = (np.diff(edges)[:, None] * wg[None, :]).ravel() * mu.density(r)
    y = np.concatenate([r, -r])
    wy = np.concatenate([w, w])
    modes = trig_modes(g, rtol=1e-15)
    d1 = _derivative(modes, 1)
    d2 = _derivative(modes, 2)
    m2 = mu.second_moment(delta)
    out = np.empty(pts.size)
    for i, x in enumerate(pts):
        gx = modes(np.array([x]))[0]
        gy = modes(x + y)
        gyy = modes(x + y[:, None] + y[None, :])
        diff = gyy - gy[:, None] - gy[None, :] + gx
        outer = wy @ (diff ** 2) @ wy
        # one small offset: nabla_{y1} h ~ y1 h'
        dx = d1(np.array([x]))[0]
        cross = wy @ ((d1(x + y) - dx) ** 2)
        inner = d2(np.array([x]))[0] ** 2 * m2 ** 2
        out[i] = outer + 2 * m2 * cross + inner
    return out


# ---------------------------------------------------------------------------
# Dual-norm characterization


def qweight_dictionary(measure, size=32):
    """``size`` unit-norm weights: annulus indicators and powers ``|y|^b`` on the unit ball."""
    out = []
    n_ann = size // 2
    edges = np.geomspace(2.0 ** -12, min(measure.support, 4.0), n_ann + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        q = make_qweight(measure, "annulus", r_min=float(lo), r_max=float(hi))
        out.append(q.scaled(1.0 / math.sqrt(q.l2nu_norm_sq)))
    alpha = getattr(measure, "alpha", 1.0)
    lo_b = alpha / 2 + 0.05 if alpha <= 2 else 0.05
    for b in np.linspace(lo_b, lo_b + 3.0, size - n_ann):
        q = make_qweight(measure, "beta_power", beta=float(b))
        out.append(q.scaled(1.0 / math.sqrt(q.l2nu_norm_sq)))
    return out


def dual_norm_sup(model, g, x, dictionary):
    """``max_q |A_q g(x)|^2`` over unit-norm weights, via the Fourier grid."""
    from .nonlocal_ops import apply_Aq_grid

    vals = [apply_Aq_grid(q, g).interpolate(np.atleast_1d(np.asarray(x, dtype=float))) ** 2
            for q in dictionary]
    return np.max(np.array(vals), axis=0)
