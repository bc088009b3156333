"""Radial quadrature against rotation invariant Levy measures.

Every measure in this package has the form ``nu(dy) = rho(|y|) dy`` on
``R^d``.  Integrals of radial functions therefore reduce to

    int h(|y|) nu(dy) = |S^{d-1}| int_0^inf h(r) rho(r) r^{d-1} dr,

which is evaluated with Gauss-Legendre nodes on dyadic annuli
``2^{-k-1} <= r < 2^{-k}``.  The part of the integral inside the innermost
annulus is extrapolated geometrically from the last two annulus sums; for
measures with unbounded support the part beyond ``2^{k_out}`` is estimated
from the average of the integrand on the outermost annulus times the exact
tail mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DivergenceError, QuadratureError

#: Hard cap on the number of Gauss-Legendre panels in one rule.
MAX_PANELS = 400_000
#: Partial sums beyond this magnitude are treated as divergent.
OVERFLOW_GUARD = 1e280


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights mapped to ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def sphere_area(d):
    """Surface area of the unit sphere ``S^{d-1}`` (equals 2 for d=1)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True, eq=False)
class RadialRule:
    """Nodes and weights for ``int h(|y|) nu(dy)``.

    Attributes
    ----------
    r : ndarray
        Radial nodes in increasing order.
    w : ndarray
        Weights including ``rho(r) r^(d-1) |S^(d-1)|``.
    level_starts : ndarray
        Index of the first node of every dyadic level, for ``np.add.reduceat``.
    inner_edge : float
        Radius below which the rule has no nodes and the tail is
        extrapolated; 0 if the rule starts at a positive ``r_lo``.
    outer_edge : float
        Largest node radius bound.
    outer_tail_mass : float
        ``nu(|y| >= outer_edge)`` when the rule stops short of the support,
        else 0.
    """

    r: np.ndarray
    w: np.ndarray
    level_starts: np.ndarray
    inner_edge: float
    outer_edge: float
    outer_tail_mass: float

    @property
    def size(self):
        return self.r.size

    def integrate(self, values, inner_tail=True, outer_tail=True):
        """Integrate tabulated integrand values.

        Parameters
        ----------
        values : array_like, shape (n,) or (n, m)
            Integrand at ``self.r``; extra columns are independent integrands.
        inner_tail, outer_tail : bool
            Whether to add the extrapolated contributions near 0 and beyond
            the outermost annulus.

        Returns
        -------
        float or ndarray
        """
        v = np.asarray(values, dtype=float)
        scalar = v.ndim == 1
        v = v.reshape(self.size, -1)
        if self.size == 0:
            out = np.zeros(v.shape[1])
            return float(out[0]) if scalar else out
        contrib = self.w[:, None] * v
        total = contrib.sum(axis=0)
        levels = np.add.reduceat(contrib, self.level_starts, axis=0)
        if inner_tail and self.inner_edge > 0 and levels.shape[0] >= 2:
            total = total + _geometric_tail(levels[0], levels[1], total)
        if outer_tail and self.outer_tail_mass > 0:
            top = self.level_starts[-1]
            top_mass = self.w[top:].sum()
            if top_mass > 0:
                total = total + levels[-1] / top_mass * self.outer_tail_mass
        if not np.all(np.isfinite(total)) or np.any(np.abs(total) > OVERFLOW_GUARD):
            raise DivergenceError("integral diverges: partial sums overflow",
                                  float(np.max(np.abs(total))))
        return float(total[0]) if scalar else total


def _geometric_tail(c1, c2, total):
    """Sum of the geometric continuation ``c1 * rho / (1 - rho)``, rho = c1/c2."""
    scale = np.maximum(np.abs(total), 1e-300)
    negligible = np.abs(c1) <= 1e-13 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(c2 != 0, c1 / c2, np.inf)
    bad = ~negligible & ((np.abs(ratio) >= 1.0 - 1e-9) | ~np.isfinite(ratio))
    if np.any(bad):
        raise DivergenceError("integral diverges toward the origin: annulus sums do not decay",
                              float(np.max(np.abs(c1[bad]))))
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(negligible, 0.0, c1 * ratio / (1.0 - ratio))
    return tail


def _edges(measure, r_lo, r_hi, k_max, k_out, breakpoints):
    top = min(r_hi, measure.support)
    start = r_lo if r_lo > 0 else 2.0 ** (-k_max - 1)
    infinite = not math.isfinite(top)
    end = 2.0 ** k_out if infinite else top
    if end <= start:
        return np.empty(0), infinite
    lo = math.floor(math.log2(start))
    hi = math.ceil(math.log2(end))
    pts = {start, end}
    pts.update(2.0 ** j for j in range(lo, hi + 1))
    pts.update(float(b) for b in breakpoints)
    e = np.array(sorted(p for p in pts if start <= p <= end))
    return e, infinite


@lru_cache(maxsize=256)
def radial_rule(measure, r_lo=0.0, r_hi=math.inf, *, k_max=60, k_out=60, n_gl=16,
                bandwidth=0.0, breakpoints=()):
    """Build (and cache) a :class:`RadialRule`.

    Parameters
    ----------
    measure : LevyMeasure
        Any hashable radial descriptor exposing ``dimension``, ``support``,
        ``density`` and ``mass``.
    r_lo, r_hi : float
        Radial integration range.  ``r_lo = 0`` triggers dyadic refinement
        down to ``2^{-k_max-1}`` plus geometric extrapolation.
    k_max, k_out : int
        Dyadic depth toward 0 and toward infinity.
    n_gl : int
        Gauss-Legendre nodes per panel.
    bandwidth : float
        Largest angular frequency of the integrand in ``r``; panels are split
        so that each spans at most one period.
    breakpoints : tuple of float
        Extra panel edges (discontinuities of the integrand).
    """
    d = measure.dimension
    edges, infinite = _edges(measure, r_lo, r_hi, k_max, k_out, breakpoints)
    if edges.size < 2:
        empty = np.empty(0)
        return RadialRule(empty, empty, np.zeros(1, dtype=np.intp), 0.0, 0.0, 0.0)
    a, b = edges[:-1], edges[1:]
    if bandwidth > 0:
        nsub = np.maximum(1, np.ceil((b - a) * bandwidth / (2 * math.pi))).astype(np.int64)
    else:
        nsub = np.ones(a.size, dtype=np.int64)
    npanel = int(nsub.sum())
    if npanel > MAX_PANELS:
        raise QuadratureError(f"oscillatory integrand needs {npanel} panels (cap {MAX_PANELS})")
    pa = np.repeat(a, nsub)
    pb = np.repeat(b, nsub)
    k = np.arange(npanel) - np.repeat(np.cumsum(nsub) - nsub, nsub)
    n = np.repeat(nsub, nsub)
    lo = pa + (pb - pa) * k / n
    hi = pa + (pb - pa) * (k + 1) / n
    x, wx = gauss_legendre(n_gl)
    r = (lo[:, None] + (hi - lo)[:, None] * x[None, :]).ravel()
    w = ((hi - lo)[:, None] * wx[None, :]).ravel()
    w = w * np.asarray(measure.density(r), dtype=float) * r ** (d - 1) * sphere_area(d)
    level = np.floor(np.log2(np.repeat(pa, n_gl)) + 1e-12).astype(np.int64)
    starts = np.flatnonzero(np.r_[True, level[1:] != level[:-1]])
    inner_edge = float(edges[0]) if r_lo <= 0 else 0.0
    outer = float(edges[-1])
    tail = float(measure.mass(outer, math.inf)) if infinite and math.isinf(r_hi) else 0.0
    for arr in (r, w):
        arr.setflags(write=False)
    return RadialRule(r, w, starts, inner_edge, outer, tail)


def one_minus_lambda(d, s):
    """``1 - Lambda_d(s)`` where ``Lambda_d`` is the sphere average of ``cos``.

    ``Lambda_1 = cos``, ``Lambda_2 = J_0``, ``Lambda_3(s) = sin(s)/s`` and in
    general ``Gamma(d/2) (2/s)^{d/2-1} J_{d/2-1}(s)``.  A series is used for
    small ``s`` to avoid cancellation.
    """
    from scipy import special

    s = np.asarray(s, dtype=float)
    if d == 1:
        return 2.0 * np.sin(0.5 * s) ** 2
    out = np.empty_like(s)
    small = s < 0.02
    ss = s[small] ** 2
    out[small] = ss / (2 * d) * (1 - ss / (4 * (d + 2)) * (1 - ss / (6 * (d + 4))))
    sl = s[~small]
    if d == 2:
        out[~small] = 1.0 - special.j0(sl)
    elif d == 3:
        out[~small] = 1.0 - np.sin(sl) / sl
    else:
        nu = d / 2 - 1
        out[~small] = 1.0 - math.gamma(d / 2) * (2.0 / sl) ** nu * special.jv(nu, sl)
    return out


def sphere_directions(d, n_angles):
    """Quadrature directions for angular averages in ``d <= 2``.

    Returns an array of shape ``(m, d)`` whose plain mean is exact for
    trigonometric polynomials of degree below ``m`` (d=2) and for the
    two-point sphere in d=1.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        th = 2 * math.pi * (np.arange(n_angles) + 0.5) / n_angles
        return np.column_stack([np.cos(th), np.sin(th)])
    raise ValueError("angular quadrature only for d <= 2; pass radial=True")
