"""Ball averages, the logarithmic Campanato seminorm and modulus checks (d=1).

Functions are represented by samples on a uniform grid and integrated
exactly as piecewise-linear interpolants: with prefix sums of ``f`` and
``f^2`` every ball average and mean-square oscillation costs O(1).  Radii
are dyadic, ``r_k = 2^-k``, and must be multiples of the grid spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import ConfigError
from .paths import sample_endpoints
from .reports import EstimateReport
from .testfunctions import Constant, Indicator

__all__ = ["dyadic_radii", "BallAverageField", "ball_average_field", "campanato_seminorm",
           "lemma_constant", "chaining_prediction", "chaining_bound_check", "two_radius_check",
           "overlap_check", "ModulusResult", "semigroup_modulus_check", "R0"]

#: Largest radius used by the dyadic checks.
R0 = 2.0 ** -3


def dyadic_radii(k_min=3, k_max=12):
    """``2^-k`` for ``k = k_min..k_max`` in decreasing order."""
    if k_max < k_min:
        raise ConfigError("empty radius family")
    return 2.0 ** -np.arange(k_min, k_max + 1)


def _prefix(v, h):
    a, b = v[:-1], v[1:]
    F = np.concatenate([[0.0], np.cumsum(0.5 * h * (a + b))])
    G = np.concatenate([[0.0], np.cumsum(h * (a * a + a * b + b * b) / 3.0)])
    return F, G


@dataclass(frozen=True, eq=False)
class BallAverageField:
    """Ball averages ``f_bar[x, r]`` on the interior grid points.

    Attributes
    ----------
    x : ndarray
        Centres (grid points at distance ``>= max(radii)`` from the boundary).
    f : ndarray
        ``f`` at the centres.
    radii : ndarray
    averages : ndarray, shape (len(radii), len(x))
    mean_square : ndarray
        ``|B_r|^-1 int_{B_r(x)} |f - f_bar|^2``, same shape.
    spacing : float
    """

    x: np.ndarray
    f: np.ndarray
    radii: np.ndarray
    averages: np.ndarray
    mean_square: np.ndarray
    spacing: float

    @property
    def log_radii(self):
        return np.abs(np.log2(self.radii))

    def seminorm_per_radius(self, alpha):
        """``sup_x |log2 r|^{2 alpha} r^-1 int_{B_r(x)} |f - f_bar|^2`` per radius."""
        w = self.log_radii ** (2 * alpha) * 2.0  # |B_r| / r = 2 in d=1
        return w * self.mean_square.max(axis=1)

    def seminorm(self, alpha):
        return float(self.seminorm_per_radius(alpha).max())

    def deviation(self):
        """``|f_bar[x, r] - f(x)|``."""
        return np.abs(self.averages - self.f[None, :])


def ball_average_field(f, domain=(-0.5, 0.5), radii=None, spacing=2.0 ** -16):
    """Exact ball averages of the piecewise-linear interpolant of ``f``.

    Functions providing ``antiderivative(x, power)`` (``int_0^x f^power``)
    are integrated exactly instead.

    Parameters
    ----------
    f : callable or ndarray
        Function or its samples at ``linspace(domain[0], domain[1], n)``.
    domain : (float, float)
    radii : array_like, optional
        Defaults to :func:`dyadic_radii`.
    spacing : float
        Grid spacing when ``f`` is callable; each radius must be a multiple.
    """
    a, b = map(float, domain)
    if not a < b:
        raise ConfigError("domain must satisfy a < b")
    radii = dyadic_radii() if radii is None else np.asarray(radii, dtype=float)
    if radii.size == 0:
        raise ConfigError("empty radius family")
    exact = hasattr(f, "antiderivative")
    if callable(f):
        n = int(round((b - a) / spacing)) + 1
        xs = np.linspace(a, b, n)
        v = np.asarray(f(xs), dtype=float)
    else:
        v = np.asarray(f, dtype=float)
        n = v.size
        xs = np.linspace(a, b, n)
    h = (b - a) / (n - 1)
    steps = radii / h
    ks = np.rint(steps).astype(int)
    if np.any(np.abs(steps - ks) > 1e-9 * np.maximum(steps, 1)) or np.any(ks < 1):
        raise ConfigError("radii must be positive multiples of the grid spacing")
    kmax = int(ks.max())
    if 2 * kmax >= n:
        raise ConfigError("largest ball does not fit in the domain")
    if exact:
        F, G = f.antiderivative(xs, 1), f.antiderivative(xs, 2)
    else:
        F, G = _prefix(v, h)
    idx = np.arange(kmax, n - kmax)
    avg = np.empty((ks.size, idx.size))
    msq = np.empty_like(avg)
    for j, k in enumerate(ks):
        two_r = 2 * k * h
        avg[j] = (F[idx + k] - F[idx - k]) / two_r
        msq[j] = (G[idx + k] - G[idx - k]) / two_r - avg[j] ** 2
    # clip rounding: averages stay within the range of f on the ball
    avg = np.clip(avg, v.min(), v.max())
    return BallAverageField(xs[idx], v[idx], radii, avg, np.maximum(msq, 0.0), h)


def campanato_seminorm(f, domain=(-0.5, 0.5), alpha=2.0, *, radii=None, spacing=2.0 ** -16):
    """Smallest ``C`` with ``int_{B_r(x)} |f - f_bar|^2 <= C r / |log2 r|^{2 alpha}``
    over the tested balls."""
    if not alpha > 1:
        raise ConfigError("log-exponent alpha must exceed 1")
    return ball_average_field(f, domain, radii, spacing).seminorm(alpha)


def lemma_constant(seminorm):
    """Mean-oscillation constant ``kappa``: ``sqrt(|B_r|^-1 int |f - f_bar|^2) <= kappa / |log2 r|^alpha``.

    In d=1 ``|B_r| = 2r``, so ``kappa = sqrt(seminorm / 2)``.
    """
    return math.sqrt(seminorm / 2.0)


def chaining_prediction(kappa, alpha, m):
    """Telescoped bound on ``|f_bar[x, 2^-m] - f(x)| |log2 r|^{alpha-1}``.

    Summing the two-radius estimate over ``r_k = 2^-k``, ``k >= m``, gives
    ``(1 + 2^{1/2}) kappa sum_{j >= m} j^-alpha``.
    """
    m = np.asarray(m, dtype=float)
    return (1 + math.sqrt(2.0)) * kappa * special.zeta(alpha, m) * m ** (alpha - 1)


def chaining_bound_check(f, alpha, domain=(-0.5, 0.5), *, radii=None, spacing=2.0 ** -16,
                         label=None, field=None):
    """Compare the empirical Lebesgue-point deviation with the telescoped bound.

    Rows: one per radius (``lhs`` = ``sup_x |f_bar - f| |log2 r|^{alpha-1}``,
    ``rhs`` = :func:`chaining_prediction`) and a ``chaining-sup`` row for the
    suprema over all radii.  ``note`` of the summary row holds the ratio.
    """
    fld = field or ball_average_field(f, domain, radii, spacing)
    label = label or getattr(f, "label", "f")
    kappa = lemma_constant(fld.seminorm(alpha))
    m = fld.log_radii
    emp = fld.deviation().max(axis=1) * m ** (alpha - 1)
    pred = chaining_prediction(kappa, alpha, m)
    rep = EstimateReport("campanato")
    for r, e, p in zip(fld.radii, emp, pred):
        rep.add(check="chaining", model="-", f=label, x=None, t=float(r), lhs=float(e), rhs=float(p),
                passed=bool(e <= p * (1 + 1e-12) + 1e-15))
    E, P = float(emp.max()), float(pred.max())
    ratio = P / E if E > 0 else math.inf
    rep.add(check="chaining-sup", model="-", f=label, x=None, t=None, lhs=E, rhs=P,
            passed=bool(E <= P * (1 + 1e-12) + 1e-15), note=f"ratio={ratio!r}")
    return rep


def two_radius_check(fld, alpha, slack=1.05):
    """Worst ratio of ``|f_bar_{r1} - f_bar_{r2}|`` to ``kappa [1 + (r1/r2)^{1/2}] / |log2 r1|^alpha``."""
    kappa = lemma_constant(fld.seminorm(alpha))
    worst = 0.0
    for i in range(fld.radii.size):
        for j in range(i + 1, fld.radii.size):
            r1, r2 = fld.radii[i], fld.radii[j]
            lhs = np.abs(fld.averages[i] - fld.averages[j]).max()
            rhs = kappa * (1 + math.sqrt(r1 / r2)) / abs(math.log2(r1)) ** alpha
            worst = max(worst, lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf))
    return worst, worst <= slack


def overlap_check(fld, alpha, slack=1.05):
    """Worst ratio of ``|f_bar_{y,2r} - f_bar_{x,2r}|`` (``|x - y| = r``) to
    ``4 kappa / |log2 2r|^alpha``."""
    kappa = lemma_constant(fld.seminorm(alpha))
    worst = 0.0
    h = fld.spacing
    for j, big in enumerate(fld.radii):
        r = big / 2
        k = int(round(r / h))
        if k < 1 or k >= fld.x.size:
            continue
        lhs = np.abs(fld.averages[j, k:] - fld.averages[j, :-k]).max()
        rhs = 4 * kappa / abs(math.log2(big)) ** alpha
        worst = max(worst, lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf))
    return worst, worst <= slack


# ---------------------------------------------------------------------------
# Semigroup modulus


@dataclass(frozen=True)
class ModulusResult:
    """Paired Monte Carlo modulus of ``g = P_t f``.

    Attributes
    ----------
    radii, omega, se : ndarray
        ``omega(r) = max_x |g(x + r) - g(x)|`` over the probe grid and the
        standard error of the maximizing paired difference.
    inconclusive : ndarray of bool
        ``omega < 3 se`` (noise at the modulus scale).
    required_n : ndarray
        Paths needed for ``omega = 3 se`` where inconclusive, else 0.
    exponent : float
        Least-squares ``gamma`` in ``omega ~ C |log2 r|^-gamma``.
    constant : float
        Fit of ``omega ~ C |log2 r|^{1-alpha}`` (geometric mean).
    residual : float
        RMS log-residual of that fit.
    seminorm_ratio : ndarray
        Per radius, measured log-Campanato quantity of ``g`` over its bound.
    """

    alpha: float
    radii: np.ndarray
    omega: np.ndarray
    se: np.ndarray
    inconclusive: np.ndarray
    required_n: np.ndarray
    exponent: float
    constant: float
    residual: float
    seminorm_ratio: np.ndarray

    def theory(self):
        return self.constant * np.abs(np.log2(self.radii)) ** (1 - self.alpha)

    def to_csv(self, fh):
        fh.write("# levysmooth modulus v1\n")
        fh.write("r,omega,se,fit,residual,inconclusive\n")
        fit = self.theory()
        for r, w, s, c in zip(self.radii, self.omega, self.se, fit):
            res = math.log(w / c) if w > 0 and c > 0 else float("nan")
            fh.write(f"{float(r)!r},{float(w)!r},{float(s)!r},{float(c)!r},{res!r},"
                     f"{int(w < 3 * s)}\n")


def _window_counts(sorted_l, lo, hi):
    return np.searchsorted(sorted_l, hi, "left") - np.searchsorted(sorted_l, lo, "left")


def _indicator_g(sorted_l, f, x):
    n = sorted_l.size
    return _window_counts(sorted_l, f.a - x, f.b - x) / n


def _paired_indicator(sorted_l, f, x, r):
    """Mean and SE of ``f(x + r + L) - f(x + L)`` with common ``L``."""
    n = sorted_l.size
    cy = _window_counts(sorted_l, f.a - x - r, f.b - x - r)
    cx = _window_counts(sorted_l, f.a - x, f.b - x)
    inter = _window_counts(sorted_l, np.maximum(f.a - x - r, f.a - x), np.minimum(f.b - x - r, f.b - x))
    inter = np.where(f.b - f.a > r, inter, 0)
    mean = (cy - cx) / n
    m2 = (cy + cx - 2 * inter) / n          # E[D^2], D in {-1, 0, 1}
    var = np.maximum(m2 - mean ** 2, 0.0) * n / (n - 1)
    return mean, np.sqrt(var / n)


def _paired_generic(endpoints, f, x, r, chunk=64):
    n = endpoints.size
    mean = np.empty(x.size)
    se = np.empty(x.size)
    for s in range(0, x.size, chunk):
        xs = x[s:s + chunk]
        d = f(xs[None, :] + r + endpoints[:, None]) - f(xs[None, :] + endpoints[:, None])
        mean[s:s + chunk] = d.mean(axis=0)
        se[s:s + chunk] = d.std(axis=0, ddof=1) / math.sqrt(n)
    return mean, se


def semigroup_modulus_check(model, f, t, *, n_paths, rng, eps_cut=None, radii=None,
                            probe=(-4.0, 4.0, 2.0 ** -6), grid=(-4.0, 4.0, 2.0 ** -14),
                            tol=0.25, min_exponent=None, threads=None, endpoints=None):
    """Modulus of continuity of ``g = P_t f`` for a log-stable model (d=1).

    (i) The log-Campanato quantity of ``g`` (common-random-number estimate on
    ``grid``) is compared with ``2 (m/(m-1))^{2 alpha} t^-1 ||f||^2`` at
    ``r = 2^-m``, the bound obtained by chaining the smoothing inequality
    through the lower bound on the Levy density.  (ii) The paired modulus
    ``omega(r)`` is measured on the ``probe`` points and fitted.

    Parameters
    ----------
    model : LevyModel
        One-dimensional, log-stable measure.
    f : TestFunction
        Indicators use an exact counting path; other functions are averaged
        directly (``O(n_paths x probes)``).
    min_exponent : float, optional
        Required ``gamma``; defaults to ``alpha - 1 - 0.25``.

    Returns
    -------
    report : EstimateReport
    result : ModulusResult
    """
    meas = model.measure
    if model.dimension != 1 or getattr(meas, "kind", "") != "log_stable":
        raise ConfigError("semigroup_modulus_check needs a one-dimensional log-stable model")
    alpha = meas.alpha
    radii = dyadic_radii(3, 10) if radii is None else np.asarray(radii, dtype=float)
    min_exponent = alpha - 1 - 0.25 if min_exponent is None else min_exponent
    if endpoints is None:
        endpoints = sample_endpoints(model, t, n_paths, rng, eps_cut, threads=threads)[:, 0]
    L = np.sort(np.asarray(endpoints, dtype=float).ravel())
    n = L.size
    sup_f = f.sup_norm
    seed = f"{rng.seed}:{rng.stream}" if rng is not None else ""
    label = f.label

    # (i) Campanato quantity of g on a fine grid
    a, b, h = grid
    xs = np.linspace(a, b, int(round((b - a) / h)) + 1)
    if isinstance(f, Indicator):
        g = _indicator_g(L, f, xs)
    elif isinstance(f, Constant):
        g = np.full(xs.size, f.value)
    else:
        g = np.array([f(x + L).mean() for x in xs])
    fld = ball_average_field(g, (a, b), radii)
    m = fld.log_radii
    measured = fld.seminorm_per_radius(alpha)
    bound = 2 * (m / (m - 1)) ** (2 * alpha) * sup_f ** 2 / t
    with np.errstate(divide="ignore", invalid="ignore"):
        sratio = np.where(bound > 0, measured / bound, 0.0)

    # (ii) paired modulus on the probe points
    pa, pb, ph = probe
    px = np.linspace(pa, pb, int(round((pb - pa) / ph)) + 1)
    omega = np.empty(radii.size)
    se = np.empty(radii.size)
    for j, r in enumerate(radii):
        if isinstance(f, Indicator):
            mean, s = _paired_indicator(L, f, px, r)
        elif isinstance(f, Constant):
            mean, s = np.zeros(px.size), np.zeros(px.size)
        else:
            mean, s = _paired_generic(L, f, px, r)
        i = int(np.argmax(np.abs(mean)))
        omega[j], se[j] = abs(mean[i]), s[i]
    inconclusive = (omega < 3 * se) & (se > 0)
    req = np.where(inconclusive, n * (3 * se / np.maximum(omega, 1e-300)) ** 2, 0.0)
    req = np.minimum(req, 1e18)
    pos = omega > 0
    if pos.sum() >= 2:
        gamma = float(-np.polyfit(np.log(m[pos]), np.log(omega[pos]), 1)[0])
        logc = np.log(omega[pos]) + (alpha - 1) * np.log(m[pos])
        const = float(np.exp(logc.mean()))
        resid = float(np.sqrt(np.mean((logc - logc.mean()) ** 2)))
    else:
        gamma, const, resid = math.inf, 0.0, 0.0
    res = ModulusResult(alpha, radii, omega, se, inconclusive, req, gamma, const, resid, sratio)

    rep = EstimateReport("campanato")
    mlabel = model.label
    for r, meas_v, bd in zip(radii, measured, bound):
        rep.add(check="log-campanato", model=mlabel, f=label, x=None, t=float(t), lhs=float(meas_v),
                rhs=float(bd), tol=tol, passed=bool(meas_v <= (1 + tol) * bd), n_paths=n, seed=seed,
                note=f"r={float(r)!r}")
    for r, w, s, inc, rq in zip(radii, omega, se, inconclusive, req):
        rep.add(check="modulus", model=mlabel, f=label, x=float(r), t=float(t), lhs=float(w),
                rhs=float(3 * s), se=float(s), passed=not bool(inc), n_paths=n, seed=seed,
                note="" if not inc else f"inconclusive; required_n={float(rq)!r}")
    rep.add(check="modulus-exponent", model=mlabel, f=label, x=None, t=float(t),
            lhs=-float(gamma), rhs=-float(min_exponent), passed=bool(gamma >= min_exponent),
            n_paths=n, seed=seed, note=f"constant={const!r};residual={resid!r}")
    return rep, res
