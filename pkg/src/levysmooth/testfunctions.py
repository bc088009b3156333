"""Bounded test functions used by the verification suites.

Every function accepts points of shape ``(...,)`` in d=1 and ``(..., d)``
otherwise and returns an array of shape ``(...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import ConfigError

__all__ = ["TestFunction", "Constant", "Sine", "Indicator", "LogModulus", "GaussianBump",
           "GridInterpolant", "make_test_function"]


def _first(x, d):
    x = np.asarray(x, dtype=float)
    return x if d == 1 else x[..., 0]


@dataclass(frozen=True)
class TestFunction:
    """Base class; subclasses define ``__call__`` and the bounds below."""

    __test__ = False
    dimension: int = 1

    @property
    def label(self):
        return type(self).__name__.lower()

    @property
    def sup_norm(self):
        raise NotImplementedError

    @property
    def lipschitz(self):
        """Lipschitz constant, ``inf`` if discontinuous."""
        return math.inf

    @property
    def second_derivative_bound(self):
        return math.inf

    def squared(self):
        return Squared(self.dimension, self)


@dataclass(frozen=True)
class Constant(TestFunction):
    value: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape if self.dimension == 1 else x.shape[:-1]
        return np.full(shape, float(self.value))

    @property
    def label(self):
        return f"const({self.value:g})"

    @property
    def sup_norm(self):
        return abs(self.value)

    @property
    def lipschitz(self):
        return 0.0

    @property
    def second_derivative_bound(self):
        return 0.0


@dataclass(frozen=True)
class Sine(TestFunction):
    """``sin(omega x_1 + phase)``."""

    frequency: float = 1.0
    phase: float = 0.0

    def __call__(self, x):
        return np.sin(self.frequency * _first(x, self.dimension) + self.phase)

    @property
    def label(self):
        return "sin" if self.frequency == 1 and self.phase == 0 else f"sin({self.frequency:g}x+{self.phase:g})"

    @property
    def sup_norm(self):
        return 1.0

    @property
    def lipschitz(self):
        return abs(self.frequency)

    @property
    def second_derivative_bound(self):
        return self.frequency ** 2


@dataclass(frozen=True)
class Indicator(TestFunction):
    """Indicator of ``[a, b)`` (of the cube ``[a, b)^d`` for d >= 2)."""

    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ConfigError("indicator needs a < b")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x < self.b)
        if self.dimension > 1:
            inside = np.all(inside, axis=-1)
        return inside.astype(float)

    @property
    def label(self):
        return f"1[{self.a:g},{self.b:g})"

    @property
    def sup_norm(self):
        return 1.0

    def squared(self):
        return self


@dataclass(frozen=True)
class LogModulus(TestFunction):
    """``1 / |log2 |x_1||^(alpha-1)`` for ``|x_1| < 1/2``, capped at 1 beyond.

    Continuous with modulus of continuity of order ``|log2 r|^{1-alpha}``.
    """

    alpha: float = 2.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ConfigError("log-modulus exponent alpha must exceed 1")

    def __call__(self, x):
        r = np.abs(_first(x, self.dimension))
        out = np.ones_like(r)
        small = r < 0.5
        with np.errstate(divide="ignore"):
            lg = -np.log2(r[small])
        out[small] = np.where(np.isinf(lg), 0.0, lg ** (1.0 - self.alpha))
        return out

    @property
    def label(self):
        return f"logmod({self.alpha:g})"

    def antiderivative(self, x, power=1):
        """``int_0^x f^power`` in closed form (upper incomplete gamma)."""
        x = np.asarray(_first(x, self.dimension), dtype=float)
        a = np.minimum(np.abs(x), 0.5)
        e = power * (self.alpha - 1)
        with np.errstate(divide="ignore"):
            u = np.where(a > 0, -np.log(np.where(a > 0, a, 1.0)), np.inf)
        core = np.where(a > 0, math.log(2) ** e * upper_gamma(1 - e, u), 0.0)
        return np.sign(x) * (core + np.maximum(np.abs(x) - 0.5, 0.0))

    @property
    def sup_norm(self):
        return 1.0


@dataclass(frozen=True)
class GaussianBump(TestFunction):
    """``exp(-|x - center|^2 / (2 width^2))``."""

    width: float = 1.0
    center: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r2 = (x - self.center) ** 2
        if self.dimension > 1:
            r2 = r2.sum(axis=-1)
        return np.exp(-0.5 * r2 / self.width ** 2)

    @property
    def label(self):
        return f"bump({self.width:g})"

    @property
    def sup_norm(self):
        return 1.0

    @property
    def lipschitz(self):
        return math.exp(-0.5) / self.width

    @property
    def second_derivative_bound(self):
        return 1.0 / self.width ** 2


@dataclass(frozen=True)
class Squared(TestFunction):
    base: TestFunction = None

    def __call__(self, x):
        return self.base(x) ** 2

    @property
    def label(self):
        return f"({self.base.label})^2"

    @property
    def sup_norm(self):
        return self.base.sup_norm ** 2


@dataclass(frozen=True, eq=False)
class GridInterpolant(TestFunction):
    """Trigonometric interpolant of a :class:`~levysmooth.grid.GridFunction`."""

    grid: object = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape if self.dimension == 1 else x.shape[:-1]
        pts = x.reshape(-1) if self.dimension == 1 else x.reshape(-1, self.dimension)
        return self.grid.interpolate(pts).reshape(shape)

    @property
    def label(self):
        return self.grid.label

    @property
    def sup_norm(self):
        return self.grid.sup_norm()


def upper_gamma(s, u):
    """Upper incomplete gamma ``Gamma(s, u)`` for real ``s`` (also ``s <= 0``) and ``u > 0``."""
    u = np.asarray(u, dtype=float)
    n = max(0, math.ceil(-s)) if s != 0 else 0
    base = s + n
    fin = np.isfinite(u)
    uu = np.where(fin, u, 1.0)
    if base == 0:
        g = special.exp1(uu)
    else:
        g = special.gammaincc(base, uu) * special.gamma(base)
    # Gamma(s, u) = (Gamma(s + 1, u) - u^s e^-u) / s, stepping down from base
    for k in range(n, 0, -1):
        sk = s + k - 1
        g = (g - uu ** sk * np.exp(-uu)) / sk
    return np.where(fin, g, 0.0)


def make_test_function(spec, dimension=1):
    """Build a test function from an id string or a mapping.

    Accepted ids: ``constant``, ``sin``, ``indicator``, ``log-modulus``,
    ``bump``; a mapping may carry parameters (``{"id": "indicator", "a": 0,
    "b": 1}``) or ``{"id": "grid", "file": path}``.
    """
    from .grid import GridFunction

    if isinstance(spec, str):
        spec = {"id": spec}
    spec = dict(spec)
    kind = spec.pop("id", None)
    table = {
        "constant": (Constant, {"value"}),
        "sin": (Sine, {"frequency", "phase"}),
        "indicator": (Indicator, {"a", "b"}),
        "log-modulus": (LogModulus, {"alpha"}),
        "bump": (GaussianBump, {"width", "center"}),
    }
    if kind == "grid":
        if set(spec) != {"file"}:
            raise ConfigError("grid test function takes exactly one key 'file'")
        g = GridFunction.from_csv(spec["file"])
        return GridInterpolant(g.dimension, g)
    if kind not in table:
        raise ConfigError(f"unknown test function {kind!r}")
    cls, keys = table[kind]
    extra = set(spec) - keys
    if extra:
        raise ConfigError(f"unexpected parameters {sorted(extra)} for test function {kind!r}")
    return cls(dimension, **{k: float(v) for k, v in spec.items()})
