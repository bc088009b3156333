"""Uniform periodic grids on ``[-R, R)^d`` for Fourier-based computations."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ConfigError

__all__ = ["GridSpec", "GridFunction", "DEFAULT_GRIDS", "default_grid"]

CSV_HEADER = "# levysmooth grid-function v1"


@dataclass(frozen=True)
class GridSpec:
    """Box half-width ``R``, points per axis ``n`` and dimension ``d``."""

    half_width: float = 16.0
    n: int = 4096
    dimension: int = 1

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigError("Fourier grids support d = 1 or 2")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 4 and self.n & (self.n - 1) == 0):
            raise ConfigError(f"resolution must be a power of two >= 4, got {self.n}")
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ConfigError("half_width must be positive and finite")

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.n

    @property
    def shape(self):
        return (self.n,) * self.dimension

    def axis(self):
        return -self.half_width + self.spacing * np.arange(self.n)

    def points(self):
        """Node coordinates, shape ``(n,)`` for d=1 and ``(n, n, 2)`` for d=2."""
        ax = self.axis()
        if self.dimension == 1:
            return ax
        return np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)

    def frequencies(self):
        """Angular frequencies in FFT order, shaped like :meth:`points`."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        if self.dimension == 1:
            return k
        return np.stack(np.meshgrid(k, k, indexing="ij"), axis=-1)

    def sample(self, f, label=None):
        """Evaluate a vectorized function at the nodes."""
        vals = np.asarray(f(self.points()), dtype=float)
        if vals.shape != self.shape:
            vals = np.broadcast_to(vals, self.shape).copy()
        return GridFunction(vals, self.half_width, label or getattr(f, "label", "f"))


DEFAULT_GRIDS = {1: GridSpec(16.0, 4096, 1), 2: GridSpec(8.0, 512, 2)}


def default_grid(d=1, half_width=None):
    g = DEFAULT_GRIDS[d]
    return g if half_width is None else GridSpec(float(half_width), g.n, d)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values on the nodes of a :class:`GridSpec`.

    Attributes
    ----------
    values : ndarray, shape (n,) or (n, n)
    half_width : float
    label : str
    """

    values: np.ndarray
    half_width: float
    label: str = "f"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim not in (1, 2) or len(set(v.shape)) != 1:
            raise ConfigError(f"grid values must be (n,) or (n, n), got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ConfigError("grid values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "half_width", float(self.half_width))
        GridSpec(self.half_width, v.shape[0], v.ndim)

    @property
    def spec(self):
        return GridSpec(self.half_width, self.values.shape[0], self.values.ndim)

    @property
    def dimension(self):
        return self.values.ndim

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.n

    def axis(self):
        return self.spec.axis()

    def points(self):
        return self.spec.points()

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def with_values(self, values, label=None):
        return GridFunction(values, self.half_width, self.label if label is None else label)

    def check_compatible(self, other):
        if self.values.shape != other.values.shape or self.half_width != other.half_width:
            raise ConfigError("grid functions live on different grids")

    def __sub__(self, other):
        self.check_compatible(other)
        return self.with_values(self.values - other.values)

    def __add__(self, other):
        self.check_compatible(other)
        return self.with_values(self.values + other.values)

    # -- Fourier helpers ---------------------------------------------------

    def coefficients(self):
        """``c_k`` with ``f(x_j) = sum_k c_k exp(i xi_k (x_j + R))``."""
        return np.fft.fftn(self.values) / self.values.size

    def shifted(self, steps):
        """Periodic shift by whole grid steps: ``g(x) = f(x + steps*h)``."""
        axes = tuple(range(self.dimension))
        steps = np.broadcast_to(np.atleast_1d(steps), (self.dimension,))
        return self.with_values(np.roll(self.values, tuple(-int(s) for s in steps), axis=axes))

    def interpolate(self, x, rtol=0.0):
        """Trigonometric interpolant at arbitrary points.

        Parameters
        ----------
        x : array_like
            Points, shape ``(m,)`` for d=1 or ``(m, 2)`` for d=2.
        rtol : float
            Modes with ``|c_k| <= rtol * max|c|`` are dropped (0 keeps all).

        Returns
        -------
        ndarray, shape (m,)
        """
        modes = trig_modes(self, rtol)
        return modes(x)

    # -- I/O -----------------------------------------------------------------

    def to_csv(self, fh=None):
        """Write ``x[,y],value`` rows after a versioned header line."""
        out = io.StringIO() if fh is None else fh
        out.write(CSV_HEADER + "\n")
        out.write(f"# half_width={self.half_width!r} n={self.n} dimension={self.dimension}"
                  f" label={self.label}\n")
        if self.dimension == 1:
            out.write("x,value\n")
            for x, v in zip(self.axis(), self.values):
                out.write(f"{float(x)!r},{float(v)!r}\n")
        else:
            out.write("x,y,value\n")
            ax = self.axis()
            for i, x in enumerate(ax):
                for j, y in enumerate(ax):
                    out.write(f"{float(x)!r},{float(y)!r},{float(self.values[i, j])!r}\n")
        return out.getvalue() if fh is None else None

    def save_csv(self, path):
        with open(path, "w") as fh:
            self.to_csv(fh)

    @classmethod
    def from_csv(cls, source):
        """Read a CSV produced by :meth:`to_csv` (path or text)."""
        text = Path(source).read_text() if not (isinstance(source, str) and "\n" in source) \
            else source
        lines = [ln for ln in text.splitlines() if ln.strip()]
        label = "grid"
        rows = []
        for ln in lines:
            if ln.startswith("#"):
                for tok in ln[1:].split():
                    if tok.startswith("label="):
                        label = tok[6:]
                continue
            if ln[0].isalpha():
                continue
            rows.append([float(v) for v in ln.split(",")])
        if not rows:
            raise ConfigError("grid CSV has no data rows")
        arr = np.array(rows)
        if arr.shape[1] == 2:
            x, v = arr[:, 0], arr[:, 1]
            n = x.size
            h = x[1] - x[0] if n > 1 else 1.0
            R = n * h / 2
            if not np.allclose(x, -R + h * np.arange(n), rtol=0, atol=1e-9 * R):
                raise ConfigError("grid CSV x-coordinates are not a uniform periodic grid")
            return cls(v, R, label)
        if arr.shape[1] == 3:
            n = int(round(math.sqrt(arr.shape[0])))
            if n * n != arr.shape[0]:
                raise ConfigError("2-d grid CSV must have n^2 rows")
            ax = arr[::n, 0]
            h = ax[1] - ax[0]
            return cls(arr[:, 2].reshape(n, n), n * h / 2, label)
        raise ConfigError("grid CSV must have 2 or 3 columns")


@dataclass(frozen=True, eq=False)
class TrigModes:
    """Sparse trigonometric polynomial ``sum_k c_k exp(i xi_k (x + R))``."""

    freqs: np.ndarray
    coeffs: np.ndarray
    half_width: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = self.freqs.shape[1]
        pts = x.reshape(-1, 1) if d == 1 else x.reshape(-1, d)
        out = np.empty(pts.shape[0])
        step = max(1, 2_000_000 // max(self.coeffs.size, 1))
        for i in range(0, pts.shape[0], step):
            ph = (pts[i:i + step] + self.half_width) @ self.freqs.T
            out[i:i + step] = (np.exp(1j * ph) @ self.coeffs).real
        return out.reshape(x.shape if d == 1 else x.shape[:-1])


def trig_modes(g, rtol=0.0):
    """Real trigonometric interpolant of ``g`` as a :class:`TrigModes`.

    The Nyquist coefficient is split evenly between ``+pi/h`` and ``-pi/h``
    so the interpolant is real.
    """
    c = g.coefficients()
    k = g.spec.frequencies()
    d = g.dimension
    c = c.ravel()
    k = k.reshape(-1, d)
    nyq = math.pi / g.spacing
    for axis in range(d):
        # share Nyquist terms evenly between +pi/h and -pi/h on this axis
        sel = np.isclose(np.abs(k[:, axis]), nyq)
        if np.any(sel):
            c = c.copy()
            c[sel] *= 0.5
            kk = k[sel].copy()
            kk[:, axis] = -kk[:, axis]
            k = np.concatenate([k, kk])
            c = np.concatenate([c, c[sel]])
    if rtol > 0:
        keep = np.abs(c) > rtol * np.max(np.abs(c))
        k, c = k[keep], c[keep]
    return TrigModes(np.ascontiguousarray(k), np.ascontiguousarray(c), g.half_width)

