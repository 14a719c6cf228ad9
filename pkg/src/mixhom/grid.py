"""Periodic grid geometry, the two metrics/dilation groups, and the FFT
convolution/norm engine.

Everything lives on the torus [-L, L)^n sampled at N points per axis.  The
anisotropy of the parabolic dilation group is expressed entirely through
exponents, never through the grid shape, so a single FFT plan serves both
metrics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np


class MetricKind(Enum):
    ISOTROPIC = "isotropic"
    PARABOLIC = "parabolic"


@dataclass(frozen=True)
class Metric:
    """A homogeneous norm together with its dilation group.

    The ambient dimension n splits as (n-1)+1: the last coordinate is the
    distinguished one that scales quadratically under the parabolic group.
    """

    kind: MetricKind
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be positive, got {self.n}")

    @property
    def homogeneous_dimension(self) -> int:
        return self.n if self.kind is MetricKind.ISOTROPIC else self.n + 1


def metric_norm(x, m: Metric):
    """Homogeneous norm of a point (or stacked array of points).

    `x` has the coordinate axis first: shape (n,) or (n, ...).  Isotropic:
    (|x'|^2 + x_n^2)^{1/2}; parabolic: (|x'|^2 + |x_n|)^{1/2}.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != m.n:
        raise ValueError(f"point has dimension {x.shape[0]}, metric expects {m.n}")
    head = np.sum(x[:-1] ** 2, axis=0)
    if m.kind is MetricKind.ISOTROPIC:
        return np.sqrt(head + x[-1] ** 2)
    return np.sqrt(head + np.abs(x[-1]))


def dilate_point(x, delta: float, m: Metric):
    """Apply the dilation group element of parameter delta > 0.

    Isotropic: x -> delta*x.  Parabolic: (x', x_n) -> (delta*x', delta^2*x_n).
    Either way metric_norm scales by exactly delta.
    """
    if delta <= 0:
        raise ValueError(f"dilation parameter must be positive, got {delta}")
    x = np.asarray(x, dtype=float)
    if x.shape[0] != m.n:
        raise ValueError(f"point has dimension {x.shape[0]}, metric expects {m.n}")
    out = x * delta
    if m.kind is MetricKind.PARABOLIC:
        out[-1] = x[-1] * delta * delta
    return out


def _is_power_of_two(k: int) -> bool:
    return k > 0 and (k & (k - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L)^n with N samples per axis."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if not _is_power_of_two(self.N):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if self.n < 1 or self.L <= 0:
            raise ValueError("need n >= 1 and L > 0")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @cached_property
    def mesh(self) -> np.ndarray:
        """Coordinates of every grid point, shape (n, N, ..., N)."""
        return np.stack(np.meshgrid(*([self.axis] * self.n), indexing="ij"))

    @cached_property
    def freq_axis(self) -> np.ndarray:
        """Dual-grid frequencies in FFT layout: (pi/L) * {-N/2 .. N/2-1}."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    @cached_property
    def freq_mesh(self) -> np.ndarray:
        return np.stack(np.meshgrid(*([self.freq_axis] * self.n), indexing="ij"))

    def metric_norms(self, m: Metric) -> np.ndarray:
        """|x|_m at every grid point."""
        return metric_norm(self.mesh, m)

    def freq_metric_norms(self, m: Metric) -> np.ndarray:
        """|xi|_m at every dual-grid point (FFT layout)."""
        return metric_norm(self.freq_mesh, m)

    def index_of(self, x) -> tuple:
        """Grid index of an exactly representable coordinate."""
        idx = []
        for c in np.atleast_1d(x):
            q = (c + self.L) / self.h
            qi = int(round(q))
            if abs(q - qi) > 1e-9:
                raise ValueError(f"coordinate {c} is not on the grid")
            idx.append(qi % self.N)
        return tuple(idx)


@dataclass(frozen=True, eq=False)
class GridField:
    """A real sampled function on a Grid.  Values are never mutated in place."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def __add__(self, other: "GridField") -> "GridField":
        _check_geometry(self, other)
        return GridField(self.grid, self.values + other.values)

    def __sub__(self, other: "GridField") -> "GridField":
        _check_geometry(self, other)
        return GridField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "GridField":
        return GridField(self.grid, self.values * c)

    __rmul__ = __mul__

    def mean(self) -> float:
        return float(np.mean(self.values))


@dataclass(frozen=True, eq=False)
class FrequencyField:
    """Complex FFT coefficients of a GridField on the dual grid (FFT layout)."""

    grid: Grid
    values: np.ndarray

    def energy(self) -> float:
        """Dual-grid L^2 energy; equals lp_norm(f, 2)^2 by Parseval."""
        g = self.grid
        return float(np.sum(np.abs(self.values) ** 2)) * g.cell_volume / g.N ** g.n


def forward_transform(f: GridField) -> FrequencyField:
    return FrequencyField(f.grid, np.fft.fftn(f.values))


def inverse_transform(F: FrequencyField) -> GridField:
    return GridField(F.grid, np.fft.ifftn(F.values).real)


def _check_geometry(f: GridField, g: GridField):
    if f.grid != g.grid:
        raise ValueError(f"geometry mismatch: {f.grid} vs {g.grid}")


def convolve(f: GridField, g: GridField) -> GridField:
    """Periodic convolution with the h^n quadrature weight.

    (f*g)(x) = h^n sum_y f(y) g(x-y), so the result approximates the
    continuum integral when both factors are well resolved.  Both inputs are
    in coordinate layout (origin at index N/2); the kernel is unshifted to
    FFT layout internally so the output is not translated.
    """
    _check_geometry(f, g)
    fh = np.fft.fftn(f.values)
    gh = np.fft.fftn(np.fft.ifftshift(g.values))
    out = np.fft.ifftn(fh * gh).real * f.grid.cell_volume
    return GridField(f.grid, out)


def apply_multiplier(f: GridField, window: np.ndarray) -> GridField:
    """Convolve f against the kernel whose continuum transform is `window`.

    `window` is sampled on the dual grid in FFT layout.  Equivalent to
    convolve(f, kernel_field(window)) but skips materializing the kernel.
    """
    return GridField(f.grid, np.fft.ifftn(np.fft.fftn(f.values) * window).real)


def kernel_field(grid: Grid, window: np.ndarray) -> GridField:
    """Materialize the spatial kernel of a frequency window as a GridField.

    The kernel is centered at x = 0 in the grid's [-L, L) convention.
    """
    k = np.fft.ifftn(window) / grid.cell_volume
    k = np.roll(k, (grid.N // 2,) * grid.n, axis=tuple(range(grid.n)))
    return GridField(grid, k.real)


def delta_field(grid: Grid, weight: float = 1.0) -> GridField:
    """Discrete delta at the origin (coordinate layout): one cell of height
    weight/h^n, so it is the identity element of convolve."""
    v = np.zeros(grid.shape)
    v[grid.index_of(np.zeros(grid.n))] = weight / grid.cell_volume
    return GridField(grid, v)


def lp_norm(f: GridField, p: float) -> float:
    """(h^n sum |f|^p)^{1/p}; a quasi-norm for 0 < p < 1."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    return float((np.sum(np.abs(f.values) ** p) * f.grid.cell_volume) ** (1.0 / p))


def sup_norm(f: GridField) -> float:
    return float(np.max(np.abs(f.values)))


def weak_distribution(f: GridField, alpha: float) -> float:
    """Measure of the superlevel set {|f| > alpha}."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return float(np.count_nonzero(np.abs(f.values) > alpha)) * f.grid.cell_volume


def relative_l2_error(f: GridField, g: GridField) -> float:
    denom = lp_norm(g, 2)
    if denom == 0.0:
        return lp_norm(f, 2)
    return lp_norm(f - g, 2) / denom


def random_band_limited(grid: Grid, bands, seed: int) -> GridField:
    """Real random field whose spectrum is confined to every (metric, lo, hi)
    band in `bands`.  Built by masking the transform of white noise, so the
    result is real and exactly band-limited on the dual grid.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape)
    mask = np.ones(grid.shape, dtype=bool)
    for m, lo, hi in bands:
        t = grid.freq_metric_norms(m)
        mask &= (t >= lo) & (t <= hi)
    if not mask.any():
        raise ValueError("band intersection is empty on this dual grid")
    spec = np.fft.fftn(noise) * mask
    v = np.fft.ifftn(spec).real
    scale = np.sqrt(np.mean(v * v))
    return GridField(grid, v / scale if scale > 0 else v)
