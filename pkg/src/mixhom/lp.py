"""Littlewood-Paley generators, square functions, and Hardy-type norms.

A generator is stored as a radial frequency window w(t) applied at the
metric norm of the dual variable.  The window is built from a smooth
compactly supported bump normalized so that the squared moduli of its
dyadic dilates sum to exactly 1 on every resolvable frequency: with
u = log2 t the construction is a partition of unity over integer shifts,
so the Calderon condition holds to rounding error by design.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .grid import (
    Grid,
    GridField,
    Metric,
    MetricKind,
    apply_multiplier,
    kernel_field,
    lp_norm,
)


def smooth_bump(u):
    """The standard C-infinity bump exp(-1/(1-u^2)) on (-1, 1), 0 outside."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


def _window_profile(t):
    """Normalized annulus window w(t), supported on t in [1/2, 2].

    w(t) = theta(t)/sqrt(S(t)) with theta(t) = bump(log2 t) and
    S(t) = sum_j theta(2^-j t)^2, which makes sum_j w(2^-j t)^2 = 1
    identically for t > 0.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    u = np.log2(t[pos])
    theta = smooth_bump(u)
    # Only the two integer shifts inside (u-1, u+1) contribute to S.
    j0 = np.floor(u)
    s = smooth_bump(u - j0) ** 2 + smooth_bump(u - j0 - 1.0) ** 2
    out[pos] = theta / np.sqrt(s)
    return out


class LatticeConvention(Enum):
    """Reading of the two-index wedge in lattice spacings: the default takes
    the maximum of the indices; min is available for sensitivity studies."""

    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class ScaleRange:
    """Finite surrogate for the bi-infinite dyadic scale index."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty scale range [{self.lo}, {self.hi}]")

    def indices(self):
        return range(self.lo, self.hi + 1)

    def __len__(self):
        return self.hi - self.lo + 1


@dataclass(frozen=True, eq=False)
class LPGenerator:
    """A band-limited Littlewood-Paley generator tied to one grid and metric.

    The frequency window of the dilate at scale index j is w(2^-j |xi|_m),
    which encodes the 2^{jQ} spatial normalization automatically.
    """

    metric: Metric
    grid: Grid
    resolvable: ScaleRange
    annulus: tuple = (0.5, 2.0)
    smoothness: str = "compactly supported exponential bump, C-infinity"

    @cached_property
    def _freq_norms(self) -> np.ndarray:
        return self.grid.freq_metric_norms(self.metric)

    def window(self, j: int = 0) -> np.ndarray:
        """Frequency window of the scale-j dilate on the dual grid."""
        if j < self.resolvable.lo or j > self.resolvable.hi:
            raise ValueError(
                f"scale {j} outside resolvable range "
                f"[{self.resolvable.lo}, {self.resolvable.hi}]"
            )
        return _window_profile(self._freq_norms * 2.0 ** (-j))

    def in_band_mask(self, r: ScaleRange) -> np.ndarray:
        """Dual-grid points whose full dyadic orbit stays inside range r."""
        t = self._freq_norms
        return (t >= 2.0 ** (r.lo + 1)) & (t <= 2.0 ** (r.hi - 1))

    def partition_deviation(self, r: ScaleRange | None = None) -> float:
        """Max deviation of sum_j |w_j|^2 from 1 over the in-band dual grid."""
        r = r or self.resolvable
        total = np.zeros(self.grid.shape)
        for j in r.indices():
            total += self.window(j) ** 2
        mask = self.in_band_mask(r)
        if not mask.any():
            raise ValueError("no in-band dual-grid points for this range")
        return float(np.max(np.abs(total[mask] - 1.0)))


def build_generator(m: Metric, grid: Grid) -> LPGenerator:
    """Construct the generator and determine the grid's resolvable scales.

    A scale j is resolvable when the dilated annulus intersects the dual
    grid below its outer edge; at least 3 dyadic annuli are required.
    """
    t = grid.freq_metric_norms(m)
    t_pos = t[t > 0]
    t_min, t_max = float(t_pos.min()), float(t.max())
    lo = int(np.ceil(np.log2(t_min) - 1.0))
    hi = int(np.floor(np.log2(t_max))) - 1
    if hi - lo + 1 < 3:
        raise ValueError(
            f"grid too coarse: only {max(hi - lo + 1, 0)} resolvable annuli"
        )
    return LPGenerator(metric=m, grid=grid, resolvable=ScaleRange(lo, hi))


def dilate_generator(g: LPGenerator, j: int) -> GridField:
    """Spatial field of the scale-j dilate, centered at the origin."""
    return kernel_field(g.grid, g.window(j))


def composite_window(g1: LPGenerator, g2: LPGenerator, j: int, k: int) -> np.ndarray:
    """Frequency window of psi_{j,k}: product of the two dilated annuli."""
    if g1.metric.kind is not MetricKind.ISOTROPIC:
        raise ValueError("first generator must be isotropic")
    if g2.metric.kind is not MetricKind.PARABOLIC:
        raise ValueError("second generator must be parabolic")
    if g1.grid != g2.grid:
        raise ValueError("generators live on different grids")
    return g1.window(j) * g2.window(k)


def square_function(f: GridField, g: LPGenerator, r: ScaleRange) -> GridField:
    """Pointwise ell^2 aggregate over scales of the band-pass pieces."""
    acc = np.zeros(f.grid.shape)
    for j in r.indices():
        piece = apply_multiplier(f, g.window(j))
        acc += piece.values ** 2
    return GridField(f.grid, np.sqrt(acc))


def square_function_com(
    f: GridField,
    g1: LPGenerator,
    g2: LPGenerator,
    r1: ScaleRange,
    r2: ScaleRange,
) -> GridField:
    """Two-parameter square function over the (j, k) scale rectangle."""
    acc = np.zeros(f.grid.shape)
    fh = np.fft.fftn(f.values)
    for j in r1.indices():
        w1 = g1.window(j)
        for k in r2.indices():
            piece = np.fft.ifftn(fh * w1 * g2.window(k)).real
            acc += piece * piece
    return GridField(f.grid, np.sqrt(acc))


def lattice_strides(
    grid: Grid,
    j: int,
    k: int,
    convention: LatticeConvention = LatticeConvention.MAX,
    refine_levels: int = 0,
):
    """Strides (in grid cells) of the anisotropic dyadic sampling lattice.

    The x' spacing is 2^-(j^k) and the x_n spacing 2^-(j^2k), with ^ the
    convention's combiner.  Spacings finer than the grid are clamped to one
    cell: oversampling only tightens the reconstruction.
    """
    comb = max if convention is LatticeConvention.MAX else min
    e1 = comb(j, k) + refine_levels
    e2 = comb(j, 2 * k) + refine_levels
    s1 = _stride_for_spacing(grid, 2.0 ** (-e1))
    s2 = _stride_for_spacing(grid, 2.0 ** (-e2))
    return s1, s2


def _stride_for_spacing(grid: Grid, d: float) -> int:
    ratio = d / grid.h
    if ratio <= 1.0:
        return 1
    s = int(round(ratio))
    if abs(ratio - s) > 1e-9 or grid.N % s != 0:
        raise ValueError(f"lattice spacing {d} incompatible with grid h={grid.h}")
    return s


def discrete_square_function_com(
    f: GridField,
    g1: LPGenerator,
    g2: LPGenerator,
    r1: ScaleRange,
    r2: ScaleRange,
    convention: LatticeConvention = LatticeConvention.MAX,
) -> GridField:
    """Discrete two-parameter square function: sample each (j, k) piece on
    the anisotropic dyadic lattice anchored at left lower corners, extend as
    piecewise constants on the dyadic rectangles, and aggregate."""
    grid = f.grid
    acc = np.zeros(grid.shape)
    fh = np.fft.fftn(f.values)
    for j in r1.indices():
        w1 = g1.window(j)
        for k in r2.indices():
            piece = np.fft.ifftn(fh * w1 * g2.window(k)).real
            s1, s2 = lattice_strides(grid, j, k, convention)
            strides = (s1,) * (grid.n - 1) + (s2,)
            sub = piece[tuple(slice(None, None, s) for s in strides)]
            for ax, s in enumerate(strides):
                sub = np.repeat(sub, s, axis=ax)
            acc += sub * sub
    return GridField(grid, np.sqrt(acc))


class HardyVariant(Enum):
    ISOTROPIC = "isotropic"
    PARABOLIC = "parabolic"
    COMPOSITE = "composite"


def project_mean_zero(f: GridField, tol: float = 1e-10) -> GridField:
    """Remove the grid mean if it is not already negligible."""
    mu = f.mean()
    scale = float(np.max(np.abs(f.values))) or 1.0
    if abs(mu) <= tol * scale:
        return f
    return GridField(f.grid, f.values - mu)


def hardy_norm(
    f: GridField,
    variant: HardyVariant,
    p: float,
    g1: LPGenerator,
    g2: LPGenerator | None = None,
    r1: ScaleRange | None = None,
    r2: ScaleRange | None = None,
) -> float:
    """Hardy-type quasi-norm: L^p norm of the variant's square function.

    The composite variant uses the discrete two-parameter square function;
    the single-metric variants use the continuous one.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    f = project_mean_zero(f)
    r1 = r1 or g1.resolvable
    if variant is HardyVariant.COMPOSITE:
        if g2 is None:
            raise ValueError("composite variant needs both generators")
        r2 = r2 or g2.resolvable
        sq = discrete_square_function_com(f, g1, g2, r1, r2)
    else:
        sq = square_function(f, g1, r1)
    return lp_norm(sq, p)


def out_of_band_residual(g: LPGenerator, r: ScaleRange) -> float:
    """Max over the dual grid of the partition mass missed by truncating the
    scale sum to r: sup_xi (1 - sum_{j in r} |w_j(xi)|^2) over active points."""
    total = np.zeros(g.grid.shape)
    for j in r.indices():
        total += g.window(j) ** 2
    t = g._freq_norms
    active = t > 0
    return float(np.max(1.0 - total[active]))
