"""Maximal operators over dyadic ladders, the Cotlar-inequality constant
fit, and the weak-type (1,1) probe.

Continuous suprema are replaced by maxima over dyadic radius/side ladders;
this under-estimates the true sup by at most the step ratio of the ladder,
which the config records.  Ball and rectangle averages are periodic
convolutions, so each ladder member costs one FFT pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d

from .grid import (
    Grid,
    GridField,
    Metric,
    convolve,
    lp_norm,
    sup_norm,
    weak_distribution,
)
from .kernels import ProductKernel, sample_on_grid, truncated_apply


@dataclass(frozen=True)
class MaximalConfig:
    """Dyadic radius ladder for ball/rectangle averages; periodic boundary."""

    radii: tuple
    step_ratio: float = 2.0

    def __post_init__(self):
        if not self.radii:
            raise ValueError("empty radius ladder")


def default_ladder(grid: Grid) -> MaximalConfig:
    """Dyadic radii from one cell up to the half-domain."""
    radii = []
    r = grid.h
    while r <= grid.L:
        radii.append(r)
        r *= 2.0
    return MaximalConfig(radii=tuple(radii))


def _validate_ladder(grid: Grid, cfg: MaximalConfig):
    for r in cfg.radii:
        if r < grid.h or r > grid.L:
            raise ValueError(f"radius {r} outside [h, L] = [{grid.h}, {grid.L}]")


def hl_maximal(f: GridField, m: Metric, cfg: MaximalConfig | None = None) -> GridField:
    """Hardy-Littlewood maximal function over metric balls.

    Pointwise sup over the radius ladder of the average of |f| on the open
    ball B_m(x, r).  The smallest admissible radius is h, whose ball is the
    single cell, so Mf >= |f| everywhere.
    """
    grid = f.grid
    cfg = cfg or default_ladder(grid)
    _validate_ladder(grid, cfg)
    absf = GridField(grid, np.abs(f.values))
    norms = grid.metric_norms(m)
    out = np.full(grid.shape, -np.inf)
    for r in cfg.radii:
        mask = norms < r
        count = int(np.count_nonzero(mask))
        if count == 0:
            continue
        ball = GridField(grid, mask / (count * grid.cell_volume))
        avg = convolve(absf, ball)
        out = np.maximum(out, avg.values)
    return GridField(grid, out)


def strong_maximal(f: GridField, cfg: MaximalConfig | None = None) -> GridField:
    """Strong maximal function: sup of averages over axis-aligned rectangles
    |y' - x'| < r, |y_n - x_n| < s with independent dyadic sides."""
    grid = f.grid
    if grid.n < 2:
        raise ValueError("strong maximal needs n >= 2")
    cfg = cfg or default_ladder(grid)
    _validate_ladder(grid, cfg)
    absf = np.abs(f.values)
    out = np.full(grid.shape, -np.inf)
    for r in cfg.radii:
        w1 = 2 * int(round(r / grid.h)) - 1  # cells with |offset| < r
        part = absf
        for ax in range(grid.n - 1):
            part = uniform_filter1d(part, size=w1, axis=ax, mode="wrap")
        for s in cfg.radii:
            w2 = 2 * int(round(s / grid.h)) - 1
            avg = uniform_filter1d(part, size=w2, axis=grid.n - 1, mode="wrap")
            out = np.maximum(out, avg)
    return GridField(grid, out)


def maximal_truncation(
    K: ProductKernel, f: GridField, eps_ladder, m: Metric
) -> GridField:
    """Pointwise max over the truncation ladder of |T_eps f|."""
    eps_ladder = list(eps_ladder)
    if not eps_ladder:
        raise ValueError("empty truncation ladder")
    grid = f.grid
    base = sample_on_grid(K, grid)
    norms = grid.metric_norms(m)
    out = np.full(grid.shape, -np.inf)
    for eps in eps_ladder:
        if eps < 2.0 * grid.h:
            raise ValueError(f"eps = {eps} below the 2h resolution guard")
        tk = GridField(grid, base.values * (norms >= eps))
        tf = convolve(f, tk)
        out = np.maximum(out, np.abs(tf.values))
    return GridField(grid, out)


def truncation_ladder(grid: Grid, top: float | None = None):
    """Dyadic eps ladder from the 2h resolution guard up to `top`."""
    top = top if top is not None else 2.0
    eps = 2.0 * grid.h
    ladder = []
    while eps <= top:
        ladder.append(eps)
        eps *= 2.0
    if not ladder:
        raise ValueError("grid too coarse for any admissible truncation")
    return ladder


def cotlar_fit(
    K: ProductKernel,
    f: GridField,
    delta: float,
    p: float,
    m: Metric,
    eps_ladder=None,
) -> float:
    """Empirical constant in the pointwise domination of the maximal
    truncation:

        T* f <= C ( M_h(|Tf|^delta)^{1/delta} + M_h(|M_S f|^p)^{1/p} + M_S f ).

    Tf is the smallest resolvable truncation.  Returns the max ratio over
    cells where the denominator exceeds 1e-12 * ||f||_inf.
    """
    if not 0.0 < delta <= 2.0:
        raise ValueError(f"delta out of range (0, 2]: {delta}")
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    grid = f.grid
    if sup_norm(f) == 0.0:
        return 0.0
    ladder = list(eps_ladder) if eps_ladder is not None else truncation_ladder(grid)
    tstar = maximal_truncation(K, f, ladder, m)
    tf = truncated_apply(K, f, min(ladder), m)
    msf = strong_maximal(f)
    maj1 = hl_maximal(GridField(grid, np.abs(tf.values) ** delta), m)
    maj1 = maj1.values ** (1.0 / delta)
    maj2 = hl_maximal(GridField(grid, msf.values ** p), m)
    maj2 = maj2.values ** (1.0 / p)
    denom = maj1 + maj2 + msf.values
    mask = denom > 1e-12 * sup_norm(f)
    if not mask.any():
        raise ValueError("denominator negligible everywhere")
    return float(np.max(tstar.values[mask] / denom[mask]))


def weak_type_probe(K: ProductKernel, f: GridField, alphas, m: Metric):
    """Tabulate alpha * |{|Tf| > alpha}| / ||f||_1 across the level ladder,
    with Tf the smallest resolvable truncation."""
    norm1 = lp_norm(f, 1)
    if norm1 == 0.0:
        raise ValueError("probe needs a nonzero f")
    tf = truncated_apply(K, f, 2.0 * f.grid.h, m)
    rows = []
    for alpha in alphas:
        meas = weak_distribution(tf, alpha)
        rows.append(
            {"alpha": alpha, "statistic": alpha * meas / norm1, "measure": meas}
        )
    return rows
