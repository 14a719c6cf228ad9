"""Test-function-space norms, decay-exponent fits for truncated operators,
and Lipschitz norms with their Littlewood-Paley characterization.

Continuous suprema over points, offsets, and pairs are replaced by maxima
over exhaustive single-cell samples plus seeded random samples; the sample
sizes and seed are part of each norm's signature so results reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridField, Metric, MetricKind, metric_norm, sup_norm
from .lp import LPGenerator, ScaleRange


@dataclass(frozen=True)
class TestFunctionParams:
    """Size/smoothness/cancellation class parameters: beta in (0,1] is the
    Holder exponent, gamma > 0 the decay gain, r > 0 the scale, x0 the
    center, and the metric kind selects the size exponent n+gamma or
    n+1+gamma."""

    beta: float
    gamma: float
    r: float
    x0: tuple
    kind: MetricKind

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if self.gamma <= 0 or self.r <= 0:
            raise ValueError("need gamma > 0 and r > 0")


@dataclass(frozen=True)
class LipschitzParams:
    """Holder exponents: alpha in (0,1) single-metric, (alpha1, alpha2) each
    in (0,1) for the composite double-difference norm."""

    alpha: float | None = None
    alpha1: float | None = None
    alpha2: float | None = None

    def __post_init__(self):
        for a in (self.alpha, self.alpha1, self.alpha2):
            if a is not None and not 0.0 < a < 1.0:
                raise ValueError(f"Lipschitz exponent must lie in (0, 1), got {a}")


def _size_exponent(kind: MetricKind, n: int, gamma: float) -> float:
    return n + gamma if kind is MetricKind.ISOTROPIC else n + 1 + gamma


def test_norm(f: GridField, p: TestFunctionParams, seed: int = 0,
              pair_samples: int = 10_000) -> float:
    """Norm of the size/smoothness/cancellation test-function class.

    Max of the size quotient |f(x)| (r+|x-x0|)^{n+gamma} / r^gamma (exponent
    n+1+gamma in the parabolic metric) with the Holder smoothness quotient
    over admissible pairs |x1-x2| <= (r+|x1-x0|)/2.  Pairs are all grid
    neighbors plus seeded random admissible pairs.  Zero grid mean is a
    precondition.
    """
    grid = f.grid
    m = Metric(p.kind, grid.n)
    peak = sup_norm(f)
    if peak == 0.0:
        return 0.0
    if abs(f.mean()) >= 1e-8 * peak:
        raise ValueError("cancellation precondition violated: nonzero grid mean")
    expo = _size_exponent(p.kind, grid.n, p.gamma)
    x0 = np.asarray(p.x0, dtype=float).reshape(grid.n, *([1] * grid.n))
    dist = metric_norm(grid.mesh - x0, m)
    weight = (p.r + dist) ** expo / p.r ** p.gamma
    best = float(np.max(np.abs(f.values) * weight))

    # Smoothness quotient: |f(x1)-f(x2)| (r+|x1-x0|)^{beta+expo}
    #                      / (|x1-x2|^beta r^gamma),
    # admissible when |x1-x2| <= (r+|x1-x0|)/2.
    def quotient(shift):
        u = np.asarray(shift, dtype=float) * grid.h
        du = float(metric_norm(u, m))
        if du == 0.0:
            return 0.0
        other = np.roll(f.values, tuple(-s for s in shift),
                        axis=tuple(range(grid.n)))
        diff = np.abs(other - f.values)
        adm = du <= 0.5 * (p.r + dist)
        if not adm.any():
            return 0.0
        q = diff * (p.r + dist) ** (p.beta + expo) / (du ** p.beta * p.r ** p.gamma)
        return float(np.max(q[adm]))

    for ax in range(grid.n):
        shift = [0] * grid.n
        shift[ax] = 1
        best = max(best, quotient(shift))
    rng = np.random.default_rng(seed)
    # Random pairs realized as random lattice offsets applied to every x1 at
    # once; admissibility is re-checked pointwise inside the quotient.
    n_offsets = max(1, pair_samples // grid.N ** (grid.n - 1))
    for _ in range(n_offsets):
        shift = [int(s) for s in rng.integers(-grid.N // 4, grid.N // 4 + 1,
                                              size=grid.n)]
        if all(s == 0 for s in shift):
            continue
        best = max(best, quotient(shift))
    return best


@dataclass(frozen=True)
class DecayEstimate:
    exponent: float
    amplitude: float
    shell_radii: tuple
    shell_maxima: tuple


def decay_exponent_fit(g: GridField, m: Metric, x0) -> DecayEstimate:
    """Fit |g| ~ C (1+|x-x0|_m)^{-a} from shell maxima.

    Shells are half-octave (ratio sqrt 2) between radius 1 and L/2; each
    shell contributes its max of |g| at the radius where the max occurs.
    Requires that g actually decays: the max beyond L/2 must be below the
    max inside.
    """
    grid = g.grid
    x0 = np.asarray(x0, dtype=float).reshape(grid.n, *([1] * grid.n))
    dist = metric_norm(grid.mesh - x0, m)
    vals = np.abs(g.values)
    inner = vals[dist <= 0.5 * grid.L]
    outer = vals[dist > 0.5 * grid.L]
    if outer.size and inner.size and outer.max() > inner.max():
        raise ValueError("field grows away from x0")
    edges = [1.0]
    while edges[-1] < 0.5 * grid.L:
        edges.append(edges[-1] * np.sqrt(2.0))
    radii, maxima = [], []
    for lo, hi in zip(edges, edges[1:]):
        sel = (dist >= lo) & (dist < hi)
        if not sel.any():
            continue
        sub = vals[sel]
        i = int(np.argmax(sub))
        if sub[i] <= 0.0:
            continue
        radii.append(float(dist[sel][i]))
        maxima.append(float(sub[i]))
    if len(radii) < 3:
        raise ValueError(f"only {len(radii)} populated shells, need 3")
    xs = np.log(1.0 + np.asarray(radii))
    ys = np.log(np.asarray(maxima))
    slope, intercept = np.polyfit(xs, ys, 1)
    return DecayEstimate(
        exponent=float(-slope),
        amplitude=float(np.exp(intercept)),
        shell_radii=tuple(radii),
        shell_maxima=tuple(maxima),
    )


def _offset_samples(grid, seed: int, count: int):
    """All single-cell lattice offsets plus seeded random offsets up to L/2."""
    offsets = []
    for raw in np.ndindex(*(3,) * grid.n):
        shift = tuple(s - 1 for s in raw)
        if any(shift):
            offsets.append(shift)
    rng = np.random.default_rng(seed)
    for _ in range(count):
        shift = tuple(int(s) for s in rng.integers(-grid.N // 4, grid.N // 4 + 1,
                                                   size=grid.n))
        if any(shift):
            offsets.append(shift)
    return offsets


def _shifted(values, shift, n):
    # f(x - u) for lattice offset u = shift * h.
    return np.roll(values, shift, axis=tuple(range(n)))


def lip_norm(f: GridField, alpha: float, m: Metric, seed: int = 0,
             offset_samples: int = 1000) -> float:
    """Holder norm sup_u ||f(.-u) - f||_inf / |u|_m^alpha over the sampled
    offset set."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    grid = f.grid
    best = 0.0
    for shift in _offset_samples(grid, seed, offset_samples):
        u = np.asarray(shift, dtype=float) * grid.h
        du = float(metric_norm(u, m))
        diff = float(np.max(np.abs(_shifted(f.values, shift, grid.n) - f.values)))
        best = max(best, diff / du ** alpha)
    return best


def lip_norm_com(f: GridField, alpha1: float, alpha2: float, seed: int = 0,
                 pair_samples: int = 1000) -> float:
    """Mixed Holder norm from double differences,
    sup_{u,v} ||Delta_u Delta_v f||_inf / (|u|_e^{alpha1} |v|_h^{alpha2})."""
    LipschitzParams(alpha1=alpha1, alpha2=alpha2)
    grid = f.grid
    me = Metric(MetricKind.ISOTROPIC, grid.n)
    mh = Metric(MetricKind.PARABOLIC, grid.n)
    singles = []
    for ax in range(grid.n):
        for sgn in (-1, 1):
            shift = [0] * grid.n
            shift[ax] = sgn
            singles.append(tuple(shift))
    pairs = [(u, v) for u in singles for v in singles]
    rng = np.random.default_rng(seed)
    for _ in range(pair_samples):
        u = tuple(int(s) for s in rng.integers(-grid.N // 4, grid.N // 4 + 1,
                                               size=grid.n))
        v = tuple(int(s) for s in rng.integers(-grid.N // 4, grid.N // 4 + 1,
                                               size=grid.n))
        if any(u) and any(v):
            pairs.append((u, v))
    best = 0.0
    axes = tuple(range(grid.n))
    for u, v in pairs:
        du = float(metric_norm(np.asarray(u, float) * grid.h, me))
        dv = float(metric_norm(np.asarray(v, float) * grid.h, mh))
        fu = np.roll(f.values, u, axis=axes)
        fv = np.roll(f.values, v, axis=axes)
        fuv = np.roll(fu, v, axis=axes)
        dd = float(np.max(np.abs(fuv - fu - fv + f.values)))
        best = max(best, dd / (du ** alpha1 * dv ** alpha2))
    return best


def lip_norm_lp(f: GridField, alpha: float, g: LPGenerator,
                r: ScaleRange | None = None) -> float:
    """Littlewood-Paley form of the Holder norm: max over dyadic scales
    t = 2^-j of t^alpha ||psi_j * f||_inf."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    r = r or g.resolvable
    best = 0.0
    fh = np.fft.fftn(f.values)
    for j in r.indices():
        piece = np.fft.ifftn(fh * g.window(j)).real
        best = max(best, 2.0 ** (-j * alpha) * float(np.max(np.abs(piece))))
    return best
