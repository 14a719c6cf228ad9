"""Mixed-homogeneity product kernels: construction, cancellation, truncated
operators, and the Hormander constant.

A kernel is a finite sum of terms c * E * H sharing the homogeneity degrees
(k, l): E extends an isotropic unit-sphere profile homogeneously of degree
-k, H extends a parabolic unit-sphere profile of degree -l, and a smooth
cutoff in the parabolic norm makes the support compact.  Sums of terms are
needed so that cancellation enforcement (subtracting a multiple of the
reference kernel) stays closed under evaluation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .grid import Grid, GridField, Metric, MetricKind, convolve, lp_norm, metric_norm


# ---------------------------------------------------------------------------
# Profiles on the unit spheres


def profile_one(pts):
    return np.ones_like(np.asarray(pts)[0], dtype=float)


def profile_xn_odd(pts):
    """Odd in the distinguished coordinate; the Riesz-like cancellative case."""
    return np.asarray(pts)[-1].astype(float)


def profile_first_harmonic(pts):
    return np.asarray(pts)[0].astype(float)


def random_trig_profile(n: int, seed: int):
    """A seeded smooth trigonometric function of the sphere coordinates."""
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=(2, n))
    freqs = rng.integers(1, 3, size=n)
    shift = rng.normal()

    def prof(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.full(pts.shape[1:], shift)
        for i in range(n):
            out = out + amps[0, i] * np.cos(freqs[i] * pts[i])
            out = out + amps[1, i] * np.sin(freqs[i] * pts[i])
        return out

    return prof


def csv_profile(path, n: int = 2):
    """Profile interpolated from a CSV of (angle, value) rows.

    The angle parameterizes the sphere: on the isotropic circle it is the
    usual polar angle; on the parabolic sphere the point (u, s(1-u^2)) maps
    to atan2(s*sqrt(1-u^2), u).  Interpolation is cubic and periodic.
    """
    if n != 2:
        raise ValueError("CSV profiles are defined for n = 2 only")
    from scipy.interpolate import CubicSpline

    angles, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            angles.append(float(row[0]))
            values.append(float(row[1]))
    order = np.argsort(angles)
    a = np.asarray(angles)[order]
    v = np.asarray(values)[order]
    a = np.concatenate([a, [a[0] + 2.0 * np.pi]])
    v = np.concatenate([v, [v[0]]])
    spline = CubicSpline(a, v, bc_type="periodic")

    def prof(pts):
        pts = np.asarray(pts, dtype=float)
        x1, x2 = pts[0], pts[-1]
        # Works on both spheres: on the parabolic one, x2 = s*(1-x1^2) and
        # sqrt(|x2|) recovers the circle ordinate up to sign.
        y = np.where(np.abs(x2) <= 1.0, np.sign(x2) * np.sqrt(np.abs(x2)), x2)
        phi = np.mod(np.arctan2(y, x1), 2.0 * np.pi)
        return spline(phi)

    return prof


_CATALOG = {
    "one": lambda n, seed: profile_one,
    "xn_odd": lambda n, seed: profile_xn_odd,
    "first_harmonic": lambda n, seed: profile_first_harmonic,
    "random_trig": lambda n, seed: random_trig_profile(n, seed),
}


def get_profile(name: str, n: int = 2, seed: int = 0):
    try:
        return _CATALOG[name](n, seed)
    except KeyError:
        raise KeyError(
            f"unknown profile {name!r}; catalog: {sorted(_CATALOG)}"
        ) from None


# ---------------------------------------------------------------------------
# Kernel type and regime classification


class Regime(Enum):
    CASE_H = "case_h"  # k + l = n + 1, l > 2: parabolic-boundary cancellation
    CASE_E = "case_e"  # k + l/2 = n, l < 2: isotropic-boundary cancellation
    SUBCRITICAL = "subcritical"
    INVALID = "invalid"


def integrable_locally(k: float, l: float, n: int) -> bool:
    """Local integrability of |x|_e^-k |x|_h^-l: both inequalities strict."""
    if k < 0 or l < 0 or n < 2:
        raise ValueError("need k, l >= 0 and n >= 2")
    return (k + l < n + 1) and (k + 0.5 * l < n)


def classify_regime(k: float, l: float, n: int, tol: float = 1e-12) -> Regime:
    if abs(k + l - (n + 1)) <= tol and l > 2 + tol:
        return Regime.CASE_H
    if abs(k + 0.5 * l - n) <= tol and l < 2 - tol:
        return Regime.CASE_E
    if integrable_locally(k, l, n):
        return Regime.SUBCRITICAL
    return Regime.INVALID


@dataclass(frozen=True, eq=False)
class ProductKernel:
    n: int
    deg_e: float  # isotropic homogeneity degree k (E scales as |x|_e^-k)
    deg_h: float  # parabolic homogeneity degree l (H scales as |x|_h^-l)
    terms: tuple  # ((coef, profile_E, profile_H), ...)
    with_cutoff: bool = True

    @property
    def regime(self) -> Regime:
        return classify_regime(self.deg_e, self.deg_h, self.n)

    def without_cutoff(self) -> "ProductKernel":
        return replace(self, with_cutoff=False)


def make_kernel(
    n: int,
    k: float,
    l: float,
    profile_e="one",
    profile_h="one",
    seed: int = 0,
    with_cutoff: bool = True,
) -> ProductKernel:
    """Build a single-term kernel from catalog profile names or callables."""
    pe = get_profile(profile_e, n, seed) if isinstance(profile_e, str) else profile_e
    ph = get_profile(profile_h, n, seed) if isinstance(profile_h, str) else profile_h
    return ProductKernel(n=n, deg_e=k, deg_h=l, terms=((1.0, pe, ph),),
                         with_cutoff=with_cutoff)


def _transition(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    a = np.zeros_like(s)
    pos = s > 0
    a[pos] = np.exp(-1.0 / s[pos])
    b = np.zeros_like(s)
    neg = s < 1
    b[neg] = np.exp(-1.0 / (1.0 - s[neg]))
    return a / (a + b)


def smooth_cutoff(t):
    """1 on t <= 1, 0 on t >= 2, smooth monotone transition between."""
    return 1.0 - _transition(np.asarray(t, dtype=float) - 1.0)


def _e_factor(K: ProductKernel, pts, profile, on_slice: bool):
    """E evaluated at pts, or at (x', 0) when on_slice is set."""
    pts = np.asarray(pts, dtype=float)
    if on_slice:
        pts = pts.copy()
        pts[-1] = 0.0
    re = np.sqrt(np.sum(pts * pts, axis=0))
    safe = np.where(re > 0, re, 1.0)
    direction = pts / safe
    val = safe ** (-K.deg_e) * profile(direction)
    return np.where(re > 0, val, np.nan)


def _h_factor(K: ProductKernel, pts, profile, on_axis: bool):
    """H evaluated at pts, or at (0, x_n) when on_axis is set."""
    pts = np.asarray(pts, dtype=float)
    if on_axis:
        pts = pts.copy()
        pts[:-1] = 0.0
    rh = np.sqrt(np.sum(pts[:-1] ** 2, axis=0) + np.abs(pts[-1]))
    safe = np.where(rh > 0, rh, 1.0)
    spt = pts / safe
    spt[-1] = pts[-1] / (safe * safe)
    val = safe ** (-K.deg_h) * profile(spt)
    return np.where(rh > 0, val, np.nan)


class Boundary(Enum):
    NONE = "none"  # the full kernel E_k(x) H_l(x)
    PARABOLIC = "parabolic"  # E_k(x', 0) H_l(x', x_n), the CaseH boundary
    ISOTROPIC = "isotropic"  # E_k(x', x_n) H_l(0, x_n), the CaseE boundary


def eval_kernel(K: ProductKernel, x, boundary: Boundary = Boundary.NONE):
    """Evaluate the kernel (or one of its boundary versions) away from the
    pole.  Scalar points at the pole raise; array input gets NaN there."""
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 1
    if pts.shape[0] != K.n:
        raise ValueError(f"point dimension {pts.shape[0]} != kernel dimension {K.n}")
    if scalar and np.all(pts == 0.0):
        raise ValueError("kernel has a pole at the origin")
    acc = 0.0
    for coef, pe, ph in K.terms:
        e = _e_factor(K, pts, pe, boundary is Boundary.PARABOLIC)
        h = _h_factor(K, pts, ph, boundary is Boundary.ISOTROPIC)
        acc = acc + coef * e * h
    if K.with_cutoff:
        rh = metric_norm(pts, Metric(MetricKind.PARABOLIC, K.n))
        acc = acc * smooth_cutoff(rh)
    return float(acc) if scalar else acc


def sample_on_grid(
    K: ProductKernel,
    grid: Grid,
    boundary: Boundary = Boundary.NONE,
    subcell: bool = True,
    subdiv: int = 9,
) -> GridField:
    """Kernel values at grid points, with the pole cell zeroed.

    Near the distinguished hyperplane the parabolic factor varies at the
    scale |x'|^2 + |x_n|, which drops below the cell size close to the
    origin; midpoint values there badly overweight the (measure-zero)
    x_n = 0 slice.  Cells in that region are replaced by sub-cell midpoint
    averages when `subcell` is set.
    """
    if grid.n != K.n:
        raise ValueError("grid and kernel dimensions differ")
    vals = eval_kernel(K, grid.mesh, boundary)
    vals = np.nan_to_num(vals, nan=0.0)
    if subcell:
        mh = Metric(MetricKind.PARABOLIC, grid.n)
        me = Metric(MetricKind.ISOTROPIC, grid.n)
        thresh = 8.0 * grid.h
        flag = (grid.metric_norms(mh) ** 2 <= thresh) | (
            grid.metric_norms(me) <= thresh
        )
        centers = grid.mesh[:, flag]
        step = (np.arange(subdiv) + 0.5) / subdiv - 0.5
        offs = np.stack(
            np.meshgrid(*([step * grid.h] * grid.n), indexing="ij")
        ).reshape(grid.n, -1)
        pts = (centers[:, :, None] + offs[:, None, :]).reshape(grid.n, -1)
        sub = np.nan_to_num(eval_kernel(K, pts, boundary), nan=0.0)
        vals[flag] = sub.reshape(centers.shape[1], -1).mean(axis=1)
    vals[grid.index_of(np.zeros(grid.n))] = 0.0
    return GridField(grid, vals)


# ---------------------------------------------------------------------------
# Spherical means and cancellation


class Sphere(Enum):
    PARABOLIC_UNIT = "parabolic"  # {|x'|^2 + |x_n| = 1}
    ISOTROPIC_UNIT = "isotropic"  # {|x|_e = 1}


class SphereMeasure(Enum):
    EUCLIDEAN_GRAPH = "euclidean_graph"
    DILATION_INVARIANT = "dilation_invariant"


@dataclass(frozen=True)
class CancellationReport:
    mean: float
    quadrature_error: float
    sphere: Sphere
    measure: SphereMeasure
    nodes: int


def _gauss(nodes: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _parabolic_sphere_integral(K, nodes, measure):
    """Integral of the CaseH boundary function over {|x|_h = 1}.

    Parameterized as x_n = s(1 - |x'|^2) over the unit ball of x', per sign
    sheet.  The graded substitution |x'| = t^2 absorbs the |x'|^-k pole of
    the sliced E factor.
    """
    if K.n == 2:
        t, wt = _gauss(nodes, 0.0, 1.0)
        total = 0.0
        for sx in (-1.0, 1.0):
            for sn in (-1.0, 1.0):
                u = sx * t * t
                jac = 2.0 * t
                pts = np.stack([u, sn * (1.0 - u * u)])
                f = eval_kernel(K.without_cutoff(), pts, Boundary.PARABOLIC)
                if measure is SphereMeasure.EUCLIDEAN_GRAPH:
                    w = np.sqrt(1.0 + 4.0 * u * u)
                else:
                    w = 2.0
                total += float(np.sum(wt * jac * f * w))
        return total
    if K.n == 3:
        t, wt = _gauss(nodes, 0.0, 1.0)
        phi, wphi = _gauss(nodes, 0.0, 2.0 * np.pi)
        rho = (t * t)[:, None]
        jac = (2.0 * t * t * t)[:, None]  # rho * drho/dt
        total = 0.0
        for sn in (-1.0, 1.0):
            x1 = rho * np.cos(phi)[None, :]
            x2 = rho * np.sin(phi)[None, :]
            x3 = sn * (1.0 - rho * rho) * np.ones_like(x1)
            pts = np.stack([x1, x2, x3])
            f = eval_kernel(K.without_cutoff(), pts, Boundary.PARABOLIC)
            if measure is SphereMeasure.EUCLIDEAN_GRAPH:
                w = np.sqrt(1.0 + 4.0 * rho * rho) * np.ones_like(x1)
            else:
                w = 2.0 * np.ones_like(x1)
            total += float(np.sum(wt[:, None] * wphi[None, :] * jac * f * w))
        return total
    raise ValueError("spherical means implemented for n in {2, 3}")


def _isotropic_sphere_integral(K, nodes):
    """Integral of the CaseE boundary function over {|x|_e = 1}.

    The sliced H factor carries a |x_n|^{-l/2} pole at the equator; the
    parameterization is graded quadratically toward it.
    """
    if K.n == 2:
        # Angle measured from the equator points phi in {0, pi}, per quadrant.
        t, wt = _gauss(nodes, 0.0, 1.0)
        theta = 0.5 * np.pi * t * t
        jac = np.pi * t
        total = 0.0
        for base, orient in ((0.0, 1.0), (np.pi, -1.0)):
            for sn in (-1.0, 1.0):
                phi = base + orient * sn * theta
                pts = np.stack([np.cos(phi), np.sin(phi)])
                f = eval_kernel(K.without_cutoff(), pts, Boundary.ISOTROPIC)
                total += float(np.sum(wt * jac * f))
        return total
    if K.n == 3:
        # Archimedes: dS = du dphi with u = x_3; grade u = s*t^2 at u = 0.
        t, wt = _gauss(nodes, 0.0, 1.0)
        phi, wphi = _gauss(nodes, 0.0, 2.0 * np.pi)
        total = 0.0
        for sn in (-1.0, 1.0):
            u = (sn * t * t)[:, None]
            jac = (2.0 * t)[:, None]
            r = np.sqrt(np.maximum(1.0 - u * u, 0.0))
            x1 = r * np.cos(phi)[None, :]
            x2 = r * np.sin(phi)[None, :]
            x3 = u * np.ones_like(x1)
            pts = np.stack([x1, x2, x3])
            f = eval_kernel(K.without_cutoff(), pts, Boundary.ISOTROPIC)
            total += float(np.sum(wt[:, None] * wphi[None, :] * jac * f))
        return total
    raise ValueError("spherical means implemented for n in {2, 3}")


def spherical_mean(
    K: ProductKernel,
    sphere: Sphere | None = None,
    nodes: int = 64,
    measure: SphereMeasure = SphereMeasure.EUCLIDEAN_GRAPH,
) -> CancellationReport:
    """Mean (surface integral) of the regime's boundary function.

    CaseH integrates E_k(x',0)H_l(x) over the parabolic unit sphere; CaseE
    integrates E_k(x)H_l(0,x_n) over the isotropic one.  The error estimate
    compares against a node-doubled evaluation.
    """
    regime = K.regime
    if sphere is None:
        if regime is Regime.CASE_H:
            sphere = Sphere.PARABOLIC_UNIT
        elif regime is Regime.CASE_E:
            sphere = Sphere.ISOTROPIC_UNIT
        else:
            raise ValueError(f"no cancellation sphere for regime {regime}")
    if sphere is Sphere.PARABOLIC_UNIT:
        coarse = _parabolic_sphere_integral(K, nodes, measure)
        fine = _parabolic_sphere_integral(K, 2 * nodes, measure)
    else:
        coarse = _isotropic_sphere_integral(K, nodes)
        fine = _isotropic_sphere_integral(K, 2 * nodes)
    return CancellationReport(
        mean=fine,
        quadrature_error=abs(fine - coarse),
        sphere=sphere,
        measure=measure,
        nodes=nodes,
    )


def enforce_cancellation(K: ProductKernel, nodes: int = 64) -> ProductKernel:
    """Project out the spherical mean by subtracting a multiple of the
    reference kernel (profiles identically one, same degrees)."""
    rep = spherical_mean(K, nodes=nodes)
    ref = ProductKernel(
        n=K.n, deg_e=K.deg_e, deg_h=K.deg_h,
        terms=((1.0, profile_one, profile_one),), with_cutoff=K.with_cutoff,
    )
    ref_rep = spherical_mean(ref, sphere=rep.sphere, nodes=nodes)
    if ref_rep.mean == 0.0:
        raise ValueError("degenerate reference kernel: zero spherical mean")
    c = rep.mean / ref_rep.mean
    if c == 0.0:
        return K
    return replace(K, terms=K.terms + ((-c, profile_one, profile_one),))


# ---------------------------------------------------------------------------
# Truncated operators


def truncated_kernel_field(
    K: ProductKernel, grid: Grid, eps: float, m: Metric
) -> GridField:
    """Grid sample of K zeroed on {|y|_m < eps} (pole cell always zero)."""
    if eps < 2.0 * grid.h:
        raise ValueError(f"eps = {eps} below the 2h = {2 * grid.h} resolution guard")
    base = sample_on_grid(K, grid)
    mask = grid.metric_norms(m) >= eps
    return GridField(grid, base.values * mask)


def truncated_apply(
    K: ProductKernel, f: GridField, eps: float, m: Metric
) -> GridField:
    """The truncated operator T_eps f = (K restricted to |y|_m >= eps) * f."""
    return convolve(f, truncated_kernel_field(K, f.grid, eps, m))


def truncation_sweep(K: ProductKernel, f: GridField, eps_list, m: Metric):
    """Sweep the truncation parameter and tabulate L2 ratios plus Cauchy
    differences between consecutive truncations."""
    eps_list = list(eps_list)
    if len(eps_list) < 2:
        raise ValueError("need at least two truncation levels")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly decreasing")
    grid = f.grid
    base = sample_on_grid(K, grid)
    norms = grid.metric_norms(m)
    nf = lp_norm(f, 2)
    rows = []
    prev = None
    for eps in eps_list:
        if eps < 2.0 * grid.h:
            raise ValueError(f"eps = {eps} below the 2h resolution guard")
        tk = GridField(grid, base.values * (norms >= eps))
        tf = convolve(f, tk)
        ratio = lp_norm(tf, 2) / nf if nf > 0 else 0.0
        diff = lp_norm(tf - prev, 2) if prev is not None else float("nan")
        rows.append({"eps": eps, "l2_ratio": ratio, "cauchy_diff": diff})
        prev = tf
    return rows


# ---------------------------------------------------------------------------
# Hormander condition


def hormander_constant(
    K: ProductKernel,
    m: Metric,
    pairs,
    base_cells: int = 192,
    subdiv: int = 8,
) -> float:
    """Max over point pairs of the constrained kernel-difference integral

        int_{|y-x1|_m >= 2|x1-x2|_m} |K0(x1-y) - K0(x2-y)| dy,

    where K0 is the regime's boundary kernel with the compact cutoff, so
    the integrand is supported in a metric ball of radius 2+d around x1.
    The quadrature box covers that support per coordinate (the extent is
    quadratic in the distinguished direction for the parabolic metric) and
    cells near the inner boundary or the singular slices of K0 get
    midpoint-subdivided.  Refining means doubling base_cells.
    """
    boundary = (
        Boundary.PARABOLIC if m.kind is MetricKind.PARABOLIC else Boundary.ISOTROPIC
    )
    best = 0.0
    for x1, x2 in pairs:
        best = max(
            best,
            _hormander_pair(K, m, np.asarray(x1, float), np.asarray(x2, float),
                            boundary, base_cells, subdiv),
        )
    return best


def _k0_diff(K, boundary, x1, x2, pts):
    a = eval_kernel(K, x1[:, None] - pts, boundary)
    b = eval_kernel(K, x2[:, None] - pts, boundary)
    return np.abs(np.nan_to_num(a, nan=0.0) - np.nan_to_num(b, nan=0.0))


def _hormander_pair(K, m, x1, x2, boundary, base_cells, subdiv):
    d = float(metric_norm(x1 - x2, m))
    if d == 0.0:
        raise ValueError("degenerate pair: x1 == x2")
    reach = 2.0 + d + 0.1
    half = np.full(m.n, reach)
    if m.kind is MetricKind.PARABOLIC:
        half[-1] = reach * reach
    cells = np.full(m.n, base_cells)
    if m.kind is MetricKind.PARABOLIC:
        cells[-1] = 2 * base_cells  # keep the anisotropic cells near-square
    c = 2.0 * half / cells
    axes = [
        x1[i] - half[i] + c[i] * (np.arange(cells[i]) + 0.5) for i in range(m.n)
    ]
    flat = np.stack(np.meshgrid(*axes, indexing="ij")).reshape(m.n, -1)
    r1 = metric_norm(flat - x1[:, None], m)
    r2 = metric_norm(flat - x2[:, None], m)
    in_domain = (r1 >= 2.0 * d) & ((r1 <= reach) | (r2 <= reach))
    # The integrand varies at scale d near the inner boundary; subdivide a
    # band of cells there, wide enough to cover the steep region whenever
    # the cells are coarse relative to d.
    near_inner = r1 < 2.0 * d + 8.0 * float(np.max(c))
    if boundary is Boundary.PARABOLIC:
        # E is sliced to (x', 0): singular where y' hits x1' or x2'.
        s1 = np.sqrt(np.sum((flat[:-1] - x1[:-1, None]) ** 2, axis=0))
        s2 = np.sqrt(np.sum((flat[:-1] - x2[:-1, None]) ** 2, axis=0))
        tol = 3.0 * float(np.max(c[:-1]))
    else:
        # H is sliced to (0, x_n): singular where y_n hits x1_n or x2_n.
        s1 = np.abs(flat[-1] - x1[-1])
        s2 = np.abs(flat[-1] - x2[-1])
        tol = 3.0 * float(c[-1])
    near_slice = (s1 < tol) | (s2 < tol)
    vol = float(np.prod(c))
    flagged = near_inner | near_slice
    coarse = in_domain & ~flagged
    total = float(np.sum(_k0_diff(K, boundary, x1, x2, flat[:, coarse]))) * vol
    # Flagged cells are subdivided even when their midpoint falls outside
    # the domain: the inner boundary cuts through them, and the sub-points
    # re-test admissibility individually.
    fine_pts = flat[:, flagged & ((r1 <= reach) | (r2 <= reach))]
    if fine_pts.shape[1]:
        sub = (np.arange(subdiv) + 0.5) / subdiv - 0.5
        offs = np.stack(
            np.meshgrid(*[sub * c[i] for i in range(m.n)], indexing="ij")
        ).reshape(m.n, -1)
        pts = (fine_pts[:, :, None] + offs[:, None, :]).reshape(m.n, -1)
        rr = metric_norm(pts - x1[:, None], m)
        ok = rr >= 2.0 * d
        vals = _k0_diff(K, boundary, x1, x2, pts[:, ok])
        total += float(np.sum(vals)) * vol / subdiv ** m.n
    return total


def sample_pairs(m: Metric, count: int, separations, seed: int, box: float = 0.5):
    """Seeded random point pairs at prescribed metric separations."""
    rng = np.random.default_rng(seed)
    pairs = []
    for d in separations:
        for _ in range(count):
            x1 = rng.uniform(-box, box, size=m.n)
            if m.kind is MetricKind.PARABOLIC:
                u = rng.uniform(-1.0, 1.0, size=m.n - 1)
                while np.sum(u * u) >= 1.0:
                    u = rng.uniform(-1.0, 1.0, size=m.n - 1)
                sn = rng.choice([-1.0, 1.0])
                w = np.concatenate([u, [sn * (1.0 - np.sum(u * u))]])
                step = np.concatenate([d * w[:-1], [d * d * w[-1]]])
            else:
                v = rng.normal(size=m.n)
                step = d * v / np.linalg.norm(v)
            pairs.append((x1, x1 + step))
    return pairs
