"""Test-function norms, decay-exponent fits, and Lipschitz norms."""

import numpy as np
import pytest

from mixhom.grid import (
    Grid,
    GridField,
    Metric,
    MetricKind,
    convolve,
    lp_norm,
)
from mixhom.lp import ScaleRange, build_generator, dilate_generator, project_mean_zero
# Aliased so pytest does not try to collect the library names.
from mixhom.spaces import LipschitzParams
from mixhom.spaces import TestFunctionParams as TFParams
from mixhom.spaces import (
    decay_exponent_fit,
    lip_norm,
    lip_norm_com,
    lip_norm_lp,
)
from mixhom.spaces import test_norm as class_norm

ME = Metric(MetricKind.ISOTROPIC, 2)
MH = Metric(MetricKind.PARABOLIC, 2)
GRID = Grid(2, 128, 4.0)


def bump(width=1.0, grid=GRID, center=(0.0, 0.0)):
    c = np.asarray(center, float).reshape(grid.n, *([1] * grid.n))
    r2 = np.sum((grid.mesh - c) ** 2, axis=0)
    return GridField(grid, np.exp(-r2 / width**2))


def mean_zero_bump(**kw):
    return project_mean_zero(bump(**kw))


# --- parameter validation -------------------------------------------------------


def test_params_validated():
    with pytest.raises(ValueError):
        TFParams(0.0, 1.0, 1.0, (0, 0), MetricKind.ISOTROPIC)
    with pytest.raises(ValueError):
        TFParams(0.5, -1.0, 1.0, (0, 0), MetricKind.ISOTROPIC)
    with pytest.raises(ValueError):
        TFParams(0.5, 1.0, 0.0, (0, 0), MetricKind.ISOTROPIC)
    with pytest.raises(ValueError):
        LipschitzParams(alpha=1.0)
    LipschitzParams(alpha1=0.3, alpha2=0.7)


# --- test-function norm -----------------------------------------------------------


def test_test_norm_zero_field():
    f = GridField(GRID, np.zeros(GRID.shape))
    p = TFParams(1.0, 1.0, 1.0, (0.0, 0.0), MetricKind.ISOTROPIC)
    assert class_norm(f, p) == 0.0


def test_test_norm_homogeneous():
    f = mean_zero_bump()
    p = TFParams(0.5, 1.0, 1.0, (0.0, 0.0), MetricKind.PARABOLIC)
    a = class_norm(f, p)
    b = class_norm(GridField(GRID, -3.0 * f.values), p)
    assert b == pytest.approx(3.0 * a, rel=1e-12)


def test_test_norm_finite_on_lp_generator():
    # The dilated spatial generator is the canonical member of the class
    # with beta = gamma = 1, r = 2^-j, centered at the origin.
    g = build_generator(ME, GRID)
    for j in (0, 1):
        f = dilate_generator(g, j)
        p = TFParams(1.0, 1.0, 2.0**-j, (0.0, 0.0),
                               MetricKind.ISOTROPIC)
        v = class_norm(f, p)
        assert np.isfinite(v) and v > 0


def test_test_norm_mean_precondition():
    f = bump()  # strictly positive, mean far from zero
    p = TFParams(1.0, 1.0, 1.0, (0.0, 0.0), MetricKind.ISOTROPIC)
    with pytest.raises(ValueError):
        class_norm(f, p)


def test_test_norm_monotone_in_gamma():
    # With r >= 1 the size factor (r+d)^{n+gamma}/r^gamma is nondecreasing
    # in gamma at every point, so the norm is too.
    for f in (mean_zero_bump(), mean_zero_bump(width=0.5, center=(1.0, 0.5))):
        prev = None
        for gamma in (0.5, 1.0, 2.0):
            p = TFParams(0.5, gamma, 1.0, (0.0, 0.0),
                                   MetricKind.ISOTROPIC)
            v = class_norm(f, p)
            if prev is not None:
                assert v >= prev * (1 - 1e-12)
            prev = v


def test_test_norm_convolution_stability():
    # Convolving with a fixed L1 kernel changes the norm by at most a
    # C * ||K||_1 factor across a small suite (single global C).
    kvals = np.zeros(GRID.shape)
    r2 = np.sum(GRID.mesh**2, axis=0)
    kvals = np.exp(-4.0 * r2) * (r2 < 1.0)
    K = GridField(GRID, kvals)
    k1 = lp_norm(K, 1)
    p = TFParams(0.5, 1.0, 1.0, (0.0, 0.0), MetricKind.ISOTROPIC)
    suite = [
        mean_zero_bump(),
        mean_zero_bump(width=0.7),
        mean_zero_bump(width=1.4),
    ]
    C = 20.0
    for f in suite:
        assert class_norm(convolve(K, f), p) <= C * k1 * class_norm(f, p)


# --- decay-exponent fit -----------------------------------------------------------


def test_decay_fit_recovers_planted_exponent():
    grid = Grid(2, 256, 8.0)
    d = grid.metric_norms(ME)
    g = GridField(grid, (1.0 + d) ** -4.0)
    fit = decay_exponent_fit(g, ME, (0.0, 0.0))
    assert fit.exponent == pytest.approx(4.0, abs=0.05)
    assert fit.amplitude == pytest.approx(1.0, rel=0.1)


def test_decay_fit_constant_is_zero():
    grid = Grid(2, 256, 8.0)
    g = GridField(grid, np.full(grid.shape, 2.5))
    fit = decay_exponent_fit(g, ME, (0.0, 0.0))
    assert fit.exponent == pytest.approx(0.0, abs=0.05)


def test_decay_fit_parabolic_metric():
    grid = Grid(2, 256, 8.0)
    d = grid.metric_norms(MH)
    g = GridField(grid, (1.0 + d) ** -3.0)
    fit = decay_exponent_fit(g, MH, (0.0, 0.0))
    assert fit.exponent == pytest.approx(3.0, abs=0.05)


def test_decay_fit_rejects_growth():
    grid = Grid(2, 256, 8.0)
    d = grid.metric_norms(ME)
    g = GridField(grid, d)
    with pytest.raises(ValueError):
        decay_exponent_fit(g, ME, (0.0, 0.0))


def test_decay_fit_needs_shells():
    # L/2 = 1: no room for three half-octave shells beyond radius 1.
    grid = Grid(2, 32, 2.0)
    g = GridField(grid, np.exp(-np.sum(grid.mesh**2, axis=0)))
    with pytest.raises(ValueError):
        decay_exponent_fit(g, ME, (0.0, 0.0))


# --- Lipschitz norms --------------------------------------------------------------


def test_lip_norm_constant_zero():
    f = GridField(GRID, np.full(GRID.shape, 7.0))
    assert lip_norm(f, 0.5, ME) == 0.0


def test_lip_norm_alpha_range():
    f = bump()
    with pytest.raises(ValueError):
        lip_norm(f, 0.0, ME)
    with pytest.raises(ValueError):
        lip_norm(f, 1.0, ME)


def test_lip_norm_homogeneous():
    f = bump()
    a = lip_norm(f, 0.5, MH)
    b = lip_norm(GridField(GRID, 2.0 * f.values), 0.5, MH)
    assert b == pytest.approx(2.0 * a, rel=1e-12)


def test_lip_norm_translation_invariant():
    f = bump()
    g = GridField(GRID, np.roll(f.values, (5, -3), axis=(0, 1)))
    a = lip_norm(f, 0.5, ME)
    b = lip_norm(g, 0.5, ME)
    assert b == pytest.approx(a, rel=1e-12)


def test_lip_norm_bump_gradient_envelope():
    # At the smallest offsets (|u| = h) the quotient is about
    # sup|grad f| * h^{1-alpha} by the mean value theorem; the norm can only
    # exceed it (larger offsets may dominate) but not by much for a bump
    # whose increments are largest at small scales relative to h^alpha.
    alpha = 0.5
    f = bump(width=0.5)
    gx, gy = np.gradient(f.values, GRID.h)
    sup_grad = float(np.max(np.hypot(gx, gy)))
    envelope = sup_grad * GRID.h ** (1 - alpha)
    v = lip_norm(f, alpha, ME)
    assert envelope / 2 <= v <= 2 * envelope * (0.5 * GRID.L / GRID.h) ** (1 - alpha)


def test_double_difference_annihilates_additive_fields():
    # For f(x) = a(x1) + b(x2), the double difference vanishes whenever the
    # offsets are group-aligned: u acting on x1 only, v on x2 only.
    x1, x2 = GRID.mesh
    f = np.sin(np.pi * x1 / GRID.L) + np.cos(np.pi * x2 / GRID.L)
    for ku in (1, 3, -7):
        for kv in (1, 2, -5):
            fu = np.roll(f, ku, axis=0)
            fv = np.roll(f, kv, axis=1)
            fuv = np.roll(fu, kv, axis=1)
            assert np.max(np.abs(fuv - fu - fv + f)) < 1e-12


def test_lip_norm_com_zero_field():
    f = GridField(GRID, np.zeros(GRID.shape))
    assert lip_norm_com(f, 0.3, 0.7) == 0.0


def test_lip_norm_com_product_within_factor_oracle():
    # For f = a(x1) b(x2) the double difference factorizes, so the norm is
    # within x4 of the product of per-factor single-difference norms.
    x1, x2 = GRID.mesh
    a = np.sin(np.pi * x1 / GRID.L)
    b = np.cos(np.pi * x2 / GRID.L)
    f = GridField(GRID, a * b)
    alpha1, alpha2 = 0.5, 0.5
    m1 = Metric(MetricKind.ISOTROPIC, 1)
    m2 = Metric(MetricKind.PARABOLIC, 1)
    g1 = Grid(1, GRID.N, GRID.L)
    na = lip_norm(GridField(g1, a[:, 0]), alpha1, m1)
    nb = lip_norm(GridField(g1, b[0, :]), alpha2, m2)
    v = lip_norm_com(f, alpha1, alpha2)
    assert v <= 4.0 * na * nb
    assert v >= na * nb / 4.0


def test_lip_norm_lp_constant_zero():
    g = build_generator(ME, GRID)
    f = GridField(GRID, np.full(GRID.shape, 4.0))
    assert lip_norm_lp(f, 0.5, g) < 1e-12


def test_lip_norm_lp_single_scale_peak():
    g = build_generator(ME, GRID)
    j0 = 1
    f = convolve(dilate_generator(g, j0), bump(width=2.0))
    alpha = 0.5
    vals = {
        j: 2.0 ** (-j * alpha)
        * np.max(np.abs(convolve(f, dilate_generator(g, j)).values))
        for j in g.resolvable.indices()
    }
    best = max(vals, key=vals.get)
    assert abs(best - j0) <= 1
    total = lip_norm_lp(f, alpha, g)
    assert total == pytest.approx(max(vals.values()), rel=1e-10)


def test_lip_norm_lp_empty_range():
    g = build_generator(ME, GRID)
    f = bump()
    with pytest.raises(ValueError):
        lip_norm_lp(f, 0.5, g, ScaleRange(2, 1))


def test_lip_ratio_envelope_smoke():
    # The Littlewood-Paley form and the difference form agree within a
    # generous equivalence bracket on smooth fields.
    g = build_generator(ME, GRID)
    for f in (bump(), bump(width=0.5), bump(width=2.0, center=(1.0, -0.5))):
        ratio = lip_norm_lp(f, 0.5, g) / lip_norm(f, 0.5, ME)
        assert 0.1 <= ratio <= 10.0
