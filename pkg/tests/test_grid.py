"""Grid geometry, metrics, dilations, and the FFT convolution engine."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixhom.grid import (
    FrequencyField,
    Grid,
    GridField,
    Metric,
    MetricKind,
    apply_multiplier,
    convolve,
    delta_field,
    dilate_point,
    forward_transform,
    kernel_field,
    lp_norm,
    metric_norm,
    random_band_limited,
    relative_l2_error,
    sup_norm,
    weak_distribution,
)

ME = Metric(MetricKind.ISOTROPIC, 2)
MH = Metric(MetricKind.PARABOLIC, 2)

# Magnitudes bounded away from the subnormal range: squaring tiny values
# underflows and the exact-scaling assertions would test rounding noise.
finite = st.one_of(
    st.just(0.0),
    st.floats(min_value=1e-6, max_value=1e6),
    st.floats(min_value=-1e6, max_value=-1e-6),
)
deltas = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


def small_grid():
    return Grid(2, 32, 4.0)


# --- metric and dilation properties ---------------------------------------


@given(finite, finite, deltas)
@settings(max_examples=200, deadline=None)
def test_dilation_scales_norm_isotropic(a, b, d):
    x = np.array([a, b])
    lhs = metric_norm(dilate_point(x, d, ME), ME)
    rhs = d * metric_norm(x, ME)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(finite, finite, deltas)
@settings(max_examples=200, deadline=None)
def test_dilation_scales_norm_parabolic(a, b, d):
    x = np.array([a, b])
    lhs = metric_norm(dilate_point(x, d, MH), MH)
    rhs = d * metric_norm(x, MH)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(finite, finite)
@settings(max_examples=100, deadline=None)
def test_norms_agree_on_hyperplane_scale(a, b):
    # On x_n = 0 both norms reduce to |x'|.
    x = np.array([a, 0.0])
    assert metric_norm(x, ME) == metric_norm(x, MH)
    # sqrt(a^2) underflows for subnormal-squared inputs, hence the abs floor.
    assert metric_norm(x, ME) == pytest.approx(abs(a), rel=1e-12, abs=1e-150)


def test_homogeneous_dimension():
    assert ME.homogeneous_dimension == 2
    assert MH.homogeneous_dimension == 3
    assert Metric(MetricKind.PARABOLIC, 3).homogeneous_dimension == 4


def test_norm_positive_definite():
    assert metric_norm(np.zeros(2), ME) == 0.0
    assert metric_norm(np.zeros(2), MH) == 0.0
    assert metric_norm(np.array([0.0, 1e-8]), MH) > 0


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        metric_norm(np.zeros(3), ME)
    with pytest.raises(ValueError):
        dilate_point(np.zeros(3), 2.0, MH)
    with pytest.raises(ValueError):
        dilate_point(np.zeros(2), -1.0, ME)


# --- grid basics -----------------------------------------------------------


def test_grid_requires_power_of_two():
    with pytest.raises(ValueError):
        Grid(2, 100, 8.0)
    with pytest.raises(ValueError):
        Grid(2, 0, 8.0)


def test_grid_spacing_and_axis():
    g = small_grid()
    assert g.h == 0.25
    assert g.axis[0] == -4.0
    assert g.axis[-1] == pytest.approx(4.0 - g.h)
    assert g.index_of([0.0, 0.0]) == (16, 16)
    with pytest.raises(ValueError):
        g.index_of([0.1, 0.0])


def test_field_shape_checked():
    g = small_grid()
    with pytest.raises(ValueError):
        GridField(g, np.zeros((8, 8)))


# --- convolution and transforms --------------------------------------------


def test_delta_is_convolution_identity():
    g = small_grid()
    rng = np.random.default_rng(0)
    f = GridField(g, rng.standard_normal(g.shape))
    out = convolve(f, delta_field(g))
    assert relative_l2_error(out, f) < 1e-13


def test_convolve_commutes():
    g = small_grid()
    rng = np.random.default_rng(1)
    f = GridField(g, rng.standard_normal(g.shape))
    k = GridField(g, rng.standard_normal(g.shape))
    assert relative_l2_error(convolve(f, k), convolve(k, f)) < 1e-12


def test_convolve_against_direct_sum():
    g = Grid(1, 16, 2.0)
    rng = np.random.default_rng(2)
    f = rng.standard_normal(16)
    k = rng.standard_normal(16)
    out = convolve(GridField(g, f), GridField(g, k)).values
    # Direct periodic sum: (f*k)(x_i) = h sum_j f(x_j) k(x_i - x_j), with k
    # indexed by coordinate (origin at index N/2).
    direct = np.zeros(16)
    for i in range(16):
        for j in range(16):
            direct[i] += f[j] * k[(i - j + 8) % 16]
    direct *= g.h
    assert np.max(np.abs(out - direct)) < 1e-12


def test_gaussian_convolution_closed_form():
    g = Grid(2, 256, 8.0)
    a, b = 0.3, 0.5
    r2 = np.sum(g.mesh**2, axis=0)
    fa = GridField(g, np.exp(-r2 / (2 * a)) / (2 * np.pi * a))
    fb = GridField(g, np.exp(-r2 / (2 * b)) / (2 * np.pi * b))
    expect = GridField(g, np.exp(-r2 / (2 * (a + b))) / (2 * np.pi * (a + b)))
    assert relative_l2_error(convolve(fa, fb), expect) < 1e-6


def test_parseval():
    g = small_grid()
    rng = np.random.default_rng(3)
    f = GridField(g, rng.standard_normal(g.shape))
    assert forward_transform(f).energy() == pytest.approx(lp_norm(f, 2) ** 2,
                                                          rel=1e-12)


def test_kernel_field_matches_multiplier():
    g = small_grid()
    rng = np.random.default_rng(4)
    f = GridField(g, rng.standard_normal(g.shape))
    w = np.exp(-g.freq_metric_norms(ME) ** 2)
    via_kernel = convolve(f, kernel_field(g, w))
    via_mult = apply_multiplier(f, w)
    assert relative_l2_error(via_kernel, via_mult) < 1e-12


# --- norms and distributions -----------------------------------------------


def test_lp_norm_scaling():
    g = small_grid()
    f = GridField(g, np.ones(g.shape))
    # Constant one: L^p norm is the domain volume^(1/p).
    vol = (2.0 * g.L) ** 2
    for p in (0.5, 1.0, 2.0):
        assert lp_norm(f, p) == pytest.approx(vol ** (1.0 / p), rel=1e-12)
    with pytest.raises(ValueError):
        lp_norm(f, 0.0)


def test_weak_distribution_counts_cells():
    g = small_grid()
    v = np.zeros(g.shape)
    v[0, 0] = 2.0
    v[1, 1] = 2.0
    f = GridField(g, v)
    assert weak_distribution(f, 1.0) == pytest.approx(2 * g.cell_volume)
    assert weak_distribution(f, 3.0) == 0.0
    with pytest.raises(ValueError):
        weak_distribution(f, 0.0)


def test_sup_norm():
    g = small_grid()
    v = np.zeros(g.shape)
    v[3, 5] = -7.0
    assert sup_norm(GridField(g, v)) == 7.0


# --- band-limited fields ----------------------------------------------------


def test_random_band_limited_spectrum_confined():
    g = Grid(2, 64, 8.0)
    f = random_band_limited(g, [(ME, 1.0, 4.0)], seed=5)
    spec = np.abs(np.fft.fftn(f.values))
    t = g.freq_metric_norms(ME)
    outside = (t < 1.0) | (t > 4.0)
    assert np.max(spec[outside]) < 1e-10 * np.max(spec)
    assert np.sqrt(np.mean(f.values**2)) == pytest.approx(1.0, rel=1e-12)


def test_random_band_limited_deterministic():
    g = Grid(2, 64, 8.0)
    a = random_band_limited(g, [(ME, 1.0, 4.0)], seed=9)
    b = random_band_limited(g, [(ME, 1.0, 4.0)], seed=9)
    assert np.array_equal(a.values, b.values)


def test_random_band_limited_empty_band():
    g = Grid(2, 32, 4.0)
    with pytest.raises(ValueError):
        random_band_limited(g, [(ME, 1e6, 2e6)], seed=0)
