"""Discrete Calderon reconstruction from anisotropic lattice samples, and
almost-orthogonality probes for operators conjugated by generator dilates.

The reconstruction sums, over scale pairs (j, k) and lattice points, the
sampled band-pass coefficients times translated composite wavelets.  On the
periodic grid both steps are convolutions, so each (j, k) term costs two
transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridField, lp_norm, sup_norm
from .lp import (
    LatticeConvention,
    LPGenerator,
    ScaleRange,
    composite_window,
    lattice_strides,
)
from .grid import kernel_field


@dataclass(frozen=True)
class ReconstructionReport:
    residual: float
    scale_energy: dict = field(default_factory=dict)  # (j, k) -> frame energy
    lattice_counts: dict = field(default_factory=dict)  # (j, k) -> sample count
    input_l2: float = 0.0

    @property
    def frame_energy(self) -> float:
        return sum(self.scale_energy.values())


def psi_jk(g1: LPGenerator, g2: LPGenerator, j: int, k: int) -> GridField:
    """Composite wavelet psi^{(1)}_j * psi^{(2)}_k as a spatial field.

    The frequency support is the intersection of the two dilated annuli and
    may be empty, in which case the zero field comes back.
    """
    return kernel_field(g1.grid, composite_window(g1, g2, j, k))


def calderon_reconstruct(
    f: GridField,
    g1: LPGenerator,
    g2: LPGenerator,
    r1: ScaleRange,
    r2: ScaleRange,
    convention: LatticeConvention = LatticeConvention.MAX,
    refine_levels: int = 0,
):
    """Reconstruct f from composite-wavelet samples on the dyadic lattice.

    Each (j, k) term samples psi_{j,k}*f at the lattice of spacings
    (2^-(j^k), 2^-(j^2k)), weights by the lattice cell volume, and lays the
    wavelet back down at every sample point.  `refine_levels` halves the
    spacings that many extra times (clamped at the grid).
    """
    grid = f.grid
    fh = np.fft.fftn(f.values)
    recon = np.zeros(grid.shape)
    scale_energy: dict = {}
    counts: dict = {}
    cellvol = grid.cell_volume
    # Deterministic (j, k) order keeps the residual bit-stable.
    for j in r1.indices():
        w1 = g1.window(j)
        for k in r2.indices():
            w = w1 * g2.window(k)
            coeffs = np.fft.ifftn(fh * w).real
            s1, s2 = lattice_strides(grid, j, k, convention, refine_levels)
            strides = (s1,) * (grid.n - 1) + (s2,)
            sel = tuple(slice(None, None, s) for s in strides)
            weight = np.prod([s * grid.h for s in strides])
            train = np.zeros(grid.shape)
            train[sel] = coeffs[sel] * (weight / cellvol)
            recon += np.fft.ifftn(np.fft.fftn(train) * w).real
            scale_energy[(j, k)] = float(weight * np.sum(coeffs[sel] ** 2))
            counts[(j, k)] = int(np.prod([grid.N // s for s in strides]))
    out = GridField(grid, recon)
    nf = lp_norm(f, 2)
    residual = lp_norm(out - f, 2) / nf if nf > 0 else 0.0
    return out, ReconstructionReport(
        residual=residual,
        scale_energy=scale_energy,
        lattice_counts=counts,
        input_l2=nf,
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares record of sup |psi_j * T psi_j'| against |j - j'|."""

    exponent: float
    amplitude: float
    offsets: tuple
    sup_norms: tuple


def almost_orthogonality_probe(op, g: LPGenerator, j: int, jp: int) -> GridField:
    """The field psi_j * op(psi_j') for a linear operator on grid fields."""
    source = kernel_field(g.grid, g.window(jp))
    moved = op(source)
    return GridField(
        g.grid, np.fft.ifftn(np.fft.fftn(moved.values) * g.window(j)).real
    )


def probe_decay_fit(op, g: LPGenerator, j0: int, offsets) -> DecayFit:
    """Fit the decay exponent of the probe sup-norms across scale offsets.

    Sup-norms are normalized by 2^{min(j,j') Q} (the size of the coarser
    wavelet) before fitting log2(sup) = log2(C) - eps * |j - j'|.  Values at
    the floating-point noise floor are clipped there rather than dropped,
    so very fast decay fits as a large positive exponent.
    """
    Q = g.metric.homogeneous_dimension
    offs, sups = [], []
    for d in offsets:
        jp = j0 + d
        fieldv = almost_orthogonality_probe(op, g, j0, jp)
        scale = 2.0 ** (min(j0, jp) * Q)
        offs.append(abs(d))
        sups.append(sup_norm(fieldv) / scale)
    sups = np.asarray(sups)
    floor = max(sups.max(), 1e-300) * 1e-14
    logs = np.log2(np.maximum(sups, floor))
    xs = np.asarray(offs, dtype=float)
    slope, intercept = np.polyfit(xs, logs, 1)
    return DecayFit(
        exponent=float(-slope),
        amplitude=float(2.0 ** intercept),
        offsets=tuple(offs),
        sup_norms=tuple(float(s) for s in sups),
    )


def identity_op(f: GridField) -> GridField:
    return f
