"""Spectral depth inversion: cutoff, Gaussian low-pass, filtered Laplacian, division.

All filters are Fourier multipliers on the unnormalized DFT of ``phi * M``
where ``phi`` is the smooth cutoff.  With mode numbers ``n`` the Gaussian
multiplier is ``exp(-2 pi^2 sigma^2 |n|^2 / L^2)`` and the Laplacian adds the
factor ``(2 pi / L)^2 |n|^2``, so a grid-periodic plane wave ``exp(i k.X)``
is mapped to ``|k|^2 exp(-sigma^2 |k|^2 / 2)`` times itself.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import ceil
from typing import Optional

import numpy as np

from .dispersion import WaveParams, truncated_depth
from .grid import ComplexField, Grid, RealField, frequency_indices
from .measurement import GammaMask, Measurement, gamma_mask

log = logging.getLogger(__name__)


def smooth_step(t):
    """C2 ramp from 0 (t <= 0) to 1 (t >= 1) with ``smooth_step(1/2) = 1/2``."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t - np.sin(2.0 * np.pi * t) / (2.0 * np.pi)


@dataclass(frozen=True)
class InversionConfig:
    """Regularization knobs for :func:`reconstruct`.

    Parameters
    ----------
    sigma : float
        Gaussian filter width in meters.
    gamma : float
        Floor added to ``|M_sigma|`` in the division, and the ``D_gamma`` threshold.
    alpha : float
        Truncation offset for the depth map (1/m).
    cutoff_margin : float, optional
        Width of the cutoff transition band in meters.  Defaults to ``2 sigma``.
    edge_trim : int, optional
        Cells discarded at each edge.  Defaults to ``ceil((margin + 3 sigma) / h)``.
    support : tuple, optional
        ``(x_lo, x_hi, y_lo, y_hi)`` box where the cutoff equals one.  Defaults
        to the grid shrunk by the margin on every side.
    sampled_kernel : bool
        Use DFTs of sampled kernels instead of the analytic multipliers.
    compensate_attenuation : bool
        Apply the one-step Gaussian attenuation correction to ``k_eps``.
    """

    sigma: float = 2.5
    gamma: float = 0.001
    alpha: float = 0.1
    cutoff_margin: Optional[float] = None
    edge_trim: Optional[int] = None
    support: Optional[tuple] = None
    sampled_kernel: bool = False
    compensate_attenuation: bool = False

    def __post_init__(self):
        for name in ("sigma", "gamma", "alpha"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.cutoff_margin is not None and not self.cutoff_margin > 0:
            raise ValueError("cutoff_margin must be positive")
        if self.edge_trim is not None and self.edge_trim < 0:
            raise ValueError("edge_trim must be nonnegative")

    @property
    def margin(self) -> float:
        return 2.0 * self.sigma if self.cutoff_margin is None else self.cutoff_margin

    def trim_cells(self, grid: Grid) -> int:
        if self.edge_trim is not None:
            return int(self.edge_trim)
        return int(ceil((self.margin + 3.0 * self.sigma) / grid.spacing - 1e-9))

    def heuristic_ok(self, k_incoming: float) -> bool:
        """Whether ``k_i^2 pi sigma^2 < 1``."""
        return k_incoming ** 2 * np.pi * self.sigma ** 2 < 1.0


def build_cutoff(grid: Grid, support=None, margin: float = 5.0) -> RealField:
    """Smooth cutoff equal to one on a box and zero beyond ``margin`` from it.

    The transition depends on the Euclidean distance to the box, so it is
    radial around the corners.
    """
    if not margin > 0:
        raise ValueError("margin must be positive")
    edge = grid.axis()[-1]
    if support is None:
        support = (margin, edge - margin, margin, edge - margin)
    x_lo, x_hi, y_lo, y_hi = map(float, support)
    if not (x_lo <= x_hi and y_lo <= y_hi):
        raise ValueError("support box is empty")
    if min(x_lo, y_lo) - margin < -1e-9 or max(x_hi, y_hi) + margin > edge + 1e-9:
        raise ValueError("support plus margin does not fit inside the grid")
    x1, x2 = grid.coordinates()
    dx = np.maximum.reduce([x_lo - x1, x1 - x_hi, np.zeros_like(x1)])
    dy = np.maximum.reduce([y_lo - x2, x2 - y_hi, np.zeros_like(x2)])
    return RealField(grid, smooth_step(1.0 - np.hypot(dx, dy) / margin))


def _check_sigma(grid: Grid, sigma: float):
    if 3.0 * sigma > grid.side_length_m / 2.0:
        log.warning("3*sigma = %.3g exceeds L/2 = %.3g; the Gaussian is not contained in the domain",
                    3.0 * sigma, grid.side_length_m / 2.0)


def _mode_norm2(grid: Grid):
    n1, n2 = frequency_indices(grid)
    return n1 ** 2 + n2 ** 2


def gaussian_multiplier(grid: Grid, sigma: float) -> np.ndarray:
    L = grid.side_length_m
    return np.exp(-2.0 * np.pi ** 2 * sigma ** 2 * _mode_norm2(grid) / L ** 2)


def laplacian_multiplier(grid: Grid, sigma: float) -> np.ndarray:
    """Multiplier of ``-Laplacian`` composed with the Gaussian filter."""
    L = grid.side_length_m
    return (2.0 * np.pi / L) ** 2 * _mode_norm2(grid) * gaussian_multiplier(grid, sigma)


def sampled_multipliers(grid: Grid, sigma: float):
    """Multipliers from DFTs of the sampled kernel and its negative Laplacian.

    The kernels are centred at ``(L/2, L/2)`` and shifted back to the origin
    so the filtered field is not translated.
    """
    h = grid.spacing
    x1, x2 = grid.coordinates()
    c = grid.n // 2 * h
    r2 = (x1 - c) ** 2 + (x2 - c) ** 2
    g = np.exp(-r2 / (2.0 * sigma ** 2)) / (2.0 * np.pi * sigma ** 2)
    neg_lap = (2.0 / sigma ** 2 - r2 / sigma ** 4) * g
    shift = (-(grid.n // 2), -(grid.n // 2))
    gm = np.fft.fft2(np.roll(g, shift, axis=(0, 1))) * h * h
    lm = np.fft.fft2(np.roll(neg_lap, shift, axis=(0, 1))) * h * h
    return gm, lm


def _weighted(m: ComplexField, cutoff: Optional[RealField]):
    if cutoff is None:
        return m.values
    if cutoff.grid != m.grid:
        raise ValueError("cutoff and field grids differ")
    return cutoff.values * m.values


def gaussian_filter(m: ComplexField, sigma: float, cutoff: Optional[RealField] = None) -> ComplexField:
    """Low-pass ``cutoff * m`` with a Gaussian of width ``sigma``."""
    _check_sigma(m.grid, sigma)
    F = np.fft.fft2(_weighted(m, cutoff))
    return m.with_values(np.fft.ifft2(F * gaussian_multiplier(m.grid, sigma)))


def filtered_laplacian(m: ComplexField, sigma: float, cutoff: Optional[RealField] = None) -> ComplexField:
    """``-Laplacian`` of the Gaussian-filtered ``cutoff * m``."""
    _check_sigma(m.grid, sigma)
    F = np.fft.fft2(_weighted(m, cutoff))
    return m.with_values(np.fft.ifft2(F * laplacian_multiplier(m.grid, sigma)))


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """Output of :func:`reconstruct`.

    ``interior`` marks cells kept after edge trimming, ``saturated`` the
    interior cells where ``k_eps`` fell below the truncation point.
    """

    k_eps: RealField
    depth: RealField
    mask: GammaMask
    config: InversionConfig
    interior: np.ndarray = field(repr=False)
    saturated: np.ndarray = field(repr=False)
    heuristic_ok: bool = True

    @property
    def d_max(self) -> float:
        return float(np.max(self.depth.values[self.interior])) if self.interior.any() else float("nan")


def interior_mask(grid: Grid, trim: int) -> np.ndarray:
    m = np.zeros(grid.shape, dtype=bool)
    if 2 * trim < grid.n:
        m[trim:grid.n - trim, trim:grid.n - trim] = True
    return m


def reconstruct(m: Measurement, w: WaveParams, cfg: InversionConfig) -> Reconstruction:
    """Estimate depth from one noisy complex measurement.

    Cells outside the trimmed interior or outside ``D_gamma`` get
    ``k_eps = k_i`` and depth ``H0``.
    """
    grid = m.grid
    k_i = w.k_incoming
    ok = cfg.heuristic_ok(k_i)
    if not ok:
        log.warning("k_i^2*pi*sigma^2 = %.3g >= 1 (sigma heuristic not met)",
                    k_i ** 2 * np.pi * cfg.sigma ** 2)
    _check_sigma(grid, cfg.sigma)

    phi = build_cutoff(grid, cfg.support, cfg.margin)
    F = np.fft.fft2(phi.values * m.field.values)
    if cfg.sampled_kernel:
        gm, lm = sampled_multipliers(grid, cfg.sigma)
    else:
        gm, lm = gaussian_multiplier(grid, cfg.sigma), laplacian_multiplier(grid, cfg.sigma)
    U = np.fft.ifft2(F * lm)
    Ms = np.fft.ifft2(F * gm)
    k_eps = np.sqrt(np.abs(U) / (np.abs(Ms) + cfg.gamma))
    if cfg.compensate_attenuation:
        k_eps = k_eps * np.exp(0.25 * cfg.sigma ** 2 * k_eps ** 2)

    mask = gamma_mask(m, cfg.gamma)
    interior = interior_mask(grid, cfg.trim_cells(grid))
    active = interior & mask.mask
    k_eps = np.where(active, k_eps, k_i)
    depth = truncated_depth(k_eps, w.mu, cfg.alpha)
    depth = np.where(active, depth, w.background_depth_m)
    saturated = interior & (k_eps < w.mu + cfg.alpha)
    return Reconstruction(RealField(grid, k_eps), RealField(grid, depth), mask, cfg,
                          interior, saturated, ok)
