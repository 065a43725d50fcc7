"""Lippmann-Schwinger solver for plane-wave scattering by variable depth.

The discrete system is ``(I + k_i^2 K diag(q)) eta = eta_i`` where
``K[m, n] = h^2 G(|X_m - X_n|)`` off the diagonal, ``G = (i/4) H0^(1)(k_i r)``,
and the diagonal carries a self-cell weight for the log singularity.

Two diagonal rules are available:

``"corrected"`` (default)
    Locally corrected trapezoidal weight
    ``h^2 [-(ln h + Z'(0)) / (2 pi) + R(0)]`` where ``Z'(0)`` is the
    derivative at zero of the square-lattice Epstein zeta function and
    ``R(0) = i/4 - (ln(k/2) + gamma) / (2 pi)`` is the regular part of ``G``
    at the origin.  Observed convergence is fourth order.
``"cell"``
    Exact integral of ``G`` over the ``h x h`` cell: the ``ln r`` part in
    closed form plus Gauss-Legendre quadrature of the smooth remainder.
    Observed convergence is second order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import lgamma, log, pi
from typing import Optional

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, gmres

from . import kernels
from .dispersion import (
    WaveParams,
    mild_slope_report,
    msc_coefficient,
    wavenumber_from_depth,
)
from .errors import CapacityError, DomainError, MildSlopeError, SolverError
from .grid import ComplexField, DepthMap, Grid, RealField, frame_mask

log_ = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
LATTICE_ZETA_PRIME = 0.5 * log(4.0 * pi) - 2.0 * lgamma(0.25)
DENSE_LIMIT = 64
SOLVE_TOL = 1e-10
MAX_ITERATIONS = 2000
RESTART = 100


def hankel_h1_0(x):
    """Hankel function of the first kind and order zero for ``x > 0``."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("hankel_h1_0 requires x > 0")
    out = kernels.hankel1_0(arr)
    return complex(out) if out.ndim == 0 else out


def green(r, k):
    """Outgoing fundamental solution ``(i/4) H0^(1)(k r)`` of the Helmholtz operator."""
    return 0.25j * hankel_h1_0(k * np.asarray(r, dtype=float))


def _regular_part_at_origin(k):
    return 0.25j - (np.log(0.5 * k) + EULER_GAMMA) / (2.0 * pi)


def _log_integral_square(a):
    # integral of ln|Y| over [-a, a]^2
    return 4.0 * a * a * (np.log(a) + 0.5 * np.log(2.0) - 1.5 + 0.25 * pi)


def self_cell_weight(h, k, mode="corrected"):
    """Diagonal quadrature weight for the log-singular kernel on a cell of side ``h``."""
    if mode == "corrected":
        return h * h * (-(np.log(h) + LATTICE_ZETA_PRIME) / (2.0 * pi) + _regular_part_at_origin(k))
    if mode == "cell":
        nodes, weights = np.polynomial.legendre.leggauss(16)
        y = 0.5 * h * nodes
        w = 0.5 * h * weights
        Y1, Y2 = np.meshgrid(y, y)
        r = np.hypot(Y1, Y2)
        remainder = green(r, k) + np.log(r) / (2.0 * pi)
        smooth = np.sum(np.outer(w, w) * remainder)
        return -_log_integral_square(0.5 * h) / (2.0 * pi) + smooth
    raise ValueError(f"unknown diagonal mode {mode!r}")


def kernel_table(grid: Grid, k: float, diagonal: str = "corrected") -> np.ndarray:
    """``table[a, b] = h^2 G(h sqrt(a^2 + b^2))`` with the self-cell weight at ``(0, 0)``."""
    n, h = grid.n, grid.spacing
    a = np.arange(n)
    r = h * np.hypot(a[:, None], a[None, :])
    r[0, 0] = 1.0
    table = h * h * green(r, k)
    table[0, 0] = self_cell_weight(h, k, diagonal)
    return table


def _circulant_symbol(table):
    n = table.shape[0]
    full = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    full[:n, :n] = table
    full[n + 1:, :n] = table[:0:-1, :]
    full[:n, n + 1:] = table[:, :0:-1]
    full[n + 1:, n + 1:] = table[:0:-1, :0:-1]
    return sfft.fft2(full)


# --- contrast ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Contrast:
    """Scattering potential ``q`` on a grid.

    For ``kind="full"`` the field ``sqrt_c`` holds ``c^(1/2)`` for the
    Liouville back-transform; it is ``None`` for the simplified model.
    """

    q: RealField
    kind: str
    k_incoming: float
    sqrt_c: Optional[RealField] = None

    def __post_init__(self):
        if self.kind not in ("simplified", "full"):
            raise ValueError(f"unknown contrast kind {self.kind!r}")
        if np.any(self.q.values[frame_mask(self.q.grid)] != 0.0):
            raise ValueError("contrast must vanish on the grid frame")
        if self.kind == "full" and self.sqrt_c is None:
            raise ValueError("full contrast needs sqrt_c")

    @property
    def grid(self) -> Grid:
        return self.q.grid

    @classmethod
    def from_values(cls, grid: Grid, q, k_incoming: float) -> "Contrast":
        return cls(RealField(grid, q), "simplified", float(k_incoming))


def _second_difference_laplacian(f, h):
    out = np.zeros_like(f)
    out[1:-1, 1:-1] = (
        f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2] - 4.0 * f[1:-1, 1:-1]
    ) / (h * h)
    return out


def build_contrast(depth: DepthMap, wave: WaveParams, kind: str = "simplified") -> Contrast:
    if abs(depth.background_depth_m - wave.background_depth_m) > 1e-12 * wave.background_depth_m:
        raise ValueError("depth map and wave disagree on the background depth")
    k_i = wave.k_incoming
    k = wavenumber_from_depth(wave.omega, wave.g, depth.values)
    frame = frame_mask(depth.grid)
    if kind == "simplified":
        q = 1.0 - k ** 2 / k_i ** 2
        q[frame] = 0.0
        return Contrast(RealField(depth.grid, q), kind, k_i)
    if kind == "full":
        c = msc_coefficient(depth.values, wave.omega, wave.g, depth.background_depth_m)
        sc = np.sqrt(c)
        correction = _second_difference_laplacian(sc, depth.grid.spacing) / sc
        q = 1.0 - (k ** 2 - correction) / k_i ** 2
        q[frame] = 0.0
        return Contrast(RealField(depth.grid, q), kind, k_i, RealField(depth.grid, sc))
    raise ValueError(f"unknown contrast kind {kind!r}")


# --- operator ---------------------------------------------------------------

class DiscreteOperator:
    """Discretized ``K diag(q)`` with FFT-based products and optional dense form."""

    def __init__(self, grid: Grid, k_incoming: float, q=None, diagonal="corrected",
                 dense_limit=DENSE_LIMIT, matrix_free=True):
        self.grid = grid
        self.k_incoming = float(k_incoming)
        self.q = np.ones(grid.shape) if q is None else np.asarray(q, dtype=float).reshape(grid.shape)
        self.diagonal = diagonal
        self.dense_limit = dense_limit
        self.matrix_free = matrix_free
        if not matrix_free and grid.n > dense_limit:
            raise CapacityError(
                f"dense operator for N={grid.n} exceeds the limit N<={dense_limit} "
                "and the matrix-free path is disabled"
            )
        self.table = kernel_table(grid, self.k_incoming, diagonal)
        self._symbol = None

    @property
    def size(self) -> int:
        return self.grid.n ** 2

    def apply_kernel(self, u):
        """``K u`` for a field or flat vector ``u``; returns an ``(N, N)`` array."""
        n = self.grid.n
        if self._symbol is None:
            self._symbol = _circulant_symbol(self.table)
        padded = np.zeros((2 * n, 2 * n), dtype=np.complex128)
        padded[:n, :n] = np.reshape(u, (n, n))
        return sfft.ifft2(sfft.fft2(padded) * self._symbol)[:n, :n]

    def matvec(self, v):
        return self.apply_kernel(self.q * np.reshape(v, self.grid.shape))

    def dense_kernel(self) -> np.ndarray:
        if self.grid.n > self.dense_limit:
            raise CapacityError(f"dense operator for N={self.grid.n} exceeds N<={self.dense_limit}")
        return kernels.dense_from_table(self.table)

    def dense(self) -> np.ndarray:
        return self.dense_kernel() * self.q.ravel()[None, :]

    def system_matvec(self, v):
        """``(I + k_i^2 K q) v`` as a flat vector."""
        v = np.asarray(v, dtype=np.complex128).ravel()
        return v + self.k_incoming ** 2 * self.matvec(v).ravel()


def assemble_operator(contrast: Contrast, grid: Optional[Grid] = None, diagonal="corrected",
                      dense_limit=DENSE_LIMIT, matrix_free=True) -> DiscreteOperator:
    grid = contrast.grid if grid is None else grid
    if grid != contrast.grid:
        raise ValueError("grid does not match the contrast grid")
    return DiscreteOperator(grid, contrast.k_incoming, contrast.q.values, diagonal,
                            dense_limit, matrix_free)


# --- solve ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScatterSolution:
    total: ComplexField
    scattered: ComplexField
    incoming: ComplexField
    residual: float
    method: str
    iterations: int


def incoming_field(grid: Grid, wave: WaveParams) -> ComplexField:
    x1, x2 = grid.coordinates()
    return ComplexField(grid, wave.incoming(x1, x2))


def solve_scattering(contrast: Contrast, wave: WaveParams, grid: Optional[Grid] = None,
                     method="auto", tol=SOLVE_TOL, maxiter=MAX_ITERATIONS, restart=RESTART,
                     dense_limit=DENSE_LIMIT, diagonal="corrected") -> ScatterSolution:
    """Solve the discrete Lippmann-Schwinger system.

    ``method`` is ``"dense"`` (LU), ``"iterative"`` (restarted GMRES with
    FFT products) or ``"auto"`` (dense up to ``dense_limit`` nodes per side).
    """
    grid = contrast.grid if grid is None else grid
    if abs(wave.k_incoming - contrast.k_incoming) > 1e-12 * wave.k_incoming:
        raise ValueError("wave and contrast disagree on k_incoming")
    inc = incoming_field(grid, wave)
    rhs = inc.values.ravel()
    op = assemble_operator(contrast, grid, diagonal=diagonal, dense_limit=dense_limit)
    if method == "auto":
        method = "dense" if grid.n <= dense_limit else "iterative"

    if not np.any(contrast.q.values):
        eta, iterations = rhs.copy(), 0
    elif method == "dense":
        A = op.dense()
        A *= op.k_incoming ** 2
        A[np.diag_indices_from(A)] += 1.0
        eta = sla.lu_solve(sla.lu_factor(A, overwrite_a=True, check_finite=False), rhs)
        iterations = 1
    elif method == "iterative":
        eta, iterations = _gmres(op, rhs, tol, maxiter, restart)
    else:
        raise ValueError(f"unknown solve method {method!r}")

    residual = float(np.linalg.norm(op.system_matvec(eta) - rhs) / np.linalg.norm(rhs))
    if residual > tol:
        raise SolverError(f"{method} solve residual {residual:.3e} exceeds {tol:.1e}", [residual])

    eta = eta.reshape(grid.shape)
    if contrast.kind == "full":
        eta = eta / contrast.sqrt_c.values
    total = ComplexField(grid, eta)
    scattered = ComplexField(grid, eta - inc.values)
    return ScatterSolution(total, scattered, inc, residual, method, iterations)


def _gmres(op: DiscreteOperator, rhs, tol, maxiter, restart):
    n = op.size
    A = LinearOperator((n, n), matvec=op.system_matvec, dtype=np.complex128)
    history = []
    outer = max(1, -(-maxiter // restart))
    # a little headroom so the true residual also meets tol
    x, info = gmres(A, rhs, rtol=0.25 * tol, atol=0.0, restart=restart, maxiter=outer,
                    callback=history.append, callback_type="pr_norm")
    if info != 0:
        raise SolverError(
            f"GMRES did not converge within {maxiter} iterations "
            f"(last residual {history[-1] if history else float('nan'):.3e})",
            history,
        )
    log_.debug("GMRES converged in %d iterations", len(history))
    return x, len(history)


# --- model simplification ---------------------------------------------------

@dataclass(frozen=True)
class SimplificationGap:
    gap: float
    bound: float
    ratio: float
    delta: float
    epsilon: float
    max_scattered: float


def simplification_gap(depth: DepthMap, wave: WaveParams, **solve_kw) -> SimplificationGap:
    """Compare full mild-slope and simplified (``c = 1``) solutions.

    ``bound`` is the right-hand side of the a priori estimate with its
    unknown constant set to one; ``ratio = gap / bound``.
    """
    report = mild_slope_report(depth, wave.omega, wave.g)
    if report.delta >= 1.0:
        raise MildSlopeError(f"mild-slope parameter {report.delta:.3g} >= 1")
    full = solve_scattering(build_contrast(depth, wave, "full"), wave, **solve_kw)
    simple = solve_scattering(build_contrast(depth, wave, "simplified"), wave, **solve_kw)
    gap = float(np.max(np.abs(full.total.values - simple.total.values)))

    k = wavenumber_from_depth(wave.omega, wave.g, depth.values)
    kmax = float(np.max(k))
    k_i = wave.k_incoming
    lap_ratio = float(np.max(np.abs(_second_difference_laplacian(depth.values, depth.grid.spacing)
                                    / depth.values)))
    eps = wave.amplitude_m * k_i
    delta = report.delta
    bound = eps * delta * kmax * (k_i + (1 + 4 * delta) * kmax ** 2 / k_i + lap_ratio / k_i)
    ratio = gap / bound if bound > 0 else 0.0
    return SimplificationGap(gap, bound, ratio, delta, eps,
                             float(np.max(np.abs(simple.scattered.values))))
