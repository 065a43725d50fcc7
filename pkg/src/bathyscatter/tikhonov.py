"""Tikhonov-regularized inversion for ``u = M q`` and singular-value diagnostics.

The measured field satisfies ``k_i^2 K u = eta_i - M`` with ``u = q M`` and
``K`` the volume potential of the outgoing Green's function, so the data
vector is ``b = eta_i - M_eps``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.linalg as sla

from . import kernels
from .dispersion import WaveParams, truncated_depth
from .errors import CapacityError, SolverError
from .forward import incoming_field, kernel_table
from .grid import ComplexField, Grid, RealField
from .measurement import Measurement, gamma_mask

DENSE_CAP = 48


class KOperator:
    """Dense ``N^2 x N^2`` matrix of ``h^2 G(|X_m - X_n|)`` with the self-cell weight."""

    def __init__(self, grid: Grid, k_incoming: float, matrix: np.ndarray, diagonal="corrected"):
        self.grid = grid
        self.k_incoming = float(k_incoming)
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.diagonal = diagonal
        self._normal = None
        self._scaled = None

    @property
    def scaled(self) -> np.ndarray:
        """``k_i^2 K``."""
        if self._scaled is None:
            self._scaled = self.k_incoming ** 2 * self.matrix
        return self._scaled

    @property
    def normal(self) -> np.ndarray:
        """``k_i^4 K^* K``."""
        if self._normal is None:
            A = self.scaled
            self._normal = A.conj().T @ A
        return self._normal

    def apply(self, u) -> np.ndarray:
        return self.scaled @ np.ravel(u)


def build_k_operator(grid: Grid, k_incoming: float, diagonal="corrected", cap=DENSE_CAP) -> KOperator:
    if grid.n > cap:
        raise CapacityError(f"dense K for N={grid.n} exceeds the cap N<={cap}")
    return KOperator(grid, k_incoming, kernels.dense_from_table(kernel_table(grid, k_incoming, diagonal)),
                     diagonal)


def singular_spectrum(K: KOperator) -> np.ndarray:
    """Singular values of ``K`` in decreasing order."""
    try:
        return sla.svdvals(K.matrix, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"SVD failed: {exc}", []) from None


def spectrum_slope(s, lo: int, hi: int) -> float:
    """Least-squares slope of ``log s_n`` against ``log n`` for ``lo <= n <= hi`` (1-based)."""
    s = np.asarray(s)
    n = np.arange(1, len(s) + 1)
    sel = (n >= lo) & (n <= min(hi, len(s)))
    return float(np.polyfit(np.log(n[sel]), np.log(s[sel]), 1)[0])


def middle_decade(grid: Grid) -> tuple[int, int]:
    """Fit window ``[N, 10 N]`` used for the spectrum slope."""
    return grid.n, 10 * grid.n


def export_spectrum_csv(s, path) -> None:
    lines = ["n,s_n"] + ["%d,%.17g" % (i + 1, v) for i, v in enumerate(s)]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True, eq=False)
class TikhonovResult:
    u: ComplexField
    lam: float
    discrepancy: float
    q_eps: Optional[np.ndarray] = None
    k_eps: Optional[RealField] = None


def _as_vector(b):
    return np.ravel(b.values if isinstance(b, ComplexField) else b).astype(np.complex128)


def _solve_normal(K: KOperator, rhs, lam):
    M = K.normal.copy()
    M[np.diag_indices_from(M)] += lam
    try:
        c = sla.cho_factor(M, lower=False, overwrite_a=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise SolverError(f"normal matrix not positive definite at lambda={lam:.3e}", []) from None
    return sla.cho_solve(c, rhs, check_finite=False)


def tikhonov_solve(K: KOperator, b_eps, lam: float) -> TikhonovResult:
    """Minimize ``||b - k_i^2 K u||^2 + lam ||u||^2`` via Cholesky of the normal equations."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    b = _as_vector(b_eps)
    u = _solve_normal(K, K.scaled.conj().T @ b, lam)
    disc = float(np.linalg.norm(b - K.scaled @ u))
    return TikhonovResult(ComplexField(K.grid, u.reshape(K.grid.shape)), float(lam), disc)


def functional(K: KOperator, b_eps, u, lam) -> float:
    b = _as_vector(b_eps)
    u = np.ravel(u)
    return float(np.linalg.norm(b - K.scaled @ u) ** 2 + lam * np.linalg.norm(u) ** 2)


def default_lambda_grid(K: KOperator, count: int = 61) -> np.ndarray:
    """Log grid spanning ``[1e-12, 1] * ||k_i^2 K||_2^2``."""
    top = np.linalg.norm(K.scaled, 2) ** 2
    return top * np.logspace(-12, 0, count)


def select_lambda(K: KOperator, b_eps, delta_estimate: float, grid=None, tau: float = 1.1) -> float:
    """Discrepancy principle: the largest grid ``lambda`` with discrepancy ``<= tau * delta``.

    ``delta_estimate`` is the absolute 2-norm of the data noise.  If no grid
    value qualifies the fallback is ``delta^2`` clipped to the grid range.
    """
    if not delta_estimate > 0:
        raise ValueError("delta_estimate must be positive")
    lams = np.sort(default_lambda_grid(K) if grid is None else np.asarray(grid, dtype=float))
    b = _as_vector(b_eps)
    rhs = K.scaled.conj().T @ b
    # discrepancy grows with lambda, so bisect on the sorted grid
    lo, hi = -1, len(lams)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        u = _solve_normal(K, rhs, lams[mid])
        if np.linalg.norm(b - K.scaled @ u) <= tau * delta_estimate:
            lo = mid
        else:
            hi = mid
    if lo >= 0:
        return float(lams[lo])
    return float(np.clip(delta_estimate ** 2, lams[0], lams[-1]))


def contrast_from_u(u: ComplexField, m: Measurement, gamma: float, w: WaveParams):
    """``q = u / M`` on ``D_gamma`` (zero elsewhere) and ``k = k_i sqrt(|1 - q|)``.

    ``q`` stays complex; only its distance from one enters ``k``.
    """
    mask = gamma_mask(m, gamma).mask
    M = m.field.values
    q = np.zeros(M.shape, dtype=np.complex128)
    q[mask] = u.values[mask] / M[mask]
    k = w.k_incoming * np.sqrt(np.abs(1.0 - q))
    return q, RealField(u.grid, k)


@dataclass(frozen=True, eq=False)
class TikhonovReconstruction:
    result: TikhonovResult
    depth: RealField
    mask: np.ndarray


def tikhonov_reconstruct(m: Measurement, w: WaveParams, gamma: float = 0.001, alpha: float = 0.1,
                         lam: Optional[float] = None, K: Optional[KOperator] = None,
                         diagonal="corrected") -> TikhonovReconstruction:
    """Depth from a measurement via the regularized ``u``-equation.

    Without an explicit ``lam`` the discrepancy principle is applied with the
    noise estimate ``noise_level * ||M||``.
    """
    grid = m.grid
    K = build_k_operator(grid, w.k_incoming, diagonal) if K is None else K
    b = incoming_field(grid, w).values - m.field.values
    if lam is None:
        delta = m.noise_level * np.linalg.norm(m.field.values)
        lam = select_lambda(K, b, delta) if delta > 0 else float(default_lambda_grid(K)[0])
    res = tikhonov_solve(K, b, lam)
    q, k = contrast_from_u(res.u, m, gamma, w)
    res = TikhonovResult(res.u, res.lam, res.discrepancy, q, k)
    mask = gamma_mask(m, gamma).mask
    depth = np.where(mask, truncated_depth(k.values, w.mu, alpha), w.background_depth_m)
    return TikhonovReconstruction(res, RealField(grid, depth), mask)


def discrete_h2_norm(f: np.ndarray, h: float) -> float:
    """Centered-difference surrogate for the H^2 norm (one-sided at the edges)."""
    f = np.asarray(f)
    d2, d1 = np.gradient(f, h)
    d22, d21 = np.gradient(d2, h)
    d12, d11 = np.gradient(d1, h)
    total = sum(np.sum(np.abs(x) ** 2) for x in (f, d1, d2, d11, d12, d21, d22))
    return float(np.sqrt(h * h * total))
