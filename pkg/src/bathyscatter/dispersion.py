"""Depth/wavenumber maps for linear water waves and mild-slope coefficients.

All functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .grid import DepthMap

G_DEFAULT = 9.81
STEEPNESS_WARNING = 0.1
_ATANH_GUARD = 1.0 - 1e-15


@dataclass(frozen=True)
class WaveParams:
    """Incoming plane wave ``a * exp(i k_i direction . X)`` over depth ``H0``."""

    omega: float
    background_depth_m: float
    amplitude_m: float = 0.3
    direction: tuple = (1.0, 0.0)
    g: float = G_DEFAULT
    k_incoming: float = field(init=False)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not self.g > 0:
            raise ValueError("g must be positive")
        if not self.amplitude_m > 0:
            raise ValueError("amplitude must be positive")
        if not self.background_depth_m > 0:
            raise ValueError("background depth must be positive")
        d = np.asarray(self.direction, dtype=float)
        norm = np.hypot(*d)
        if d.shape != (2,) or not norm > 0:
            raise ValueError("direction must be a nonzero 2-vector")
        object.__setattr__(self, "direction", (float(d[0] / norm), float(d[1] / norm)))
        k = float(wavenumber_from_depth(self.omega, self.g, self.background_depth_m))
        object.__setattr__(self, "k_incoming", k)
        if self.steepness > STEEPNESS_WARNING:
            warnings.warn(
                f"wave steepness a*k_i = {self.steepness:.3g} exceeds {STEEPNESS_WARNING}; "
                "linear theory is questionable",
                stacklevel=3,
            )

    @property
    def mu(self) -> float:
        return self.omega ** 2 / self.g

    @property
    def steepness(self) -> float:
        return self.amplitude_m * self.k_incoming

    def incoming(self, x1, x2):
        k1, k2 = self.direction
        return self.amplitude_m * np.exp(1j * self.k_incoming * (k1 * x1 + k2 * x2))


def _positive(name, value):
    arr = np.asarray(value, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be positive")
    return arr


def wavenumber_from_depth(omega, g, d):
    """Positive root ``k`` of ``omega^2 / g = k tanh(k d)``.

    Newton's method with analytic derivative, safeguarded by the bracket
    ``[mu, mu / tanh(mu d) + mu]`` (bisection whenever a step leaves it).
    """
    omega = _positive("omega", omega)
    d = _positive("depth", d)
    g = float(g)
    mu = omega ** 2 / g
    mu, d = np.broadcast_arrays(mu, d)
    lo = mu * (1.0 + 1e-14)
    hi = mu / np.tanh(mu * d) + mu
    k = np.minimum(mu / np.tanh(mu * d), hi)
    for _ in range(100):
        kd = k * d
        t = np.tanh(kd)
        f = k * t - mu
        lo = np.where(f < 0, k, lo)
        hi = np.where(f > 0, k, hi)
        fp = t + kd * (1.0 - t * t)
        step = f / fp
        k_new = k - step
        outside = ~((k_new > lo) & (k_new < hi))
        k_new = np.where(outside, 0.5 * (lo + hi), k_new)
        converged = np.abs(k_new - k) <= 1e-14 * k
        k = k_new
        if np.all(converged):
            break
    return k[()] if k.ndim == 0 else k


def _atanh(x):
    x = np.asarray(x, dtype=float)
    x = np.minimum(x, _ATANH_GUARD)
    return 0.5 * (np.log1p(x) - np.log1p(-x))


def depth_from_wavenumber(k, mu):
    """Inverse dispersion map ``d(k) = atanh(mu / k) / k`` for ``k > mu``."""
    k = np.asarray(k, dtype=float)
    if np.any(~(k > mu)):
        raise DomainError("depth is undefined for k <= mu (infinitely deep water)")
    out = _atanh(mu / k) / k
    return out[()] if out.ndim == 0 else out


def truncated_depth(k, mu, alpha):
    """Depth map clamped below ``k = mu + alpha``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    kk = np.maximum(np.asarray(k, dtype=float), mu + alpha)
    out = _atanh(mu / kk) / kk
    return out[()] if out.ndim == 0 else out


def max_truncated_depth(mu, alpha) -> float:
    return float(truncated_depth(mu + alpha, mu, alpha))


def lipschitz_bounds(alpha, mu):
    """Lower and upper bounds on the Lipschitz constant of ``d`` on ``[mu + alpha, inf)``."""
    if not (alpha > 0 and mu > 0):
        raise ValueError("alpha and mu must be positive")
    lower = mu / (2.0 * (mu + alpha) ** 2 * alpha)
    upper = 3.0 / ((mu + alpha) * alpha)
    return lower, upper


def depth_derivative(k, mu):
    """``d'(k)``; negative on ``k > mu``."""
    k = np.asarray(k, dtype=float)
    return (mu * k / (mu ** 2 - k ** 2) - _atanh(mu / k)) / k ** 2


def _x_over_sinh(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-8
    xs = np.where(small, 1.0, x)
    e = np.exp(-np.abs(xs))
    val = 2.0 * np.abs(xs) * e / (1.0 - e * e)
    return np.where(small, 1.0 - x * x / 6.0, val)


def _c_unscaled(d, omega, g):
    k = wavenumber_from_depth(omega, g, d)
    return omega ** 2 / (2.0 * k ** 2) * (1.0 + _x_over_sinh(2.0 * k * d))


def msc_coefficient(d, omega, g, H0):
    """Mild-slope coefficient ``c(d)`` normalized so that ``c(H0) = 1``."""
    _positive("depth", d)
    out = _c_unscaled(d, omega, g) / _c_unscaled(H0, omega, g)
    return out[()] if np.ndim(out) == 0 else out


def c_normalization(omega, g, H0) -> float:
    """The constant ``c0`` making ``c`` equal one at the background depth."""
    return float(_c_unscaled(H0, omega, g))


def depth_from_k_and_c(k, c, omega, mu, c0=1.0):
    """Depth recovered from both ``k`` and the normalized coefficient ``c``."""
    k = np.asarray(k, dtype=float)
    if np.any(~(k > mu)):
        raise DomainError("depth is undefined for k <= mu")
    return (c0 * c * k / omega ** 2 - 1.0 / (2.0 * k)) * (2.0 * mu * k / (k ** 2 - mu ** 2))


def approx_wavenumber(d, mu):
    """Explicit wavenumber from ``tanh(x) ~ x / sqrt(1 + x^2)``."""
    d = np.asarray(d, dtype=float)
    return np.sqrt(mu ** 2 + mu * np.sqrt(mu ** 2 * d ** 2 + 4.0) / d) / np.sqrt(2.0)


def dmax_estimate(alpha, mu):
    """Approximate deepest depth that truncation at ``mu + alpha`` still resolves."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    poly = alpha ** 3 + 4 * alpha ** 2 * mu + 5 * alpha * mu ** 2 + 2 * mu ** 3
    return mu / (np.sqrt(alpha) * np.sqrt(poly))


def alpha_for_dmax(d_max, mu):
    if not d_max > 0:
        raise ValueError("d_max must be positive")
    return approx_wavenumber(d_max, mu) - mu


# --- auxiliary functions for the gradient estimates -------------------------

# Taylor coefficients in t^2 (orders 0, 2, 4, 6).
_P_SERIES = (0.5, -1.0 / 6.0, 1.0 / 45.0, 1.0 / 1890.0)
_S_SERIES = (0.0, -2.0 / 3.0, 2.0 / 5.0, -148.0 / 945.0)
_R_SERIES = (0.0, -2.0 / 3.0, 74.0 / 45.0, -1244.0 / 945.0)
_SERIES_CUTOFF = 0.02


def _series(coefs, t):
    t2 = t * t
    return coefs[0] + t2 * (coefs[1] + t2 * (coefs[2] + t2 * coefs[3]))


def aux_functions(t):
    """Return ``(p, s, r)`` at ``t >= 0``.

    ``p(t) = t sech^2 t / (tanh t + t sech^2 t)`` and, with
    ``g(x) = (1 + 2x / sinh 2x) / 2``, ``s = t g'/g`` and ``r = t^2 g''/g``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("aux_functions requires t >= 0")
    small = t < _SERIES_CUTOFF
    ts = np.where(small, 1.0, t)

    e2 = np.exp(-2.0 * ts)
    tanh = (1.0 - e2) / (1.0 + e2)
    sech2 = 4.0 * e2 / (1.0 + e2) ** 2
    p = ts * sech2 / (tanh + ts * sech2)

    y = 2.0 * ts
    ey = np.exp(-2.0 * y)
    csch = 2.0 * np.exp(-y) / (1.0 - ey)
    coth = (1.0 + ey) / (1.0 - ey)
    v = y * csch
    dv = csch * (1.0 - y * coth)
    d2v = csch * (2.0 * y * coth * coth - 2.0 * coth - y)
    g = 0.5 * (1.0 + v)
    g1 = dv  # d/dx of v(2x) / 2
    g2 = 2.0 * d2v
    s = ts * g1 / g
    r = ts * ts * g2 / g

    p = np.where(small, _series(_P_SERIES, t), p)
    s = np.where(small, _series(_S_SERIES, t), s)
    r = np.where(small, _series(_R_SERIES, t), r)
    if p.ndim == 0:
        return float(p), float(s), float(r)
    return p, s, r


# --- mild-slope diagnostics ------------------------------------------------

@dataclass(frozen=True)
class MildSlopeReport:
    delta: float
    q_bound: float
    grad_c_ratio_ok: bool
    max_grad_c_ratio: float


def _gradient(values, h):
    g2, g1 = np.gradient(values, h)
    return g1, g2


def _laplacian(values, h):
    out = np.zeros_like(values)
    out[1:-1, 1:-1] = (
        values[2:, 1:-1] + values[:-2, 1:-1] + values[1:-1, 2:] + values[1:-1, :-2]
        - 4.0 * values[1:-1, 1:-1]
    ) / h ** 2
    return out


def mild_slope_report(depth: DepthMap, omega: float, g: float = G_DEFAULT) -> MildSlopeReport:
    """Mild-slope parameter, the contrast bound, and the ``|grad c|/c`` check.

    ``max_grad_c_ratio`` is the largest pointwise value of
    ``(|grad c| / c) / (|grad d| / d)``; the check passes when it is at most 5/4.
    """
    h = depth.grid.spacing
    d = depth.values
    k = wavenumber_from_depth(omega, g, d)
    k_i = float(wavenumber_from_depth(omega, g, depth.background_depth_m))
    d1, d2 = _gradient(d, h)
    grad_d = np.hypot(d1, d2)
    delta = float(np.max(grad_d / (d * k)))
    lap_d = _laplacian(d, h)
    q_bound = float(k_i ** 2 + (1.0 + 4.0 * delta) * np.max(k) ** 2 + np.max(np.abs(lap_d / d)))

    c = msc_coefficient(d, omega, g, depth.background_depth_m)
    c1, c2 = _gradient(c, h)
    grad_c = np.hypot(c1, c2)
    active = grad_d > 1e-12 * np.max(d) / h
    ratio = np.zeros_like(d)
    ratio[active] = (grad_c[active] / c[active]) / (grad_d[active] / d[active])
    max_ratio = float(ratio.max()) if active.any() else 0.0
    return MildSlopeReport(delta, q_bound, bool(max_ratio <= 1.25), max_ratio)
